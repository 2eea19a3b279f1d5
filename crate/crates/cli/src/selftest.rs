//! Seeded property suite behind `commlen selftest`.

use std::sync::Arc;

use serde_json::{json, Value};

use commlen::budget::kappa_p;
use commlen::certify::{
    factor_commutators_e, factor_commutators_gl, lower_extract, make_instance, random_cert,
};
use commlen::error::{Error, Result};
use commlen::matrices::verify_relation;
use commlen::normalform::{commutator_normal_form, decompose_huvu};
use commlen::random::{self, SeededRng};
use commlen::wordcalc::{lemma7_cert, lemma8_cert, product, Group};
use commlen::{Algebra, BasedInstance, MatD, Quat};

const SIZES: [usize; 3] = [2, 3, 4];
const RELATIONS: [&str; 4] = [
    "relation_additive",
    "relation_commutator",
    "relation_gauss",
    "relation_weyl",
];

fn ensure(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Verification(what.into()))
    }
}

fn relations(
    rng: &mut SeededRng,
    alg: &Arc<Algebra>,
    n: usize,
    kind: usize,
    cases: usize,
) -> Result<()> {
    for _ in 0..cases {
        let rel = random::relation(rng, alg, n, kind);
        ensure(verify_relation(&rel)?, &format!("{rel:?}"))?;
    }
    Ok(())
}

fn decompose(rng: &mut SeededRng, alg: &Arc<Algebra>, n: usize, cases: usize) -> Result<()> {
    for _ in 0..cases {
        let g = random::invertible(rng, alg, n);
        let (head, form) = decompose_huvu(&g)?;
        form.check_shape()?;
        ensure(
            MatD::diag(alg, &head).try_mul(&form.eval()?)? == g,
            "decomposition reassembles",
        )?;
    }
    Ok(())
}

fn small_invertible(rng: &mut SeededRng, alg: &Arc<Algebra>, n: usize) -> MatD {
    let d: Vec<Quat> = (0..n)
        .map(|_| random::small_noncentral_unit(rng, alg))
        .collect();
    random::elementary(rng, alg, n, 2)
        .try_mul(&MatD::diag(alg, &d))
        .expect("same size")
}

fn normal_form(rng: &mut SeededRng, alg: &Arc<Algebra>, n: usize, cases: usize) -> Result<()> {
    for case in 0..cases {
        let p = 1 + case % 2;
        let pairs: Vec<(MatD, MatD)> = (0..p)
            .map(|_| (small_invertible(rng, alg, n), small_invertible(rng, alg, n)))
            .collect();
        let form = commutator_normal_form(&pairs)?;
        let comms: Vec<MatD> = pairs.iter().map(|(x, y)| Group::commutator(x, y)).collect();
        ensure(
            form.eval()? == product(&MatD::identity(alg, n), &comms),
            "normal form evaluates to the product",
        )?;
        ensure(
            form.h.kappa().le(&kappa_p(p as u64, n)),
            "normal form within budget",
        )?;
    }
    Ok(())
}

fn words(rng: &mut SeededRng, alg: &Arc<Algebra>, cases: usize) -> Result<()> {
    let one = Quat::one(alg);
    let mut gen = |r: &mut SeededRng| random::small_noncentral_unit(r, alg);
    for case in 0..cases {
        let k = 1 + case % 6;
        let mut a: Vec<Quat> = (0..k - 1).map(|_| gen(rng)).collect();
        a.push(product(&one, &a).inverse());
        let cert = lemma8_cert(&a, &one)?;
        ensure(cert.len() <= k.saturating_sub(2), "lemma8_cert length")?;
        let (p, q, m) = (1 + case % 3, 1 + case % 4, case % 3);
        let (w, cert_a) = random::word_case(rng, &one, p, q, m, &mut gen);
        let cert = lemma7_cert(&w, &cert_a, &one)?;
        ensure(cert.len() < cert_a.len() + q, "lemma7_cert length")?;
    }
    Ok(())
}

fn dieudonne(rng: &mut SeededRng, alg: &Arc<Algebra>, n: usize, cases: usize) -> Result<()> {
    for _ in 0..cases {
        let (g, h) = (small_invertible(rng, alg, n), small_invertible(rng, alg, n));
        let lhs = g.try_mul(&h)?.dieudonne_det()?;
        let (dg, dh) = (g.dieudonne_det()?, h.dieudonne_det()?);
        ensure(
            lhs.invariant() == &(dg.invariant() * dh.invariant()),
            "det is multiplicative",
        )?;
        ensure(
            random::elementary(rng, alg, n, 3)
                .dieudonne_det()?
                .is_trivial(),
            "elementary det is trivial",
        )?;
    }
    Ok(())
}

fn factor(alg: &Arc<Algebra>, seed: u64, n: usize) -> Result<()> {
    let (_, inst) = make_instance(alg, seed, n, n)?;
    ensure(
        factor_commutators_gl(&inst)?.len() == 1,
        "c = n gives one pair",
    )?;
    if n >= 3 {
        let (_, inst) = make_instance(alg, seed + 1, n, n - 2)?;
        let cert = factor_commutators_e(&inst)?;
        ensure(cert.len() == 1, "c = n - 2 gives one elementary pair")?;
        for (p, q) in &cert.pairs {
            ensure(
                p.is_elementary()? && q.is_elementary()?,
                "witnesses are elementary",
            )?;
        }
    }
    Ok(())
}

fn round_trip(alg: &Arc<Algebra>, seed: u64, n: usize) -> Result<()> {
    let inst = BasedInstance::diagonal(n, random_cert(&mut random::seeded(seed), alg, 2))?;
    let cert = factor_commutators_gl(&inst)?;
    let report = lower_extract(&cert.pairs, &inst.delta)?;
    ensure(
        report.cert.len() as u64 <= report.bound,
        "lower certificate within budget",
    )?;
    ensure(report.cert.target == inst.delta, "lower certificate target")
}

/// Runs every check and returns one JSON line per check plus a summary, and whether all passed.
pub fn run(alg: &Arc<Algebra>, seed: u64, cases: usize) -> (Vec<Value>, bool) {
    let mut lines = Vec::new();
    let mut failed = 0;
    let mut record = |name: &str, n: Option<usize>, count: usize, res: Result<()>| {
        let mut line = json!({ "check": name, "n": n, "cases": count, "pass": res.is_ok() });
        if let Err(e) = res {
            line["error"] = json!(e.to_string());
            failed += 1;
        }
        lines.push(line);
    };
    let small = (cases / 10).max(1);
    for n in SIZES {
        let sub = |k: u64| {
            seed.wrapping_mul(1_000_003)
                .wrapping_add(100 * n as u64 + k)
        };
        for (kind, name) in RELATIONS.iter().enumerate() {
            record(
                name,
                Some(n),
                cases,
                relations(&mut random::seeded(sub(kind as u64)), alg, n, kind, cases),
            );
        }
        record(
            "decompose",
            Some(n),
            small,
            decompose(&mut random::seeded(sub(10)), alg, n, small),
        );
        record(
            "normal_form",
            Some(n),
            small,
            normal_form(&mut random::seeded(sub(11)), alg, n, small),
        );
        record(
            "dieudonne",
            Some(n),
            small,
            dieudonne(&mut random::seeded(sub(12)), alg, n, small),
        );
        record("factor", Some(n), 1, factor(alg, sub(13), n));
        record("round_trip", Some(n), 1, round_trip(alg, sub(14), n));
    }
    record(
        "words",
        None,
        cases,
        words(&mut random::seeded(seed.wrapping_add(7)), alg, cases),
    );
    let ok = failed == 0;
    lines.push(json!({ "kind": "selftest", "seed": seed, "checks": lines.len(), "failed": failed, "pass": ok }));
    (lines, ok)
}
