//! End-to-end pipelines: extracting `D*` certificates from matrix commutator products, and
//! factoring elements of `GL(n, D)` into few commutators given certificates in `D*`.

use num_bigint::BigInt;

use crate::budget::{kappa_p, s_of, HFactors};
use crate::error::{Error, Result};
use crate::matrices::Matrix;
use crate::normalform::{commutator_normal_form, extract_h};
use crate::random;
use crate::scalar::Scalar;
use crate::skewfield::{solve_twisted, AlgebraParams, Quaternion};
use crate::wordcalc::{
    lemma7_unchecked, lemma8_unchecked, CommutatorCert, Group, Letter, Tag, Word,
};
use crate::Rat;

type QCert<F> = CommutatorCert<Quaternion<F>>;
type MCert<F> = CommutatorCert<Matrix<F>>;

/// `d(8n^2 - 13n + 8) - 2n^2 + 3n - 1`.
pub fn theorem1_bound(n: u64, d: u64) -> u64 {
    assert!(n >= 2 && d >= 1);
    d * (8 * n * n - 13 * n + 8) + 3 * n - 2 * n * n - 1
}

/// `(c + 2n^2 - 3n + 1) / (8n^2 - 13n + 8)`.
pub fn corollary1_bound(n: u64, c: u64) -> Result<Rat> {
    if c == 0 {
        return Err(Error::Precondition("corollary1_bound needs c >= 1".into()));
    }
    if n < 2 {
        return Err(Error::Precondition("corollary1_bound needs n >= 2".into()));
    }
    let num = BigInt::from(c + 2 * n * n + 1) - BigInt::from(3 * n);
    let den = BigInt::from(8 * n * n + 8) - BigInt::from(13 * n);
    Ok(Rat::new(num, den))
}

/// `(ceil(c/n), ceil(c/(n-2)))`, the second only for `n >= 3`.
pub fn upper_bounds(n: u64, c: u64) -> Result<(u64, Option<u64>)> {
    if c == 0 || n < 2 {
        return Err(Error::Precondition(
            "upper_bounds needs c >= 1 and n >= 2".into(),
        ));
    }
    let e = if n >= 3 {
        Some(c.div_ceil(n - 2))
    } else {
        None
    };
    Ok((c.div_ceil(n), e))
}

/// `6n^2 - 10n + 7`.
pub fn corollary2_constant(n: u64) -> u64 {
    6 * n * n + 7 - 10 * n
}

/// Per-position certificate budgets, zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition(pub Vec<usize>);

impl Partition {
    /// Parts differ by at most one, heavier parts last.
    pub fn balanced(c: usize, n: usize) -> Self {
        Self::balanced_on(c, n, 0)
    }

    /// Balanced over positions `first..n`, zero elsewhere.
    pub fn balanced_on(c: usize, n: usize, first: usize) -> Self {
        assert!(first < n);
        let k = n - first;
        let (q, r) = (c / k, c % k);
        let mut d = vec![0; n];
        for (i, slot) in d.iter_mut().enumerate().skip(first) {
            *slot = q + usize::from(i >= n - r);
        }
        Partition(d)
    }

    /// Everything at the last position.
    pub fn concentrated(c: usize, n: usize) -> Self {
        let mut d = vec![0; n];
        d[n - 1] = c;
        Partition(d)
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// `gamma^-1 v diag(1, ..., 1, delta) u gamma` together with a certificate for `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasedInstance<F: Scalar> {
    pub n: usize,
    pub v: Matrix<F>,
    pub u: Matrix<F>,
    pub delta: Quaternion<F>,
    pub delta_cert: QCert<F>,
    pub gamma: Matrix<F>,
}

impl<F: Scalar> BasedInstance<F> {
    pub fn new(v: Matrix<F>, u: Matrix<F>, delta_cert: QCert<F>, gamma: Matrix<F>) -> Result<Self> {
        let n = v.n();
        if n < 2 || u.n() != n || gamma.n() != n {
            return Err(Error::Dimension(
                "instance matrices must share a size n >= 2".into(),
            ));
        }
        if !v.is_lower_unitriangular() || !u.is_upper_unitriangular() {
            return Err(Error::Precondition(
                "v must be lower and u upper unitriangular".into(),
            ));
        }
        if !delta_cert.verify() {
            return Err(Error::Verification(
                "delta certificate does not verify".into(),
            ));
        }
        gamma.inverse()?;
        let delta = delta_cert.target.clone();
        Ok(BasedInstance {
            n,
            v,
            u,
            delta,
            delta_cert,
            gamma,
        })
    }

    /// The instance `diag(1, ..., 1, delta)` with trivial `v`, `u` and `gamma`.
    pub fn diagonal(n: usize, delta_cert: QCert<F>) -> Result<Self> {
        let alg = delta_cert.target.algebra().clone();
        let id = Matrix::identity(&alg, n);
        Self::new(id.clone(), id.clone(), delta_cert, id)
    }

    pub fn algebra(&self) -> &std::sync::Arc<AlgebraParams<F>> {
        self.v.algebra()
    }

    pub fn c(&self) -> usize {
        self.delta_cert.len()
    }

    pub fn head(&self) -> Matrix<F> {
        let mut d = vec![self.delta.one_like(); self.n];
        d[self.n - 1] = self.delta.clone();
        Matrix::diag(self.algebra(), &d)
    }

    /// The represented group element.
    pub fn element(&self) -> Result<Matrix<F>> {
        self.v
            .try_mul(&self.head())?
            .try_mul(&self.u)?
            .conjugate(&self.gamma)
    }
}

/// A seeded instance whose `delta` is a product of `c` random commutators.
pub fn make_instance<F: Scalar>(
    alg: &std::sync::Arc<AlgebraParams<F>>,
    seed: u64,
    n: usize,
    c: usize,
) -> Result<(Matrix<F>, BasedInstance<F>)> {
    let mut rng = random::seeded(seed);
    let v = random::lower_unitriangular(&mut rng, alg, n);
    let u = random::upper_unitriangular(&mut rng, alg, n);
    let gamma = random::elementary(&mut rng, alg, n, n + 1);
    let cert = random_cert(&mut rng, alg, c);
    let inst = BasedInstance::new(v, u, cert, gamma)?;
    Ok((inst.element()?, inst))
}

/// A verified certificate made of `c` random pairs of noncommuting quaternions with
/// coordinates in `{-1, 0, 1}`.
pub fn random_cert<F: Scalar, R: rand::Rng>(
    rng: &mut R,
    alg: &std::sync::Arc<AlgebraParams<F>>,
    c: usize,
) -> QCert<F> {
    let mut pairs = Vec::with_capacity(c);
    let mut target = Quaternion::one(alg);
    while pairs.len() < c {
        let (a, b) = (
            random::small_noncentral_unit(rng, alg),
            random::small_noncentral_unit(rng, alg),
        );
        let comm = a.commutator(&b).expect("units");
        if comm.is_one() {
            continue;
        }
        target = target.try_mul(&comm).expect("same algebra");
        pairs.push((a, b));
    }
    CommutatorCert::new(pairs, target)
}

/// Certificate for `tau` from an `h`-factor list evaluating to `diag(1, ..., 1, tau)`, with at
/// most `s(kappa)` pairs.
///
/// Position `p` of the product is a word in the index-`p` factors and the inverted index-`p-1`
/// factors, in list order. The first nonvanishing block starts a chain of word moves that ends
/// at the last position, whose word is the product of the inverted last-index factors.
pub fn lemma9_extract<F: Scalar>(hf: &HFactors<F>, tau: &Quaternion<F>) -> Result<QCert<F>> {
    let n = hf.n();
    let one = tau.one_like();
    let diag = hf.eval_diagonal(&one)?;
    if diag[..n - 1].iter().any(|d| !d.is_one()) || diag[n - 1] != *tau {
        return Err(Error::Precondition(
            "h factors do not evaluate to diag(1, ..., 1, tau)".into(),
        ));
    }
    let kappa = hf.kappa();
    let by_index: Vec<Vec<Quaternion<F>>> = (0..n - 1)
        .map(|j| {
            hf.factors()
                .iter()
                .filter(|f| f.index == j)
                .map(|f| f.eps.clone())
                .collect()
        })
        .collect();
    let start = match (0..n - 1).rev().find(|&k| kappa.0[k] == 0) {
        Some(k) => k + 1,
        None => 0,
    };
    if start == n - 1 {
        return CommutatorCert::trivial(tau.clone()).verified();
    }
    let mut cert = lemma8_unchecked(&by_index[start], &one);
    for p in start + 1..n - 1 {
        let mut letters = Vec::new();
        let (mut ai, mut bj) = (0, 0);
        for f in hf.factors() {
            if f.index + 1 == p {
                ai += 1;
                letters.push(Letter {
                    tag: Tag::A(ai),
                    elem: f.eps.inv()?,
                });
            } else if f.index == p {
                bj += 1;
                letters.push(Letter {
                    tag: Tag::B(bj),
                    elem: f.eps.clone(),
                });
            }
        }
        cert = lemma7_unchecked(&Word::new(letters), &cert, &one);
    }
    if cert.target != *tau {
        return Err(Error::Internal(
            "chained certificate ends at the wrong element".into(),
        ));
    }
    if cert.len() as u64 > s_of(&kappa) {
        return Err(Error::Internal(format!(
            "extracted {} pairs, budget s(kappa) = {}",
            cert.len(),
            s_of(&kappa)
        )));
    }
    cert.verified()
}

/// Result of the lower pipeline.
#[derive(Clone, Debug)]
pub struct LowerReport<F: Scalar> {
    pub cert: QCert<F>,
    pub hfactors: HFactors<F>,
    /// `s(kappa^d)` for the number `d` of input pairs.
    pub bound: u64,
}

/// Turns `prod [x_i, y_i] = diag(1, ..., 1, tau)` into a certificate for `tau` in `D*`.
pub fn lower_extract<F: Scalar>(
    pairs: &[(Matrix<F>, Matrix<F>)],
    tau: &Quaternion<F>,
) -> Result<LowerReport<F>> {
    let d = pairs.len();
    let first = pairs
        .first()
        .ok_or_else(|| Error::Precondition("lower_extract needs at least one pair".into()))?;
    let n = first.0.n();
    let mut head = vec![tau.one_like(); n];
    head[n - 1] = tau.clone();
    let target = Matrix::diag(tau.algebra(), &head);
    let mut prod = Matrix::identity(tau.algebra(), n);
    for (x, y) in pairs {
        prod = prod.try_mul(&x.commutator(y)?)?;
    }
    if prod != target {
        return Err(Error::Precondition(
            "commutator product is not diag(1, ..., 1, tau)".into(),
        ));
    }
    let form = commutator_normal_form(pairs)?;
    let hfactors = extract_h(&form)?;
    let budget = kappa_p(d as u64, n);
    if !hfactors.kappa().le(&budget) {
        return Err(Error::Internal(format!(
            "normal form kappa {} exceeds {}",
            hfactors.kappa(),
            budget
        )));
    }
    let cert = lemma9_extract(&hfactors, tau)?;
    Ok(LowerReport {
        cert,
        hfactors,
        bound: s_of(&budget),
    })
}

/// `g = v diag(d) u` with `v` lower and `u` upper unitriangular.
#[derive(Clone, Debug, PartialEq)]
pub struct Ldu<F: Scalar> {
    pub v: Matrix<F>,
    pub d: Vec<Quaternion<F>>,
    pub u: Matrix<F>,
}

/// Elimination without pivoting; `None` when a leading principal block is singular.
pub fn ldu<F: Scalar>(g: &Matrix<F>) -> Result<Option<Ldu<F>>> {
    let n = g.n();
    let mut a = g.clone();
    let mut v = g.identity_like();
    let mut u = g.identity_like();
    let mut d = Vec::with_capacity(n);
    for j in 0..n {
        let p = a.get(j, j).clone();
        if p.is_zero() {
            return Ok(None);
        }
        let pinv = p.inv()?;
        for i in j + 1..n {
            v.set(i, j, a.get(i, j).try_mul(&pinv)?);
        }
        for k in j + 1..n {
            u.set(j, k, pinv.try_mul(a.get(j, k))?);
        }
        for i in j + 1..n {
            if v.get(i, j).is_zero() {
                continue;
            }
            for k in j + 1..n {
                if a.get(j, k).is_zero() {
                    continue;
                }
                let t = v.get(i, j).try_mul(a.get(j, k))?;
                let e = a.get(i, k).try_sub(&t)?;
                a.set(i, k, e);
            }
        }
        d.push(p);
    }
    Ok(Some(Ldu { v, d, u }))
}

impl<F: Scalar> Ldu<F> {
    pub fn eval(&self) -> Result<Matrix<F>> {
        self.v
            .try_mul(&Matrix::diag(self.v.algebra(), &self.d))?
            .try_mul(&self.u)
    }
}

/// A conjugate `gamma^-1 x gamma` tracked together with its LDU factorization.
struct Tracked<F: Scalar> {
    g: Matrix<F>,
    gamma: Matrix<F>,
    f: Ldu<F>,
}

impl<F: Scalar> Tracked<F> {
    fn new(g: Matrix<F>, gamma: Matrix<F>) -> Result<Option<Self>> {
        Ok(ldu(&g)?.map(|f| Tracked { g, gamma, f }))
    }

    /// Conjugates by `t_ij(xi)` and refactors.
    fn conj(&mut self, i: usize, j: usize, xi: &Quaternion<F>) -> Result<()> {
        self.g.mul_transvection_right(i, j, xi)?;
        self.g.mul_transvection_left(i, j, &-xi)?;
        self.gamma.mul_transvection_right(i, j, xi)?;
        self.f = ldu(&self.g)?
            .ok_or_else(|| Error::Internal("conjugation destroyed the LDU factorization".into()))?;
        Ok(())
    }

    fn u_entry(&self, k: usize) -> &Quaternion<F> {
        self.f.u.get(k, k + 1)
    }

    fn v_entry(&self, k: usize) -> &Quaternion<F> {
        self.f.v.get(k + 1, k)
    }

    /// Moves the pivot at `k` to one, pushing it into position `k + 1`. Returns false when
    /// neither neighbouring off-diagonal entry can be made nonzero.
    fn push_right(&mut self, k: usize) -> Result<bool> {
        let e = self.f.d[k].clone();
        if e.is_one() {
            return Ok(true);
        }
        let one = e.one_like();
        if self.u_entry(k).is_zero() && self.v_entry(k).is_zero() {
            let alg = e.algebra().clone();
            for eta in [
                one.clone(),
                Quaternion::i(&alg),
                Quaternion::j(&alg),
                Quaternion::k(&alg),
            ] {
                let saved = (self.g.clone(), self.gamma.clone(), self.f.clone());
                self.conj(k, k + 1, &eta)?;
                if !self.u_entry(k).is_zero() {
                    break;
                }
                (self.g, self.gamma, self.f) = saved;
            }
        }
        let einv = e.inv()?;
        if !self.u_entry(k).is_zero() {
            let xi = self.u_entry(k).inv()?.try_mul(&einv.try_sub(&one)?)?;
            self.conj(k + 1, k, &xi)?;
        } else if !self.v_entry(k).is_zero() {
            let xi = one.try_sub(&einv)?.try_mul(&self.v_entry(k).inv()?)?;
            self.conj(k, k + 1, &xi)?;
        } else {
            return Ok(false);
        }
        if !self.f.d[k].is_one() {
            return Err(Error::Internal(format!("pivot {k} not normalized")));
        }
        Ok(true)
    }
}

/// Base decomposition: `gamma^-1 g gamma = v diag(1, ..., 1, delta) u`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussBase<F: Scalar> {
    pub gamma: Matrix<F>,
    pub v: Matrix<F>,
    pub delta: Quaternion<F>,
    pub u: Matrix<F>,
}

/// Conjugations tried before giving up on finding an LDU-factorable conjugate.
pub const GAUSS_RETRY_BUDGET: usize = 64;

/// Finds a conjugate of a noncentral elementary `g` of the shape `v diag(1, ..., 1, delta) u`.
///
/// Random elementary conjugations are tried until all leading principal blocks are invertible;
/// then the pivots are pushed to the right one at a time.
pub fn prescribed_gauss_base<F: Scalar>(g: &Matrix<F>, seed: u64) -> Result<GaussBase<F>> {
    if g.is_central_in_e() {
        return Err(Error::Precondition(
            "prescribed_gauss_base needs a noncentral element".into(),
        ));
    }
    if !g.is_elementary()? {
        return Err(Error::Precondition(
            "prescribed_gauss_base needs an elementary element".into(),
        ));
    }
    let n = g.n();
    let alg = g.algebra().clone();
    let mut rng = random::seeded(seed);
    for attempt in 0..=GAUSS_RETRY_BUDGET {
        let gamma = if attempt == 0 {
            g.identity_like()
        } else {
            random::elementary(&mut rng, &alg, n, 2 + attempt % 3)
        };
        let Some(mut tr) = Tracked::new(g.conjugate(&gamma)?, gamma)? else {
            continue;
        };
        let mut ok = true;
        for k in 0..n - 1 {
            if !tr.push_right(k)? {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let base = GaussBase {
            gamma: tr.gamma,
            v: tr.f.v,
            delta: tr.f.d[n - 1].clone(),
            u: tr.f.u,
        };
        let head = {
            let mut d = vec![base.delta.one_like(); n];
            d[n - 1] = base.delta.clone();
            Matrix::diag(&alg, &d)
        };
        if g.conjugate(&base.gamma)? != base.v.try_mul(&head)?.try_mul(&base.u)? {
            return Err(Error::Verification(
                "base decomposition does not reassemble".into(),
            ));
        }
        return Ok(base);
    }
    Err(Error::SearchExhausted(format!(
        "no LDU-factorable conjugate within {GAUSS_RETRY_BUDGET} attempts"
    )))
}

/// Output of the prescribed-diagonal decomposition.
#[derive(Clone, Debug)]
pub struct GaussResult<F: Scalar> {
    pub gamma: Matrix<F>,
    pub v: Matrix<F>,
    pub u: Matrix<F>,
    pub certs: Vec<QCert<F>>,
}

impl<F: Scalar> GaussResult<F> {
    pub fn eps(&self) -> Vec<Quaternion<F>> {
        self.certs.iter().map(|c| c.target.clone()).collect()
    }

    pub fn eval(&self) -> Result<Matrix<F>> {
        self.v
            .try_mul(&Matrix::diag(self.v.algebra(), &self.eps()))?
            .try_mul(&self.u)
    }
}

/// Spreads the certificate of `delta` down the diagonal: returns `gamma`, `v`, `u` and
/// certificates for `eps_i` with `|cert_i| <= d_i` and
/// `gamma^-1 (instance) gamma = v diag(eps_1, ..., eps_n) u`.
pub fn prescribed_gauss<F: Scalar>(
    inst: &BasedInstance<F>,
    part: &Partition,
) -> Result<GaussResult<F>> {
    let n = inst.n;
    if part.0.len() != n {
        return Err(Error::Dimension(format!(
            "partition of length {} for n = {n}",
            part.0.len()
        )));
    }
    if inst.c() > part.total() {
        return Err(Error::Precondition(format!(
            "certificate of length {} exceeds budget {}",
            inst.c(),
            part.total()
        )));
    }
    let one = inst.delta.one_like();
    let start = inst.v.try_mul(&inst.head())?.try_mul(&inst.u)?;
    let mut tr = Tracked {
        g: start,
        gamma: inst.gamma.inverse()?,
        f: Ldu {
            v: inst.v.clone(),
            d: inst.head().diagonal(),
            u: inst.u.clone(),
        },
    };
    let mut certs: Vec<QCert<F>> = vec![CommutatorCert::trivial(one.clone()); n];
    let mut running = inst.delta_cert.clone();
    for k in (0..n - 1).rev() {
        let eps = running.target.clone();
        if tr.f.d[k + 1] != eps || !tr.f.d[k].is_one() {
            return Err(Error::Internal(format!("unexpected diagonal at step {k}")));
        }
        if eps.is_one() {
            running = CommutatorCert::trivial(one.clone());
            continue;
        }
        let r = running.len().min(part.0[k + 1]);
        if tr.u_entry(k).is_zero() && tr.v_entry(k).is_zero() {
            let (prefix, suffix) = running.split_at(r);
            if suffix.target.is_one() {
                certs[k + 1] = prefix;
                running = suffix;
                continue;
            }
            tr.conj(k, k + 1, &one)?;
        }
        if !tr.u_entry(k).is_zero() {
            // eps = prefix * theta; conjugating by t_{k+1,k}(xi) with 1 + xi zeta = theta leaves
            // the prefix at k + 1 and zeta theta zeta^-1 at k.
            let (prefix, suffix) = running.split_at(r);
            let zeta = tr.u_entry(k).clone();
            if !suffix.target.is_one() {
                let xi = suffix.target.try_sub(&one)?.try_mul(&zeta.inv()?)?;
                tr.conj(k + 1, k, &xi)?;
            }
            certs[k + 1] = prefix;
            running = suffix.conjugate(&zeta.inv()?);
        } else if !tr.v_entry(k).is_zero() {
            // eps = theta * suffix; conjugating by t_{k,k+1}(xi) with 1 - zeta xi = theta leaves
            // the suffix at k + 1 and zeta^-1 theta zeta at k.
            let (prefix, suffix) = running.split_at(running.len() - r);
            let zeta = tr.v_entry(k).clone();
            if !prefix.target.is_one() {
                let xi = zeta.inv()?.try_mul(&one.try_sub(&prefix.target)?)?;
                tr.conj(k, k + 1, &xi)?;
            }
            certs[k + 1] = suffix;
            running = prefix.conjugate(&zeta);
        } else {
            return Err(Error::Internal(format!(
                "no nonzero neighbour entry at step {k}"
            )));
        }
        if tr.f.d[k + 1] != certs[k + 1].target || tr.f.d[k] != running.target {
            return Err(Error::Internal(format!(
                "diagonal prediction failed at step {k}"
            )));
        }
    }
    certs[0] = running;
    for (i, c) in certs.iter().enumerate() {
        if c.len() > part.0[i] || c.target != tr.f.d[i] || !c.verify() {
            return Err(Error::Internal(format!(
                "certificate at position {i} out of budget or invalid"
            )));
        }
    }
    let res = GaussResult {
        gamma: tr.gamma,
        v: tr.f.v,
        u: tr.f.u,
        certs,
    };
    if inst.element()?.conjugate(&res.gamma)? != res.eval()? {
        return Err(Error::Verification(
            "prescribed decomposition does not reassemble".into(),
        ));
    }
    Ok(res)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Gl,
    E,
}

/// Central rescalings tried per element before giving up.
pub const RESCALE_BUDGET: i64 = 1000;

fn central<F: Scalar>(q: &Quaternion<F>, t: i64) -> Quaternion<F> {
    q.central(F::from_i64(t).expect("scalar from i64"))
}

/// Smallest `t >= from` such that `nrd(t a)` avoids `used`.
fn fresh_scale<F: Scalar>(
    a: &Quaternion<F>,
    used: &[F],
    from: i64,
) -> Result<(i64, Quaternion<F>)> {
    for t in from..from + RESCALE_BUDGET {
        let s = a.try_mul(&central(a, t))?;
        if !used.contains(&s.nrd()) {
            return Ok((t, s));
        }
    }
    Err(Error::SearchExhausted(
        "no central rescaling separates the reduced norms".into(),
    ))
}

/// Witnesses with pairwise distinct `nrd(a_i)`; in E-mode also `b_1 = 1`, `a_2` central,
/// `a_1 = (a_2 ... a_n)^-1` and `b_2 = (b_1 b_3 ... b_n)^-1`.
fn separated_witnesses<F: Scalar>(
    witnesses: &[(Quaternion<F>, Quaternion<F>)],
    mode: Mode,
) -> Result<Vec<(Quaternion<F>, Quaternion<F>)>> {
    let n = witnesses.len();
    let mut a: Vec<Quaternion<F>> = witnesses.iter().map(|w| w.0.clone()).collect();
    let mut b: Vec<Quaternion<F>> = witnesses.iter().map(|w| w.1.clone()).collect();
    let one = a[0].one_like();
    match mode {
        Mode::Gl => {
            let mut used = Vec::with_capacity(n);
            for ai in a.iter_mut() {
                let (_, s) = fresh_scale(ai, &used, 1)?;
                used.push(s.nrd());
                *ai = s;
            }
        }
        Mode::E => {
            a[1] = one.clone();
            b[0] = one.clone();
            let mut scales = vec![1i64; n];
            let mut used = Vec::with_capacity(n);
            let orig = a.clone();
            for i in 1..n {
                let (t, s) = fresh_scale(&orig[i], &used, 1)?;
                scales[i] = t;
                used.push(s.nrd());
                a[i] = s;
            }
            loop {
                let tail = a[1..]
                    .iter()
                    .try_fold(one.clone(), |acc, x| acc.try_mul(x))?;
                a[0] = tail.inv()?;
                if !used.contains(&a[0].nrd()) {
                    break;
                }
                let last = n - 1;
                let others: Vec<F> = (1..last).map(|i| a[i].nrd()).collect();
                let (t, s) = fresh_scale(&orig[last], &others, scales[last] + 1)?;
                scales[last] = t;
                a[last] = s;
                used = (1..n).map(|i| a[i].nrd()).collect();
                if t > RESCALE_BUDGET {
                    return Err(Error::SearchExhausted("E-mode rescaling".into()));
                }
            }
            let rest = std::iter::once(&b[0])
                .chain(&b[2..])
                .try_fold(one.clone(), |acc, x| acc.try_mul(x))?;
            b[1] = rest.inv()?;
        }
    }
    Ok(a.into_iter().zip(b).collect())
}

/// Writes `v diag(eps) u` as a single commutator `[P, Q]`, given `eps_i = [a_i, b_i]`.
///
/// With `h1 = diag(a_i)`, `tau = diag(b_i)` and `h2 = tau h1^-1 tau^-1`, one solves
/// `v = [v', h1]` and `u = [h2^-1, u']` entry by entry; then `P = v' h1 v'^-1` and
/// `Q = u' tau v'^-1`. In E-mode the first two `eps` must be one and the witnesses there are
/// replaced so that `P` and `Q` are elementary.
pub fn single_commutator<F: Scalar>(
    v: &Matrix<F>,
    u: &Matrix<F>,
    eps: &[Quaternion<F>],
    witnesses: &[(Quaternion<F>, Quaternion<F>)],
    mode: Mode,
) -> Result<(Matrix<F>, Matrix<F>)> {
    let n = v.n();
    if u.n() != n || eps.len() != n || witnesses.len() != n {
        return Err(Error::Dimension(
            "single_commutator needs n diagonal entries and witnesses".into(),
        ));
    }
    if !v.is_lower_unitriangular() || !u.is_upper_unitriangular() {
        return Err(Error::Precondition(
            "v must be lower and u upper unitriangular".into(),
        ));
    }
    for (i, (e, (a, b))) in eps.iter().zip(witnesses).enumerate() {
        if mode == Mode::E && i < 2 {
            if !e.is_one() {
                return Err(Error::Precondition("E-mode needs eps_1 = eps_2 = 1".into()));
            }
        } else if a.commutator(b)? != *e {
            return Err(Error::Precondition(format!(
                "witness {i} does not match eps"
            )));
        }
    }
    if mode == Mode::E && n < 3 {
        return Err(Error::Precondition("E-mode needs n >= 3".into()));
    }
    let wit = separated_witnesses(witnesses, mode)?;
    let a: Vec<Quaternion<F>> = wit.iter().map(|w| w.0.clone()).collect();
    let b: Vec<Quaternion<F>> = wit.iter().map(|w| w.1.clone()).collect();
    let ainv: Vec<Quaternion<F>> = a.iter().map(|x| x.inv()).collect::<Result<_>>()?;

    // v h1 v' = v' h1: a_i x - x a_j = -v_ij a_j - sum_{j<k<i} v_ik a_k v'_kj.
    let mut vp = v.identity_like();
    for diff in 1..n {
        for j in 0..n - diff {
            let i = j + diff;
            let mut r = -&v.get(i, j).try_mul(&a[j])?;
            for k in j + 1..i {
                r = r.try_sub(&v.get(i, k).try_mul(&a[k])?.try_mul(vp.get(k, j))?)?;
            }
            vp.set(i, j, solve_twisted(&ainv[i], &a[j], &ainv[i].try_mul(&r)?)?);
        }
    }
    // h2 u u' = u' h2: x - c_i^-1 x c_j = -u_ij - sum_{i<k<j} u_ik u'_kj.
    let c: Vec<Quaternion<F>> = (0..n)
        .map(|i| b[i].try_mul(&ainv[i])?.try_mul(&b[i].inv()?))
        .collect::<Result<_>>()?;
    let cinv: Vec<Quaternion<F>> = c.iter().map(|x| x.inv()).collect::<Result<_>>()?;
    let mut up = u.identity_like();
    for diff in 1..n {
        for i in 0..n - diff {
            let j = i + diff;
            let mut r = -u.get(i, j);
            for k in i + 1..j {
                r = r.try_sub(&u.get(i, k).try_mul(up.get(k, j))?)?;
            }
            up.set(i, j, solve_twisted(&cinv[i], &c[j], &r)?);
        }
    }
    let alg = v.algebra();
    let h1 = Matrix::diag(alg, &a);
    let tau = Matrix::diag(alg, &b);
    let vp_inv = vp.inverse()?;
    let p = vp.try_mul(&h1)?.try_mul(&vp_inv)?;
    let q = up.try_mul(&tau)?.try_mul(&vp_inv)?;
    let target = v.try_mul(&Matrix::diag(alg, eps))?.try_mul(u)?;
    if !p.commutator_is(&q, &target) {
        return Err(Error::Verification(
            "single commutator does not reassemble".into(),
        ));
    }
    // P is conjugate to h1 and Q differs from tau by unitriangular factors, so their
    // determinant classes are those of prod a_i and prod b_i.
    let nrd_prod = |xs: &[Quaternion<F>]| xs.iter().fold(F::one(), |acc, x| acc * x.nrd());
    if mode == Mode::E && !(nrd_prod(&a).is_one() && nrd_prod(&b).is_one()) {
        return Err(Error::Internal(
            "E-mode witnesses are not elementary".into(),
        ));
    }
    Ok((p, q))
}

/// Splits each certificate into all but its last pair and its last pair (or trivial ones).
fn peel<F: Scalar>(
    certs: &[QCert<F>],
    one: &Quaternion<F>,
) -> (Vec<QCert<F>>, Vec<(Quaternion<F>, Quaternion<F>)>) {
    certs
        .iter()
        .map(|c| {
            if c.is_empty() {
                (
                    CommutatorCert::trivial(one.clone()),
                    (one.clone(), one.clone()),
                )
            } else {
                let (head, last) = c.split_at(c.len() - 1);
                (head, last.pairs[0].clone())
            }
        })
        .unzip()
}

fn witness_at<F: Scalar>(
    c: &QCert<F>,
    k: usize,
    one: &Quaternion<F>,
) -> (Quaternion<F>, Quaternion<F>) {
    c.pairs
        .get(k)
        .cloned()
        .unwrap_or_else(|| (one.clone(), one.clone()))
}

/// Shared tail of the two factorization pipelines. `diag_pair` builds the `k`-th pair of
/// diagonal witnesses for `h'` from the per-position witnesses.
fn factor_with<F: Scalar>(
    inst: &BasedInstance<F>,
    part: &Partition,
    mode: Mode,
    diag_pair: impl Fn(&[(Quaternion<F>, Quaternion<F>)]) -> Result<(Matrix<F>, Matrix<F>)>,
) -> Result<MCert<F>> {
    let x = inst.element()?;
    if x.is_central_in_e() {
        return Err(Error::Precondition("instance element is central".into()));
    }
    let one = inst.delta.one_like();
    let res = prescribed_gauss(inst, part)?;
    let m = part.max().max(1);
    let (heads, lasts) = peel(&res.certs, &one);
    let hp: Vec<Quaternion<F>> = heads.iter().map(|c| c.target.clone()).collect();
    let eps2: Vec<Quaternion<F>> = lasts
        .iter()
        .map(|(a, b)| a.commutator(b))
        .collect::<Result<_>>()?;
    let vt = res.v.conjugate_by_diagonal(&hp)?;
    let (p, q) = single_commutator(&vt, &res.u, &eps2, &lasts, mode)?;
    let mut pairs = Vec::with_capacity(m);
    for k in 0..m - 1 {
        let w: Vec<_> = heads.iter().map(|c| witness_at(c, k, &one)).collect();
        let (a, b) = diag_pair(&w)?;
        // Elementarity is conjugation invariant, so it is checked on the diagonal witnesses.
        if mode == Mode::E && !(a.is_elementary()? && b.is_elementary()?) {
            return Err(Error::Internal(
                "E-mode certificate has a non-elementary witness".into(),
            ));
        }
        pairs.push((a, b));
    }
    pairs.push((p, q));
    let gi = res.gamma.inverse()?;
    let cert = CommutatorCert::new(pairs, res.eval()?).conjugate(&gi);
    if cert.target != x {
        return Err(Error::Internal(
            "conjugated target differs from the instance".into(),
        ));
    }
    cert.verified()
}

/// Factors the instance into at most `ceil(c/n)` commutators in `GL(n, D)`.
pub fn factor_commutators_gl<F: Scalar>(inst: &BasedInstance<F>) -> Result<MCert<F>> {
    let (c, n) = (inst.c(), inst.n);
    if c == 0 {
        return Err(Error::Precondition(
            "factorization needs a nonempty delta certificate".into(),
        ));
    }
    let alg = inst.algebra().clone();
    let cert = factor_with(inst, &Partition::balanced(c, n), Mode::Gl, |w| {
        let a: Vec<_> = w.iter().map(|p| p.0.clone()).collect();
        let b: Vec<_> = w.iter().map(|p| p.1.clone()).collect();
        Ok((Matrix::diag(&alg, &a), Matrix::diag(&alg, &b)))
    })?;
    if cert.len() > c.div_ceil(n) {
        return Err(Error::Internal(format!(
            "{} pairs exceed ceil(c/n)",
            cert.len()
        )));
    }
    Ok(cert)
}

/// Factors the instance into at most `ceil(c/(n-2))` commutators of elementary matrices.
pub fn factor_commutators_e<F: Scalar>(inst: &BasedInstance<F>) -> Result<MCert<F>> {
    let (c, n) = (inst.c(), inst.n);
    if n < 3 {
        return Err(Error::Precondition(
            "E-mode factorization needs n >= 3".into(),
        ));
    }
    if c == 0 {
        return Err(Error::Precondition(
            "factorization needs a nonempty delta certificate".into(),
        ));
    }
    let alg = inst.algebra().clone();
    // diag((a_3 ... a_n)^-1, 1, a_3, ..., a_n) and diag(1, (b_3 ... b_n)^-1, b_3, ..., b_n).
    let cert = factor_with(inst, &Partition::balanced_on(c, n, 2), Mode::E, |w| {
        let one = w[0].0.one_like();
        let prod = |f: &dyn Fn(&(Quaternion<F>, Quaternion<F>)) -> Quaternion<F>| {
            w[2..]
                .iter()
                .try_fold(one.clone(), |acc, p| acc.try_mul(&f(p)))
        };
        let mut a = vec![prod(&|p| p.0.clone())?.inv()?, one.clone()];
        a.extend(w[2..].iter().map(|p| p.0.clone()));
        let mut b = vec![one.clone(), prod(&|p| p.1.clone())?.inv()?];
        b.extend(w[2..].iter().map(|p| p.1.clone()));
        Ok((Matrix::diag(&alg, &a), Matrix::diag(&alg, &b)))
    })?;
    if cert.len() > c.div_ceil(n - 2) {
        return Err(Error::Internal(format!(
            "{} pairs exceed ceil(c/(n-2))",
            cert.len()
        )));
    }
    Ok(cert)
}

/// A single elementary commutator in a large enough `GL(n', D)`.
#[derive(Clone, Debug)]
pub struct StableResult<F: Scalar> {
    pub n: usize,
    pub p: Matrix<F>,
    pub q: Matrix<F>,
    pub target: Matrix<F>,
}

/// Pads to `n' = max(n, d + 2, 3)`, moves `delta` to the last position by a permutation, and
/// factors in E-mode, which then needs one pair.
pub fn stable_single_commutator<F: Scalar>(inst: &BasedInstance<F>) -> Result<StableResult<F>> {
    let (n, d) = (inst.n, inst.c());
    if d == 0 || inst.element()?.is_central_in_e() {
        return Err(Error::Precondition(
            "stable factorization needs a noncentral instance with d >= 1".into(),
        ));
    }
    let np = n.max(d + 2).max(3);
    let mut perm: Vec<usize> = (0..np).collect();
    perm.swap(n - 1, np - 1);
    let lift = |m: &Matrix<F>| m.pad(np).permute(&perm);
    let big = BasedInstance::new(
        lift(&inst.v),
        lift(&inst.u),
        inst.delta_cert.clone(),
        lift(&inst.gamma),
    )?;
    let cert = factor_commutators_e(&big)?;
    if cert.len() != 1 {
        return Err(Error::Internal(format!(
            "stable factorization used {} pairs",
            cert.len()
        )));
    }
    let (p, q) = cert.pairs[0].clone();
    let (p, q) = (p.permute(&perm), q.permute(&perm));
    let target = inst.element()?.pad(np);
    if !p.commutator_is(&q, &target) {
        return Err(Error::Verification(
            "stable commutator does not reassemble".into(),
        ));
    }
    Ok(StableResult {
        n: np,
        p,
        q,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::HFactor;
    use crate::{MatD, Quat};

    fn alg() -> std::sync::Arc<AlgebraParams<Rat>> {
        AlgebraParams::hamilton()
    }

    fn q(w: i64, x: i64, y: i64, z: i64) -> Quat {
        Quaternion::from_i64(&alg(), w, x, y, z)
    }

    fn one() -> Quat {
        q(1, 0, 0, 0)
    }

    fn cert_of(pairs: Vec<(Quat, Quat)>) -> CommutatorCert<Quat> {
        let target = pairs
            .iter()
            .fold(one(), |acc, (a, b)| &acc * &a.commutator(b).unwrap());
        CommutatorCert::new(pairs, target)
    }

    #[test]
    fn bound_formulas() {
        assert_eq!(theorem1_bound(2, 1), 11);
        assert_eq!(theorem1_bound(4, 1), 63);
        assert_eq!(
            corollary1_bound(2, 11).unwrap(),
            Rat::from_integer(1.into())
        );
        assert_eq!(
            corollary1_bound(2, 1).unwrap(),
            Rat::new(2.into(), 7.into())
        );
        assert!(corollary1_bound(2, 0).is_err());
        assert_eq!(upper_bounds(3, 1).unwrap(), (1, Some(1)));
        assert_eq!(upper_bounds(2, 5).unwrap(), (3, None));
        assert_eq!(upper_bounds(4, 4).unwrap(), (1, Some(2)));
        assert_eq!(corollary2_constant(3), 31);
    }

    #[test]
    fn computed_budget_is_one_below_printed() {
        for n in 2..=6u64 {
            for d in 1..=5u64 {
                let s = s_of(&kappa_p(d, n as usize));
                assert_eq!(s + 1, theorem1_bound(n, d), "n = {n}, d = {d}");
            }
        }
    }

    #[test]
    fn partitions() {
        assert_eq!(Partition::balanced(5, 3).0, vec![1, 2, 2]);
        assert_eq!(Partition::balanced(3, 3).0, vec![1, 1, 1]);
        assert_eq!(Partition::balanced_on(3, 4, 2).0, vec![0, 0, 1, 2]);
        assert_eq!(Partition::concentrated(4, 3).0, vec![0, 0, 4]);
    }

    #[test]
    fn ldu_reassembles() {
        let mut rng = random::seeded(3);
        for _ in 0..10 {
            let g = random::invertible(&mut rng, &alg(), 3);
            if let Some(f) = ldu(&g).unwrap() {
                assert_eq!(f.eval().unwrap(), g);
            }
        }
        let swap = MatD::from_rows(
            &alg(),
            vec![vec![q(0, 0, 0, 0), one()], vec![one(), q(0, 0, 0, 0)]],
        )
        .unwrap();
        assert!(ldu(&swap).unwrap().is_none());
    }

    #[test]
    fn extract_trivial_and_two_by_two() {
        assert!(lemma9_extract(&HFactors::new(3), &one())
            .unwrap()
            .is_empty());
        let (xi, zeta) = (q(1, 1, 0, 0), q(0, 1, 2, 0));
        let last = &zeta.inv().unwrap() * &xi.inv().unwrap();
        let hf = HFactors::from_factors(
            2,
            vec![
                HFactor {
                    index: 0,
                    eps: xi.clone(),
                },
                HFactor {
                    index: 0,
                    eps: zeta.clone(),
                },
                HFactor {
                    index: 0,
                    eps: last,
                },
            ],
        )
        .unwrap();
        let tau = hf.eval_diagonal(&one()).unwrap()[1].clone();
        assert_eq!(
            tau,
            xi.inv().unwrap().commutator(&zeta.inv().unwrap()).unwrap()
        );
        let cert = lemma9_extract(&hf, &tau).unwrap();
        assert_eq!(cert.len(), 1);
        assert!(lemma9_extract(&hf, &one()).is_err());
    }

    #[test]
    fn lower_extract_diagonal_commutator() {
        for n in 2..=4 {
            let (a, b) = (q(1, 2, 0, 1), q(0, 1, 1, 3));
            let mut da = vec![one(); n];
            let mut db = vec![one(); n];
            da[n - 1] = a.clone();
            db[n - 1] = b.clone();
            let pair = (MatD::diag(&alg(), &da), MatD::diag(&alg(), &db));
            let tau = a.commutator(&b).unwrap();
            let rep = lower_extract(&[pair], &tau).unwrap();
            assert!(rep.cert.verify());
            assert!(rep.cert.len() as u64 <= rep.bound);
            assert!(rep.bound <= theorem1_bound(n as u64, 1));
        }
        let id = MatD::identity(&alg(), 3);
        assert!(lower_extract(&[(id.clone(), id)], &one())
            .unwrap()
            .cert
            .is_empty());
    }

    #[test]
    fn gauss_base_shortcut_and_small() {
        let g = MatD::diag(
            &alg(),
            &[one(), q(0, 0, 0, 1).commutator(&q(1, 1, 0, 0)).unwrap()],
        );
        let base = prescribed_gauss_base(&g, 0).unwrap();
        assert!(base.gamma.is_identity());
        let t = MatD::transvection(2, 0, 1, &one())
            .unwrap()
            .try_mul(&MatD::transvection(2, 1, 0, &one()).unwrap())
            .unwrap();
        let base = prescribed_gauss_base(&t, 0).unwrap();
        assert_eq!(
            base.delta.nrd(),
            t.dieudonne_det().unwrap().invariant().clone()
        );
        assert!(prescribed_gauss_base(&MatD::identity(&alg(), 3), 0).is_err());
    }

    #[test]
    fn gauss_base_random_elementary() {
        let mut rng = random::seeded(11);
        for n in 2..=3 {
            for s in 0..5 {
                let g = random::elementary(&mut rng, &alg(), n, 4);
                if g.is_central_in_e() {
                    continue;
                }
                prescribed_gauss_base(&g, s).unwrap();
            }
        }
    }

    #[test]
    fn prescribed_trivial_delta() {
        let (_, inst) = make_instance(&alg(), 1, 3, 0).unwrap();
        let res = prescribed_gauss(&inst, &Partition::balanced(0, 3)).unwrap();
        assert!(res.eps().iter().all(|e| e.is_one()));
    }

    #[test]
    fn prescribed_split_three() {
        let cert = cert_of(vec![
            (q(1, 1, 0, 0), q(0, 1, 1, 0)),
            (q(2, 0, 1, 0), q(1, 0, 0, 1)),
        ]);
        let (_, base) = make_instance(&alg(), 5, 3, 0).unwrap();
        let inst = BasedInstance::new(base.v, base.u, cert, base.gamma).unwrap();
        let res = prescribed_gauss(&inst, &Partition(vec![0, 1, 1])).unwrap();
        assert!(res.certs[0].is_empty());
        assert!(res.certs[1].len() <= 1 && res.certs[2].len() <= 1);
    }

    #[test]
    fn prescribed_concentrated_is_identity_step() {
        let (_, inst) = make_instance(&alg(), 9, 4, 3).unwrap();
        let res = prescribed_gauss(&inst, &Partition::concentrated(3, 4)).unwrap();
        assert_eq!(res.v, inst.v);
        assert_eq!(res.u, inst.u);
        assert_eq!(res.certs[3], inst.delta_cert);
    }

    #[test]
    fn single_commutator_trivial() {
        let id = MatD::identity(&alg(), 3);
        let w = vec![(one(), one()); 3];
        let (p, qm) = single_commutator(&id, &id, &[one(), one(), one()], &w, Mode::Gl).unwrap();
        assert!(p.commutator(&qm).unwrap().is_identity());
    }

    #[test]
    fn single_commutator_gl_and_e() {
        let mut rng = random::seeded(21);
        for n in 2..=3 {
            let v = random::lower_unitriangular(&mut rng, &alg(), n);
            let u = random::upper_unitriangular(&mut rng, &alg(), n);
            let w: Vec<_> = (0..n)
                .map(|_| {
                    (
                        random::unit(&mut rng, &alg()),
                        random::unit(&mut rng, &alg()),
                    )
                })
                .collect();
            let eps: Vec<_> = w.iter().map(|(a, b)| a.commutator(b).unwrap()).collect();
            single_commutator(&v, &u, &eps, &w, Mode::Gl).unwrap();
        }
        let v = random::lower_unitriangular(&mut rng, &alg(), 3);
        let u = random::upper_unitriangular(&mut rng, &alg(), 3);
        let w = vec![
            (one(), one()),
            (one(), one()),
            (q(1, 1, 0, 0), q(0, 1, 1, 0)),
        ];
        let eps = vec![one(), one(), w[2].0.commutator(&w[2].1).unwrap()];
        let (p, qm) = single_commutator(&v, &u, &eps, &w, Mode::E).unwrap();
        assert!(p.is_elementary().unwrap() && qm.is_elementary().unwrap());
    }

    #[test]
    fn factor_gl_counts() {
        for (n, c, want) in [(3, 1, 1), (3, 3, 1), (3, 4, 2), (2, 5, 3)] {
            let (g, inst) = make_instance(&alg(), 100 + c as u64, n, c).unwrap();
            let cert = factor_commutators_gl(&inst).unwrap();
            assert_eq!(cert.len(), want, "n = {n}, c = {c}");
            assert_eq!(cert.target, g);
        }
    }

    #[test]
    fn factor_e_counts() {
        for (n, c, want) in [(3, 1, 1), (4, 2, 1), (4, 3, 2), (3, 2, 2)] {
            let (_, inst) = make_instance(&alg(), 200 + c as u64, n, c).unwrap();
            let cert = factor_commutators_e(&inst).unwrap();
            assert_eq!(cert.len(), want, "n = {n}, c = {c}");
        }
        let (_, inst) = make_instance(&alg(), 1, 2, 1).unwrap();
        assert!(factor_commutators_e(&inst).is_err());
    }

    #[test]
    fn stable_padding() {
        let (_, inst) = make_instance(&alg(), 7, 3, 1).unwrap();
        assert_eq!(stable_single_commutator(&inst).unwrap().n, 3);
        let (_, inst) = make_instance(&alg(), 8, 3, 4).unwrap();
        let res = stable_single_commutator(&inst).unwrap();
        assert_eq!(res.n, 6);
        assert!(res.p.is_elementary().unwrap() && res.q.is_elementary().unwrap());
    }

    #[test]
    fn round_trip_diagonal() {
        for n in 2..=3 {
            let mut rng = random::seeded(n as u64);
            let cert = random_cert(&mut rng, &alg(), n + 1);
            let inst = BasedInstance::diagonal(n, cert).unwrap();
            let mc = factor_commutators_gl(&inst).unwrap();
            let rep = lower_extract(&mc.pairs, &inst.delta).unwrap();
            assert!(rep.cert.len() as u64 <= s_of(&kappa_p(mc.len() as u64, n)));
        }
    }
}
