//! Seeded generators for quaternions, triangular and elementary matrices.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrices::{Matrix, Relation};
use crate::scalar::Scalar;
use crate::skewfield::{AlgebraParams, Quaternion};
use crate::wordcalc::{product, CommutatorCert, Group, Letter, Tag, Word};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coordinate magnitude for generated integers.
pub const COORD_BOUND: i64 = 3;

fn scalar<F: Scalar>(v: i64) -> F {
    F::from_i64(v).expect("scalar from i64")
}

/// A rational `p/q` with `|p| <= bound` and `1 <= q <= 2`.
pub fn small_rational<F: Scalar, R: Rng>(rng: &mut R, bound: i64) -> F {
    let p = rng.gen_range(-bound..=bound);
    let q = rng.gen_range(1..=2);
    scalar::<F>(p) / scalar::<F>(q)
}

/// A quaternion with small rational coordinates, possibly zero.
pub fn quat<F: Scalar, R: Rng>(rng: &mut R, alg: &Arc<AlgebraParams<F>>) -> Quaternion<F> {
    let mut c = || small_rational::<F, R>(rng, COORD_BOUND);
    Quaternion::new(alg, c(), c(), c(), c())
}

/// A quaternion with small integer coordinates, possibly zero.
pub fn int_quat<F: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Arc<AlgebraParams<F>>,
    bound: i64,
) -> Quaternion<F> {
    let mut c = || scalar::<F>(rng.gen_range(-bound..=bound));
    Quaternion::new(alg, c(), c(), c(), c())
}

/// A quaternion with nonzero reduced norm.
pub fn unit<F: Scalar, R: Rng>(rng: &mut R, alg: &Arc<AlgebraParams<F>>) -> Quaternion<F> {
    loop {
        let q = quat(rng, alg);
        if !q.nrd().is_zero() {
            return q;
        }
    }
}

/// A non-central quaternion with nonzero reduced norm.
pub fn noncentral_unit<F: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Arc<AlgebraParams<F>>,
) -> Quaternion<F> {
    loop {
        let q = unit(rng, alg);
        if !q.is_central() {
            return q;
        }
    }
}

/// A non-central quaternion with coordinates in `{-1, 0, 1}` and nonzero reduced norm.
pub fn small_noncentral_unit<F: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Arc<AlgebraParams<F>>,
) -> Quaternion<F> {
    loop {
        let q = int_quat(rng, alg, 1);
        if !q.is_central() && !q.nrd().is_zero() {
            return q;
        }
    }
}

pub fn lower_unitriangular<F: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Arc<AlgebraParams<F>>,
    n: usize,
) -> Matrix<F> {
    let mut m = Matrix::identity(alg, n);
    for i in 0..n {
        for j in 0..i {
            m.set(i, j, quat(rng, alg));
        }
    }
    m
}

pub fn upper_unitriangular<F: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Arc<AlgebraParams<F>>,
    n: usize,
) -> Matrix<F> {
    let mut m = Matrix::identity(alg, n);
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, quat(rng, alg));
        }
    }
    m
}

/// A product of `len` random transvections.
pub fn elementary<F: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Arc<AlgebraParams<F>>,
    n: usize,
    len: usize,
) -> Matrix<F> {
    let mut m = Matrix::identity(alg, n);
    for _ in 0..len {
        let (i, j) = distinct_pair(rng, n);
        let xi = int_quat(rng, alg, 1);
        m.mul_transvection_right(i, j, &xi).expect("same algebra");
    }
    m
}

/// A dense invertible matrix with small rational entries.
pub fn invertible<F: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Arc<AlgebraParams<F>>,
    n: usize,
) -> Matrix<F> {
    loop {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| quat(rng, alg)).collect())
            .collect();
        let m = Matrix::from_rows(alg, rows).expect("square rows");
        if m.inverse().is_ok() {
            return m;
        }
    }
}

fn distinct_pair<R: Rng>(rng: &mut R, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// A random instance of relation `kind` in `0..4` (additive, commutator, Gauss, Weyl) that
/// satisfies its preconditions.
pub fn relation<F: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Arc<AlgebraParams<F>>,
    n: usize,
    kind: usize,
) -> Relation<F> {
    let (i, j) = distinct_pair(rng, n);
    match kind {
        0 => Relation::Additive {
            n,
            i,
            j,
            xi: quat(rng, alg),
            zeta: quat(rng, alg),
        },
        1 => loop {
            let (p, q) = if n >= 3 && rng.gen_bool(0.5) {
                (j, rng.gen_range(0..n))
            } else {
                distinct_pair(rng, n)
            };
            if p != q && q != i {
                break Relation::Commutator {
                    n,
                    i,
                    j,
                    p,
                    q,
                    xi: quat(rng, alg),
                    zeta: quat(rng, alg),
                };
            }
        },
        2 => loop {
            let (xi, zeta) = (quat(rng, alg), unit(rng, alg));
            let zx = xi
                .one_like()
                .try_add(&zeta.try_mul(&xi).expect("same algebra"))
                .expect("same algebra");
            if !zx.is_zero() {
                break Relation::Gauss { n, i, j, xi, zeta };
            }
        },
        3 => Relation::Weyl {
            n,
            i,
            j,
            xi: unit(rng, alg),
        },
        _ => panic!("relation kind {kind} out of range"),
    }
}

/// A certificate of `m` random pairs drawn from `gen`, with its evaluated target.
pub fn cert_of<G: Group, R: Rng>(
    rng: &mut R,
    one: &G,
    m: usize,
    gen: &mut impl FnMut(&mut R) -> G,
) -> CommutatorCert<G> {
    let pairs: Vec<(G, G)> = (0..m).map(|_| (gen(rng), gen(rng))).collect();
    let comms: Vec<G> = pairs.iter().map(|(g, h)| g.commutator(h)).collect();
    CommutatorCert::new(pairs, product(one, &comms))
}

/// A random word of `p` letters `a_i^-1` and `q` letters `b_j` evaluating to `e`, with an
/// `m`-pair certificate for the product of the `a` letters.
///
/// The `a` letters keep ascending order, `b` letters are shuffled in between, and the last `b`
/// letter is solved for.
pub fn word_case<G: Group, R: Rng>(
    rng: &mut R,
    one: &G,
    p: usize,
    q: usize,
    m: usize,
    gen: &mut impl FnMut(&mut R) -> G,
) -> (Word<G>, CommutatorCert<G>) {
    assert!(p >= 1 && q >= 1);
    let cert = cert_of(rng, one, m, gen);
    let mut a: Vec<G> = (0..p - 1).map(|_| gen(rng)).collect();
    a.push(product(one, &a).inverse().op(&cert.target));
    let mut b_order: Vec<usize> = (1..=q).collect();
    b_order.shuffle(rng);
    let mut tags: Vec<Tag> = b_order.into_iter().map(Tag::B).collect();
    for i in 1..=p {
        let lo = tags
            .iter()
            .position(|t| *t == Tag::A(i - 1))
            .map_or(0, |x| x + 1);
        let at = rng.gen_range(lo..=tags.len());
        tags.insert(at, Tag::A(i));
    }
    let free = tags
        .iter()
        .rposition(|t| matches!(t, Tag::B(_)))
        .expect("q >= 1");
    let mut letters: Vec<Letter<G>> = tags
        .iter()
        .map(|&tag| Letter {
            tag,
            elem: if let Tag::A(i) = tag {
                a[i - 1].clone()
            } else {
                gen(rng)
            },
        })
        .collect();
    let before = product(
        one,
        &letters[..free]
            .iter()
            .map(|l| l.elem.clone())
            .collect::<Vec<_>>(),
    );
    let after = product(
        one,
        &letters[free + 1..]
            .iter()
            .map(|l| l.elem.clone())
            .collect::<Vec<_>>(),
    );
    letters[free].elem = before.inverse().op(&after.inverse());
    (Word::new(letters), cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    #[test]
    fn deterministic_per_seed() {
        let alg = AlgebraParams::<Rat>::hamilton();
        let a = invertible(&mut seeded(7), &alg, 3);
        let b = invertible(&mut seeded(7), &alg, 3);
        assert_eq!(a, b);
        assert_ne!(a, invertible(&mut seeded(8), &alg, 3));
    }

    #[test]
    fn shapes() {
        let alg = AlgebraParams::<Rat>::hamilton();
        let mut rng = seeded(1);
        assert!(lower_unitriangular(&mut rng, &alg, 4).is_lower_unitriangular());
        assert!(upper_unitriangular(&mut rng, &alg, 4).is_upper_unitriangular());
        assert!(elementary(&mut rng, &alg, 3, 5)
            .dieudonne_det()
            .unwrap()
            .is_trivial());
        assert!(!noncentral_unit(&mut rng, &alg).is_central());
        for kind in 0..4 {
            for n in 2..5 {
                let rel = relation(&mut rng, &alg, n, kind);
                assert!(crate::matrices::verify_relation(&rel).unwrap(), "{rel:?}");
            }
        }
        let one = Quaternion::one(&alg);
        let (w, cert) = word_case(&mut rng, &one, 3, 2, 2, &mut |r| {
            small_noncentral_unit(r, &alg)
        });
        assert!(w.eval(&one).is_one() && cert.verify());
        assert!(crate::wordcalc::lemma7_cert(&w, &cert, &one).unwrap().len() <= 3);
    }
}
