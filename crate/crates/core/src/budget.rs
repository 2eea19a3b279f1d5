//! Multiplicity budgets for products of `h_{i,i+1}(eps)` factors.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::matrices::Matrix;
use crate::scalar::Scalar;
use crate::skewfield::Quaternion;

/// A vector in `N_0^{n-1}`, ordered componentwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KappaVec(pub Vec<u64>);

impl KappaVec {
    pub fn zero(len: usize) -> Self {
        KappaVec(vec![0; len])
    }

    /// The unit vector `e_k` (zero-based `k`).
    pub fn unit(len: usize, k: usize) -> Self {
        let mut v = Self::zero(len);
        v.0[k] = 1;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, t: u64) -> Self {
        KappaVec(self.0.iter().map(|v| v * t).collect())
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Add for &KappaVec {
    type Output = KappaVec;
    fn add(self, rhs: &KappaVec) -> KappaVec {
        assert_eq!(
            self.0.len(),
            rhs.0.len(),
            "kappa vectors of different length"
        );
        KappaVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for KappaVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `lambda_1 = 2(n-1)`, `lambda_i = 4(n-i)` for `2 <= i <= n-1`.
pub fn lambda_vec(n: usize) -> KappaVec {
    assert!(n >= 2);
    let n = n as u64;
    KappaVec(
        (1..n)
            .map(|i| if i == 1 { 2 * (n - 1) } else { 4 * (n - i) })
            .collect(),
    )
}

/// `mu = (6, 3, ..., 3)`.
pub fn mu_vec(n: usize) -> KappaVec {
    assert!(n >= 2);
    KappaVec((1..n).map(|i| if i == 1 { 6 } else { 3 }).collect())
}

/// `kappa^p = p mu + (4p - 1) lambda`.
pub fn kappa_p(p: u64, n: usize) -> KappaVec {
    assert!(p >= 1);
    &mu_vec(n).scaled(p) + &lambda_vec(n).scaled(4 * p - 1)
}

/// `s(kappa) = max(0, kappa_1 - 2) + sum_{i >= 2} max(0, kappa_i - 1)`.
pub fn s_of(kappa: &KappaVec) -> u64 {
    kappa
        .0
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            if i == 0 {
                k.saturating_sub(2)
            } else {
                k.saturating_sub(1)
            }
        })
        .sum()
}

/// One factor `h_{index, index+1}(eps)`, zero-based index.
#[derive(Clone, Debug, PartialEq)]
pub struct HFactor<F: Scalar> {
    pub index: usize,
    pub eps: Quaternion<F>,
}

/// An ordered product of `h_{i,i+1}` factors in dimension `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HFactors<F: Scalar> {
    n: usize,
    factors: Vec<HFactor<F>>,
}

impl<F: Scalar> HFactors<F> {
    pub fn new(n: usize) -> Self {
        HFactors {
            n,
            factors: Vec::new(),
        }
    }

    pub fn from_factors(n: usize, factors: Vec<HFactor<F>>) -> Result<Self> {
        let mut out = Self::new(n);
        for f in factors {
            out.push(f.index, f.eps)?;
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[HFactor<F>] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn push(&mut self, index: usize, eps: Quaternion<F>) -> Result<()> {
        if index + 1 >= self.n {
            return Err(Error::InvalidIndex(format!(
                "h factor index {index} in dimension {}",
                self.n
            )));
        }
        if eps.is_zero() {
            return Err(Error::ZeroInverse);
        }
        self.factors.push(HFactor { index, eps });
        Ok(())
    }

    pub fn extend(&mut self, other: &Self) {
        assert_eq!(self.n, other.n);
        self.factors.extend(other.factors.iter().cloned());
    }

    /// Per-index factor counts.
    pub fn kappa(&self) -> KappaVec {
        let mut k = KappaVec::zero(self.n - 1);
        for f in &self.factors {
            k.0[f.index] += 1;
        }
        k
    }

    /// Diagonal entries of the ordered product. Position `i` accumulates `eps` from index `i`
    /// and `eps^-1` from index `i - 1`, in list order.
    pub fn eval_diagonal(&self, one: &Quaternion<F>) -> Result<Vec<Quaternion<F>>> {
        let mut d = vec![one.clone(); self.n];
        for f in &self.factors {
            d[f.index] = d[f.index].try_mul(&f.eps)?;
            d[f.index + 1] = d[f.index + 1].try_mul(&f.eps.inv()?)?;
        }
        Ok(d)
    }

    pub fn eval(&self, one: &Quaternion<F>) -> Result<Matrix<F>> {
        Ok(Matrix::diag(one.algebra(), &self.eval_diagonal(one)?))
    }
}

/// Factors the commutator of two diagonal matrices into `h_{i,i+1}` factors with per-index
/// counts bounded by `mu`.
///
/// Slot 1 uses `diag([xi, zeta], 1) = h(xi) h(zeta) h(xi^-1 zeta^-1)` at index 1. Slot `p >= 2`
/// uses `h(xi^-1) h(zeta^-1) h(zeta xi)` at index `p - 1`, which leaves slot `p - 1` untouched and
/// puts `[xi, zeta]` in slot `p`. Trivial slots are skipped.
pub fn h_commutator_factors<F: Scalar>(h1: &Matrix<F>, h2: &Matrix<F>) -> Result<HFactors<F>> {
    if !h1.is_diagonal() || !h2.is_diagonal() || h1.n() != h2.n() {
        return Err(Error::Precondition(
            "h_commutator_factors needs diagonal matrices of equal size".into(),
        ));
    }
    diagonal_commutator_factors(&h1.diagonal(), &h2.diagonal())
}

pub(crate) fn diagonal_commutator_factors<F: Scalar>(
    a: &[Quaternion<F>],
    b: &[Quaternion<F>],
) -> Result<HFactors<F>> {
    let n = a.len();
    let mut out = HFactors::new(n);
    for p in 0..n {
        let (xi, zeta) = (&a[p], &b[p]);
        if xi.commutator(zeta)?.is_one() {
            continue;
        }
        let (xi_inv, zeta_inv) = (xi.inv()?, zeta.inv()?);
        if p == 0 {
            out.push(0, xi.clone())?;
            out.push(0, zeta.clone())?;
            out.push(0, xi_inv.try_mul(&zeta_inv)?)?;
        } else {
            out.push(p - 1, xi_inv)?;
            out.push(p - 1, zeta_inv)?;
            out.push(p - 1, zeta.try_mul(xi)?)?;
        }
    }
    let got = out.eval_diagonal(&a[0].one_like())?;
    for p in 0..n {
        if got[p] != a[p].commutator(&b[p])? {
            return Err(Error::Internal(format!(
                "diagonal commutator factorization wrong at slot {p}"
            )));
        }
    }
    Ok(out)
}
