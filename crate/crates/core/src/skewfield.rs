//! Quaternion algebras `(a, b | F)` over an exact field.
//!
//! Elements are written `w + x i + y j + z k` with `i^2 = a`, `j^2 = b` and `ij = -ji = k`.
//! When the norm form is anisotropic (for instance `a, b < 0` over the rationals) the algebra
//! is a skew-field, which is the setting all higher modules assume.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{solve_linear, Scalar};

/// Structure constants of a quaternion algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraParams<F: Scalar> {
    a: F,
    b: F,
}

impl<F: Scalar> AlgebraParams<F> {
    pub fn new(a: F, b: F) -> Result<Arc<Self>> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::InvalidAlgebra("a and b must be nonzero".into()));
        }
        Ok(Arc::new(AlgebraParams { a, b }))
    }

    /// The Hamilton quaternions `(-1, -1 | F)`.
    pub fn hamilton() -> Arc<Self> {
        Arc::new(AlgebraParams {
            a: -F::one(),
            b: -F::one(),
        })
    }

    pub fn a(&self) -> &F {
        &self.a
    }

    pub fn b(&self) -> &F {
        &self.b
    }

    /// True when `a < 0` and `b < 0`: the norm form is positive definite and the algebra is
    /// guaranteed to be a division algebra. Other parameters are accepted, and a zero divisor
    /// surfaces as [`Error::NotDivisionAlgebra`] the first time an inversion fails.
    pub fn is_definite(&self) -> bool {
        self.a.is_negative() && self.b.is_negative()
    }
}

fn same_algebra<F: Scalar>(p: &Arc<AlgebraParams<F>>, q: &Arc<AlgebraParams<F>>) -> bool {
    Arc::ptr_eq(p, q) || **p == **q
}

/// An element of a quaternion algebra.
#[derive(Clone)]
pub struct Quaternion<F: Scalar> {
    w: F,
    x: F,
    y: F,
    z: F,
    alg: Arc<AlgebraParams<F>>,
}

impl<F: Scalar> Quaternion<F> {
    pub fn new(alg: &Arc<AlgebraParams<F>>, w: F, x: F, y: F, z: F) -> Self {
        Quaternion {
            w,
            x,
            y,
            z,
            alg: Arc::clone(alg),
        }
    }

    pub fn scalar(alg: &Arc<AlgebraParams<F>>, t: F) -> Self {
        Self::new(alg, t, F::zero(), F::zero(), F::zero())
    }

    pub fn zero(alg: &Arc<AlgebraParams<F>>) -> Self {
        Self::scalar(alg, F::zero())
    }

    pub fn one(alg: &Arc<AlgebraParams<F>>) -> Self {
        Self::scalar(alg, F::one())
    }

    pub fn i(alg: &Arc<AlgebraParams<F>>) -> Self {
        Self::new(alg, F::zero(), F::one(), F::zero(), F::zero())
    }

    pub fn j(alg: &Arc<AlgebraParams<F>>) -> Self {
        Self::new(alg, F::zero(), F::zero(), F::one(), F::zero())
    }

    pub fn k(alg: &Arc<AlgebraParams<F>>) -> Self {
        Self::new(alg, F::zero(), F::zero(), F::zero(), F::one())
    }

    pub fn from_i64(alg: &Arc<AlgebraParams<F>>, w: i64, x: i64, y: i64, z: i64) -> Self {
        let c = |v: i64| F::from_i64(v).expect("scalar from i64");
        Self::new(alg, c(w), c(x), c(y), c(z))
    }

    pub fn algebra(&self) -> &Arc<AlgebraParams<F>> {
        &self.alg
    }

    pub fn coords(&self) -> [&F; 4] {
        [&self.w, &self.x, &self.y, &self.z]
    }

    pub fn zero_like(&self) -> Self {
        Self::zero(&self.alg)
    }

    pub fn one_like(&self) -> Self {
        Self::one(&self.alg)
    }

    /// The central element `t` of the same algebra.
    pub fn central(&self, t: F) -> Self {
        Self::scalar(&self.alg, t)
    }

    pub fn is_zero(&self) -> bool {
        self.w.is_zero() && self.is_central()
    }

    pub fn is_one(&self) -> bool {
        self.w.is_one() && self.is_central()
    }

    /// Central elements are exactly the scalars.
    pub fn is_central(&self) -> bool {
        self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }

    pub fn conj(&self) -> Self {
        Quaternion {
            w: self.w.clone(),
            x: -self.x.clone(),
            y: -self.y.clone(),
            z: -self.z.clone(),
            alg: Arc::clone(&self.alg),
        }
    }

    /// Reduced norm `q * conj(q) = w^2 - a x^2 - b y^2 + ab z^2`.
    pub fn nrd(&self) -> F {
        let (a, b) = (&self.alg.a, &self.alg.b);
        let sq = |v: &F| v.clone() * v.clone();
        sq(&self.w) - a.clone() * sq(&self.x) - b.clone() * sq(&self.y)
            + a.clone() * b.clone() * sq(&self.z)
    }

    /// Reduced trace `q + conj(q) = 2w`.
    pub fn trd(&self) -> F {
        self.w.clone() + self.w.clone()
    }

    pub fn scale(&self, t: &F) -> Self {
        Quaternion {
            w: self.w.clone() * t.clone(),
            x: self.x.clone() * t.clone(),
            y: self.y.clone() * t.clone(),
            z: self.z.clone() * t.clone(),
            alg: Arc::clone(&self.alg),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_algebra(&self.alg, &other.alg) {
            Ok(())
        } else {
            Err(Error::MismatchedAlgebra)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Quaternion {
            w: self.w.clone() + other.w.clone(),
            x: self.x.clone() + other.x.clone(),
            y: self.y.clone() + other.y.clone(),
            z: self.z.clone() + other.z.clone(),
            alg: Arc::clone(&self.alg),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_central() {
            return Ok(other.scale(&self.w));
        }
        if other.is_central() {
            return Ok(self.scale(&other.w));
        }
        let (a, b) = (&self.alg.a, &self.alg.b);
        let ab = a.clone() * b.clone();
        let (w1, x1, y1, z1) = (&self.w, &self.x, &self.y, &self.z);
        let (w2, x2, y2, z2) = (&other.w, &other.x, &other.y, &other.z);
        let m = |p: &F, q: &F| p.clone() * q.clone();
        let w = m(w1, w2) + a.clone() * m(x1, x2) + b.clone() * m(y1, y2) - ab * m(z1, z2);
        let x = m(w1, x2) + m(x1, w2) + b.clone() * (m(z1, y2) - m(y1, z2));
        let y = m(w1, y2) + m(y1, w2) + a.clone() * (m(x1, z2) - m(z1, x2));
        let z = m(w1, z2) + m(z1, w2) + m(x1, y2) - m(y1, x2);
        Ok(Quaternion {
            w,
            x,
            y,
            z,
            alg: Arc::clone(&self.alg),
        })
    }

    /// `conj(q) / nrd(q)`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let n = self.nrd();
        if n.is_zero() {
            return Err(Error::NotDivisionAlgebra(self.to_string()));
        }
        Ok(self.conj().scale(&(F::one() / n)))
    }

    /// Group commutator `x y x^-1 y^-1`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let xi = self.inv()?;
        let yi = other.inv()?;
        self.try_mul(other)?.try_mul(&xi)?.try_mul(&yi)
    }

    /// Conjugate `c^-1 self c`.
    pub fn conjugate_by(&self, c: &Self) -> Result<Self> {
        c.inv()?.try_mul(self)?.try_mul(c)
    }
}

/// Solves `x - p x q = r` for `x`.
///
/// The map `x -> x - p x q` is linear over the centre, so the equation becomes a 4x4 system in
/// the coordinates of `x`. It is invertible whenever `nrd(p) nrd(q) != 1`. The solution is
/// substituted back before it is returned.
pub fn solve_twisted<F: Scalar>(
    p: &Quaternion<F>,
    q: &Quaternion<F>,
    r: &Quaternion<F>,
) -> Result<Quaternion<F>> {
    p.check(q)?;
    p.check(r)?;
    let alg = &p.alg;
    let basis = [
        Quaternion::one(alg),
        Quaternion::i(alg),
        Quaternion::j(alg),
        Quaternion::k(alg),
    ];
    let mut columns = Vec::with_capacity(4);
    for e in &basis {
        let image = e.try_sub(&p.try_mul(e)?.try_mul(q)?)?;
        columns.push([image.w, image.x, image.y, image.z]);
    }
    let rows: Vec<Vec<F>> = (0..4)
        .map(|row| (0..4).map(|col| columns[col][row].clone()).collect())
        .collect();
    let rhs = vec![r.w.clone(), r.x.clone(), r.y.clone(), r.z.clone()];
    let sol = solve_linear(rows, rhs).ok_or(Error::SingularTwisted)?;
    let mut it = sol.into_iter();
    let x = Quaternion::new(
        alg,
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    );
    let check = x.try_sub(&p.try_mul(&x)?.try_mul(q)?)?;
    if check != *r {
        return Err(Error::Internal("twisted solve failed substitution".into()));
    }
    Ok(x)
}

impl<F: Scalar> PartialEq for Quaternion<F> {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w
            && self.x == other.x
            && self.y == other.y
            && self.z == other.z
            && same_algebra(&self.alg, &other.alg)
    }
}

impl<F: Scalar> fmt::Debug for Quaternion<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quaternion({self})")
    }
}

impl<F: Scalar> fmt::Display for Quaternion<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i + {}j + {}k", self.w, self.x, self.y, self.z)
    }
}

// Operator forms panic on mismatched algebras; use the `try_*` methods to get an error.

impl<F: Scalar> Mul for &Quaternion<F> {
    type Output = Quaternion<F>;
    fn mul(self, rhs: Self) -> Quaternion<F> {
        self.try_mul(rhs)
            .expect("quaternion product across algebras")
    }
}

impl<F: Scalar> Add for &Quaternion<F> {
    type Output = Quaternion<F>;
    fn add(self, rhs: Self) -> Quaternion<F> {
        self.try_add(rhs).expect("quaternion sum across algebras")
    }
}

impl<F: Scalar> Sub for &Quaternion<F> {
    type Output = Quaternion<F>;
    fn sub(self, rhs: Self) -> Quaternion<F> {
        self.try_sub(rhs)
            .expect("quaternion difference across algebras")
    }
}

impl<F: Scalar> Neg for &Quaternion<F> {
    type Output = Quaternion<F>;
    fn neg(self) -> Quaternion<F> {
        self.scale(&-F::one())
    }
}
