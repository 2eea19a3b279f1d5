//! Budgeted rewriting into the shape `H_{<=kappa} U V U`.
//!
//! A [`UvuForm`] stores `h * u1 * v * u2` where `h` is an explicit list of `h_{i,i+1}` factors,
//! `u1, u2` are upper unitriangular and `v` is lower unitriangular. Absorbing a factor on the
//! right keeps that shape and appends at most the documented number of `h` factors.

use crate::budget::{diagonal_commutator_factors, HFactors};
use crate::error::{Error, Result};
use crate::matrices::Matrix;
use crate::scalar::Scalar;
use crate::skewfield::Quaternion;

#[derive(Clone, Debug, PartialEq)]
pub struct UvuForm<F: Scalar> {
    pub h: HFactors<F>,
    pub u1: Matrix<F>,
    pub v: Matrix<F>,
    pub u2: Matrix<F>,
}

/// Which branch of the single-transvection absorption was taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbsorbCase {
    /// `xi = 0`.
    Trivial,
    /// `u2` has zero `(k, k+1)` entry; pure conjugation.
    Conjugation,
    /// `zeta xi != -1`: the Gauss relation on the `u2` side, two new `h` factors.
    Gauss,
    /// `eta zeta != -1`: the Gauss relation applied to `v t_{k,k+1}(zeta)` first.
    GaussThroughV,
    /// `zeta xi = eta zeta = -1`: the Weyl relation, no new `h` factors.
    Weyl,
}

fn neg<F: Scalar>(q: &Quaternion<F>) -> Quaternion<F> {
    -q
}

/// `t_{i,j}(-x) m t_{i,j}(x)`.
fn conj_transvection<F: Scalar>(
    m: &Matrix<F>,
    i: usize,
    j: usize,
    x: &Quaternion<F>,
) -> Result<Matrix<F>> {
    let mut out = m.clone();
    out.mul_transvection_left(i, j, &neg(x))?;
    out.mul_transvection_right(i, j, x)?;
    Ok(out)
}

fn right_t<F: Scalar>(m: &Matrix<F>, i: usize, j: usize, x: &Quaternion<F>) -> Result<Matrix<F>> {
    let mut out = m.clone();
    out.mul_transvection_right(i, j, x)?;
    Ok(out)
}

fn left_t<F: Scalar>(m: &Matrix<F>, i: usize, j: usize, x: &Quaternion<F>) -> Result<Matrix<F>> {
    let mut out = m.clone();
    out.mul_transvection_left(i, j, x)?;
    Ok(out)
}

/// Diagonal with `a` at `k`, `b` at `k + 1` and ones elsewhere.
fn two_slot<F: Scalar>(
    n: usize,
    k: usize,
    a: Quaternion<F>,
    b: Quaternion<F>,
) -> Vec<Quaternion<F>> {
    let mut d = vec![a.one_like(); n];
    d[k] = a;
    d[k + 1] = b;
    d
}

impl<F: Scalar> UvuForm<F> {
    pub fn identity(one: &Quaternion<F>, n: usize) -> Self {
        let id = Matrix::identity(one.algebra(), n);
        UvuForm {
            h: HFactors::new(n),
            u1: id.clone(),
            v: id.clone(),
            u2: id,
        }
    }

    pub fn n(&self) -> usize {
        self.u1.n()
    }

    fn one(&self) -> Quaternion<F> {
        Quaternion::one(self.u1.algebra())
    }

    /// `u1 * v * u2`.
    pub fn unipotent_part(&self) -> Result<Matrix<F>> {
        self.u1.try_mul(&self.v)?.try_mul(&self.u2)
    }

    pub fn eval(&self) -> Result<Matrix<F>> {
        let d = self.h.eval_diagonal(&self.one())?;
        Matrix::diag(self.u1.algebra(), &d).try_mul(&self.unipotent_part()?)
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.u1.is_upper_unitriangular()
            && self.v.is_lower_unitriangular()
            && self.u2.is_upper_unitriangular()
        {
            Ok(())
        } else {
            Err(Error::Internal(
                "UVU form lost its unitriangular shape".into(),
            ))
        }
    }

    /// Conjugates the unipotent part by the diagonal `d`, entrywise.
    fn conjugate_by_diagonal(
        &self,
        d: &[Quaternion<F>],
    ) -> Result<(Matrix<F>, Matrix<F>, Matrix<F>)> {
        Ok((
            self.u1.conjugate_by_diagonal(d)?,
            self.v.conjugate_by_diagonal(d)?,
            self.u2.conjugate_by_diagonal(d)?,
        ))
    }

    /// Right multiplication by the upper unitriangular `u`.
    pub fn absorb_u(&self, u: &Matrix<F>) -> Result<Self> {
        if !u.is_upper_unitriangular() {
            return Err(Error::Precondition(
                "absorb_u needs an upper unitriangular matrix".into(),
            ));
        }
        let mut out = self.clone();
        out.u2 = out.u2.try_mul(u)?;
        Ok(out)
    }

    /// Right multiplication by `t_{k+1,k}(xi)` (zero-based `k`), adding at most two factors
    /// `h_{k,k+1}`.
    pub fn absorb_lower_transvection(&self, k: usize, xi: &Quaternion<F>) -> Result<Self> {
        Ok(self.absorb_lower_transvection_case(k, xi)?.0)
    }

    pub fn absorb_lower_transvection_case(
        &self,
        k: usize,
        xi: &Quaternion<F>,
    ) -> Result<(Self, AbsorbCase)> {
        let n = self.n();
        if k + 1 >= n {
            return Err(Error::InvalidIndex(format!(
                "lower transvection index {k} in dimension {n}"
            )));
        }
        if xi.is_zero() {
            return Ok((self.clone(), AbsorbCase::Trivial));
        }
        let one = self.one();
        let (lo, hi) = (k + 1, k);
        let zeta = self.u2.get(k, k + 1).clone();
        let eta = self.v.get(k + 1, k).clone();

        let (out, case) = if zeta.is_zero() {
            let mut out = self.clone();
            out.v = right_t(&self.v, lo, hi, xi)?;
            out.u2 = conj_transvection(&self.u2, lo, hi, xi)?;
            (out, AbsorbCase::Conjugation)
        } else if !one.try_add(&zeta.try_mul(xi)?)?.is_zero() {
            // u2 t(xi) = u2' t_{k,k+1}(zeta) t_{k+1,k}(xi) with u2' in U_k, then the Gauss relation.
            let zx = one.try_add(&zeta.try_mul(xi)?)?;
            let xz = one.try_add(&xi.try_mul(&zeta)?)?;
            let u2p = right_t(&self.u2, hi, lo, &neg(&zeta))?;
            let d = two_slot(n, k, zx.clone(), xz.inv()?);
            let c = xz.try_mul(xi)?;
            let e = zx.inv()?.try_mul(&zeta)?;
            let mut h = self.h.clone();
            h.push(k, zeta.clone())?;
            h.push(k, zeta.inv()?.try_add(xi)?)?;
            let (u1, v, w) = UvuForm {
                h: HFactors::new(n),
                u1: self.u1.clone(),
                v: self.v.clone(),
                u2: u2p,
            }
            .conjugate_by_diagonal(&d)?;
            let v = right_t(&v, lo, hi, &c)?;
            let u2 = right_t(&conj_transvection(&w, lo, hi, &c)?, hi, lo, &e)?;
            (UvuForm { h, u1, v, u2 }, AbsorbCase::Gauss)
        } else if !one.try_add(&eta.try_mul(&zeta)?)?.is_zero() {
            // Rewrite u1 v t_{k,k+1}(zeta) as D' U' V', then absorb t(xi) by conjugation.
            let u2p = right_t(&self.u2, hi, lo, &neg(&zeta))?;
            let w = conj_transvection(&u2p, hi, lo, &zeta)?;
            let mut h = self.h.clone();
            let (u1n, vn) = if eta.is_zero() {
                (
                    right_t(&self.u1, hi, lo, &zeta)?,
                    conj_transvection(&self.v, hi, lo, &zeta)?,
                )
            } else {
                let ez = one.try_add(&eta.try_mul(&zeta)?)?;
                let ze = one.try_add(&zeta.try_mul(&eta)?)?;
                let vp = right_t(&self.v, lo, hi, &neg(&eta))?;
                let d = two_slot(n, k, ze.inv()?, ez.clone());
                // h_{k+1,k}(x) = h_{k,k+1}(x^-1).
                h.push(k, eta.inv()?)?;
                h.push(k, eta.inv()?.try_add(&zeta)?.inv()?)?;
                let c = ze.try_mul(&zeta)?;
                let e = ez.inv()?.try_mul(&eta)?;
                let u1d = self.u1.conjugate_by_diagonal(&d)?;
                let vd = vp.conjugate_by_diagonal(&d)?;
                (
                    right_t(&u1d, hi, lo, &c)?,
                    right_t(&conj_transvection(&vd, hi, lo, &c)?, lo, hi, &e)?,
                )
            };
            let v = right_t(&vn, lo, hi, xi)?;
            let u2 = conj_transvection(&w, lo, hi, xi)?;
            (UvuForm { h, u1: u1n, v, u2 }, AbsorbCase::GaussThroughV)
        } else {
            // zeta = -xi^-1 and eta = xi: the Weyl relation.
            let vp = right_t(&self.v, lo, hi, &neg(&eta))?;
            let u2p = right_t(&self.u2, hi, lo, &neg(&zeta))?;
            let u1 = right_t(&self.u1, hi, lo, &zeta)?;
            let v = right_t(&conj_transvection(&vp, hi, lo, &zeta)?, lo, hi, xi)?;
            let inner = conj_transvection(&conj_transvection(&u2p, hi, lo, &zeta)?, lo, hi, xi)?;
            let u2 = left_t(&inner, hi, lo, &zeta)?;
            (
                UvuForm {
                    h: self.h.clone(),
                    u1,
                    v,
                    u2,
                },
                AbsorbCase::Weyl,
            )
        };
        out.check_shape()?;
        Ok((out, case))
    }

    /// Right multiplication by a lower unitriangular `v`, adding at most `lambda` factors.
    pub fn absorb_v(&self, v: &Matrix<F>) -> Result<Self> {
        let mut out = self.clone();
        for (k, xi) in factor_lower_unitriangular(v)? {
            out = out.absorb_lower_transvection(k, &xi)?;
        }
        Ok(out)
    }

    /// Right multiplication by another form, costing one `absorb_v`.
    pub fn absorb_form(&self, other: &Self) -> Result<Self> {
        let one = self.one();
        let d = other.h.eval_diagonal(&one)?;
        let (u1, v, u2) = self.conjugate_by_diagonal(&d)?;
        let mut h = self.h.clone();
        h.extend(&other.h);
        let merged = UvuForm {
            h,
            u1,
            v,
            u2: u2.try_mul(&other.u1)?,
        };
        merged.absorb_v(&other.v)?.absorb_u(&other.u2)
    }
}

/// Writes a lower unitriangular matrix as an ordered product of `t_{k+1,k}(xi)`, returned as
/// `(k, xi)` pairs with zero-based `k`.
///
/// Rows are cleared from the bottom with right column operations. A row `(x_0, ..., x_{r-1}, 1)`
/// is swept left to right, each `x_j` killed against `x_{j+1}`; a zero `x_{j+1}` is first made
/// nonzero by borrowing from the next nonzero entry to its right. Per row this uses index 0 at
/// most once and every other index at most twice, giving the counts `n - 1` for `k = 1` and
/// `2(n - k)` for `k >= 2` (one-based), which are checked before returning.
pub fn factor_lower_unitriangular<F: Scalar>(v: &Matrix<F>) -> Result<Vec<(usize, Quaternion<F>)>> {
    if !v.is_lower_unitriangular() {
        return Err(Error::Precondition(
            "factor_lower_unitriangular needs a lower unitriangular matrix".into(),
        ));
    }
    let n = v.n();
    let one = Quaternion::one(v.algebra());
    let mut m = v.clone();
    let mut ops: Vec<(usize, Quaternion<F>)> = Vec::new();
    for r in (1..n).rev() {
        for j in 0..r {
            if m.get(r, j).is_zero() {
                continue;
            }
            if m.get(r, j + 1).is_zero() {
                let t = (j + 2..=r)
                    .find(|&t| !m.get(r, t).is_zero())
                    .expect("diagonal entry is one");
                for s in (j + 1..t).rev() {
                    m.mul_transvection_right(s + 1, s, &one)?;
                    ops.push((s, one.clone()));
                }
            }
            let s = neg(&m.get(r, j + 1).inv()?.try_mul(m.get(r, j))?);
            m.mul_transvection_right(j + 1, j, &s)?;
            ops.push((j, s));
        }
    }
    if !m.is_identity() {
        return Err(Error::Internal(
            "lower unitriangular factorization did not reach the identity".into(),
        ));
    }
    let mut counts = vec![0usize; n.saturating_sub(1)];
    for (k, _) in &ops {
        counts[*k] += 1;
    }
    for (k, &c) in counts.iter().enumerate() {
        let limit = if k == 0 { n - 1 } else { 2 * (n - 1 - k) };
        if c > limit {
            return Err(Error::Internal(format!(
                "index {} used {c} times, limit {limit}",
                k + 1
            )));
        }
    }
    Ok(ops.into_iter().rev().map(|(k, s)| (k, neg(&s))).collect())
}

/// `g = head * u1 * v * u2` with `head` diagonal.
///
/// Columns are cleared above the diagonal from the bottom right with left upper transvections,
/// which leaves a lower triangular matrix; a zero pivot is repaired by a right upper
/// transvection that adds an earlier column.
pub fn decompose_huvu<F: Scalar>(g: &Matrix<F>) -> Result<(Vec<Quaternion<F>>, UvuForm<F>)> {
    let n = g.n();
    let one = Quaternion::one(g.algebra());
    let mut c = g.clone();
    let mut e_inv = Matrix::identity(g.algebra(), n);
    let mut u2 = Matrix::identity(g.algebra(), n);
    for p in (0..n).rev() {
        if c.get(p, p).is_zero() {
            let q = (0..p)
                .find(|&q| !c.get(p, q).is_zero())
                .ok_or(Error::SingularMatrix)?;
            c.mul_transvection_right(q, p, &one)?;
            u2.mul_transvection_left(q, p, &neg(&one))?;
        }
        let pinv = c.get(p, p).inv()?;
        for i in 0..p {
            if c.get(i, p).is_zero() {
                continue;
            }
            let m = c.get(i, p).try_mul(&pinv)?;
            c.mul_transvection_left(i, p, &neg(&m))?;
            e_inv.mul_transvection_right(i, p, &m)?;
        }
    }
    let head = c.diagonal();
    let inv: Vec<_> = head.iter().map(|d| d.inv()).collect::<Result<_>>()?;
    let mut v = c.clone();
    for i in 0..n {
        for j in 0..=i {
            v.set(i, j, inv[i].try_mul(c.get(i, j))?);
        }
    }
    let u1 = e_inv.conjugate_by_diagonal(&head)?;
    let form = UvuForm {
        h: HFactors::new(n),
        u1,
        v,
        u2,
    };
    form.check_shape()?;
    Ok((head, form))
}

fn inverse_form<F: Scalar>(w: &UvuForm<F>) -> Result<(Matrix<F>, Matrix<F>, Matrix<F>)> {
    Ok((w.u2.inverse()?, w.v.inverse()?, w.u1.inverse()?))
}

fn entrywise<F: Scalar>(
    a: &[Quaternion<F>],
    b: &[Quaternion<F>],
    f: impl Fn(&Quaternion<F>, &Quaternion<F>) -> Result<Quaternion<F>>,
) -> Result<Vec<Quaternion<F>>> {
    a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Normal form of a single commutator `[x, y]`, within the budget `mu + 3 lambda`.
fn pair_form<F: Scalar>(x: &Matrix<F>, y: &Matrix<F>) -> Result<UvuForm<F>> {
    let (hx, wx) = decompose_huvu(x)?;
    let (hy, wy) = decompose_huvu(y)?;
    let mul = |a: &Quaternion<F>, b: &Quaternion<F>| a.try_mul(b);
    let s = entrywise(&hx, &hy, |a, b| a.commutator(b))?;
    let d1 = hx.clone();
    let d2 = entrywise(&hx, &hy, mul)?;
    let d3 = entrywise(&d2, &hx, |a, b| a.try_mul(&b.inv()?))?;
    // c_i = D_i^-1 S, so that D_i w D_i^-1 = S w^{c_i} S^-1.
    let c = |d: &[Quaternion<F>]| entrywise(d, &s, |a, b| a.inv()?.try_mul(b));
    let (c1, c2, c3) = (c(&d1)?, c(&d2)?, c(&d3)?);
    let conj = |(u1, v, u2): (Matrix<F>, Matrix<F>, Matrix<F>), d: &[Quaternion<F>]| -> Result<_> {
        Ok((
            u1.conjugate_by_diagonal(d)?,
            v.conjugate_by_diagonal(d)?,
            u2.conjugate_by_diagonal(d)?,
        ))
    };
    let words = [
        conj((wx.u1.clone(), wx.v.clone(), wx.u2.clone()), &c1)?,
        conj((wy.u1.clone(), wy.v.clone(), wy.u2.clone()), &c2)?,
        conj(inverse_form(&wx)?, &c2)?,
        conj(inverse_form(&wy)?, &c3)?,
    ];
    let h = diagonal_commutator_factors(&hx, &hy)?;
    let (u1, v, u2) = words[0].clone();
    let mut form = UvuForm { h, u1, v, u2 };
    for (wu1, wv, wu2) in &words[1..] {
        form = form.absorb_u(wu1)?.absorb_v(wv)?.absorb_u(wu2)?;
    }
    Ok(form)
}

/// Normal form of `[x_1, y_1] ... [x_p, y_p]` within the budget `kappa^p`.
pub fn commutator_normal_form<F: Scalar>(pairs: &[(Matrix<F>, Matrix<F>)]) -> Result<UvuForm<F>> {
    let (first, rest) = pairs.split_first().ok_or_else(|| {
        Error::Precondition("commutator_normal_form needs at least one pair".into())
    })?;
    let mut form = pair_form(&first.0, &first.1)?;
    for (x, y) in rest {
        form = form.absorb_form(&pair_form(x, y)?)?;
    }
    Ok(form)
}

/// The `h` factors of a form whose value is diagonal; the unipotent part must then be trivial.
pub fn extract_h<F: Scalar>(form: &UvuForm<F>) -> Result<HFactors<F>> {
    if !form.unipotent_part()?.is_identity() {
        return Err(Error::Internal(
            "diagonal UVU form with nontrivial unipotent part".into(),
        ));
    }
    Ok(form.h.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::{kappa_p, lambda_vec, KappaVec};
    use crate::skewfield::AlgebraParams;
    use crate::{MatD, Quat};

    fn q(w: i64, x: i64, y: i64, z: i64) -> Quat {
        Quaternion::from_i64(&AlgebraParams::hamilton(), w, x, y, z)
    }

    fn one() -> Quat {
        q(1, 0, 0, 0)
    }

    fn t(n: usize, i: usize, j: usize, x: &Quat) -> MatD {
        MatD::transvection(n, i, j, x).unwrap()
    }

    #[test]
    fn absorb_zero_is_noop() {
        let f = UvuForm::identity(&one(), 3);
        let (g, case) = f.absorb_lower_transvection_case(1, &q(0, 0, 0, 0)).unwrap();
        assert_eq!(g, f);
        assert_eq!(case, AbsorbCase::Trivial);
    }

    #[test]
    fn absorb_into_identity_lands_in_v() {
        let f = UvuForm::identity(&one(), 3);
        let xi = q(2, 1, 0, -1);
        let (g, case) = f.absorb_lower_transvection_case(0, &xi).unwrap();
        assert_eq!(case, AbsorbCase::Conjugation);
        assert!(g.h.is_empty());
        assert_eq!(g.v, t(3, 1, 0, &xi));
        assert!(g.u1.is_identity() && g.u2.is_identity());
    }

    #[test]
    fn gauss_case_two_by_two() {
        let mut f = UvuForm::identity(&one(), 2);
        f.u2 = t(2, 0, 1, &one());
        let (g, case) = f.absorb_lower_transvection_case(0, &one()).unwrap();
        assert_eq!(case, AbsorbCase::Gauss);
        let eps: Vec<Quat> = g.h.factors().iter().map(|f| f.eps.clone()).collect();
        assert_eq!(eps, vec![one(), q(2, 0, 0, 0)]);
        assert_eq!(g.eval().unwrap(), &f.eval().unwrap() * &t(2, 1, 0, &one()));
    }

    #[test]
    fn all_cases_preserve_value() {
        let xi = q(1, 1, 0, 2);
        let xi_inv = xi.inv().unwrap();
        let mut through_v = UvuForm::identity(&one(), 3);
        through_v.u2 = t(3, 1, 2, &-&xi_inv);
        through_v.v = t(3, 2, 1, &q(0, 1, 1, 0));
        let mut weyl = UvuForm::identity(&one(), 3);
        weyl.u1 = t(3, 0, 2, &q(1, 0, 3, 0));
        weyl.u2 = &t(3, 1, 2, &-&xi_inv) * &t(3, 0, 1, &q(0, 2, 0, 1));
        weyl.v = &t(3, 2, 1, &xi) * &t(3, 1, 0, &q(1, 1, 1, 1));
        let mut eta_zero = UvuForm::identity(&one(), 3);
        eta_zero.u2 = t(3, 1, 2, &-&xi_inv);
        eta_zero.v = t(3, 2, 0, &q(3, 0, 0, 1));
        for (form, expect) in [
            (through_v, AbsorbCase::GaussThroughV),
            (weyl, AbsorbCase::Weyl),
            (eta_zero, AbsorbCase::GaussThroughV),
        ] {
            let (g, case) = form.absorb_lower_transvection_case(1, &xi).unwrap();
            assert_eq!(case, expect);
            assert_eq!(g.eval().unwrap(), &form.eval().unwrap() * &t(3, 2, 1, &xi));
            assert!(g.h.kappa().le(&(&form.h.kappa() + &KappaVec(vec![0, 2]))));
        }
    }

    #[test]
    fn bidiagonal_factorization() {
        let mut v = MatD::identity(&AlgebraParams::hamilton(), 4);
        let xs = [q(1, 2, 0, 0), q(0, 0, 3, 1), q(5, 0, 0, 0)];
        for (k, x) in xs.iter().enumerate() {
            v.set(k + 1, k, x.clone());
        }
        let f = factor_lower_unitriangular(&v).unwrap();
        assert_eq!(
            f,
            vec![(0, xs[0].clone()), (1, xs[1].clone()), (2, xs[2].clone())]
        );
        assert!(
            factor_lower_unitriangular(&MatD::identity(&AlgebraParams::hamilton(), 3))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn alternative_four_factor_pattern() {
        // The product t21(x-1) t32(y) t21(1) t32(z-y) equals the lower matrix with entries
        // x, y, z below the diagonal; our factorization may differ but must multiply to the same.
        let (x, y, z) = (q(2, 1, 0, 0), q(0, 1, 1, 1), q(3, 0, -1, 0));
        let mut v = MatD::identity(&AlgebraParams::hamilton(), 3);
        v.set(1, 0, x.clone());
        v.set(2, 0, y.clone());
        v.set(2, 1, z.clone());
        let pattern = [
            t(3, 1, 0, &(&x - &one())),
            t(3, 2, 1, &y),
            t(3, 1, 0, &one()),
            t(3, 2, 1, &(&z - &y)),
        ];
        let prod = pattern
            .iter()
            .skip(1)
            .fold(pattern[0].clone(), |acc, m| &acc * m);
        assert_eq!(prod, v);
        let ours = factor_lower_unitriangular(&v).unwrap();
        let prod = ours.iter().fold(
            MatD::identity(&AlgebraParams::hamilton(), 3),
            |acc, (k, s)| &acc * &t(3, k + 1, *k, s),
        );
        assert_eq!(prod, v);
    }

    #[test]
    fn absorb_v_budget() {
        let mut f = UvuForm::identity(&one(), 3);
        f.u1 = &t(3, 0, 1, &q(1, 1, 0, 0)) * &t(3, 1, 2, &q(0, 0, 2, 1));
        f.u2 = &t(3, 0, 2, &q(2, 0, 0, 1)) * &t(3, 0, 1, &q(0, 1, 0, 0));
        let mut v = MatD::identity(&AlgebraParams::hamilton(), 3);
        v.set(1, 0, q(1, 0, 1, 0));
        v.set(2, 0, q(0, 0, 0, 2));
        v.set(2, 1, q(1, -1, 0, 0));
        let g = f.absorb_v(&v).unwrap();
        assert_eq!(g.eval().unwrap(), &f.eval().unwrap() * &v);
        assert!(g.h.kappa().le(&lambda_vec(3)));
        let unchanged = f
            .absorb_v(&MatD::identity(&AlgebraParams::hamilton(), 3))
            .unwrap();
        assert_eq!(unchanged, f);
        let from_id = UvuForm::identity(&one(), 3).absorb_v(&v).unwrap();
        assert!(from_id.h.is_empty());
        assert_eq!(from_id.v, v);
    }

    #[test]
    fn decompose_simple_inputs() {
        let alg = AlgebraParams::hamilton();
        let d = vec![q(1, 1, 0, 0), q(0, 0, 2, 0), q(3, 0, 0, 0)];
        let (head, form) = decompose_huvu(&MatD::diag(&alg, &d)).unwrap();
        assert_eq!(head, d);
        assert!(form.unipotent_part().unwrap().is_identity());
        let (head, form) = decompose_huvu(&t(3, 1, 0, &q(1, 2, 3, 4))).unwrap();
        assert!(head.iter().all(|e| e.is_one()));
        assert_eq!(form.v, t(3, 1, 0, &q(1, 2, 3, 4)));
        // Antidiagonal input needs the zero-pivot repair.
        let w = MatD::from_rows(
            &alg,
            vec![
                vec![q(0, 0, 0, 0), q(0, 1, 0, 0)],
                vec![q(2, 0, 0, 0), q(0, 0, 0, 0)],
            ],
        )
        .unwrap();
        let (head, form) = decompose_huvu(&w).unwrap();
        assert_eq!(
            &MatD::diag(&alg, &head) * &form.unipotent_part().unwrap(),
            w
        );
    }

    #[test]
    fn single_diagonal_commutator() {
        let alg = AlgebraParams::hamilton();
        let (a, b) = (q(1, 2, 0, 0), q(0, 1, 1, 3));
        let x = MatD::diag(&alg, &[a.clone(), one(), one()]);
        let y = MatD::diag(&alg, &[b.clone(), one(), one()]);
        let f = commutator_normal_form(&[(x.clone(), y.clone())]).unwrap();
        assert_eq!(
            f.eval().unwrap(),
            MatD::diag(&alg, &[a.commutator(&b).unwrap(), one(), one()])
        );
        assert!(f.h.kappa().le(&kappa_p(1, 3)));
        let h = extract_h(&f).unwrap();
        assert_eq!(h.eval(&one()).unwrap(), x.commutator(&y).unwrap());
    }

    #[test]
    fn trivial_pair() {
        let id = MatD::identity(&AlgebraParams::hamilton(), 3);
        let f = commutator_normal_form(&[(id.clone(), id.clone())]).unwrap();
        assert!(f.h.is_empty());
        assert!(f.eval().unwrap().is_identity());
        assert!(extract_h(&f).unwrap().is_empty());
    }

    #[test]
    fn corrupted_form_is_rejected() {
        let mut f = UvuForm::identity(&one(), 3);
        f.u1 = t(3, 0, 1, &one());
        f.u2 = t(3, 0, 2, &one());
        assert!(matches!(extract_h(&f), Err(Error::Internal(_))));
    }
}
