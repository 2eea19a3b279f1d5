//! Square matrices over a quaternion skew-field.
//!
//! Indices are zero-based throughout the Rust API. `transvection(n, i, j, xi)` is the identity
//! plus `xi` at position `(i, j)`; `h_elem(n, i, j, eps)` is diagonal with `eps` at `i` and
//! `eps^-1` at `j`.

use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::skewfield::{AlgebraParams, Quaternion};

#[derive(Clone, PartialEq)]
pub struct Matrix<F: Scalar> {
    n: usize,
    entries: Vec<Quaternion<F>>,
    alg: Arc<AlgebraParams<F>>,
}

impl<F: Scalar> Matrix<F> {
    pub fn identity(alg: &Arc<AlgebraParams<F>>, n: usize) -> Self {
        let mut m = Self::zeros(alg, n);
        for i in 0..n {
            m.entries[i * n + i] = Quaternion::one(alg);
        }
        m
    }

    pub fn zeros(alg: &Arc<AlgebraParams<F>>, n: usize) -> Self {
        Matrix {
            n,
            entries: vec![Quaternion::zero(alg); n * n],
            alg: Arc::clone(alg),
        }
    }

    pub fn from_rows(alg: &Arc<AlgebraParams<F>>, rows: Vec<Vec<Quaternion<F>>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row of length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            for q in row {
                if **q.algebra() != **alg {
                    return Err(Error::MismatchedAlgebra);
                }
                entries.push(q);
            }
        }
        Ok(Matrix {
            n,
            entries,
            alg: Arc::clone(alg),
        })
    }

    pub fn diag(alg: &Arc<AlgebraParams<F>>, d: &[Quaternion<F>]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(alg, n);
        for (i, e) in d.iter().enumerate() {
            m.entries[i * n + i] = e.clone();
        }
        m
    }

    /// `t_{i,j}(xi)`.
    pub fn transvection(n: usize, i: usize, j: usize, xi: &Quaternion<F>) -> Result<Self> {
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidIndex(format!(
                "transvection ({i}, {j}) in dimension {n}"
            )));
        }
        let mut m = Self::identity(xi.algebra(), n);
        m.entries[i * n + j] = xi.clone();
        Ok(m)
    }

    /// `h_{i,j}(eps)`.
    pub fn h_elem(n: usize, i: usize, j: usize, eps: &Quaternion<F>) -> Result<Self> {
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidIndex(format!(
                "h ({i}, {j}) in dimension {n}"
            )));
        }
        let inv = eps.inv()?;
        let mut m = Self::identity(eps.algebra(), n);
        m.entries[i * n + i] = eps.clone();
        m.entries[j * n + j] = inv;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn algebra(&self) -> &Arc<AlgebraParams<F>> {
        &self.alg
    }

    pub fn get(&self, i: usize, j: usize) -> &Quaternion<F> {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, q: Quaternion<F>) {
        self.entries[i * self.n + j] = q;
    }

    pub fn rows(&self) -> Vec<Vec<Quaternion<F>>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<Quaternion<F>> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn identity_like(&self) -> Self {
        Self::identity(&self.alg, self.n)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.n, self.n, other.n, other.n
            )));
        }
        let n = self.n;
        let mut out = Self::zeros(&self.alg, n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = if a.is_one() { b.clone() } else { a.try_mul(b)? };
                    let cell = &mut out.entries[i * n + j];
                    *cell = if cell.is_zero() {
                        prod
                    } else {
                        cell.try_add(&prod)?
                    };
                }
            }
        }
        Ok(out)
    }

    /// In place `self <- self * t_{i,j}(xi)`: column `j` gains column `i` times `xi`.
    pub fn mul_transvection_right(&mut self, i: usize, j: usize, xi: &Quaternion<F>) -> Result<()> {
        if xi.is_zero() {
            return Ok(());
        }
        for r in 0..self.n {
            let a = self.get(r, i);
            if a.is_zero() {
                continue;
            }
            let add = a.try_mul(xi)?;
            let cell = &mut self.entries[r * self.n + j];
            *cell = cell.try_add(&add)?;
        }
        Ok(())
    }

    /// In place `self <- t_{i,j}(xi) * self`: row `i` gains `xi` times row `j`.
    pub fn mul_transvection_left(&mut self, i: usize, j: usize, xi: &Quaternion<F>) -> Result<()> {
        if xi.is_zero() {
            return Ok(());
        }
        for c in 0..self.n {
            let b = self.get(j, c);
            if b.is_zero() {
                continue;
            }
            let add = xi.try_mul(b)?;
            let cell = &mut self.entries[i * self.n + c];
            *cell = cell.try_add(&add)?;
        }
        Ok(())
    }

    /// Inverse by Gauss-Jordan elimination with left multiplications, so the order of the
    /// noncommuting scalar factors is respected.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.rows();
        let mut inv = Self::identity(&self.alg, n).rows();
        for p in 0..n {
            let pivot = (p..n)
                .find(|&r| !a[r][p].is_zero())
                .ok_or(Error::SingularMatrix)?;
            a.swap(p, pivot);
            inv.swap(p, pivot);
            let s = a[p][p].inv()?;
            for c in 0..n {
                a[p][c] = s.try_mul(&a[p][c])?;
                inv[p][c] = s.try_mul(&inv[p][c])?;
            }
            for r in 0..n {
                if r == p || a[r][p].is_zero() {
                    continue;
                }
                let m = a[r][p].clone();
                for c in 0..n {
                    if !a[p][c].is_zero() {
                        a[r][c] = a[r][c].try_sub(&m.try_mul(&a[p][c])?)?;
                    }
                    if !inv[p][c].is_zero() {
                        inv[r][c] = inv[r][c].try_sub(&m.try_mul(&inv[p][c])?)?;
                    }
                }
            }
        }
        Self::from_rows(&self.alg, inv)
    }

    /// `c^-1 * self * c`.
    pub fn conjugate(&self, c: &Self) -> Result<Self> {
        c.inverse()?.try_mul(self)?.try_mul(c)
    }

    /// `d^-1 * self * d` for diagonal `d`, entrywise as `d_i^-1 m_ij d_j`.
    pub fn conjugate_by_diagonal(&self, d: &[Quaternion<F>]) -> Result<Self> {
        if d.len() != self.n {
            return Err(Error::Dimension("diagonal length".into()));
        }
        let inv: Vec<_> = d.iter().map(|e| e.inv()).collect::<Result<_>>()?;
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                let m = self.get(i, j);
                if m.is_zero() {
                    continue;
                }
                out.set(i, j, inv[i].try_mul(m)?.try_mul(&d[j])?);
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let xi = self.inverse()?;
        let yi = other.inverse()?;
        self.try_mul(other)?.try_mul(&xi)?.try_mul(&yi)
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                if i == j {
                    self.get(i, j).is_one()
                } else {
                    self.get(i, j).is_zero()
                }
            })
        })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_upper_unitriangular(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i).is_one() && (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_lower_unitriangular(&self) -> bool {
        (0..self.n)
            .all(|i| self.get(i, i).is_one() && (i + 1..self.n).all(|j| self.get(i, j).is_zero()))
    }

    /// Embeds into dimension `m >= n` as `diag(self, 1, ..., 1)`.
    pub fn pad(&self, m: usize) -> Self {
        let mut out = Self::identity(&self.alg, m.max(self.n));
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        out
    }

    /// The matrix with rows and columns relabelled: entry `(i, j)` moves to `(perm[i], perm[j])`.
    /// This is `P self P^-1` for the permutation matrix `P` sending basis vector `i` to `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(&self.alg, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(perm[i], perm[j], self.get(i, j).clone());
            }
        }
        out
    }

    /// Dieudonne determinant class.
    ///
    /// Below-diagonal entries are cleared column by column with left transvections (a zero
    /// pivot is repaired by adding a lower row, also a transvection). Transvections do not
    /// change the class, so the ordered product of the resulting diagonal represents it.
    pub fn dieudonne_det(&self) -> Result<DetClass<F>> {
        let n = self.n;
        let mut a = self.clone();
        for p in 0..n {
            if a.get(p, p).is_zero() {
                let r = (p + 1..n)
                    .find(|&r| !a.get(r, p).is_zero())
                    .ok_or(Error::SingularMatrix)?;
                let one = Quaternion::one(&self.alg);
                a.mul_transvection_left(p, r, &one)?;
            }
            let pinv = a.get(p, p).inv()?;
            for r in p + 1..n {
                if a.get(r, p).is_zero() {
                    continue;
                }
                let m = -&a.get(r, p).try_mul(&pinv)?;
                a.mul_transvection_left(r, p, &m)?;
            }
        }
        let mut rep = Quaternion::one(&self.alg);
        for i in 0..n {
            rep = rep.try_mul(a.get(i, i))?;
        }
        Ok(DetClass::new(rep))
    }

    /// Membership in the elementary group, decided by `nrd` of the determinant representative.
    ///
    /// This uses that the reduced Whitehead group `SK_1` of a quaternion algebra over a number
    /// field is trivial, so `[D*, D*]` is exactly the kernel of the reduced norm.
    pub fn is_elementary(&self) -> Result<bool> {
        Ok(self.dieudonne_det()?.invariant().is_one())
    }

    /// Scalar matrix with a central entry, i.e. an element of the centre of `E(n, D)`.
    pub fn is_central_in_e(&self) -> bool {
        let d = self.get(0, 0);
        d.is_central() && self.is_diagonal() && (1..self.n).all(|i| self.get(i, i) == d)
    }
}

impl<F: Scalar> Mul for &Matrix<F> {
    type Output = Matrix<F>;
    fn mul(self, rhs: Self) -> Matrix<F> {
        self.try_mul(rhs).expect("matrix product")
    }
}

impl<F: Scalar> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.n, self.n)?;
        for row in self.entries.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|q| format!("({q})")).collect();
            writeln!(f, "  {}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Image of a matrix in `D* / [D*, D*]`, compared through the reduced norm of a representative.
#[derive(Clone, Debug)]
pub struct DetClass<F: Scalar> {
    representative: Quaternion<F>,
    invariant: F,
}

impl<F: Scalar> DetClass<F> {
    pub fn new(representative: Quaternion<F>) -> Self {
        let invariant = representative.nrd();
        DetClass {
            representative,
            invariant,
        }
    }

    pub fn representative(&self) -> &Quaternion<F> {
        &self.representative
    }

    pub fn invariant(&self) -> &F {
        &self.invariant
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant.is_one()
    }
}

impl<F: Scalar> PartialEq for DetClass<F> {
    fn eq(&self, other: &Self) -> bool {
        self.invariant == other.invariant
    }
}

/// The four standard relations among elementary transvections.
#[derive(Clone, Debug)]
pub enum Relation<F: Scalar> {
    /// `t_ij(xi) t_ij(zeta) = t_ij(xi + zeta)`.
    Additive {
        n: usize,
        i: usize,
        j: usize,
        xi: Quaternion<F>,
        zeta: Quaternion<F>,
    },
    /// `[t_ij(xi), t_pq(zeta)]` is `t_iq(xi zeta)` when `j = p`, and trivial when `j != p`;
    /// both cases need `i != q`.
    Commutator {
        n: usize,
        i: usize,
        j: usize,
        p: usize,
        q: usize,
        xi: Quaternion<F>,
        zeta: Quaternion<F>,
    },
    /// `t_ij(zeta) t_ji(xi) = h_ij(zeta) h_ij(zeta^-1 + xi) t_ji((1 + xi zeta) xi) t_ij((1 + zeta xi)^-1 zeta)`
    /// for `zeta` and `1 + zeta xi` invertible.
    Gauss {
        n: usize,
        i: usize,
        j: usize,
        xi: Quaternion<F>,
        zeta: Quaternion<F>,
    },
    /// `t_ij(xi) t_ji(-xi^-1) t_ij(xi) = t_ji(-xi^-1) t_ij(xi) t_ji(-xi^-1)`.
    Weyl {
        n: usize,
        i: usize,
        j: usize,
        xi: Quaternion<F>,
    },
}

fn product<F: Scalar>(factors: &[Matrix<F>]) -> Result<Matrix<F>> {
    let mut it = factors.iter();
    let mut acc = it.next().expect("nonempty product").clone();
    for m in it {
        acc = acc.try_mul(m)?;
    }
    Ok(acc)
}

/// Evaluates both sides of a relation exactly and compares them.
pub fn verify_relation<F: Scalar>(rel: &Relation<F>) -> Result<bool> {
    match rel {
        Relation::Additive { n, i, j, xi, zeta } => {
            let lhs = Matrix::transvection(*n, *i, *j, xi)?
                .try_mul(&Matrix::transvection(*n, *i, *j, zeta)?)?;
            Ok(lhs == Matrix::transvection(*n, *i, *j, &xi.try_add(zeta)?)?)
        }
        Relation::Commutator {
            n,
            i,
            j,
            p,
            q,
            xi,
            zeta,
        } => {
            if i == q {
                return Err(Error::Precondition("relation (2) needs i != q".into()));
            }
            let lhs = Matrix::transvection(*n, *i, *j, xi)?
                .commutator(&Matrix::transvection(*n, *p, *q, zeta)?)?;
            let rhs = if j == p {
                Matrix::transvection(*n, *i, *q, &xi.try_mul(zeta)?)?
            } else {
                Matrix::identity(xi.algebra(), *n)
            };
            Ok(lhs == rhs)
        }
        Relation::Gauss { n, i, j, xi, zeta } => {
            let one = xi.one_like();
            let zx = one.try_add(&zeta.try_mul(xi)?)?;
            if zeta.is_zero() || zx.is_zero() {
                return Err(Error::Precondition(
                    "relation (3) needs zeta and 1 + zeta xi invertible".into(),
                ));
            }
            let xz = one.try_add(&xi.try_mul(zeta)?)?;
            let lhs = Matrix::transvection(*n, *i, *j, zeta)?
                .try_mul(&Matrix::transvection(*n, *j, *i, xi)?)?;
            let rhs = product(&[
                Matrix::h_elem(*n, *i, *j, zeta)?,
                Matrix::h_elem(*n, *i, *j, &zeta.inv()?.try_add(xi)?)?,
                Matrix::transvection(*n, *j, *i, &xz.try_mul(xi)?)?,
                Matrix::transvection(*n, *i, *j, &zx.inv()?.try_mul(zeta)?)?,
            ])?;
            Ok(lhs == rhs)
        }
        Relation::Weyl { n, i, j, xi } => {
            let a = Matrix::transvection(*n, *i, *j, xi)?;
            let b = Matrix::transvection(*n, *j, *i, &-&xi.inv()?)?;
            let lhs = product(&[a.clone(), b.clone(), a.clone()])?;
            let rhs = product(&[b.clone(), a, b])?;
            Ok(lhs == rhs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{MatD, Quat, Rat};

    fn alg() -> Arc<AlgebraParams<Rat>> {
        AlgebraParams::hamilton()
    }

    fn q(w: i64, x: i64, y: i64, z: i64) -> Quat {
        Quaternion::from_i64(&alg(), w, x, y, z)
    }

    fn rat(p: i64, d: i64) -> Quat {
        Quaternion::scalar(&alg(), Rat::new(p.into(), d.into()))
    }

    #[test]
    fn transvection_basics() {
        let zero = q(0, 0, 0, 0);
        assert!(MatD::transvection(3, 0, 1, &zero).unwrap().is_identity());
        assert!(MatD::transvection(3, 1, 1, &zero).is_err());
        let (a, b) = (q(1, 2, 0, -1), q(0, 3, 1, 1));
        let prod =
            &MatD::transvection(2, 0, 1, &a).unwrap() * &MatD::transvection(2, 0, 1, &b).unwrap();
        assert_eq!(prod, MatD::transvection(2, 0, 1, &(&a + &b)).unwrap());
        let t = MatD::transvection(2, 1, 0, &a).unwrap();
        assert_eq!(
            t.inverse().unwrap(),
            MatD::transvection(2, 1, 0, &-&a).unwrap()
        );
    }

    #[test]
    fn h_elements() {
        assert!(MatD::h_elem(3, 0, 1, &q(1, 0, 0, 0)).unwrap().is_identity());
        let e = q(1, 1, 2, 0);
        let p = &MatD::h_elem(3, 0, 2, &e).unwrap()
            * &MatD::h_elem(3, 0, 2, &e.inv().unwrap()).unwrap();
        assert!(p.is_identity());
        let h = MatD::h_elem(2, 0, 1, &q(2, 0, 0, 0)).unwrap();
        assert_eq!(h, MatD::diag(&alg(), &[q(2, 0, 0, 0), rat(1, 2)]));
        assert_eq!(
            MatD::h_elem(2, 0, 1, &q(0, 0, 0, 0)),
            Err(Error::ZeroInverse)
        );
    }

    #[test]
    fn inverse_and_singular() {
        let m = MatD::from_rows(
            &alg(),
            vec![
                vec![q(1, 1, 0, 0), q(0, 0, 1, 0)],
                vec![q(0, 2, 0, 1), q(3, 0, 0, 0)],
            ],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).is_identity());
        assert!((&inv * &m).is_identity());
        // Second row is a left multiple of the first.
        let s = MatD::from_rows(
            &alg(),
            vec![
                vec![q(1, 1, 0, 0), q(0, 0, 1, 0)],
                vec![
                    q(0, 1, 0, 0),
                    &q(0, 1, 0, 0) * &(&q(1, 1, 0, 0).inv().unwrap() * &q(0, 0, 1, 0)),
                ],
            ],
        )
        .unwrap();
        assert_eq!(s.inverse(), Err(Error::SingularMatrix));
        assert_eq!(s.dieudonne_det().map(|_| ()), Err(Error::SingularMatrix));
    }

    #[test]
    fn determinant_examples() {
        let t = MatD::transvection(3, 2, 0, &q(4, 1, -1, 2)).unwrap();
        assert!(t.dieudonne_det().unwrap().is_trivial());
        let d = [q(1, 1, 0, 0), q(0, 2, 0, 1), q(3, 0, 0, 0)];
        let class = MatD::diag(&alg(), &d).dieudonne_det().unwrap();
        assert_eq!(class.representative(), &(&(&d[0] * &d[1]) * &d[2]));
        assert!(MatD::identity(&alg(), 3).is_elementary().unwrap());
        let tau = q(1, 2, 0, 0).commutator(&q(0, 1, 1, 3)).unwrap();
        assert!(MatD::diag(&alg(), &[q(1, 0, 0, 0), q(1, 0, 0, 0), tau])
            .is_elementary()
            .unwrap());
        assert!(!MatD::diag(&alg(), &[q(1, 0, 0, 0), q(2, 0, 0, 0)])
            .is_elementary()
            .unwrap());
    }

    #[test]
    fn centrality() {
        assert!(MatD::identity(&alg(), 3).is_central_in_e());
        assert!(!MatD::transvection(3, 0, 1, &q(1, 0, 0, 0))
            .unwrap()
            .is_central_in_e());
        let i = q(0, 1, 0, 0);
        let di = MatD::diag(&alg(), &[i.clone(), i.clone(), i]);
        assert!(!di.is_central_in_e());
        let probe = MatD::diag(&alg(), &[q(0, 0, 1, 0), q(1, 0, 0, 0), q(1, 0, 0, 0)]);
        assert_ne!(&di * &probe, &probe * &di);
        assert!(MatD::diag(&alg(), &[rat(3, 2), rat(3, 2)]).is_central_in_e());
    }

    #[test]
    fn gauss_relation_worked_example() {
        let one = q(1, 0, 0, 0);
        let lhs = &MatD::transvection(2, 0, 1, &one).unwrap()
            * &MatD::transvection(2, 1, 0, &one).unwrap();
        let expect = MatD::from_rows(
            &alg(),
            vec![
                vec![q(2, 0, 0, 0), one.clone()],
                vec![one.clone(), one.clone()],
            ],
        )
        .unwrap();
        assert_eq!(lhs, expect);
        let rhs = product(&[
            MatD::h_elem(2, 0, 1, &one).unwrap(),
            MatD::h_elem(2, 0, 1, &q(2, 0, 0, 0)).unwrap(),
            MatD::transvection(2, 1, 0, &q(2, 0, 0, 0)).unwrap(),
            MatD::transvection(2, 0, 1, &rat(1, 2)).unwrap(),
        ])
        .unwrap();
        assert_eq!(rhs, expect);
        assert!(verify_relation(&Relation::Gauss {
            n: 2,
            i: 0,
            j: 1,
            xi: one.clone(),
            zeta: one
        })
        .unwrap());
    }

    #[test]
    fn relation_preconditions() {
        let x = q(1, 1, 0, 0);
        let bad = Relation::Gauss {
            n: 2,
            i: 0,
            j: 1,
            xi: x.clone(),
            zeta: q(0, 0, 0, 0),
        };
        assert!(matches!(verify_relation(&bad), Err(Error::Precondition(_))));
        // 1 + zeta xi = 0.
        let bad = Relation::Gauss {
            n: 2,
            i: 0,
            j: 1,
            xi: x.clone(),
            zeta: -&x.inv().unwrap(),
        };
        assert!(matches!(verify_relation(&bad), Err(Error::Precondition(_))));
        let bad = Relation::Commutator {
            n: 3,
            i: 0,
            j: 1,
            p: 1,
            q: 0,
            xi: x.clone(),
            zeta: x,
        };
        assert!(matches!(verify_relation(&bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn disjoint_commutator_is_trivial() {
        let rel = Relation::Commutator {
            n: 4,
            i: 0,
            j: 1,
            p: 2,
            q: 3,
            xi: q(1, 2, 3, 4),
            zeta: q(0, 1, 0, -1),
        };
        assert!(verify_relation(&rel).unwrap());
    }

    #[test]
    fn padding_and_permutation() {
        let v = MatD::transvection(2, 1, 0, &q(1, 1, 0, 0)).unwrap();
        let p = v.pad(4);
        assert_eq!(p.get(1, 0), &q(1, 1, 0, 0));
        assert!(p.get(3, 3).is_one());
        let moved = p.permute(&[0, 3, 2, 1]);
        assert!(moved.is_lower_unitriangular());
        assert_eq!(moved.get(3, 0), &q(1, 1, 0, 0));
    }
}
