use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, Signed};

/// Coordinate field for the quaternion algebras.
///
/// Every algorithm in this crate decides equality exactly, so the scalar must be an exact
/// field such as [`num_rational::BigRational`]. Floating point types satisfy the bounds but
/// will not produce verifiable certificates.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + FromStr
    + PartialEq
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Clone
        + Debug
        + Display
        + FromStr
        + PartialEq
        + PartialOrd
        + Num
        + Signed
        + FromPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Solves a square linear system over `F` by Gauss-Jordan elimination.
/// Returns `None` when the matrix is singular.
pub(crate) fn solve_linear<F: Scalar>(mut a: Vec<Vec<F>>, mut rhs: Vec<F>) -> Option<Vec<F>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = F::one() / a[col][col].clone();
        for c in col..n {
            a[col][c] = a[col][c].clone() * inv.clone();
        }
        rhs[col] = rhs[col].clone() * inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..n {
                let t = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - t;
            }
            let t = factor * rhs[col].clone();
            rhs[r] = rhs[r].clone() - t;
        }
    }
    Some(rhs)
}
