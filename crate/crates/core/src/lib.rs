//! Exact commutator certificates in `GL(n, D)` for a quaternion skew-field `D`.
//!
//! The crate turns products of commutators of matrices into commutator certificates in the
//! multiplicative group `D*` (a lower estimate on commutator width) and, conversely, factors
//! elements of the elementary group into few matrix commutators given certificates in `D*`
//! (an upper estimate). Every certificate is checked by exact multiplication before it is
//! returned.
//!
//! All algorithms are generic over the coordinate field `F: Scalar`; the aliases below fix
//! `F` to arbitrary precision rationals, which is what the command line tool uses.

pub mod budget;
pub mod certify;
pub mod error;
pub mod json;
pub mod matrices;
pub mod normalform;
pub mod random;
pub mod scalar;
pub mod skewfield;
pub mod wordcalc;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rationals, the centre `K` of the shipped algebras.
pub type Rat = num_rational::BigRational;
pub type Algebra = skewfield::AlgebraParams<Rat>;
pub type Quat = skewfield::Quaternion<Rat>;
pub type MatD = matrices::Matrix<Rat>;
pub type DetClass = matrices::DetClass<Rat>;
pub type HFactorList = budget::HFactors<Rat>;
pub type UvuForm = normalform::UvuForm<Rat>;
pub type QuatCert = wordcalc::CommutatorCert<Quat>;
pub type MatCert = wordcalc::CommutatorCert<MatD>;
pub type BasedInstance = certify::BasedInstance<Rat>;
