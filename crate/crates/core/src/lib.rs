//! Numerical toolkit for basic hypergeometric orthogonal polynomials.
//!
//! The crate evaluates the big and little q-Jacobi, Al-Salam–Carlitz (monic
//! big q-Jacobi with `a = b = 0`), dual q-Krawtchouk and q-Charlier families,
//! and checks the identities that connect them: orthogonality relations, the
//! spectral decomposition of the self-adjoint operator `π(ρ_{σ,∞})` on
//! `ℓ²(ℤ₊)`, the addition formula for big q-Legendre polynomials, the derived
//! product formula and their classical `q ↑ 1` limits.
//!
//! Every numerical routine is generic over [`Real`], with `f64` and the
//! double-double [`DoubleDouble`] as the two provided scalar types.

pub mod classical;
pub mod error;
pub mod families;
pub mod identities;
pub mod operator;
pub mod poly;
pub mod qcore;
pub mod report;
pub mod scalar;
pub mod suites;

pub use error::{Error, Result};
pub use qcore::{QBase, QParam};
pub use report::{IdentityId, ParamRecord, Precision, Truncation, VerificationReport};
pub use scalar::{DoubleDouble, Real};
