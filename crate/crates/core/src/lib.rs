//! Exact computation of ternary inclusion-exclusion polynomials
//! `(1-z^pqr)(1-z^p)(1-z^q)(1-z^r) / ((1-z)(1-z^pq)(1-z^qr)(1-z^rp))`,
//! their heights and coefficient sets, instance-level checks of the
//! identities relating them, and resumable parameter searches.

pub mod arith;
pub mod error;
pub mod height;
pub mod poly;
pub mod repr;
pub mod search;
pub mod theorems;

pub use arith::{gcd, in_semigroup, least_nonneg_residue, mod_inverse, Residue};
pub use error::{Error, Result};
pub use height::{coefficient_set, height, is_flat, HeightRecord};
pub use poly::{coefficient_at, coeffs_chi, coeffs_series, degree, CoefficientVector, DegreeCap, Engine, Mode};
pub use repr::{chi, chi_via_lemma4, decompose, f_value, sigma, ChiTable, Representation, Role, Triple, TripleContext};
pub use theorems::{verify_lemma, LemmaId, VerificationReport};
