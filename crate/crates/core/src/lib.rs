//! Sato-Tate angles of CM elliptic curves over ℚ.
//!
//! The crate covers three layers:
//!
//! * exact arithmetic: splitting of primes in the nine class-number-one
//!   imaginary quadratic fields ([`quadratic_field`]), a catalog of CM curves
//!   ([`curves`]) and traces of Frobenius computed both by brute-force point
//!   counting and through Cornacchia's algorithm ([`frobenius`]);
//! * prime scans: a segmented sieve ([`sieve`]) feeding least-prime-in-sector
//!   searches and Sato-Tate tallies ([`scan`]);
//! * analytic machinery: Selberg trigonometric minorants ([`minorant`]), the
//!   Mellin smoothing kernel and its tent-shaped weight ([`kernel`]), and the
//!   smoothed prime sums built from them ([`sums`]).

pub mod arith;
pub mod cli;
pub mod curves;
pub mod error;
pub mod frobenius;
pub mod kernel;
pub mod minorant;
pub mod quadratic_field;
pub mod scan;
pub mod sieve;
pub mod summation;
pub mod sums;

pub use curves::{catalog, CurveSpec};
pub use error::{Error, Result};
pub use frobenius::{cm_ap, naive_ap, theta_of, FrobeniusRecord};
pub use quadratic_field::{FieldSpec, SplitType};
