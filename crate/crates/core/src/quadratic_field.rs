//! The nine imaginary quadratic fields of class number one.
//!
//! Everything here is exact integer arithmetic on `u64` with `u128`
//! intermediates; primes are bounded by [`MAX_MODULUS`].

use std::fmt;

use serde::Serialize;

use crate::arith::{exact_sqrt, isqrt, pow_mod, reduce_i64, sub_mod, mul_mod, MAX_MODULUS};
use crate::error::{Error, Result};

/// Fundamental discriminants of the class-number-one imaginary quadratic fields.
pub const CLASS_NUMBER_ONE: [i64; 9] = [-3, -4, -7, -8, -11, -19, -43, -67, -163];

/// An imaginary quadratic field `K = ℚ(√d_K)` with class number one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FieldSpec {
    d_k: i64,
}

impl FieldSpec {
    pub fn new(d_k: i64) -> Result<Self> {
        if CLASS_NUMBER_ONE.contains(&d_k) {
            Ok(Self { d_k })
        } else {
            Err(Error::UnsupportedDiscriminant(d_k))
        }
    }

    pub fn discriminant(&self) -> i64 {
        self.d_k
    }

    pub fn abs_discriminant(&self) -> u64 {
        self.d_k.unsigned_abs()
    }

    /// Number of roots of unity in the ring of integers.
    pub fn unit_count(&self) -> u32 {
        match self.d_k {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt({}))", self.d_k)
    }
}

/// How a rational prime decomposes in `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitType {
    /// Two conjugate primes of residue degree 1.
    Split,
    /// One prime of residue degree 2.
    Inert,
    /// `p` divides the discriminant.
    Ramified,
}

impl SplitType {
    /// Residue degree of a prime above `p`.
    pub fn inertial_degree(self) -> u32 {
        match self {
            SplitType::Inert => 2,
            SplitType::Split | SplitType::Ramified => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SplitType::Split => "split",
            SplitType::Inert => "inert",
            SplitType::Ramified => "ramified",
        }
    }
}

impl fmt::Display for SplitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A solution of `u² + |d_K|·v² = 4p` with `u > 0` and `v ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FormRepresentation {
    pub u: u64,
    pub v: u64,
    pub p: u64,
}

/// Kronecker symbol `(d/p)` for a prime `p`.
pub fn kronecker_symbol(d: i64, p: u64) -> i8 {
    if p == 2 {
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let a = reduce_i64(d, p);
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

pub fn splitting_type(field: &FieldSpec, p: u64) -> SplitType {
    match kronecker_symbol(field.discriminant(), p) {
        1 => SplitType::Split,
        -1 => SplitType::Inert,
        _ => SplitType::Ramified,
    }
}

/// Square root of `a` modulo an odd prime `p` by Tonelli-Shanks.
///
/// Returns the smaller of the two roots. The quadratic non-residue used by the
/// algorithm is the least one, found by scanning 2, 3, 4, … so the result is
/// reproducible.
pub fn sqrt_mod(a: u64, p: u64) -> Result<u64> {
    let a = a % p;
    if p == 2 || a == 0 {
        return Ok(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return Err(Error::NonResidue { a, p });
    }
    let root = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        let s = (p - 1).trailing_zeros();
        let q = (p - 1) >> s;
        let z = (2..p)
            .find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)
            .expect("an odd prime has a non-residue");
        let mut m = s;
        let mut c = pow_mod(z, q, p);
        let mut t = pow_mod(a, q, p);
        let mut r = pow_mod(a, q.div_ceil(2), p);
        while t != 1 {
            // least i with t^(2^i) = 1
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = mul_mod(t2, t2, p);
                i += 1;
            }
            let b = pow_mod(c, 1 << (m - i - 1), p);
            m = i;
            c = mul_mod(b, b, p);
            t = mul_mod(t, c, p);
            r = mul_mod(r, b, p);
        }
        r
    };
    Ok(root.min(p - root))
}

/// Solves `u² + |d_K|·v² = 4p` for a prime `p` that splits in `K`.
///
/// Runs the Euclidean descent on `(2p, r)` with `r² ≡ d_K (mod 4p)`, then
/// picks, among the representatives obtained by multiplying the Frobenius
/// generator `(u + v√d_K)/2` by units, the one with the largest `u`.
pub fn cornacchia(field: &FieldSpec, p: u64) -> Result<FormRepresentation> {
    let d = field.discriminant();
    if p.is_multiple_of(2) || p >= MAX_MODULUS / 4 {
        return Err(Error::InvalidInput(format!(
            "cornacchia needs an odd prime below 2^60, got {p}"
        )));
    }
    match splitting_type(field, p) {
        SplitType::Inert => return Err(Error::InertPrime { d, p }),
        SplitType::Ramified => return Err(Error::RamifiedPrime { d, p }),
        SplitType::Split => {}
    }
    let abs_d = field.abs_discriminant();
    let four_p = 4 * p;

    let mut r = sqrt_mod(reduce_i64(d, p), p)?;
    if r % 2 != abs_d % 2 {
        r = sub_mod(0, r, p);
    }
    let bound = isqrt(four_p);
    let (mut a, mut b) = (2 * p, r);
    while b > bound {
        (a, b) = (b, a % b);
    }
    let rest = four_p - b * b;
    let v = if rest.is_multiple_of(abs_d) {
        exact_sqrt(rest / abs_d)
    } else {
        None
    };
    let v = v.ok_or_else(|| {
        Error::InvalidInput(format!("descent failed for p = {p} in {field}"))
    })?;

    let (u, v) = unit_orbit(field, b, v)
        .into_iter()
        .max()
        .expect("orbit is nonempty");
    Ok(FormRepresentation { u, v, p })
}

/// All `(|u|, |v|)` pairs obtained from `(u + v√d)/2` by multiplying with units
/// and conjugating.
pub(crate) fn unit_orbit(field: &FieldSpec, u: u64, v: u64) -> Vec<(u64, u64)> {
    match field.discriminant() {
        -4 => vec![(u, v), (2 * v, u / 2)],
        -3 => {
            let (ui, vi) = (u as i64, v as i64);
            vec![
                (u, v),
                (((ui + 3 * vi) / 2).unsigned_abs(), ((ui - vi) / 2).unsigned_abs()),
                (((ui - 3 * vi) / 2).unsigned_abs(), ((ui + vi) / 2).unsigned_abs()),
            ]
        }
        _ => vec![(u, v)],
    }
}
