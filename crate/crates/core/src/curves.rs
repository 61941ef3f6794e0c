//! Catalog of CM elliptic curves over ℚ.
//!
//! The catalog ships as `data/catalog.csv` and is embedded at compile time.
//! Columns: `label,a4,a6,conductor,d_k,bad_primes,ainvs`, where `bad_primes`
//! and `ainvs` are semicolon-separated. `a4,a6` describe a short Weierstrass
//! model (used for point counting at p ≥ 5) and `ainvs` a minimal long model
//! (used at p = 2, 3 and for the discriminant checks).

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{is_prime, prime_divisors};
use crate::error::{Error, Result};
use crate::frobenius::{candidate_traces, naive_ap};
use crate::quadratic_field::{cornacchia, splitting_type, FieldSpec, SplitType};

pub const CATALOG_CSV: &str = include_str!("../data/catalog.csv");

/// Largest prime examined by the empirical CM check in [`validate_curve`].
pub const VALIDATION_LIMIT: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveSpec {
    pub label: String,
    pub a4: i64,
    pub a6: i64,
    pub conductor: u64,
    pub field: FieldSpec,
    pub bad_primes: Vec<u64>,
    /// `[a1, a2, a3, a4, a6]` of a long Weierstrass model.
    pub ainvs: [i64; 5],
}

impl CurveSpec {
    /// A curve given only by a short model; the long model is the same equation.
    pub fn short(
        label: &str,
        a4: i64,
        a6: i64,
        conductor: u64,
        d_k: i64,
        bad_primes: Vec<u64>,
    ) -> Result<Self> {
        Ok(Self {
            label: label.to_owned(),
            a4,
            a6,
            conductor,
            field: FieldSpec::new(d_k)?,
            bad_primes,
            ainvs: [0, 0, 0, a4, a6],
        })
    }

    pub fn is_bad(&self, p: u64) -> bool {
        self.bad_primes.contains(&p)
    }

    /// `−16(4a4³ + 27a6²)` of the short model.
    pub fn short_discriminant(&self) -> i128 {
        let (a4, a6) = (self.a4 as i128, self.a6 as i128);
        -16 * (4 * a4 * a4 * a4 + 27 * a6 * a6)
    }

    /// `(c4, c6, Δ)` of the long model.
    pub fn long_invariants(&self) -> (i128, i128, i128) {
        let [a1, a2, a3, a4, a6] = self.ainvs.map(|a| a as i128);
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = b2 * b2 - 24 * b4;
        let c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
        let disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
        (c4, c6, disc)
    }

    pub fn to_csv_row(&self) -> String {
        let join = |xs: &[String]| xs.join(";");
        format!(
            "{},{},{},{},{},{},{}",
            self.label,
            self.a4,
            self.a6,
            self.conductor,
            self.field.discriminant(),
            join(&self.bad_primes.iter().map(u64::to_string).collect::<Vec<_>>()),
            join(&self.ainvs.iter().map(i64::to_string).collect::<Vec<_>>()),
        )
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: y^2 = x^3 + {}x + {} (N = {}, d_K = {})",
            self.label,
            self.a4,
            self.a6,
            self.conductor,
            self.field.discriminant()
        )
    }
}

impl FromStr for CurveSpec {
    type Err = Error;

    fn from_str(row: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidInput(format!("catalog row {row:?}: {what}"));
        let cols: Vec<&str> = row.trim().split(',').collect();
        if cols.len() != 7 {
            return Err(bad("expected 7 columns"));
        }
        let int = |s: &str, what: &str| s.trim().parse::<i64>().map_err(|_| bad(what));
        let list = |s: &str, what: &str| -> Result<Vec<i64>> {
            s.split(';').filter(|t| !t.is_empty()).map(|t| int(t, what)).collect()
        };
        let conductor = cols[3].trim().parse::<u64>().map_err(|_| bad("conductor"))?;
        let bad_primes = list(cols[5], "bad_primes")?
            .into_iter()
            .map(|p| u64::try_from(p).map_err(|_| bad("bad_primes")))
            .collect::<Result<Vec<_>>>()?;
        let ainvs: [i64; 5] = list(cols[6], "ainvs")?
            .try_into()
            .map_err(|_| bad("ainvs needs five entries"))?;
        Ok(Self {
            label: cols[0].trim().to_owned(),
            a4: int(cols[1], "a4")?,
            a6: int(cols[2], "a6")?,
            conductor,
            field: FieldSpec::new(int(cols[4], "d_k")?)?,
            bad_primes,
            ainvs,
        })
    }
}

/// Parses catalog CSV text: `#` lines and the column header are skipped.
pub fn parse_catalog(text: &str) -> Result<Vec<CurveSpec>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("label,"))
        .map(str::parse)
        .collect()
}

/// The built-in catalog: at least one curve for each class-number-one field.
pub fn catalog() -> Vec<CurveSpec> {
    parse_catalog(CATALOG_CSV).expect("embedded catalog parses")
}

pub fn find_curve(label: &str) -> Result<CurveSpec> {
    catalog()
        .into_iter()
        .find(|c| c.label == label)
        .ok_or_else(|| Error::UnknownCurve(label.to_owned()))
}

/// Norm of the modulus of the attached Grössencharakter, `N_E / |d_K|`.
pub fn modulus_norm(curve: &CurveSpec) -> Result<u64> {
    let abs_disc = curve.field.abs_discriminant();
    if curve.conductor == 0 || !curve.conductor.is_multiple_of(abs_disc) {
        return Err(Error::NotIntegral {
            conductor: curve.conductor,
            abs_disc,
        });
    }
    Ok(curve.conductor / abs_disc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationFailure {
    Singular,
    ConductorNotDivisible { conductor: u64, abs_disc: u64 },
    BadPrimesMismatch { listed: Vec<u64>, from_conductor: Vec<u64> },
    GoodReductionAtListedPrime { p: u64 },
    UnlistedBadPrime { p: u64 },
    SplitTraceOutsideOrbit { p: u64, a_p: i64, candidates: Vec<i64> },
    InertTraceNonzero { p: u64, a_p: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub label: String,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn valuation(mut n: i128, p: u64) -> u32 {
    let p = p as i128;
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Checks a catalog entry without aborting: nonsingularity, conductor and
/// bad-prime bookkeeping against the discriminant, and the CM property
/// (split traces lie in the Cornacchia unit orbit, inert traces vanish) for
/// good primes below [`VALIDATION_LIMIT`].
pub fn validate_curve(curve: &CurveSpec) -> ValidationReport {
    let mut failures = Vec::new();
    let (c4, c6, disc) = curve.long_invariants();

    if curve.short_discriminant() == 0 || disc == 0 {
        failures.push(ValidationFailure::Singular);
        return ValidationReport {
            label: curve.label.clone(),
            failures,
        };
    }

    if let Err(Error::NotIntegral { conductor, abs_disc }) = modulus_norm(curve) {
        failures.push(ValidationFailure::ConductorNotDivisible { conductor, abs_disc });
    }

    let mut listed = curve.bad_primes.clone();
    listed.sort_unstable();
    let from_conductor = prime_divisors(curve.conductor);
    if listed != from_conductor {
        failures.push(ValidationFailure::BadPrimesMismatch {
            listed: listed.clone(),
            from_conductor,
        });
    }
    for &p in &listed {
        if disc % p as i128 != 0 {
            failures.push(ValidationFailure::GoodReductionAtListedPrime { p });
        }
    }
    // Primes of the discriminant outside the bad set must be explained by a
    // non-minimal model at that prime.
    let mut rest = disc.unsigned_abs();
    for &p in &listed {
        while rest % p as u128 == 0 {
            rest /= p as u128;
        }
    }
    let mut q = 2u128;
    while rest > 1 && q <= 1_000_000 {
        if rest % q == 0 {
            while rest % q == 0 {
                rest /= q;
            }
            let p = q as u64;
            let non_minimal =
                valuation(disc, p) >= 12 && valuation(c4, p) >= 4 && valuation(c6, p) >= 6;
            if p >= 5 && !non_minimal {
                failures.push(ValidationFailure::UnlistedBadPrime { p });
            }
        }
        q += 1;
    }
    if rest > 1 {
        failures.push(ValidationFailure::UnlistedBadPrime { p: rest as u64 });
    }

    for p in (2..VALIDATION_LIMIT).filter(|&p| is_prime(p) && !curve.is_bad(p)) {
        let Ok(a_p) = naive_ap(curve, p) else { continue };
        match splitting_type(&curve.field, p) {
            SplitType::Inert => {
                if a_p != 0 {
                    failures.push(ValidationFailure::InertTraceNonzero { p, a_p });
                }
            }
            SplitType::Split if p > 2 => {
                let rep = cornacchia(&curve.field, p).expect("split prime has a representation");
                let candidates = candidate_traces(&curve.field, &rep);
                if !candidates.contains(&a_p) {
                    failures.push(ValidationFailure::SplitTraceOutsideOrbit { p, a_p, candidates });
                }
            }
            _ => {}
        }
    }

    ValidationReport {
        label: curve.label.clone(),
        failures,
    }
}
