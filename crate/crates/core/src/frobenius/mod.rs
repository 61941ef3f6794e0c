//! Traces of Frobenius and Sato-Tate angles.
//!
//! [`naive_ap`] counts points with the quadratic character and is the oracle.
//! [`cm_ap`] uses the CM structure: it is zero at inert primes, and at split
//! primes it is one of the traces of the unit multiples of the Cornacchia
//! generator, chosen by checking which candidate group order kills random
//! points.

mod points;
pub mod cache;

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{fnv1a, mul_mod, reduce_i64, pow_mod};
use crate::curves::CurveSpec;
use crate::error::{Error, Result};
use crate::quadratic_field::{
    cornacchia, splitting_type, sqrt_mod, FieldSpec, FormRepresentation, SplitType,
};
use points::{Jacobian, ShortCurve};

/// Random points tried before giving up on the point test.
pub const POINT_BUDGET: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrobeniusRecord {
    pub p: u64,
    pub split: SplitType,
    pub a_p: i64,
    pub theta: f64,
}

/// The angle character `ξ_E^k`, evaluated on the pair of conjugate primes
/// above a split `p` (or on the single prime above an inert one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HeckeAngleCharacter {
    k: i64,
}

impl HeckeAngleCharacter {
    pub fn new(k: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("frequency must be nonzero".into()));
        }
        Ok(Self { k })
    }

    pub fn frequency(&self) -> i64 {
        self.k
    }

    /// `ξ^k(𝔭) + ξ^k(𝔭̄) = 2cos(kθ_p)`.
    pub fn pair_value(&self, theta: f64) -> f64 {
        character_pair_value(self.k, theta)
    }

    /// Value on an inert prime, whose angle is π.
    pub fn inert_value(&self) -> f64 {
        if self.k % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// How [`cm_ap_detailed`] arrived at its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceMethod {
    Inert,
    PointTest { points: usize },
    Naive,
}

fn check_good(curve: &CurveSpec, p: u64) -> Result<()> {
    if curve.is_bad(p) {
        Err(Error::BadReduction {
            label: curve.label.clone(),
            p,
        })
    } else {
        Ok(())
    }
}

/// `a_p = p + 1 − #E(𝔽_p)` by direct counting.
///
/// For p ≥ 5 this is `−Σ_x χ(x³ + a4·x + a6)` on the short model with `χ` the
/// quadratic character; for p ≤ 3 the long model's affine points are
/// enumerated.
pub fn naive_ap(curve: &CurveSpec, p: u64) -> Result<i64> {
    check_good(curve, p)?;
    if p <= 3 {
        let (_, _, disc) = curve.long_invariants();
        if disc % p as i128 == 0 {
            return Err(Error::InvalidInput(format!(
                "long model of {} is singular mod {p}",
                curve.label
            )));
        }
        let [a1, a2, a3, a4, a6] = curve.ainvs.map(|a| reduce_i64(a, p));
        let mut affine = 0i64;
        for x in 0..p {
            for y in 0..p {
                let lhs = (y * y + a1 * x * y + a3 * y) % p;
                let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p;
                if lhs == rhs {
                    affine += 1;
                }
            }
        }
        return Ok(p as i64 - affine);
    }
    if curve.short_discriminant() % p as i128 == 0 {
        return Err(Error::InvalidInput(format!(
            "short model of {} is singular mod {p}",
            curve.label
        )));
    }
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for y in 1..=p / 2 {
        chi[mul_mod(y, y, p) as usize] = 1;
    }
    let a = reduce_i64(curve.a4, p);
    let b = reduce_i64(curve.a6, p);
    let model = ShortCurve { a, b, p };
    let sum: i64 = (0..p).map(|x| chi[model.rhs(x) as usize] as i64).sum();
    Ok(-sum)
}

/// Traces of the Frobenius generator times each unit: `{±u}` in general,
/// `{±u, ±2v}` for d_K = −4 and `{±u, ±(u+3v)/2, ±(u−3v)/2}` for d_K = −3.
pub fn candidate_traces(field: &FieldSpec, rep: &FormRepresentation) -> Vec<i64> {
    let (u, v) = (rep.u as i64, rep.v as i64);
    let base: Vec<i64> = match field.discriminant() {
        -4 => vec![u, 2 * v],
        -3 => vec![u, (u + 3 * v) / 2, (u - 3 * v) / 2],
        _ => vec![u],
    };
    let mut out: Vec<i64> = base.into_iter().flat_map(|t| [t, -t]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn point_seed(label: &str, p: u64) -> u64 {
    let mut bytes = label.as_bytes().to_vec();
    bytes.push(0);
    bytes.extend_from_slice(&p.to_le_bytes());
    fnv1a(&bytes)
}

fn random_point(model: &ShortCurve, rng: &mut ChaCha8Rng) -> Jacobian {
    loop {
        let x = rng.gen_range(0..model.p);
        let f = model.rhs(x);
        if f == 0 {
            return Jacobian::affine(x, 0);
        }
        if pow_mod(f, (model.p - 1) / 2, model.p) == 1 {
            let y = sqrt_mod(f, model.p).expect("residue has a root");
            return Jacobian::affine(x, y);
        }
    }
}

/// Narrows `candidates` to the traces `c` with `(p + 1 − c)·P = O` for up to
/// [`POINT_BUDGET`] random points. Returns the survivors and points used.
fn point_test(curve: &CurveSpec, p: u64, mut candidates: Vec<i64>) -> (Vec<i64>, usize) {
    let model = ShortCurve {
        a: reduce_i64(curve.a4, p),
        b: reduce_i64(curve.a6, p),
        p,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(&curve.label, p));
    let mut used = 0;
    while candidates.len() > 1 && used < POINT_BUDGET {
        let pt = random_point(&model, &mut rng);
        used += 1;
        // (p + 1 − c)·P = O  ⇔  (p + 1)·P = c·P
        let lhs = model.scalar_mul(pt, p + 1);
        candidates.retain(|&c| {
            let q = model.scalar_mul(pt, c.unsigned_abs());
            let q = if c < 0 { model.neg(q) } else { q };
            model.eq(lhs, q)
        });
    }
    (candidates, used)
}

/// Like [`cm_ap`], also reporting which route produced the value.
pub fn cm_ap_detailed(curve: &CurveSpec, p: u64) -> Result<(i64, TraceMethod)> {
    check_good(curve, p)?;
    match splitting_type(&curve.field, p) {
        SplitType::Inert => return Ok((0, TraceMethod::Inert)),
        SplitType::Ramified => {
            return Err(Error::RamifiedPrime {
                d: curve.field.discriminant(),
                p,
            })
        }
        SplitType::Split => {}
    }
    if p <= 3 || curve.short_discriminant() % p as i128 == 0 {
        return Ok((naive_ap(curve, p)?, TraceMethod::Naive));
    }
    let rep = cornacchia(&curve.field, p)?;
    let (survivors, used) = point_test(curve, p, candidate_traces(&curve.field, &rep));
    match survivors.as_slice() {
        [a_p] => Ok((*a_p, TraceMethod::PointTest { points: used })),
        _ => {
            log::info!(
                "{}: {} candidates survive {used} points at p = {p}; counting points",
                curve.label,
                survivors.len()
            );
            Ok((naive_ap(curve, p)?, TraceMethod::Naive))
        }
    }
}

/// `a_p` through the CM structure; agrees with [`naive_ap`] at every good prime
/// not dividing d_K.
pub fn cm_ap(curve: &CurveSpec, p: u64) -> Result<i64> {
    cm_ap_detailed(curve, p).map(|(a, _)| a)
}

/// The Sato-Tate angle `arccos(a_p / 2√p) ∈ [0, π]`.
pub fn theta_of(a_p: i64, p: u64) -> Result<f64> {
    if (a_p as i128) * (a_p as i128) > 4 * p as i128 {
        return Err(Error::HasseViolation { a_p, p });
    }
    if a_p == 0 {
        return Ok(FRAC_PI_2);
    }
    let c = a_p as f64 / (2.0 * (p as f64).sqrt());
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// `2cos(kθ)`: the character value summed over a conjugate pair of primes.
pub fn character_pair_value(k: i64, theta: f64) -> f64 {
    2.0 * (k as f64 * theta).cos()
}

/// The record for a good prime: inert primes get `a_p = 0` and `θ = π/2`
/// exactly, split primes go through [`cm_ap`], and the (non-CM) case of a
/// good ramified prime is counted directly.
pub fn frobenius_record(curve: &CurveSpec, p: u64) -> Result<FrobeniusRecord> {
    let split = splitting_type(&curve.field, p);
    let a_p = match split {
        SplitType::Ramified => naive_ap(curve, p)?,
        _ => cm_ap(curve, p)?,
    };
    Ok(FrobeniusRecord {
        p,
        split,
        a_p,
        theta: theta_of(a_p, p)?,
    })
}

/// Records for every good prime in `primes`, in input order. Work is spread
/// over the rayon pool; the output does not depend on the thread count.
pub fn records_for(curve: &CurveSpec, primes: &[u64]) -> Result<Vec<FrobeniusRecord>> {
    primes
        .par_iter()
        .filter(|&&p| !curve.is_bad(p))
        .map(|&p| frobenius_record(curve, p))
        .collect()
}
