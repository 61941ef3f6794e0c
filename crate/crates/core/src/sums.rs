//! Smoothed sums over prime ideals of `K`.
//!
//! Every prime ideal sum pairs a split `p` with its two conjugate primes,
//! which share `N(𝔭) = p` and the angle `θ_p`; the pair contributes
//! `2cos(kθ_p)` at frequency `k`, so the per-prime sign of the angle
//! character never has to be fixed. Inert primes have norm `p²` and
//! `a(𝔭) = a_p² − 2p = −2p`, hence angle `π` and character value `(−1)^k`.
//! Ramified and bad primes are left out.

use serde::Serialize;

use crate::curves::CurveSpec;
use crate::error::{Error, Result};
use crate::frobenius::{character_pair_value, frobenius_record};
use crate::kernel::{r_closed_form, SmoothingParams};
use crate::minorant::{selberg_minorant, TrigPolynomial};
use crate::quadratic_field::{splitting_type, SplitType};
use crate::sieve::SieveConfig;
use crate::summation::{merge_in_order, KahanSum};

/// Default cap on `x^A`, the largest norm a sum may visit.
pub const DEFAULT_BUDGET: f64 = 1e8;

const SUM_SEGMENT_BITS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumConfig {
    pub budget: f64,
}

impl Default for SumConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
        }
    }
}

/// A split prime in the support with weight `log p · R(p) / p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitTerm {
    pub p: u64,
    pub theta: f64,
    pub weight: f64,
}

/// One nonzero term `Λ(𝔞) R(N𝔞) ξ^k(𝔞) / N𝔞` of the prime-power series,
/// conjugate ideals combined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VonMangoldtTerm {
    pub norm: u64,
    /// `log N(𝔭)` of the underlying prime ideal.
    pub log_norm_p: f64,
    /// Character value summed over the conjugate ideals of this norm.
    pub pair_character: f64,
    pub split: SplitType,
    pub exponent: u32,
}

impl VonMangoldtTerm {
    pub fn contribution(&self, params: &SmoothingParams) -> f64 {
        self.log_norm_p * r_closed_form(self.norm as f64, params) * self.pair_character
            / self.norm as f64
    }
}

fn support_bounds(params: &SmoothingParams, cfg: &SumConfig) -> Result<(u64, u64)> {
    let (lo, hi) = params.support();
    if hi > cfg.budget {
        return Err(Error::BudgetExceeded {
            required: hi,
            budget: cfg.budget,
        });
    }
    Ok((lo.ceil().max(2.0) as u64, hi.floor() as u64))
}

fn segment_config() -> SieveConfig {
    SieveConfig {
        segment_bits: SUM_SEGMENT_BITS,
        ..SieveConfig::default()
    }
}

/// Good split primes `p ∈ [x^{A−2}, x^A]`, grouped by sieve segment.
pub fn split_terms(
    curve: &CurveSpec,
    params: &SmoothingParams,
    cfg: &SumConfig,
) -> Result<Vec<Vec<SplitTerm>>> {
    let (lo, hi) = support_bounds(params, cfg)?;
    if hi < lo {
        return Ok(Vec::new());
    }
    segment_config()
        .par_map_segments(lo, hi, |primes| {
            primes
                .iter()
                .filter(|&&p| {
                    !curve.is_bad(p) && splitting_type(&curve.field, p) == SplitType::Split
                })
                .map(|&p| {
                    let rec = frobenius_record(curve, p)?;
                    let pf = p as f64;
                    Ok(SplitTerm {
                        p,
                        theta: rec.theta,
                        weight: pf.ln() * r_closed_form(pf, params) / pf,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?
        .into_iter()
        .collect()
}

fn reduce<F>(segments: &[Vec<SplitTerm>], f: F) -> f64
where
    F: Fn(&SplitTerm) -> f64,
{
    let parts: Vec<KahanSum> = segments
        .iter()
        .map(|seg| seg.iter().map(&f).collect())
        .collect();
    merge_in_order(&parts).total()
}

/// `S = Σ_{f𝔭=1} log N𝔭 · R(N𝔭) · χ_I(θ_𝔭) / N𝔭`.
pub fn sum_s(curve: &CurveSpec, alpha: f64, beta: f64, params: &SmoothingParams) -> Result<f64> {
    sum_s_with(curve, alpha, beta, params, &SumConfig::default())
}

pub fn sum_s_with(
    curve: &CurveSpec,
    alpha: f64,
    beta: f64,
    params: &SmoothingParams,
    cfg: &SumConfig,
) -> Result<f64> {
    let terms = split_terms(curve, params, cfg)?;
    Ok(s_from_terms(&terms, alpha, beta))
}

fn s_from_terms(terms: &[Vec<SplitTerm>], alpha: f64, beta: f64) -> f64 {
    reduce(terms, |t| {
        if alpha <= t.theta && t.theta <= beta {
            2.0 * t.weight
        } else {
            0.0
        }
    })
}

fn sk_from_terms(terms: &[Vec<SplitTerm>], k: i64) -> f64 {
    reduce(terms, |t| t.weight * character_pair_value(k, t.theta))
}

/// `S_k = Σ_{f𝔭=1} log N𝔭 · R(N𝔭) · ξ^k(𝔭) / N𝔭`.
pub fn sum_sk(curve: &CurveSpec, k: i64, params: &SmoothingParams) -> Result<f64> {
    sum_sk_with(curve, k, params, &SumConfig::default())
}

pub fn sum_sk_with(
    curve: &CurveSpec,
    k: i64,
    params: &SmoothingParams,
    cfg: &SumConfig,
) -> Result<f64> {
    Ok(sk_from_terms(&split_terms(curve, params, cfg)?, k))
}

/// Terms of the prime-power series with norm in the support that are not
/// degree-one primes: `𝔭^m` (m ≥ 2) above split `p`, and every power of an
/// inert prime.
pub fn higher_terms(
    curve: &CurveSpec,
    k: i64,
    params: &SmoothingParams,
    cfg: &SumConfig,
) -> Result<Vec<VonMangoldtTerm>> {
    let (lo, hi) = support_bounds(params, cfg)?;
    if hi < lo {
        return Ok(Vec::new());
    }
    let root = crate::arith::isqrt(hi);
    let mut out = Vec::new();
    for p in crate::sieve::primes_in_range(2, root)? {
        if curve.is_bad(p) {
            continue;
        }
        let split = splitting_type(&curve.field, p);
        let lp = (p as f64).ln();
        match split {
            SplitType::Ramified => {}
            SplitType::Split => {
                let theta = frobenius_record(curve, p)?.theta;
                let mut norm = p;
                let mut m = 1u32;
                while let Some(next) = norm.checked_mul(p).filter(|&n| n <= hi) {
                    norm = next;
                    m += 1;
                    if norm >= lo {
                        out.push(VonMangoldtTerm {
                            norm,
                            log_norm_p: lp,
                            pair_character: character_pair_value(k * m as i64, theta),
                            split,
                            exponent: m,
                        });
                    }
                }
            }
            SplitType::Inert => {
                let step = p * p;
                let mut norm = 1u64;
                let mut m = 0u32;
                while let Some(next) = norm.checked_mul(step).filter(|&n| n <= hi) {
                    norm = next;
                    m += 1;
                    if norm >= lo {
                        let odd = (k * m as i64) % 2 != 0;
                        out.push(VonMangoldtTerm {
                            norm,
                            log_norm_p: 2.0 * lp,
                            pair_character: if odd { -1.0 } else { 1.0 },
                            split,
                            exponent: m,
                        });
                    }
                }
            }
        }
    }
    out.sort_by_key(|t| t.norm);
    Ok(out)
}

/// `I_k = Σ_𝔞 Λ(𝔞) R(N𝔞) ξ^k(𝔞) / N𝔞`: [`sum_sk`] plus the prime powers and
/// inert primes of [`higher_terms`].
pub fn sum_ik_series(curve: &CurveSpec, k: i64, params: &SmoothingParams) -> Result<f64> {
    sum_ik_series_with(curve, k, params, &SumConfig::default())
}

pub fn sum_ik_series_with(
    curve: &CurveSpec,
    k: i64,
    params: &SmoothingParams,
    cfg: &SumConfig,
) -> Result<f64> {
    let sk = sum_sk_with(curve, k, params, cfg)?;
    let mut acc = KahanSum::new();
    acc.add(sk);
    for t in higher_terms(curve, k, params, cfg)? {
        acc.add(t.contribution(params));
    }
    Ok(acc.total())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierBound {
    pub s: f64,
    /// `Σ_{|k|≤M} b_k S_k`.
    pub bound: f64,
    pub margin: f64,
    pub degree: usize,
}

/// Both sides of `S ≥ Σ_{|k|≤M} b_k S_k` with `b_k` from
/// [`selberg_minorant`].
pub fn fourier_lower_bound(
    curve: &CurveSpec,
    alpha: f64,
    beta: f64,
    params: &SmoothingParams,
    m: usize,
) -> Result<FourierBound> {
    fourier_lower_bound_with(curve, alpha, beta, params, m, &SumConfig::default())
}

pub fn fourier_lower_bound_with(
    curve: &CurveSpec,
    alpha: f64,
    beta: f64,
    params: &SmoothingParams,
    m: usize,
    cfg: &SumConfig,
) -> Result<FourierBound> {
    let poly = selberg_minorant(alpha, beta, m)?;
    let terms = split_terms(curve, params, cfg)?;
    Ok(bound_from_terms(&terms, &poly, alpha, beta))
}

fn bound_from_terms(
    terms: &[Vec<SplitTerm>],
    poly: &TrigPolynomial,
    alpha: f64,
    beta: f64,
) -> FourierBound {
    let s = s_from_terms(terms, alpha, beta);
    let mut bound = KahanSum::new();
    bound.add(poly.coefficient(0) * sk_from_terms(terms, 0));
    for k in 1..=poly.degree() as i64 {
        // b_{−k} S_{−k} = b_k S_k
        bound.add(2.0 * poly.coefficient(k) * sk_from_terms(terms, k));
    }
    let bound = bound.total();
    FourierBound {
        s,
        bound,
        margin: s - bound,
        degree: poly.degree(),
    }
}
