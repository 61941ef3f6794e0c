//! Least primes in angular sectors and empirical Sato-Tate tallies.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::CurveSpec;
use crate::error::{Error, Result};
use crate::frobenius::{frobenius_record, FrobeniusRecord};
use crate::quadratic_field::{splitting_type, SplitType};
use crate::sieve::SieveConfig;

/// Segment width used by the parallel tallies.
const TALLY_SEGMENT_BITS: u64 = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InertPolicy {
    /// Inert primes count, with angle exactly π/2.
    Include,
    /// Only split primes are eligible witnesses.
    SplitOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorQuery {
    pub alpha: f64,
    pub beta: f64,
    /// First integer examined.
    pub start: u64,
    pub limit: u64,
    pub inert_policy: InertPolicy,
}

impl SectorQuery {
    pub fn new(alpha: f64, beta: f64, limit: u64, inert_policy: InertPolicy) -> Result<Self> {
        if !(0.0 <= alpha && alpha < beta && beta <= PI) {
            return Err(Error::InvalidInput(format!(
                "sector needs 0 <= alpha < beta <= pi, got [{alpha}, {beta}]"
            )));
        }
        if limit < 2 {
            return Err(Error::InvalidInput(format!("limit must be at least 2, got {limit}")));
        }
        Ok(Self {
            alpha,
            beta,
            start: 2,
            limit,
            inert_policy,
        })
    }

    /// Restricts the scan to primes `≥ start`.
    pub fn starting_at(mut self, start: u64) -> Self {
        self.start = start.max(2);
        self
    }

    /// Closed-interval membership `α ≤ θ ≤ β`.
    pub fn contains(&self, theta: f64) -> bool {
        self.alpha <= theta && theta <= self.beta
    }

    pub fn accepts(&self, rec: &FrobeniusRecord) -> bool {
        let eligible = match self.inert_policy {
            InertPolicy::Include => true,
            InertPolicy::SplitOnly => rec.split == SplitType::Split,
        };
        eligible && self.contains(rec.theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorReport {
    pub found: Option<FrobeniusRecord>,
    /// Good primes examined, the hit included.
    pub primes_scanned: u64,
    /// Wall-clock seconds; not part of any reproducible output.
    pub elapsed: f64,
}

/// Record for `p` if it can possibly satisfy `q`; inert primes are decided
/// without point counting.
fn candidate_record(curve: &CurveSpec, p: u64, q: &SectorQuery) -> Result<Option<FrobeniusRecord>> {
    if curve.is_bad(p) {
        return Ok(None);
    }
    if splitting_type(&curve.field, p) == SplitType::Inert {
        if q.inert_policy == InertPolicy::SplitOnly || !q.contains(FRAC_PI_2) {
            return Ok(None);
        }
        return Ok(Some(FrobeniusRecord {
            p,
            split: SplitType::Inert,
            a_p: 0,
            theta: FRAC_PI_2,
        }));
    }
    frobenius_record(curve, p).map(Some)
}

/// Scans good primes in `[q.start, q.limit]` in ascending order and returns the
/// first whose angle lies in `[α, β]`. Bad primes are skipped.
///
/// Primes are examined in growing batches; inside a batch the work is
/// parallel and the smallest hit wins.
pub fn least_prime_in_sector(curve: &CurveSpec, q: &SectorQuery) -> Result<SectorReport> {
    let clock = Instant::now();
    let mut primes = SieveConfig::default().primes_in_range(q.start, q.limit)?;
    let mut scanned = 0u64;
    let mut batch = 64usize;
    loop {
        let chunk: Vec<u64> = primes.by_ref().filter(|&p| !curve.is_bad(p)).take(batch).collect();
        if chunk.is_empty() {
            break;
        }
        let hit = chunk
            .par_iter()
            .enumerate()
            .map(|(i, &p)| candidate_record(curve, p, q).map(|r| (i, r)))
            .filter_map(|res| match res {
                Ok((i, Some(rec))) if q.accepts(&rec) => Some(Ok((i, rec))),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            })
            .find_first(|_| true)
            .transpose()?;
        if let Some((i, rec)) = hit {
            return Ok(SectorReport {
                found: Some(rec),
                primes_scanned: scanned + i as u64 + 1,
                elapsed: clock.elapsed().as_secs_f64(),
            });
        }
        scanned += chunk.len() as u64;
        batch = (batch * 2).min(1 << 16);
    }
    Ok(SectorReport {
        found: None,
        primes_scanned: scanned,
        elapsed: clock.elapsed().as_secs_f64(),
    })
}

/// Same search over precomputed records sorted by `p` (e.g. a trace cache).
pub fn least_prime_in_records(records: &[FrobeniusRecord], q: &SectorQuery) -> SectorReport {
    let clock = Instant::now();
    let window = records
        .iter()
        .filter(|r| r.p >= q.start && r.p <= q.limit);
    let mut scanned = 0;
    for r in window {
        scanned += 1;
        if q.accepts(r) {
            return SectorReport {
                found: Some(*r),
                primes_scanned: scanned,
                elapsed: clock.elapsed().as_secs_f64(),
            };
        }
    }
    SectorReport {
        found: None,
        primes_scanned: scanned,
        elapsed: clock.elapsed().as_secs_f64(),
    }
}

/// Limiting CM Sato-Tate mass of `[α, β]`: `δ/2 + (β − α)/2π`, where `δ = 1`
/// iff `π/2 ∈ [α, β]`.
pub fn cm_measure(alpha: f64, beta: f64) -> f64 {
    let delta = if alpha <= FRAC_PI_2 && FRAC_PI_2 <= beta {
        1.0
    } else {
        0.0
    };
    delta / 2.0 + (beta - alpha) / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distribution {
    pub fraction: f64,
    pub count: u64,
    pub total: u64,
}

impl Distribution {
    fn from_counts(count: u64, total: u64) -> Self {
        Self {
            fraction: if total == 0 { 0.0 } else { count as f64 / total as f64 },
            count,
            total,
        }
    }
}

/// Fraction of good primes `p ≤ x_max` with `θ_p ∈ [α, β]`.
pub fn empirical_distribution(
    curve: &CurveSpec,
    x_max: u64,
    alpha: f64,
    beta: f64,
) -> Result<Distribution> {
    let cfg = SieveConfig {
        segment_bits: TALLY_SEGMENT_BITS,
        ..SieveConfig::default()
    };
    let parts = cfg.par_map_segments(2, x_max, |primes| -> Result<(u64, u64)> {
        let mut inside = 0;
        let mut total = 0;
        for &p in primes.iter().filter(|&&p| !curve.is_bad(p)) {
            let theta = match splitting_type(&curve.field, p) {
                SplitType::Inert => FRAC_PI_2,
                _ => frobenius_record(curve, p)?.theta,
            };
            total += 1;
            if alpha <= theta && theta <= beta {
                inside += 1;
            }
        }
        Ok((inside, total))
    })?;
    let (mut count, mut total) = (0, 0);
    for part in parts {
        let (c, t) = part?;
        count += c;
        total += t;
    }
    Ok(Distribution::from_counts(count, total))
}

/// [`empirical_distribution`] over precomputed records.
pub fn distribution_from_records(
    records: &[FrobeniusRecord],
    x_max: u64,
    alpha: f64,
    beta: f64,
) -> Distribution {
    let within: Vec<&FrobeniusRecord> = records.iter().filter(|r| r.p <= x_max).collect();
    let count = within
        .iter()
        .filter(|r| alpha <= r.theta && r.theta <= beta)
        .count();
    Distribution::from_counts(count as u64, within.len() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRow {
    pub curve: String,
    pub alpha: f64,
    pub beta: f64,
    /// `N_E / (β − α)`.
    pub scale: f64,
    pub p_min: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Survey {
    pub rows: Vec<SurveyRow>,
    /// Least squares fit of `log p_min` on `log scale` over found rows.
    pub fit: Option<LineFit>,
    pub not_found: usize,
}

/// Ordinary least squares `y = slope·x + intercept`; `None` when fewer than
/// two distinct abscissae are given.
pub fn ols(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        points: points.len(),
    })
}

/// One least-prime search per (curve, interval) pair, plus the log-log fit.
pub fn linnik_survey(
    curves: &[CurveSpec],
    intervals: &[(f64, f64)],
    limit: u64,
    policy: InertPolicy,
) -> Result<Survey> {
    if curves.is_empty() || intervals.is_empty() {
        return Err(Error::InvalidInput("survey needs curves and intervals".into()));
    }
    let jobs: Vec<(&CurveSpec, (f64, f64))> = curves
        .iter()
        .flat_map(|c| intervals.iter().map(move |&iv| (c, iv)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(curve, (alpha, beta))| {
            let q = SectorQuery::new(alpha, beta, limit, policy)?;
            let report = least_prime_in_sector(curve, &q)?;
            Ok(SurveyRow {
                curve: curve.label.clone(),
                alpha,
                beta,
                scale: curve.conductor as f64 / (beta - alpha),
                p_min: report.found.map(|r| r.p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.p_min.map(|p| (r.scale.ln(), (p as f64).ln())))
        .collect();
    Ok(Survey {
        not_found: rows.len() - pts.len(),
        fit: ols(&pts),
        rows,
    })
}
