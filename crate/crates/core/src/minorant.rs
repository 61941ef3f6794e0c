//! Even trigonometric minorants of interval indicators on `[0, π]`.
//!
//! For `I = [α, β] ⊂ [0, π]` and degree `M` we build Selberg's minorant
//! `s_I` of `I` on the circle `ℝ/2πℤ` and return `S = s_I + s_{−I}`. Outside
//! `I ∪ (−I)` both terms are `≤ 0`, and at the shared endpoints `0`, `π` both
//! vanish from above by continuity, so `S ≤ χ_I` on `[0, π]`.
//!
//! Selberg's minorant comes from Vaaler's approximation `V_M` of the sawtooth
//! `ψ(x) = x − ⌊x⌋ − 1/2`, `|ψ − V_M| ≤ F_{M+1}/(2M+2)` with `F` the Fejér
//! kernel, through `χ_{[a,b]}(x) = b − a + ψ(a − x) + ψ(x − b)`. Every
//! coefficient is closed form:
//!
//! ```text
//! b_0 = (β − α)/π − 2/(M+1)
//! b_n = J(n/(M+1)) (sin nβ − sin nα)/(πn) − (1 − n/(M+1)) (cos nα + cos nβ)/(M+1)
//! J(u) = πu(1 − u)cot(πu) + u
//! ```

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Intervals shorter than this are rejected.
pub const DEGENERATE_WIDTH: f64 = 1e-12;

/// `S(θ) = Σ_{|n|≤M} b_n e^{inθ}` with `b_{−n} = b_n`; only `b_0..=b_M` are stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPolynomial {
    coeffs: Vec<f64>,
}

impl TrigPolynomial {
    /// From `b_0, …, b_M`.
    pub fn from_coefficients(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `b_n` for `−M ≤ n ≤ M`, zero beyond the degree.
    pub fn coefficient(&self, n: i64) -> f64 {
        self.coeffs
            .get(n.unsigned_abs() as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// `b_0, …, b_M`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `b_0 + 2 Σ_{n=1}^{M} b_n cos(nθ)`.
    pub fn evaluate(&self, theta: f64) -> f64 {
        let tail: f64 = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, b)| b * ((i + 1) as f64 * theta).cos())
            .sum();
        self.coeffs[0] + 2.0 * tail
    }
}

/// Vaaler's weight `J(u) = πu(1 − u)cot(πu) + u` on `(0, 1)`.
pub fn vaaler_weight(u: f64) -> f64 {
    let x = PI * u;
    x * (1.0 - u) / x.tan() + u
}

fn check_interval(alpha: f64, beta: f64) -> Result<()> {
    if !(0.0 <= alpha && alpha <= beta && beta <= PI) {
        return Err(Error::InvalidInput(format!(
            "interval [{alpha}, {beta}] is not inside [0, pi]"
        )));
    }
    if beta - alpha < DEGENERATE_WIDTH {
        return Err(Error::DegenerateInterval { alpha, beta });
    }
    Ok(())
}

/// Degree-`m` even minorant of `χ_{[α, β]}` on `[0, π]`.
pub fn selberg_minorant(alpha: f64, beta: f64, m: usize) -> Result<TrigPolynomial> {
    check_interval(alpha, beta)?;
    if m == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    let m1 = (m + 1) as f64;
    let mut coeffs = Vec::with_capacity(m + 1);
    coeffs.push((beta - alpha) / PI - 2.0 / m1);
    for n in 1..=m {
        let nf = n as f64;
        let u = nf / m1;
        let smooth = vaaler_weight(u) * ((nf * beta).sin() - (nf * alpha).sin()) / (PI * nf);
        let fejer = (1.0 - u) * ((nf * alpha).cos() + (nf * beta).cos()) / m1;
        coeffs.push(smooth - fejer);
    }
    Ok(TrigPolynomial { coeffs })
}

/// Largest allowed `|b_n|` (and deviation of `b_0` from `(β − α)/π`).
pub fn coefficient_bound(alpha: f64, beta: f64, m: usize, n: i64) -> f64 {
    let base = 2.0 / (m + 1) as f64;
    if n == 0 {
        base
    } else {
        base + ((beta - alpha) / PI).min(2.0 / (PI * n.unsigned_abs() as f64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientViolation {
    pub n: i64,
    /// `|b_n|`, or `|b_0 − (β − α)/π|` for `n = 0`.
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorantCheck {
    /// `max_θ S(θ) − χ_I(θ)` over the grid; `≤ 0` for a minorant.
    pub max_violation: f64,
    pub worst_theta: f64,
    /// `max_n (|b_n| − bound_n)`; `≤ 0` when every bound holds.
    pub coefficient_excess: f64,
    pub coefficient_violations: Vec<CoefficientViolation>,
    pub symmetric: bool,
}

/// Slack allowed on the coefficient bounds before a violation is recorded.
pub const COEFFICIENT_SLACK: f64 = 1e-12;

/// Grid check of `S ≤ χ_{[α, β]}` on `grid_points` equally spaced angles in
/// `[0, π]` (both ends included), plus the coefficient bounds.
pub fn verify_minorant(
    poly: &TrigPolynomial,
    alpha: f64,
    beta: f64,
    grid_points: usize,
) -> Result<MinorantCheck> {
    if grid_points < 2 {
        return Err(Error::InvalidInput("grid needs at least two points".into()));
    }
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_theta = 0.0;
    for i in 0..grid_points {
        let theta = PI * i as f64 / (grid_points - 1) as f64;
        let chi = if alpha <= theta && theta <= beta { 1.0 } else { 0.0 };
        let excess = poly.evaluate(theta) - chi;
        if excess > max_violation {
            max_violation = excess;
            worst_theta = theta;
        }
    }

    let m = poly.degree();
    let mut coefficient_excess = f64::NEG_INFINITY;
    let mut coefficient_violations = Vec::new();
    for n in 0..=m as i64 {
        let b = poly.coefficient(n);
        let value = if n == 0 { (b - (beta - alpha) / PI).abs() } else { b.abs() };
        let bound = coefficient_bound(alpha, beta, m, n);
        coefficient_excess = coefficient_excess.max(value - bound);
        if value > bound + COEFFICIENT_SLACK {
            coefficient_violations.push(CoefficientViolation { n, value, bound });
        }
    }
    let symmetric = (1..=m as i64).all(|n| poly.coefficient(n) == poly.coefficient(-n));

    Ok(MinorantCheck {
        max_violation,
        worst_theta,
        coefficient_excess,
        coefficient_violations,
        symmetric,
    })
}
