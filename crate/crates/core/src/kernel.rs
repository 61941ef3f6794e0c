//! The smoothing kernel `K(s)` and its weight function `R(y)`.
//!
//! `K(s) = x^{(A−2)s/2} (x^s − 1)/(s log x)` is the Mellin transform of the
//! box `(1/log x)·1[x^{(A−2)/2}, x^{A/2}]`. Hence `K(s)²` is the transform of
//! the multiplicative self-convolution of that box, which is a tent in
//! `log y`:
//!
//! ```text
//! R(y) = (1/log x) · max(0, 1 − |log y / log x − (A − 1)|)
//! ```
//!
//! supported on `[x^{A−2}, x^A]` with peak `1/log x` at `y = x^{A−1}`.
//! [`r_closed_form`] evaluates this; [`r_numeric`] integrates `K(s)² y^{−s}`
//! along a vertical line and serves as an independent check.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::KahanSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingParams {
    x: f64,
    a: f64,
}

impl SmoothingParams {
    /// Requires `x > 1` (so that `log x > 0`) and `A > 2`.
    pub fn new(x: f64, a: f64) -> Result<Self> {
        if !(x > 1.0 && x.is_finite()) {
            return Err(Error::InvalidInput(format!("x must be a finite number > 1, got {x}")));
        }
        if !(a > 2.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("A must be a finite number > 2, got {a}")));
        }
        Ok(Self { x, a })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `B₁ = A − 2`.
    pub fn b1(&self) -> f64 {
        self.a - 2.0
    }

    pub fn log_x(&self) -> f64 {
        self.x.ln()
    }

    /// `[x^{A−2}, x^A]`.
    pub fn support(&self) -> (f64, f64) {
        (self.x.powf(self.a - 2.0), self.x.powf(self.a))
    }

    /// `1/log x`, the largest value of `R`.
    pub fn peak(&self) -> f64 {
        1.0 / self.log_x()
    }
}

/// `(e^z − 1)/z`, continuous at `z = 0`.
fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `K(s) = x^{(A−2)s/2} · (x^s − 1)/(s log x)`, with `K(0) = 1`.
pub fn kernel_k(s: Complex64, params: &SmoothingParams) -> Complex64 {
    let l = params.log_x();
    (s * (l * params.b1() / 2.0)).exp() * exprel(s * l)
}

/// Right-hand side of the kernel estimate for `σ < 0`:
/// `x^{B₁σ} · min(1, 4/(|s|² log² x))`.
pub fn kernel_bound(s: Complex64, params: &SmoothingParams) -> f64 {
    let l = params.log_x();
    params.x.powf(params.b1() * s.re) * (4.0 / (s.norm_sqr() * l * l)).min(1.0)
}

/// `R(y)` from the tent formula; zero outside `[x^{A−2}, x^A]` and for `y ≤ 0`.
pub fn r_closed_form(y: f64, params: &SmoothingParams) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let u = y.ln() / params.log_x();
    params.peak() * (1.0 - (u - (params.a - 1.0)).abs()).max(0.0)
}

/// Flag raised when the estimated truncation error is above [`TAIL_TOLERANCE`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationWarning {
    pub error_estimate: f64,
}

pub const TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourOptions {
    /// Height at which the line integral is cut off.
    pub t_max: f64,
    /// Real part of the integration line. `K(s)² y^{−s}` is entire with
    /// `O(|t|^{−2})` decay in vertical strips, so every abscissa gives the
    /// same integral; the default `0` keeps `|K|² ≤ 1` and avoids the
    /// `x^{2Aσ}`-sized cancellation of lines further right.
    pub abscissa: f64,
    /// Gauss-Legendre nodes per panel.
    pub order: usize,
    /// Largest phase change of the integrand across one panel, in radians.
    pub panel_phase: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            t_max: 2e4,
            abscissa: 0.0,
            order: 16,
            panel_phase: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericR {
    pub value: f64,
    /// Integral cut at `t_max` with no extrapolation.
    pub truncated: f64,
    /// Rigorous bound on the tail beyond `t_max` of the plain truncation.
    pub raw_tail_bound: f64,
    /// Difference between the extrapolations from `t_max` and `t_max/2`.
    pub error_estimate: f64,
    pub warning: Option<TruncationWarning>,
}

/// `R(y) = (1/2πi) ∫ K(s)² y^{−s} ds` by quadrature on `Re s = abscissa`.
///
/// The line integral equals `(1/π) ∫_0^∞ Re[K(c+it)² y^{−c−it}] dt`; it is
/// computed on `[0, T]` for `T = t_max/4, t_max/2, t_max` with panelled
/// Gauss-Legendre. Non-oscillating tail contributions decay like `1/T`, so
/// the result is the Richardson extrapolation `2I(T) − I(T/2)`.
pub fn r_numeric(y: f64, params: &SmoothingParams, opts: &ContourOptions) -> Result<NumericR> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::InvalidInput(format!("y must be positive, got {y}")));
    }
    if opts.t_max < 1e3 || opts.order < 2 || opts.panel_phase <= 0.0 {
        return Err(Error::InvalidInput("contour options out of range".into()));
    }
    let c = opts.abscissa;
    let l = params.log_x();
    let ln_y = y.ln();
    let integrand = |t: f64| {
        let s = Complex64::new(c, t);
        let k = kernel_k(s, params);
        (k * k * (-s * ln_y).exp()).re
    };
    // phase velocity of x^{(A−2)s} y^{−s}, plus 2 log x for ((x^s − 1)/s)²
    let freq = (params.b1() * l - ln_y).abs() + 2.0 * l;
    let panel = (opts.panel_phase / freq).min(1.0);
    let rule = GaussLegendre::new(opts.order)
        .map_err(|e| Error::InvalidInput(format!("quadrature rule: {e}")))?;

    let integrate = |from: f64, to: f64| {
        let n = ((to - from) / panel).ceil().max(1.0) as usize;
        let h = (to - from) / n as f64;
        let mut acc = KahanSum::new();
        for i in 0..n {
            let a = from + h * i as f64;
            acc.add(rule.integrate(a, a + h, integrand));
        }
        acc.total() / PI
    };
    let t = opts.t_max;
    let i_quarter = integrate(0.0, t / 4.0);
    let i_half = i_quarter + integrate(t / 4.0, t / 2.0);
    let i_full = i_half + integrate(t / 2.0, t);

    let value = 2.0 * i_full - i_half;
    let coarse = 2.0 * i_half - i_quarter;
    let error_estimate = (value - coarse).abs();

    // |K(c+it)|² |y^{−s}| ≤ x^{B₁c} (x^c + 1)² y^{−c} / (t² log² x)
    let amp = params.x.powf(params.b1() * c) * (params.x.powf(c) + 1.0).powi(2) * y.powf(-c);
    let raw_tail_bound = amp / (l * l * PI * t);

    Ok(NumericR {
        value,
        truncated: i_full,
        raw_tail_bound,
        error_estimate,
        warning: (error_estimate > TAIL_TOLERANCE).then_some(TruncationWarning { error_estimate }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(x: f64, a: f64) -> SmoothingParams {
        SmoothingParams::new(x, a).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(SmoothingParams::new(1.0, 4.0).is_err());
        assert!(SmoothingParams::new(10.0, 2.0).is_err());
        let p = params(10.0, 8.0);
        assert_eq!(p.b1(), 6.0);
        let (lo, hi) = p.support();
        assert!((lo - 1e6).abs() < 1e-3 && (hi - 1e8).abs() < 1e-1);
    }

    #[test]
    fn kernel_at_zero_and_on_the_real_axis() {
        let p = params(10.0, 4.0);
        assert_eq!(kernel_k(Complex64::new(0.0, 0.0), &p), Complex64::new(1.0, 0.0));
        for s in [-3.0, -0.5, 1e-9, 0.3, 2.0] {
            let k = kernel_k(Complex64::new(s, 0.0), &p);
            assert_eq!(k.im, 0.0);
            let direct = 10f64.powf(s) * (10f64.powf(s) - 1.0) / (s * 10f64.ln());
            assert!((k.re - direct).abs() <= 1e-6 * direct.abs().max(1.0));
        }
        // the series branch agrees with the direct formula near its cutoff
        let l = 10f64.ln();
        for t in [0.5e-4, 0.99e-4] {
            let s = Complex64::new(0.0, t / l);
            let direct = (s * l).exp() * ((s * l).exp() - 1.0) / (s * l);
            assert!((kernel_k(s, &p) - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn kernel_bound_example() {
        let p = params(10.0, 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = Complex64::new(-1.0, rng.gen_range(-50.0..50.0));
            assert!(kernel_k(s, &p).norm_sqr() <= kernel_bound(s, &p) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tent_values() {
        let p = params(10.0, 4.0);
        let peak = 1.0 / 10f64.ln();
        assert!((r_closed_form(1e3, &p) - peak).abs() < 1e-15);
        assert_eq!(r_closed_form(1e2 / 2.0, &p), 0.0);
        assert!((r_closed_form(10f64.powf(2.5), &p) - 0.5 * peak).abs() < 1e-15);
        assert_eq!(r_closed_form(1e4 * 1.01, &p), 0.0);
        assert_eq!(r_closed_form(-1.0, &p), 0.0);
        for i in 0..=1000 {
            let y = 10f64.powf(1.5 + 3.0 * i as f64 / 1000.0);
            let r = r_closed_form(y, &p);
            assert!((0.0..=peak).contains(&r));
        }
    }

    #[test]
    fn numeric_peak() {
        let p = params(10.0, 4.0);
        let r = r_numeric(1e3, &p, &ContourOptions::default()).unwrap();
        assert!((r.value - std::f64::consts::LOG10_E).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn numeric_vanishes_outside_support() {
        let p = params(10.0, 4.0);
        for y in [1.0, 30.0, 5e4, 1e6] {
            let r = r_numeric(y, &p, &ContourOptions::default()).unwrap();
            assert!(r.value.abs() <= 1e-6, "y={y}: {r:?}");
        }
    }

    #[test]
    fn abscissa_does_not_matter() {
        let p = params(3.0, 4.0);
        let y = 3f64.powf(2.7);
        let at = |c: f64| {
            let opts = ContourOptions { abscissa: c, t_max: 1e4, ..ContourOptions::default() };
            r_numeric(y, &p, &opts).unwrap().value
        };
        let base = at(0.0);
        assert!((base - r_closed_form(y, &p)).abs() < 1e-7);
        for c in [0.5, 2.0] {
            assert!((at(c) - base).abs() < 1e-6, "c={c}");
        }
    }
}
