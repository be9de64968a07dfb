//! Empirical fits of swept observables.
//!
//! * η(γ) ≈ 1 − exp(−a·T·γ), one parameter, by golden-section search on the
//!   sum of squared residuals (with a log-linear estimator as cross-check).
//! * ln a = Σ bₖ·[ln(g/Ω₀)]ᵏ, ordinary least squares via a column-scaled QR.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Search interval for the efficiency exponent a.
pub const EXPONENT_BRACKET: (f64, f64) = (1e-3, 1e3);
/// Relative tolerance on a.
pub const EXPONENT_TOLERANCE: f64 = 1e-8;

/// Published a at g/Ω₀ = 1/4.
pub const REFERENCE_EXPONENT: f64 = 1.5029;

/// Published b₀…b₅ of the degree-5 law for ln a. The source prints the last
/// coefficient as a second "b₄"; it is taken to be b₅.
pub const REFERENCE_POLYNOMIAL: [f64; 6] = [-1.3173, -1.7179, -0.26329, 0.11487, 0.048967, 0.0051358];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// `[a]` for the efficiency law, `[b₀, …, b_d]` for the polynomial.
    pub parameters: Vec<f64>,
    pub residual_max: f64,
    pub residual_rms: f64,
    /// Input points, for reproducibility.
    pub grid: Vec<(f64, f64)>,
}

impl FitResult {
    fn from_residuals(parameters: Vec<f64>, residuals: &[f64], grid: &[(f64, f64)]) -> Self {
        let residual_max = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
        let residual_rms =
            (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
        Self {
            parameters,
            residual_max,
            residual_rms,
            grid: grid.to_vec(),
        }
    }
}

/// Minimizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn golden_section_minimize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// 1 − exp(−a·T·γ).
pub fn efficiency_law(a: f64, time_scale: f64, gamma: f64) -> f64 {
    -(-a * time_scale * gamma).exp_m1()
}

fn check_efficiency_points(points: &[(f64, f64)], time_scale: f64) -> Result<()> {
    if !(time_scale.is_finite() && time_scale > 0.0) {
        return Err(invalid("T", format!("must be positive, got {time_scale}")));
    }
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 (gamma, eta) points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(g, e)| !(g.is_finite() && g >= 0.0 && e.is_finite()))
    {
        return Err(invalid("points", "gamma must be finite and non-negative, eta finite"));
    }
    if points.iter().all(|&(g, _)| g == 0.0) {
        return Err(Error::Unidentifiable("every point has gamma = 0".into()));
    }
    let mut gammas: Vec<f64> = points.iter().map(|p| p.0).collect();
    gammas.sort_by(f64::total_cmp);
    if gammas.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("points", "gamma values must be distinct"));
    }
    // Across the whole bracket the law must move at least one point measurably.
    let (a_lo, a_hi) = EXPONENT_BRACKET;
    let spread = points
        .iter()
        .map(|&(g, _)| (efficiency_law(a_hi, time_scale, g) - efficiency_law(a_lo, time_scale, g)).abs())
        .fold(0.0, f64::max);
    if spread < IDENTIFIABLE_SPREAD {
        return Err(Error::Unidentifiable(format!(
            "gamma*T is too small at every point to constrain a (largest change {spread:e})"
        )));
    }
    Ok(())
}

/// Smallest change of η over [`EXPONENT_BRACKET`] that counts as information.
const IDENTIFIABLE_SPREAD: f64 = 1e-9;

/// Least-squares a in η ≈ 1 − exp(−a·T·γ).
///
/// A coarse logarithmic scan over [`EXPONENT_BRACKET`] locates the basin, then
/// golden-section search in ln a refines it to [`EXPONENT_TOLERANCE`].
pub fn fit_efficiency_exponent(points: &[(f64, f64)], time_scale: f64) -> Result<FitResult> {
    check_efficiency_points(points, time_scale)?;
    let sse = |ln_a: f64| {
        let a = ln_a.exp();
        points
            .iter()
            .map(|&(g, e)| {
                let r = e - efficiency_law(a, time_scale, g);
                r * r
            })
            .sum::<f64>()
    };

    let (lo, hi) = (EXPONENT_BRACKET.0.ln(), EXPONENT_BRACKET.1.ln());
    const SCAN: usize = 240;
    let step = (hi - lo) / SCAN as f64;
    let best = (0..=SCAN)
        .map(|i| (i, sse(lo + step * i as f64)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let left = lo + step * best.saturating_sub(1) as f64;
    let right = (lo + step * (best + 1) as f64).min(hi);
    let ln_a = golden_section_minimize(sse, left, right, 0.1 * EXPONENT_TOLERANCE);
    if ln_a - lo < step || hi - ln_a < step {
        return Err(Error::Unidentifiable(format!(
            "least-squares a = {:e} lies on the edge of the search bracket",
            ln_a.exp()
        )));
    }
    let a = ln_a.exp();

    let residuals: Vec<f64> = points
        .iter()
        .map(|&(g, e)| e - efficiency_law(a, time_scale, g))
        .collect();
    Ok(FitResult::from_residuals(vec![a], &residuals, points))
}

/// Cross-check estimator: regression of ln(1 − η) = −a·T·γ through the origin.
/// Points with γ = 0 or η ≥ 1 carry no information and are skipped.
pub fn fit_efficiency_exponent_loglinear(points: &[(f64, f64)], time_scale: f64) -> Result<f64> {
    check_efficiency_points(points, time_scale)?;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(g, e)| g > 0.0 && e < 1.0)
        .map(|&(g, e)| (g, (-e).ln_1p()))
        .collect();
    if usable.is_empty() {
        return Err(Error::Unidentifiable("no point with gamma > 0 and eta < 1".into()));
    }
    let num: f64 = usable.iter().map(|&(g, y)| g * y).sum();
    let den: f64 = usable.iter().map(|&(g, _)| g * g).sum();
    if den == 0.0 {
        return Err(Error::Unidentifiable("gamma values underflow".into()));
    }
    Ok(-num / (den * time_scale))
}

/// Evaluates Σ bₖ xᵏ by Horner's rule.
pub fn polynomial(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &b| acc * x + b)
}

/// a predicted by a log-log polynomial at the coupling ratio g/Ω₀.
pub fn exponent_from_polynomial(coefficients: &[f64], ratio: f64) -> f64 {
    polynomial(coefficients, ratio.ln()).exp()
}

/// Ordinary least-squares polynomial of `degree` through `(x, y)`.
pub fn least_squares_polynomial(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = x.len();
    let m = degree + 1;
    if n != y.len() {
        return Err(invalid("points", "x and y lengths differ"));
    }
    if n <= m {
        return Err(Error::InsufficientData(format!(
            "need more than {m} points for degree {degree}, got {n}"
        )));
    }
    let mut design = DMatrix::from_fn(n, m, |i, k| x[i].powi(k as i32));
    let mut scale = vec![1.0; m];
    for (k, s) in scale.iter_mut().enumerate() {
        let norm = design.column(k).norm();
        if norm > 0.0 {
            *s = norm;
            design.column_mut(k).scale_mut(1.0 / norm);
        }
    }
    let qr = design.qr();
    let r = qr.r();
    let diag_max = (0..m).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
    if (0..m).any(|k| r[(k, k)].abs() <= 1e-10 * diag_max) || diag_max == 0.0 {
        return Err(Error::RankDeficient);
    }
    let rhs = qr.q().transpose() * DVector::from_column_slice(y);
    let scaled = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient)?;
    Ok(scaled.iter().zip(&scale).map(|(b, s)| b / s).collect())
}

/// Fits ln a = Σ bₖ·[ln(g/Ω₀)]ᵏ to `(g/Ω₀, a)` points. Residuals are in ln a.
pub fn fit_log_polynomial(points: &[(f64, f64)], degree: usize) -> Result<FitResult> {
    if points
        .iter()
        .any(|&(r, a)| !(r > 0.0 && a > 0.0 && r.is_finite() && a.is_finite()))
    {
        return Err(invalid("points", "ratios and exponents must be positive"));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let coefficients = least_squares_polynomial(&x, &y, degree)?;
    let residuals: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(&x, &y)| y - polynomial(&coefficients, x))
        .collect();
    Ok(FitResult::from_residuals(coefficients, &residuals, points))
}
