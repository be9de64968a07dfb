//! Emission observables of a recorded run: the emission rate P(t) = γ_t·p(t),
//! the efficiency η = ∫P dt, the emission time t_max and the FWHM δt of
//! p(t) = ⟨g,1|ρ|g,1⟩.

use serde::{Deserialize, Serialize};

use crate::engine::integrate::RESIDUAL_THRESHOLD;
use crate::engine::Trajectory;
use crate::error::{invalid, Error, Result};

/// Efficiencies above 1 by less than this are rounding, not physics.
pub const EFFICIENCY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionReport {
    pub eta: f64,
    pub t_max: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub delta_t: f64,
    pub peak_p: f64,
    /// Populations of (|u,0⟩, |e,0⟩, |g,1⟩, |g,0⟩) at the end of the window.
    pub final_populations: [f64; 4],
    pub residual_p_end: f64,
}

/// Interpolated maximum of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfMaximum {
    pub t_minus: f64,
    pub t_plus: f64,
    pub delta_t: f64,
}

fn check_transmission(traj: &Trajectory, gamma_t: f64) -> Result<()> {
    if gamma_t >= 0.0 && gamma_t <= traj.params.gamma {
        Ok(())
    } else {
        Err(invalid(
            "gamma_t",
            format!("must lie in [0, {}], got {gamma_t}", traj.params.gamma),
        ))
    }
}

fn times(traj: &Trajectory) -> Vec<f64> {
    traj.samples().iter().map(|s| s.t).collect()
}

fn intracavity(traj: &Trajectory) -> Vec<f64> {
    traj.samples().iter().map(|s| s.p_g1()).collect()
}

/// (t, P(t)) at every recorded sample.
pub fn emission_rate(traj: &Trajectory, gamma_t: f64) -> Result<Vec<(f64, f64)>> {
    check_transmission(traj, gamma_t)?;
    Ok(traj
        .samples()
        .iter()
        .map(|s| (s.t, gamma_t * s.p_g1()))
        .collect())
}

pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (y[0] + y[1]) * (t[1] - t[0]))
        .sum()
}

pub fn efficiency(traj: &Trajectory, gamma_t: f64) -> Result<f64> {
    let rate = emission_rate(traj, gamma_t)?;
    let (t, p): (Vec<f64>, Vec<f64>) = rate.into_iter().unzip();
    let eta = trapezoid(&t, &p);
    let residual = traj.last().p_g1();
    if residual >= RESIDUAL_THRESHOLD {
        log::warn!("p_g1 = {residual:e} at the end of the window; eta = {eta} is under-counted");
    }
    if eta > 1.0 + EFFICIENCY_SLACK {
        return Err(Error::EfficiencyAboveUnity(eta));
    }
    Ok(eta)
}

/// Maximum of a sampled curve refined by a parabola through the discrete
/// argmax and its two neighbours.
pub fn series_peak(t: &[f64], y: &[f64]) -> Result<Peak> {
    let n = y.len().min(t.len());
    if n < 3 {
        return Err(invalid("series", "need at least three samples"));
    }
    let index = (1..n).fold(0, |best, i| if y[i] > y[best] { i } else { best });
    if index == 0 || index == n - 1 {
        return Err(Error::PeakAtBoundary { t: t[index] });
    }
    let (a, b) = (t[index] - t[index - 1], t[index + 1] - t[index]);
    let (y0, y1, y2) = (y[index - 1], y[index], y[index + 1]);
    let curvature = ((y0 - y1) / a + (y2 - y1) / b) / (a + b);
    if !(curvature < 0.0) {
        return Ok(Peak {
            index,
            t: t[index],
            value: y1,
        });
    }
    let slope = (y2 - y1) / b - curvature * b;
    let offset = (-slope / (2.0 * curvature)).clamp(-a, b);
    Ok(Peak {
        index,
        t: t[index] + offset,
        value: y1 + slope * offset + curvature * offset * offset,
    })
}

/// Half-maximum crossings around the peak, by linear interpolation.
pub fn series_fwhm(t: &[f64], y: &[f64]) -> Result<HalfMaximum> {
    let peak = series_peak(t, y)?;
    let half = 0.5 * peak.value;

    let crossings = y
        .windows(2)
        .filter(|w| (w[0] >= half) != (w[1] >= half))
        .count();
    if crossings > 2 {
        return Err(Error::HalfMaximum(format!(
            "{crossings} half-maximum crossings; p(t) is multi-modal"
        )));
    }

    let interpolate = |i: usize, j: usize| t[i] + (half - y[i]) * (t[j] - t[i]) / (y[j] - y[i]);
    let left = (0..peak.index)
        .rev()
        .find(|&i| y[i] < half)
        .ok_or_else(|| Error::HalfMaximum("no crossing before the peak".into()))?;
    let right = (peak.index + 1..y.len())
        .find(|&i| y[i] < half)
        .ok_or_else(|| Error::HalfMaximum("no crossing after the peak".into()))?;
    let t_minus = interpolate(left, left + 1);
    let t_plus = interpolate(right - 1, right);
    Ok(HalfMaximum {
        t_minus,
        t_plus,
        delta_t: t_plus - t_minus,
    })
}

pub fn peak_time(traj: &Trajectory) -> Result<f64> {
    Ok(series_peak(&times(traj), &intracavity(traj))?.t)
}

pub fn fwhm(traj: &Trajectory) -> Result<HalfMaximum> {
    series_fwhm(&times(traj), &intracavity(traj))
}

pub fn final_populations(traj: &Trajectory) -> [f64; 4] {
    traj.last().populations()
}

/// All observables of one run.
pub fn analyze(traj: &Trajectory, gamma_t: f64) -> Result<EmissionReport> {
    let t = times(traj);
    let p = intracavity(traj);
    let peak = series_peak(&t, &p)?;
    let half = series_fwhm(&t, &p)?;
    Ok(EmissionReport {
        eta: efficiency(traj, gamma_t)?,
        t_max: peak.t,
        t_minus: half.t_minus,
        t_plus: half.t_plus,
        delta_t: half.delta_t,
        peak_p: peak.value,
        final_populations: final_populations(traj),
        residual_p_end: traj.last().p_g1(),
    })
}
