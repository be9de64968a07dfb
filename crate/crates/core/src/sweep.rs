//! Parameter sweeps over γ, T or g/Ω₀, and the composite "exponent at a
//! coupling ratio" task behind the efficiency law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, EmissionReport};
use crate::engine::{simulate, DensityState, Level, ScheduleSpec};
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_efficiency_exponent, FitResult};
use crate::model::{adiabaticity_margin, PulseParams, SystemParams};

/// Points with T / threshold below this are flagged as non-adiabatic.
pub const MIN_ADIABATIC_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Gamma,
    #[serde(rename = "T")]
    TimeScale,
    #[serde(rename = "g_over_omega0")]
    CouplingRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range {
        min: f64,
        max: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Grid {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Grid::Range {
            min,
            max,
            count,
            spacing: Spacing::Linear,
        }
    }

    pub fn logarithmic(min: f64, max: f64, count: usize) -> Self {
        Grid::Range {
            min,
            max,
            count,
            spacing: Spacing::Logarithmic,
        }
    }

    /// 19 uniform decay rates on [0, 3.6×10⁵] 1/s.
    pub fn default_gamma() -> Self {
        Self::linear(0.0, 3.6e5, 19)
    }

    /// 30 log-spaced coupling ratios on [0.02, 1.5].
    pub fn default_ratio() -> Self {
        Self::logarithmic(0.02, 1.5, 30)
    }

    /// Grid values; strictly increasing with at least two points.
    pub fn points(&self) -> Result<Vec<f64>> {
        let values = match *self {
            Grid::Values(ref v) => v.clone(),
            Grid::Range {
                min,
                max,
                count,
                spacing,
            } => {
                if count < 2 {
                    return Err(invalid("grid", "count must be at least 2"));
                }
                if !(min.is_finite() && max.is_finite()) {
                    return Err(invalid("grid", "endpoints must be finite"));
                }
                let last = (count - 1) as f64;
                match spacing {
                    Spacing::Linear => (0..count)
                        .map(|i| {
                            if i == count - 1 {
                                max
                            } else {
                                min + (max - min) * i as f64 / last
                            }
                        })
                        .collect(),
                    Spacing::Logarithmic => {
                        if !(min > 0.0) {
                            return Err(invalid("grid", "logarithmic spacing needs min > 0"));
                        }
                        let ratio = max / min;
                        (0..count)
                            .map(|i| {
                                if i == count - 1 {
                                    max
                                } else {
                                    min * ratio.powf(i as f64 / last)
                                }
                            })
                            .collect()
                    }
                }
            }
        };
        if values.len() < 2 {
            return Err(invalid("grid", "need at least two points"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid", "values must be finite"));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid", "values must be strictly increasing"));
        }
        Ok(values)
    }
}

/// One swept variable over a grid; everything else fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Grid,
    pub pulse: PulseParams,
    pub params: SystemParams,
    /// γ_t / γ applied at every point; 1 means all cavity loss is useful output.
    pub transmission: f64,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, grid: Grid, pulse: PulseParams, params: SystemParams) -> Self {
        Self {
            variable,
            grid,
            pulse,
            params,
            transmission: 1.0,
        }
    }

    /// Pulse and system parameters at one grid value.
    pub fn configure(&self, value: f64) -> (PulseParams, SystemParams) {
        let mut pulse = self.pulse;
        let mut params = self.params;
        match self.variable {
            SweepVariable::Gamma => params.gamma = value,
            SweepVariable::TimeScale => pulse.time_scale = value,
            SweepVariable::CouplingRatio => params.g = value * pulse.omega0,
        }
        params.gamma_t = self.transmission * params.gamma;
        (pulse, params)
    }

    /// Checks the grid and every configured point; returns the grid values.
    pub fn validate(&self) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&self.transmission) {
            return Err(invalid("transmission", "gamma_t / gamma must lie in [0, 1]"));
        }
        let values = self.grid.points()?;
        for &v in &values {
            let (pulse, params) = self.configure(v);
            pulse.validate()?;
            params.validate()?;
        }
        Ok(values)
    }
}

/// Result of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub pulse: PulseParams,
    pub params: SystemParams,
    /// T divided by the adiabaticity threshold.
    pub adiabaticity_margin: f64,
    pub outcome: std::result::Result<EmissionReport, Error>,
}

impl SweepPoint {
    pub fn is_adiabatic(&self) -> bool {
        self.adiabaticity_margin >= MIN_ADIABATIC_MARGIN
    }
}

/// Simulates and analyses one parameter set from |u,0⟩.
pub fn run_point(
    pulse: &PulseParams,
    params: &SystemParams,
    schedule: &ScheduleSpec,
) -> Result<EmissionReport> {
    let traj = simulate(
        pulse,
        params,
        &schedule.resolve(pulse),
        &DensityState::pure(Level::U0),
    )?;
    analyze(&traj, params.gamma_t)
}

/// Runs every grid point. Points execute on the current rayon pool and come
/// back in grid order; a failing point is recorded, not propagated.
pub fn run_sweep(spec: &SweepSpec, schedule: &ScheduleSpec) -> Result<Vec<SweepPoint>> {
    let values = spec.validate()?;
    Ok(values
        .par_iter()
        .map(|&value| {
            let (pulse, params) = spec.configure(value);
            let margin = adiabaticity_margin(&pulse, params.g);
            if margin < MIN_ADIABATIC_MARGIN {
                log::warn!("sweep point {value}: adiabaticity margin {margin:.3} is small");
            }
            SweepPoint {
                value,
                pulse,
                params,
                adiabaticity_margin: margin,
                outcome: run_point(&pulse, &params, schedule),
            }
        })
        .collect())
}

/// Fits a in η ≈ 1 − exp(−a·T·γ) by sweeping γ (with γ_t = γ) over
/// `gamma_grid`; the other parameters are taken from `pulse` and `params`.
pub fn fit_exponent(
    pulse: &PulseParams,
    params: &SystemParams,
    gamma_grid: &Grid,
    schedule: &ScheduleSpec,
) -> Result<FitResult> {
    let margin = adiabaticity_margin(pulse, params.g);
    if margin < MIN_ADIABATIC_MARGIN {
        return Err(Error::NotAdiabatic { margin });
    }
    let spec = SweepSpec::new(SweepVariable::Gamma, gamma_grid.clone(), *pulse, *params);
    let points = run_sweep(&spec, schedule)?
        .into_iter()
        .map(|p| p.outcome.map(|r| (p.value, r.eta)))
        .collect::<Result<Vec<_>>>()?;
    fit_efficiency_exponent(&points, pulse.time_scale)
}

/// [`fit_exponent`] at resonance for the coupling ratio g/Ω₀.
pub fn exponent_for_ratio(
    ratio: f64,
    time_scale: f64,
    omega0: f64,
    gamma_grid: &Grid,
    schedule: &ScheduleSpec,
) -> Result<FitResult> {
    let pulse = PulseParams::new(omega0, time_scale)?;
    let params = SystemParams::new(ratio * omega0, 0.0, 0.0)?;
    fit_exponent(&pulse, &params, gamma_grid, schedule)
}
