//! Run configuration read from a TOML file.
//!
//! Every frequency-like quantity carries a mandatory unit tag:
//!
//! ```toml
//! [pulse]
//! omega0 = { value = 2.42, unit = "MHz-times-2pi" }
//! time_scale = 5.0e-5          # s
//!
//! [system]
//! g_over_omega0 = 0.25         # or: g = { value = 3.8013e6, unit = "rad/s" }
//! delta = { value = 0.0, unit = "rad/s" }
//! gamma = 2.5e4                # plain decay rate, 1/s
//! ```
//!
//! Decay rates are plain rates in 1/s and take no tag. Missing sections fall
//! back to the reference parameters.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use stirap_core::model::{REFERENCE_OMEGA0, REFERENCE_RATIO, REFERENCE_TIME_SCALE};
use stirap_core::sweep::{Grid, SweepSpec, SweepVariable};
use stirap_core::{PulseParams, ScheduleSpec, SystemParams};

/// Overrides the configured output directory (but not `--out`).
pub const OUT_DIR_ENV: &str = "STIRAP_OUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] stirap_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    /// Value in MHz, multiplied by 2π: 2.42 → 2π·2.42×10⁶ rad/s.
    #[serde(rename = "MHz-times-2pi")]
    MegahertzTimesTwoPi,
    /// Value already angular, in 10⁶ rad/s.
    #[serde(rename = "MHz-angular")]
    MegahertzAngular,
    #[serde(rename = "rad/s")]
    RadiansPerSecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frequency {
    pub value: f64,
    pub unit: FrequencyUnit,
}

impl Frequency {
    pub fn rad_per_s(value: f64) -> Self {
        Self {
            value,
            unit: FrequencyUnit::RadiansPerSecond,
        }
    }

    pub fn to_rad_per_s(&self) -> f64 {
        match self.unit {
            FrequencyUnit::MegahertzTimesTwoPi => self.value * TAU * 1e6,
            FrequencyUnit::MegahertzAngular => self.value * 1e6,
            FrequencyUnit::RadiansPerSecond => self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub omega0: Frequency,
    /// T [s].
    pub time_scale: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            omega0: Frequency::rad_per_s(REFERENCE_OMEGA0),
            time_scale: REFERENCE_TIME_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub g: Option<Frequency>,
    pub g_over_omega0: Option<f64>,
    pub delta: Option<Frequency>,
    /// γ [1/s].
    #[serde(default)]
    pub gamma: f64,
    /// γ_t [1/s]; defaults to γ.
    pub gamma_t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub grid: Grid,
    /// γ_t / γ at every point.
    #[serde(default = "one")]
    pub transmission: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// γ values for each efficiency-law fit.
    pub gamma_grid: Grid,
    /// g/Ω₀ values for the polynomial law.
    pub ratio_grid: Grid,
    pub degree: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            gamma_grid: Grid::default_gamma(),
            ratio_grid: Grid::default_ratio(),
            degree: 5,
        }
    }
}

/// Whole configuration file. Every section is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub pulse: PulseConfig,
    pub system: SystemConfig,
    pub schedule: ScheduleSpec,
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
    pub fit: FitConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pulse()?;
        self.system()?;
        let s = &self.schedule;
        if !(s.start < s.end && s.step > 0.0 && s.record_stride > 0) {
            return Err(ConfigError::Invalid(
                "schedule needs start < end, step > 0 and record_stride ≥ 1".into(),
            ));
        }
        self.schedule.resolve(&self.pulse()?).validate()?;
        if self.fit.degree == 0 {
            return Err(ConfigError::Invalid("fit.degree must be at least 1".into()));
        }
        Ok(())
    }

    pub fn pulse(&self) -> Result<PulseParams, ConfigError> {
        Ok(PulseParams::new(
            self.pulse.omega0.to_rad_per_s(),
            self.pulse.time_scale,
        )?)
    }

    /// g [rad/s] from whichever of `g`, `g_over_omega0` is given; the reference
    /// ratio when neither is.
    pub fn coupling(&self) -> Result<f64, ConfigError> {
        let omega0 = self.pulse.omega0.to_rad_per_s();
        match (&self.system.g, self.system.g_over_omega0) {
            (Some(_), Some(_)) => Err(ConfigError::Invalid(
                "give exactly one of system.g and system.g_over_omega0".into(),
            )),
            (Some(g), None) => Ok(g.to_rad_per_s()),
            (None, Some(r)) => Ok(r * omega0),
            (None, None) => Ok(REFERENCE_RATIO * omega0),
        }
    }

    /// g/Ω₀ implied by the configuration.
    pub fn coupling_ratio(&self) -> Result<f64, ConfigError> {
        Ok(self.coupling()? / self.pulse.omega0.to_rad_per_s())
    }

    pub fn system(&self) -> Result<SystemParams, ConfigError> {
        let delta = self.system.delta.map_or(0.0, |d| d.to_rad_per_s());
        let params = SystemParams::new(self.coupling()?, delta, self.system.gamma)?;
        Ok(match self.system.gamma_t {
            Some(t) => params.with_transmission(t)?,
            None => params,
        })
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("the sweep command needs a [sweep] section".into()))?;
        let mut spec = SweepSpec::new(sweep.variable, sweep.grid.clone(), self.pulse()?, self.system()?);
        spec.transmission = sweep.transmission;
        spec.validate()?;
        Ok(spec)
    }

    /// Output directory: `--out`, else the environment override, else the config.
    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        if let Some(dir) = cli {
            return dir.to_path_buf();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.dir.clone(),
        }
    }
}

/// Resolved physical parameters echoed into every summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub omega0: f64,
    pub time_scale: f64,
    pub g: f64,
    pub g_over_omega0: f64,
    pub delta: f64,
    pub gamma: f64,
    pub gamma_t: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub record_stride: usize,
}

impl ConfigEcho {
    pub fn new(pulse: &PulseParams, params: &SystemParams, schedule: &stirap_core::Schedule) -> Self {
        Self {
            omega0: pulse.omega0,
            time_scale: pulse.time_scale,
            g: params.g,
            g_over_omega0: params.g / pulse.omega0,
            delta: params.delta,
            gamma: params.gamma,
            gamma_t: params.gamma_t,
            t_start: schedule.t_start,
            t_end: schedule.t_end,
            dt: schedule.effective_dt(),
            record_stride: schedule.record_stride,
        }
    }
}
