//! Subcommand implementations.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use stirap_core::analysis::analyze;
use stirap_core::fit::{
    fit_efficiency_exponent_loglinear, fit_log_polynomial, FitResult, REFERENCE_POLYNOMIAL,
};
use stirap_core::model::{adiabaticity_margin, adiabaticity_threshold, fwhm_bound};
use stirap_core::sweep::{fit_exponent, run_sweep, SweepVariable, MIN_ADIABATIC_MARGIN};
use stirap_core::{simulate, DensityState, Level};

use crate::config::{ConfigEcho, ConfigError, Format, RunConfig};
use crate::output::{
    write_json, write_sweep, write_trajectory, ExponentFit, PolynomialFit, Summary,
};

#[derive(Debug, Parser)]
#[command(name = "stirap", version, about = "Single-photon emission from a Λ atom in a lossy cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one run; write the trajectory and a JSON summary.
    Simulate,
    /// Run the [sweep] section of the config; write one row per grid point.
    Sweep,
    /// Fit a in η ≈ 1 − exp(−a·T·γ) at the configured coupling.
    FitA,
    /// Fit the polynomial law for ln a over ln(g/Ω₀).
    FitPoly,
    /// Print the closed-form adiabaticity threshold and width bound.
    Bound,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// TOML configuration; reference parameters when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config and STIRAP_OUT_DIR).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of trajectory and sweep tables.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Record every N-th integration step.
    #[arg(long, global = true)]
    pub stride: Option<usize>,
    /// End of the integration window [s].
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    /// Worker threads for sweeps and fits.
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
}

/// Configuration with command-line overrides applied.
pub struct Session {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub format: Format,
    pub parallel: Option<usize>,
}

pub fn prepare(options: &Options) -> Result<Session, ConfigError> {
    let mut config = match &options.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(stride) = options.stride {
        config.schedule.record_stride = stride;
    }
    if let Some(t_end) = options.t_end {
        if config.sweep.as_ref().is_some_and(|s| s.variable == SweepVariable::TimeScale) {
            return Err(ConfigError::Invalid(
                "--t-end is absolute; for T sweeps set schedule.end in units of T".into(),
            ));
        }
        config.schedule.end = t_end / config.pulse.time_scale;
    }
    if options.parallel == Some(0) {
        return Err(ConfigError::Invalid("--parallel must be at least 1".into()));
    }
    config.validate()?;
    Ok(Session {
        out_dir: config.output_dir(options.out.as_deref()),
        format: options.format.unwrap_or(config.output.format),
        parallel: options.parallel,
        config,
    })
}

impl Session {
    fn output(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("cannot create {}", self.out_dir.display()))?;
        Ok(self.out_dir.join(name))
    }

    fn extension(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    /// Runs `f` on a pool of `--parallel` threads, or the global pool.
    fn pooled<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.parallel {
            Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
            None => Ok(f()),
        }
    }
}

fn warn_if_not_adiabatic(margin: f64) {
    if margin < MIN_ADIABATIC_MARGIN {
        log::warn!(
            "T is only {margin:.3} times the adiabaticity threshold; expect non-adiabatic losses"
        );
    }
}

pub fn simulate_command(ctx: &Session) -> Result<Summary> {
    let pulse = ctx.config.pulse()?;
    let params = ctx.config.system()?;
    let margin = adiabaticity_margin(&pulse, params.g);
    warn_if_not_adiabatic(margin);
    let schedule = ctx.config.schedule.resolve(&pulse);

    let traj = simulate(&pulse, &params, &schedule, &DensityState::pure(Level::U0))?;
    let report = analyze(&traj, params.gamma_t)?;
    let trajectory_path = ctx.output(&format!("trajectory.{}", ctx.extension()))?;
    write_trajectory(&traj, params.gamma_t, &trajectory_path, ctx.format)?;
    let summary = Summary {
        report,
        adiabaticity_margin: margin,
        config: ConfigEcho::new(&pulse, &params, &schedule),
    };
    write_json(&summary, &ctx.output("summary.json")?)?;

    println!("eta      = {:.5}", report.eta);
    println!("t_max    = {:.4e} s", report.t_max);
    println!("delta_t  = {:.4e} s  [{:.4e}, {:.4e}]", report.delta_t, report.t_minus, report.t_plus);
    println!("peak p   = {:.5}", report.peak_p);
    println!(
        "final    = u0 {:.5}  e0 {:.3e}  g1 {:.3e}  g0 {:.5}",
        report.final_populations[0],
        report.final_populations[1],
        report.final_populations[2],
        report.final_populations[3]
    );
    println!("wrote {} and {}", trajectory_path.display(), ctx.out_dir.join("summary.json").display());
    Ok(summary)
}

pub fn sweep_command(ctx: &Session) -> Result<()> {
    let spec = ctx.config.sweep_spec()?;
    let schedule = ctx.config.schedule;
    let points = ctx.pooled(|| run_sweep(&spec, &schedule))??;
    let path = ctx.output(&format!("sweep.{}", ctx.extension()))?;
    write_sweep(spec.variable, &points, &path, ctx.format)?;

    let failed = points.iter().filter(|p| p.outcome.is_err()).count();
    let flagged = points.iter().filter(|p| !p.is_adiabatic()).count();
    for p in points.iter().filter(|p| p.outcome.is_err()) {
        log::warn!("point {}: {}", p.value, p.outcome.as_ref().unwrap_err());
    }
    println!(
        "{} points, {failed} failed, {flagged} flagged non-adiabatic; wrote {}",
        points.len(),
        path.display()
    );
    if failed == points.len() {
        bail!("every sweep point failed");
    }
    Ok(())
}

fn exponent_fit(ctx: &Session, ratio: f64) -> Result<ExponentFit> {
    let pulse = ctx.config.pulse()?;
    let mut params = ctx.config.system()?;
    params.g = ratio * pulse.omega0;
    let fit = fit_exponent(&pulse, &params, &ctx.config.fit.gamma_grid, &ctx.config.schedule)
        .with_context(|| format!("exponent fit at g/Ω₀ = {ratio}"))?;
    Ok(ExponentFit {
        g_over_omega0: ratio,
        time_scale: pulse.time_scale,
        omega0: pulse.omega0,
        a: fit.parameters[0],
        a_loglinear: fit_efficiency_exponent_loglinear(&fit.grid, pulse.time_scale)?,
        fit,
    })
}

pub fn fit_a_command(ctx: &Session) -> Result<ExponentFit> {
    let ratio = ctx.config.coupling_ratio()?;
    let result = ctx.pooled(|| exponent_fit(ctx, ratio))??;
    let path = ctx.output("fit_a.json")?;
    write_json(&result, &path)?;
    println!(
        "a = {:.5} (log-linear {:.5}); max residual {:.4e}, rms {:.4e}",
        result.a, result.a_loglinear, result.fit.residual_max, result.fit.residual_rms
    );
    println!("wrote {}", path.display());
    Ok(result)
}

pub fn fit_poly_command(ctx: &Session) -> Result<PolynomialFit> {
    let pulse = ctx.config.pulse()?;
    let ratios = ctx.config.fit.ratio_grid.points()?;
    let exponents = ctx.pooled(|| {
        ratios
            .par_iter()
            .map(|&r| exponent_fit(ctx, r))
            .collect::<Result<Vec<_>>>()
    })??;
    let points: Vec<(f64, f64)> = exponents.iter().map(|e| (e.g_over_omega0, e.a)).collect();
    let fit: FitResult = fit_log_polynomial(&points, ctx.config.fit.degree)?;
    let result = PolynomialFit {
        time_scale: pulse.time_scale,
        omega0: pulse.omega0,
        degree: ctx.config.fit.degree,
        coefficients: fit.parameters.clone(),
        reference_coefficients: REFERENCE_POLYNOMIAL.to_vec(),
        exponents,
        fit,
    };
    let path = ctx.output("fit_poly.json")?;
    write_json(&result, &path)?;
    for (k, b) in result.coefficients.iter().enumerate() {
        println!("b{k} = {b:.5}");
    }
    println!("max residual in ln a {:.4e}; wrote {}", result.fit.residual_max, path.display());
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    pub g_over_omega0: f64,
    /// T·g.
    pub t_times_g: f64,
    /// Minimum T for adiabatic following [s].
    pub adiabaticity_threshold: f64,
    /// T / threshold.
    pub adiabaticity_margin: f64,
    /// Closed-form FWHM of p(t) at γ = 0 [s].
    pub fwhm_bound: f64,
    pub fwhm_bound_over_t: f64,
    /// FWHM of Ω(t) [s].
    pub pump_fwhm: f64,
}

pub fn bounds(config: &RunConfig) -> Result<Bounds, ConfigError> {
    let pulse = config.pulse()?;
    let g = config.coupling()?;
    let threshold = adiabaticity_threshold(pulse.omega0, g);
    let bound = fwhm_bound(&pulse, g);
    Ok(Bounds {
        g_over_omega0: g / pulse.omega0,
        t_times_g: pulse.time_scale * g,
        adiabaticity_threshold: threshold,
        adiabaticity_margin: pulse.time_scale / threshold,
        fwhm_bound: bound,
        fwhm_bound_over_t: bound / pulse.time_scale,
        pump_fwhm: pulse.fwhm(),
    })
}

pub fn bound_command(ctx: &Session) -> Result<Bounds> {
    let b = bounds(&ctx.config)?;
    match ctx.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&b)?),
        Format::Csv => {
            println!("g/Omega0               = {:.5}", b.g_over_omega0);
            println!("T*g                    = {:.5}", b.t_times_g);
            println!("adiabaticity threshold = {:.4e} s", b.adiabaticity_threshold);
            println!("margin T/threshold     = {:.5}", b.adiabaticity_margin);
            println!("FWHM bound             = {:.4e} s ({:.5} T)", b.fwhm_bound, b.fwhm_bound_over_t);
            println!("pump FWHM              = {:.4e} s", b.pump_fwhm);
        }
    }
    Ok(b)
}

pub fn run(cli: &Cli) -> Result<()> {
    let ctx = prepare(&cli.options)?;
    match cli.command {
        Command::Simulate => simulate_command(&ctx).map(drop),
        Command::Sweep => sweep_command(&ctx),
        Command::FitA => fit_a_command(&ctx).map(drop),
        Command::FitPoly => fit_poly_command(&ctx).map(drop),
        Command::Bound => bound_command(&ctx).map(drop),
    }
}

/// True when the error came from configuration or validation, not a run.
pub fn is_usage_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| e.downcast_ref::<ConfigError>().is_some())
}
