//! File writers. Numbers are written in the shortest form that parses back to
//! the same `f64`, so every file is lossless.
//!
//! Column layouts (stable):
//!
//! * trajectory: `t, pop_u0, pop_e0, pop_g1, pop_g0`, then `re_cij, im_cij` for
//!   ij = 01, 02, 03, 12, 13, 23, then `P_t`.
//! * sweep: `value, eta, delta_t, t_max, t_minus, t_plus, pop_u0_end,
//!   pop_e0_end, pop_g1_end, pop_g0_end, adiabaticity_margin, flagged, error`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use stirap_core::engine::state::COHERENCE_SLOTS;
use stirap_core::fit::FitResult;
use stirap_core::sweep::{SweepPoint, SweepVariable};
use stirap_core::{EmissionReport, Trajectory};

use crate::config::{ConfigEcho, Format};

pub const TRAJECTORY_COLUMNS: [&str; 18] = [
    "t", "pop_u0", "pop_e0", "pop_g1", "pop_g0", "re_c01", "im_c01", "re_c02", "im_c02", "re_c03",
    "im_c03", "re_c12", "im_c12", "re_c13", "im_c13", "re_c23", "im_c23", "P_t",
];

pub const SWEEP_COLUMNS: [&str; 13] = [
    "value",
    "eta",
    "delta_t",
    "t_max",
    "t_minus",
    "t_plus",
    "pop_u0_end",
    "pop_e0_end",
    "pop_g1_end",
    "pop_g0_end",
    "adiabaticity_margin",
    "flagged",
    "error",
];

/// Shortest round-trip representation; exponent form outside [1e-4, 1e15).
pub fn format_f64(x: f64) -> String {
    let magnitude = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&magnitude) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn trajectory_rows(traj: &Trajectory, gamma_t: f64) -> Vec<[f64; 18]> {
    traj.samples()
        .iter()
        .map(|s| {
            let mut row = [0.0; 18];
            row[0] = s.t;
            row[1..5].copy_from_slice(&s.populations());
            for (k, &(_, _, slot)) in COHERENCE_SLOTS.iter().enumerate() {
                row[5 + 2 * k] = s.state[slot];
                row[6 + 2 * k] = s.state[slot + 1];
            }
            row[17] = gamma_t * s.p_g1();
            row
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct ColumnTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn write_trajectory(traj: &Trajectory, gamma_t: f64, path: &Path, format: Format) -> Result<()> {
    let rows = trajectory_rows(traj, gamma_t);
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(create(path)?);
            w.write_record(TRAJECTORY_COLUMNS)?;
            for row in &rows {
                w.write_record(row.iter().map(|&x| format_f64(x)))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let table = ColumnTable {
                columns: TRAJECTORY_COLUMNS.iter().map(|c| c.to_string()).collect(),
                rows: rows.iter().map(|r| r.to_vec()).collect(),
            };
            let mut w = create(path)?;
            serde_json::to_writer(&mut w, &table)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// JSON summary of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(flatten)]
    pub report: EmissionReport,
    pub adiabaticity_margin: f64,
    pub config: ConfigEcho,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// One sweep row in JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub report: Option<EmissionReport>,
    pub adiabaticity_margin: f64,
    pub flagged: bool,
    pub error: Option<String>,
}

impl From<&SweepPoint> for SweepRow {
    fn from(p: &SweepPoint) -> Self {
        Self {
            value: p.value,
            report: p.outcome.as_ref().ok().copied(),
            adiabaticity_margin: p.adiabaticity_margin,
            flagged: !p.is_adiabatic(),
            error: p.outcome.as_ref().err().map(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

pub fn write_sweep(variable: SweepVariable, points: &[SweepPoint], path: &Path, format: Format) -> Result<()> {
    let rows: Vec<SweepRow> = points.iter().map(SweepRow::from).collect();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(create(path)?);
            w.write_record(SWEEP_COLUMNS)?;
            for row in &rows {
                let mut record = vec![format_f64(row.value)];
                match &row.report {
                    Some(r) => {
                        record.extend([r.eta, r.delta_t, r.t_max, r.t_minus, r.t_plus].map(format_f64));
                        record.extend(r.final_populations.map(format_f64));
                    }
                    None => record.extend(std::iter::repeat_n(String::new(), 9)),
                }
                record.push(format_f64(row.adiabaticity_margin));
                record.push(row.flagged.to_string());
                record.push(row.error.clone().unwrap_or_default());
                w.write_record(&record)?;
            }
            w.flush()?;
        }
        Format::Json => write_json(&SweepTable { variable, rows }, path)?,
    }
    Ok(())
}

/// Efficiency-law fit at one coupling ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub g_over_omega0: f64,
    pub time_scale: f64,
    pub omega0: f64,
    pub a: f64,
    /// Log-linear estimate of a, for comparison.
    pub a_loglinear: f64,
    #[serde(flatten)]
    pub fit: FitResult,
}

/// Polynomial law for ln a over ln(g/Ω₀).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialFit {
    pub time_scale: f64,
    pub omega0: f64,
    pub degree: usize,
    /// b₀ … b_degree.
    pub coefficients: Vec<f64>,
    pub reference_coefficients: Vec<f64>,
    /// Per-ratio exponent fits underlying the polynomial.
    pub exponents: Vec<ExponentFit>,
    #[serde(flatten)]
    pub fit: FitResult,
}
