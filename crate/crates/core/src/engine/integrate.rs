//! Fixed-step classical RK4 integration of V̇ = L(t)·V and the recorded
//! trajectory.

use serde::{Deserialize, Serialize};

use super::generator::{Generator, GROUND_VACUUM_COHERENCES};
use super::state::{density_to_vector, vector_to_density, DensityState, RealStateVector, N_REAL};
use crate::error::{invalid, Error, Result};
use crate::model::{PulseParams, SystemParams};

/// Population and trace slack tolerated while a run is in progress.
pub const RUN_TOLERANCE: f64 = 1e-6;
/// A |g,1⟩ population at the end of the window above this means the tail was cut.
pub const RESIDUAL_THRESHOLD: f64 = 1e-4;

/// Integration window and recording density, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub record_stride: usize,
}

impl Schedule {
    /// −5T to +5T with Δt = 2×10⁻⁶·T, recording every 100th step.
    pub fn for_pulse(pulse: &PulseParams) -> Self {
        ScheduleSpec::default().resolve(pulse)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start < self.t_end) {
            return Err(invalid(
                "schedule",
                format!("need t_start < t_end, got [{}, {}]", self.t_start, self.t_end),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if (self.t_end - self.t_start) / self.dt < 2.0 {
            return Err(invalid("dt", "window must span at least two steps"));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk slightly if Δt does not divide the window.
    pub fn step_count(&self) -> usize {
        let span = self.t_end - self.t_start;
        let ratio = span / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * ratio {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }

    pub fn effective_dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.step_count() as f64
    }
}

/// Schedule expressed in units of the pulse time scale T, so it can follow T
/// across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub record_stride: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            start: -5.0,
            end: 5.0,
            step: 2.0e-6,
            record_stride: 100,
        }
    }
}

impl ScheduleSpec {
    pub fn resolve(&self, pulse: &PulseParams) -> Schedule {
        let t = pulse.time_scale;
        Schedule {
            t_start: self.start * t,
            t_end: self.end * t,
            dt: self.step * t,
            record_stride: self.record_stride,
        }
    }
}

/// One recorded instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: RealStateVector,
    /// |g,0⟩ population integrated alongside V from Ċ₃₃ = γC₂₂.
    pub ground_vacuum: f64,
}

impl Sample {
    /// Populations of (|u,0⟩, |e,0⟩, |g,1⟩, |g,0⟩).
    pub fn populations(&self) -> [f64; 4] {
        let v = &self.state.0;
        [v[0], v[7], v[12], self.ground_vacuum]
    }

    #[inline]
    pub fn p_g1(&self) -> f64 {
        self.state.0[12]
    }

    pub fn trace(&self) -> f64 {
        self.populations().iter().sum()
    }

    /// Density matrix with C₃₃ taken from the closure relation.
    pub fn density(&self) -> Result<DensityState> {
        vector_to_density(&self.state)
    }
}

/// Recorded run. Immutable once returned by [`simulate`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub pulse: PulseParams,
    pub params: SystemParams,
    pub schedule: Schedule,
    samples: Vec<Sample>,
}

impl Trajectory {
    /// Wraps externally produced samples (used by tests and tools).
    pub fn from_samples(
        pulse: PulseParams,
        params: SystemParams,
        schedule: Schedule,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("samples", "a trajectory needs at least two samples"));
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(invalid("samples", "timestamps must be strictly increasing"));
        }
        Ok(Self {
            pulse,
            params,
            schedule,
            samples,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory is never empty")
    }

    /// Smallest eigenvalue of ρ over all recorded samples.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.samples.iter().try_fold(f64::INFINITY, |acc, s| {
            Ok(acc.min(s.density()?.min_eigenvalue()))
        })
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.trace() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[inline(always)]
fn axpy(v: &[f64; N_REAL], h: f64, k: &[f64; N_REAL]) -> [f64; N_REAL] {
    let mut out = [0.0; N_REAL];
    for i in 0..N_REAL {
        out[i] = v[i] + h * k[i];
    }
    out
}

/// One classical RK4 step from the state at `t`, with the generator
/// evaluated at `t`, `t + dt/2` and `t + dt`. Returns the new state and the
/// increment of ∫γ V₁₃ dt over the step.
#[inline(always)]
fn advance<const FULL: bool>(
    v: &[f64; N_REAL],
    dt: f64,
    gen0: &Generator,
    gen_mid: &Generator,
    gen1: &Generator,
) -> ([f64; N_REAL], f64) {
    let mut k1 = [0.0; N_REAL];
    let mut k2 = [0.0; N_REAL];
    let mut k3 = [0.0; N_REAL];
    let mut k4 = [0.0; N_REAL];
    gen0.apply_blocks::<FULL>(v, &mut k1);
    gen_mid.apply_blocks::<FULL>(&axpy(v, 0.5 * dt, &k1), &mut k2);
    gen_mid.apply_blocks::<FULL>(&axpy(v, 0.5 * dt, &k2), &mut k3);
    gen1.apply_blocks::<FULL>(&axpy(v, dt, &k3), &mut k4);

    let w = dt / 6.0;
    let mut next = [0.0; N_REAL];
    for i in 0..N_REAL {
        next[i] = v[i] + w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
    // The stage values of V₁₃ drive the decay channel with the same weights.
    let g13 = |k: &[f64; N_REAL]| k[12];
    let p1 = v[12];
    let p2 = v[12] + 0.5 * dt * g13(&k1);
    let p3 = v[12] + 0.5 * dt * g13(&k2);
    let p4 = v[12] + dt * g13(&k3);
    let emitted = w * gen0.gamma * (p1 + 2.0 * (p2 + p3) + p4);
    (next, emitted)
}

pub fn rk4_step(
    v: &RealStateVector,
    t: f64,
    dt: f64,
    pulse: &PulseParams,
    params: &SystemParams,
) -> RealStateVector {
    let gen0 = Generator::at(t, pulse, params);
    let gen_mid = Generator::at(t + 0.5 * dt, pulse, params);
    let gen1 = Generator::at(t + dt, pulse, params);
    RealStateVector(advance::<true>(&v.0, dt, &gen0, &gen_mid, &gen1).0)
}

fn check_sample(sample: &Sample) -> Result<()> {
    let pops = sample.populations();
    if let Some(p) = pops
        .iter()
        .find(|p| !(**p >= -RUN_TOLERANCE && **p <= 1.0 + RUN_TOLERANCE))
    {
        return Err(Error::InvariantViolation {
            t: sample.t,
            detail: format!("population {p} outside [0, 1]"),
        });
    }
    let drift = (sample.trace() - 1.0).abs();
    if !(drift <= RUN_TOLERANCE) {
        return Err(Error::InvariantViolation {
            t: sample.t,
            detail: format!("trace drifted by {drift:e}"),
        });
    }
    Ok(())
}

/// Integrates the master equation from `initial` over `schedule`.
///
/// Samples are recorded at `t_start`, every `record_stride` steps, and at
/// `t_end`.
pub fn simulate(
    pulse: &PulseParams,
    params: &SystemParams,
    schedule: &Schedule,
    initial: &DensityState,
) -> Result<Trajectory> {
    pulse.validate()?;
    params.validate()?;
    schedule.validate()?;

    let mut samples = Vec::with_capacity(schedule.step_count() / schedule.record_stride + 2);
    let mut v = density_to_vector(initial).0;
    let mut ground_vacuum = initial.population(super::state::Level::G0);

    let first = Sample {
        t: schedule.t_start,
        state: RealStateVector(v),
        ground_vacuum,
    };
    check_sample(&first)?;
    samples.push(first);

    // Starting without coherences to |g,0⟩ they stay exactly zero, so the
    // stepper can skip their rows.
    if GROUND_VACUUM_COHERENCES.iter().all(|&i| v[i] == 0.0) {
        integrate_steps::<false>(pulse, params, schedule, &mut v, &mut ground_vacuum, &mut samples)?;
    } else {
        integrate_steps::<true>(pulse, params, schedule, &mut v, &mut ground_vacuum, &mut samples)?;
    }

    let residual = samples.last().map_or(0.0, Sample::p_g1);
    if residual >= RESIDUAL_THRESHOLD {
        log::warn!(
            "p_g1 = {residual:e} at t_end = {:e} s; the window is too short and the efficiency is under-counted",
            schedule.t_end
        );
    }

    Trajectory::from_samples(*pulse, *params, *schedule, samples)
}

fn integrate_steps<const FULL: bool>(
    pulse: &PulseParams,
    params: &SystemParams,
    schedule: &Schedule,
    v: &mut [f64; N_REAL],
    ground_vacuum: &mut f64,
    samples: &mut Vec<Sample>,
) -> Result<()> {
    let steps = schedule.step_count();
    let dt = schedule.effective_dt();
    let stride = schedule.record_stride;
    let time_at = |k: usize| schedule.t_start + k as f64 * dt;

    let mut gen0 = Generator::at(schedule.t_start, pulse, params);
    for k in 0..steps {
        let t = time_at(k);
        let t_next = if k + 1 == steps {
            schedule.t_end
        } else {
            time_at(k + 1)
        };
        let gen_mid = Generator::at(0.5 * (t + t_next), pulse, params);
        let gen1 = Generator::at(t_next, pulse, params);
        let (next, emitted) = advance::<FULL>(v, t_next - t, &gen0, &gen_mid, &gen1);
        *v = next;
        *ground_vacuum += emitted;
        gen0 = gen1;

        if (k + 1) % stride == 0 || k + 1 == steps {
            let sample = Sample {
                t: t_next,
                state: RealStateVector(*v),
                ground_vacuum: *ground_vacuum,
            };
            check_sample(&sample)?;
            samples.push(sample);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::state::Level;

    #[test]
    fn schedule_defaults_follow_pulse() {
        let pulse = PulseParams::new(1.0e7, 5e-5).unwrap();
        let s = Schedule::for_pulse(&pulse);
        assert_eq!(s.t_start, -2.5e-4);
        assert_eq!(s.t_end, 2.5e-4);
        assert_eq!(s.dt, 1e-10);
        assert_eq!(s.step_count(), 5_000_000);
        assert_eq!(s.record_stride, 100);
    }

    #[test]
    fn schedule_validation() {
        let ok = Schedule {
            t_start: 0.0,
            t_end: 1.0,
            dt: 0.5,
            record_stride: 1,
        };
        assert!(ok.validate().is_ok());
        assert!(Schedule { t_end: 0.0, ..ok }.validate().is_err());
        assert!(Schedule { dt: 0.0, ..ok }.validate().is_err());
        assert!(Schedule { dt: 0.6, ..ok }.validate().is_err());
        assert!(Schedule { record_stride: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn uneven_window_shrinks_step() {
        let s = Schedule {
            t_start: 0.0,
            t_end: 1.0,
            dt: 0.3,
            record_stride: 1,
        };
        assert_eq!(s.step_count(), 4);
        assert_eq!(s.effective_dt(), 0.25);
    }

    #[test]
    fn zero_step_is_identity() {
        let pulse = PulseParams::new(1.0e7, 5e-5).unwrap();
        let params = SystemParams::new(2.5e6, 0.0, 1e4).unwrap();
        let v = density_to_vector(&DensityState::pure(Level::U0));
        assert_eq!(rk4_step(&v, -1e-5, 0.0, &pulse, &params), v);
    }

    #[test]
    fn records_endpoints_and_stride() {
        let pulse = PulseParams::new(1.0e6, 1e-5).unwrap();
        let params = SystemParams::new(1.0e6, 0.0, 0.0).unwrap();
        let schedule = Schedule {
            t_start: -1e-5,
            t_end: 1e-5,
            dt: 1e-8,
            record_stride: 7,
        };
        let traj = simulate(&pulse, &params, &schedule, &DensityState::pure(Level::U0)).unwrap();
        assert_eq!(traj.samples()[0].t, -1e-5);
        assert_eq!(traj.last().t, 1e-5);
        assert_eq!(traj.len(), 2000 / 7 + 2);
        assert!(traj.samples().windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn rejects_invalid_inputs() {
        let pulse = PulseParams::reference();
        let params = SystemParams::reference(0.0);
        let bad = Schedule {
            t_start: 1.0,
            t_end: 0.0,
            dt: 0.1,
            record_stride: 1,
        };
        let rho = DensityState::pure(Level::U0);
        assert!(simulate(&pulse, &params, &bad, &rho).is_err());
        let bad_pulse = PulseParams {
            omega0: 1.0,
            time_scale: -1.0,
        };
        let schedule = Schedule::for_pulse(&pulse);
        assert!(simulate(&bad_pulse, &params, &schedule, &rho).is_err());
    }

    #[test]
    fn unstable_step_is_reported_mid_run() {
        let pulse = PulseParams::new(1.0e7, 1e-5).unwrap();
        let params = SystemParams::new(1.0e7, 0.0, 0.0).unwrap();
        // gΔt ≈ 10 is far outside RK4's stability region.
        let schedule = Schedule {
            t_start: -5e-5,
            t_end: 5e-5,
            dt: 1e-6,
            record_stride: 1,
        };
        let err = simulate(&pulse, &params, &schedule, &DensityState::pure(Level::U0)).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }));
    }
}
