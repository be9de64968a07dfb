//! Closed-form physics of the driven Λ system: the Gaussian trigger pulse, the
//! dressed eigen-system of the atom–cavity Hamiltonian, the dark state and
//! the adiabatic estimates built on it.
//!
//! All angular frequencies are in rad/s with ℏ = 1; rates are in 1/s.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Trigger amplitude of the reference configuration, 0.11 × 22 × 2π MHz.
pub const REFERENCE_OMEGA0: f64 = 0.11 * 22.0 * std::f64::consts::TAU * 1.0e6;
/// Characteristic time of the reference trigger pulse.
pub const REFERENCE_TIME_SCALE: f64 = 5.0e-5;
/// Coupling ratio g/Ω₀ of the reference configuration.
pub const REFERENCE_RATIO: f64 = 0.25;

/// Gaussian trigger pulse Ω(t) = Ω₀·exp[−(t/T)²].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    /// Peak amplitude Ω₀ [rad/s].
    pub omega0: f64,
    /// Characteristic time T [s].
    pub time_scale: f64,
}

impl PulseParams {
    pub fn new(omega0: f64, time_scale: f64) -> Result<Self> {
        let pulse = Self { omega0, time_scale };
        pulse.validate()?;
        Ok(pulse)
    }

    pub fn reference() -> Self {
        Self {
            omega0: REFERENCE_OMEGA0,
            time_scale: REFERENCE_TIME_SCALE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(invalid("omega0", format!("must be positive, got {}", self.omega0)));
        }
        if !(self.time_scale.is_finite() && self.time_scale > 0.0) {
            return Err(invalid("T", format!("must be positive, got {}", self.time_scale)));
        }
        Ok(())
    }

    #[inline]
    pub fn amplitude(&self, t: f64) -> f64 {
        let s = t / self.time_scale;
        self.omega0 * (-s * s).exp()
    }

    /// Half width at half maximum τ = √(ln 2)·T.
    pub fn half_width(&self) -> f64 {
        LN_2.sqrt() * self.time_scale
    }

    /// Full width at half maximum of Ω(t), 2τ.
    pub fn fwhm(&self) -> f64 {
        2.0 * self.half_width()
    }
}

/// Atom–cavity parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Jaynes–Cummings coupling g [rad/s].
    pub g: f64,
    /// Common detuning Δ [rad/s].
    pub delta: f64,
    /// Cavity decay rate γ [1/s].
    pub gamma: f64,
    /// Useful transmission rate γ_t ≤ γ [1/s].
    pub gamma_t: f64,
}

impl SystemParams {
    /// Parameters with γ_t = γ.
    pub fn new(g: f64, delta: f64, gamma: f64) -> Result<Self> {
        let params = Self {
            g,
            delta,
            gamma,
            gamma_t: gamma,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_transmission(mut self, gamma_t: f64) -> Result<Self> {
        self.gamma_t = gamma_t;
        self.validate()?;
        Ok(self)
    }

    /// Reference coupling g = Ω₀/4 with Δ = 0 and the given decay rate.
    pub fn reference(gamma: f64) -> Self {
        Self {
            g: REFERENCE_RATIO * REFERENCE_OMEGA0,
            delta: 0.0,
            gamma,
            gamma_t: gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(invalid("g", format!("must be positive, got {}", self.g)));
        }
        if !self.delta.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid("gamma", format!("must be non-negative, got {}", self.gamma)));
        }
        if !(self.gamma_t >= 0.0 && self.gamma_t <= self.gamma) {
            return Err(invalid(
                "gamma_t",
                format!("must lie in [0, gamma = {}], got {}", self.gamma, self.gamma_t),
            ));
        }
        Ok(())
    }
}

#[inline]
pub fn pulse_amplitude(t: f64, pulse: &PulseParams) -> f64 {
    pulse.amplitude(t)
}

fn require_coupling(g: f64) -> Result<()> {
    if g.is_finite() && g > 0.0 {
        Ok(())
    } else {
        Err(invalid("g", format!("coupling must be positive, got {g}")))
    }
}

/// Mixing angles (Θₙ, Φₙ) of the dressed states in the photon-number block `n`:
/// tan Θₙ = Ω/(2g√(n+1)) and tan Φₙ = R/(√(R²+Δ²) − Δ) with R² = 4g²(n+1) + Ω².
pub fn mixing_angles(n: u32, omega: f64, params: &SystemParams) -> Result<(f64, f64)> {
    require_coupling(params.g)?;
    let coupling = params.g * f64::from(n + 1).sqrt();
    let theta = omega.atan2(2.0 * coupling);
    let r = (4.0 * coupling * coupling + omega * omega).sqrt();
    let s = (r * r + params.delta * params.delta).sqrt();
    let phi = r.atan2(s - params.delta);
    Ok((theta, phi))
}

/// Eigenvalues (ω₀, ω₊, ω₋) of the Hamiltonian restricted to
/// span{|u,n⟩, |e,n⟩, |g,n+1⟩}.
pub fn eigenvalues(n: u32, omega: f64, params: &SystemParams) -> (f64, f64, f64) {
    let root = (omega * omega
        + 4.0 * params.g * params.g * f64::from(n + 1)
        + params.delta * params.delta)
        .sqrt();
    (
        0.0,
        0.5 * (params.delta + root),
        0.5 * (params.delta - root),
    )
}

/// Dressed eigen-system of one photon-number block at a fixed Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub n: u32,
    pub theta_n: f64,
    pub phi_n: f64,
    pub omega_zero: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
}

impl EigenSystem {
    pub fn new(n: u32, omega: f64, params: &SystemParams) -> Result<Self> {
        let (theta_n, phi_n) = mixing_angles(n, omega, params)?;
        let (omega_zero, omega_plus, omega_minus) = eigenvalues(n, omega, params);
        Ok(Self {
            n,
            theta_n,
            phi_n,
            omega_zero,
            omega_plus,
            omega_minus,
        })
    }

    /// Eigenvectors over (|u,n⟩, |e,n⟩, |g,n+1⟩), ordered as (ω₀, ω₊, ω₋).
    ///
    /// With Φₙ as returned by [`mixing_angles`], the |e,n⟩ amplitude of the
    /// bright states enters with the sign below; this is what makes
    /// `H v = ω v` hold for every Δ.
    pub fn eigenvectors(&self) -> [[f64; 3]; 3] {
        let (st, ct) = self.theta_n.sin_cos();
        let (sp, cp) = self.phi_n.sin_cos();
        [
            [ct, 0.0, -st],
            [cp * st, sp, cp * ct],
            [sp * st, -cp, sp * ct],
        ]
    }
}

/// Zero-energy dark state cos Θ₀|u,0⟩ − sin Θ₀|g,1⟩ over (|u,0⟩, |e,0⟩, |g,1⟩).
pub fn dark_state(omega: f64, g: f64) -> Result<[f64; 3]> {
    require_coupling(g)?;
    let (s, c) = omega.atan2(2.0 * g).sin_cos();
    Ok([c, 0.0, -s])
}

/// Adiabatic estimate of the |g,1⟩ population, sin²Θ₀(t).
pub fn adiabatic_population(t: f64, pulse: &PulseParams, g: f64) -> Result<f64> {
    require_coupling(g)?;
    let x = pulse.amplitude(t) / (2.0 * g);
    let x2 = x * x;
    Ok(x2 / (1.0 + x2))
}

/// Lower bound on T required for adiabatic following, evaluated at the
/// half-maximum point of the pulse: 4√(ln 2)·g·Ω₀ / [4g² + Ω₀²/4]^{3/2}.
pub fn adiabaticity_threshold(omega0: f64, g: f64) -> f64 {
    let base = 4.0 * g * g + 0.25 * omega0 * omega0;
    4.0 * LN_2.sqrt() * g * omega0 / (base * base.sqrt())
}

/// T divided by [`adiabaticity_threshold`]; large values mean adiabatic.
pub fn adiabaticity_margin(pulse: &PulseParams, g: f64) -> f64 {
    pulse.time_scale / adiabaticity_threshold(pulse.omega0, g)
}

/// Closed-form FWHM of the adiabatic |g,1⟩ population at γ = 0,
/// {2 ln[2 + (Ω₀/g)²/4]}^{1/2}·T. This is an upper bound on δt for γ > 0.
pub fn fwhm_bound(pulse: &PulseParams, g: f64) -> f64 {
    let r = pulse.omega0 / g;
    (2.0 * (2.0 + 0.25 * r * r).ln()).sqrt() * pulse.time_scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn sys(g: f64, delta: f64) -> SystemParams {
        SystemParams {
            g,
            delta,
            gamma: 0.0,
            gamma_t: 0.0,
        }
    }

    #[test]
    fn reference_values() {
        assert_relative_eq!(REFERENCE_OMEGA0, 1.5205e7, max_relative = 1e-4);
        let g = REFERENCE_RATIO * REFERENCE_OMEGA0;
        assert_relative_eq!(g, 3.8013e6, max_relative = 1e-4);
        assert_relative_eq!(REFERENCE_TIME_SCALE * g, 190.07, max_relative = 5e-5);
    }

    #[test]
    fn pulse_shape() {
        let pulse = PulseParams::new(1.5205e7, 5e-5).unwrap();
        assert_eq!(pulse_amplitude(0.0, &pulse), 1.5205e7);
        assert_relative_eq!(pulse.amplitude(-pulse.half_width()), 0.5 * 1.5205e7, max_relative = 1e-14);
        assert_relative_eq!(pulse.amplitude(5e-5), 5.5937e6, max_relative = 1e-4);
        assert_relative_eq!(pulse.fwhm(), 2.0 * LN_2.sqrt() * 5e-5);
        assert_eq!(pulse.amplitude(3.3e-5), pulse.amplitude(-3.3e-5));
    }

    #[test]
    fn pulse_rejects_bad_values() {
        assert!(PulseParams::new(0.0, 1.0).is_err());
        assert!(PulseParams::new(1.0, -1.0).is_err());
        assert!(PulseParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn system_params_validation() {
        assert!(SystemParams::new(0.0, 0.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 0.0, -1.0).is_err());
        let p = SystemParams::new(1.0, 0.0, 2.0).unwrap();
        assert_eq!(p.gamma_t, 2.0);
        assert!(p.with_transmission(2.5).is_err());
        assert_eq!(p.with_transmission(1.8).unwrap().gamma_t, 1.8);
    }

    #[test]
    fn mixing_angle_examples() {
        let g = 2.0e6;
        let (theta, _) = mixing_angles(0, 0.0, &sys(g, 0.0)).unwrap();
        assert_eq!(theta, 0.0);
        let (theta, _) = mixing_angles(0, 2.0 * g, &sys(g, 0.0)).unwrap();
        assert_relative_eq!(theta, FRAC_PI_4, max_relative = 1e-15);
        let (_, phi) = mixing_angles(0, 4.0 * g, &sys(g, 0.0)).unwrap();
        assert_relative_eq!(phi, FRAC_PI_4, max_relative = 1e-15);
        assert!(mixing_angles(0, 1.0, &sys(0.0, 0.0)).is_err());
    }

    #[test]
    fn phi_is_continuous_at_zero_drive() {
        for &delta in &[0.0, 1.0e6, 5.0e6] {
            let p = sys(1.0e6, delta);
            let (_, at_zero) = mixing_angles(0, 0.0, &p).unwrap();
            let (_, near_zero) = mixing_angles(0, 1e-3, &p).unwrap();
            assert!(at_zero.is_finite());
            assert!((at_zero - near_zero).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_range() {
        for &omega in &[0.0, 1.0, 1e6, 1e9, f64::INFINITY] {
            let (theta, _) = mixing_angles(3, omega, &sys(1e6, 0.0)).unwrap();
            assert!((0.0..=PI / 2.0).contains(&theta));
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let g = 3.0e6;
        assert_eq!(eigenvalues(0, 0.0, &sys(g, 0.0)), (0.0, g, -g));
        let (z, p, m) = eigenvalues(0, 4.0 * g, &sys(g, 0.0));
        assert_eq!(z, 0.0);
        assert_relative_eq!(p, 5f64.sqrt() * g, max_relative = 1e-15);
        assert_relative_eq!(m, -5f64.sqrt() * g, max_relative = 1e-15);
        assert_eq!(eigenvalues(0, 0.0, &sys(0.0, 2.0e6)), (0.0, 2.0e6, 0.0));
    }

    #[test]
    fn dark_state_examples() {
        let g = 1.0e6;
        assert_eq!(dark_state(0.0, g).unwrap(), [1.0, 0.0, 0.0]);
        let v = dark_state(4.0 * g, g).unwrap();
        let s5 = 5f64.sqrt();
        assert_relative_eq!(v[0], 1.0 / s5, max_relative = 1e-15);
        assert_eq!(v[1], 0.0);
        assert_relative_eq!(v[2], -2.0 / s5, max_relative = 1e-15);
        let v = dark_state(f64::INFINITY, g).unwrap();
        assert!(v[0].abs() < 1e-15);
        assert_eq!(v[2], -1.0);
        assert!(dark_state(1.0, 0.0).is_err());
    }

    #[test]
    fn adiabatic_population_examples() {
        let g = 1.0e6;
        let pulse = PulseParams::new(4.0 * g, 5e-5).unwrap();
        assert_relative_eq!(adiabatic_population(0.0, &pulse, g).unwrap(), 0.8, max_relative = 1e-15);
        assert_eq!(adiabatic_population(1.0, &pulse, g).unwrap(), 0.0);
        let pulse = PulseParams::new(2.0 * g, 5e-5).unwrap();
        assert_relative_eq!(adiabatic_population(0.0, &pulse, g).unwrap(), 0.5, max_relative = 1e-15);
        assert!(adiabatic_population(0.0, &pulse, 0.0).is_err());
    }

    #[test]
    fn adiabaticity_threshold_examples() {
        let g = 1.0e6;
        assert_relative_eq!(
            adiabaticity_threshold(4.0 * g, g) * g,
            0.58870,
            max_relative = 1e-5
        );
        assert_relative_eq!(
            adiabaticity_threshold(REFERENCE_OMEGA0, 0.02 * REFERENCE_OMEGA0),
            3.4709e-8,
            max_relative = 1e-4
        );
        // Fig. 13 caption value for the reference g.
        assert_relative_eq!(
            adiabaticity_threshold(REFERENCE_OMEGA0, REFERENCE_RATIO * REFERENCE_OMEGA0),
            1.5487e-7,
            max_relative = 1e-4
        );
    }

    #[test]
    fn fwhm_bound_examples() {
        let t = 5e-5;
        let pulse = PulseParams::new(REFERENCE_OMEGA0, t).unwrap();
        let b = fwhm_bound(&pulse, 0.25 * REFERENCE_OMEGA0);
        assert_relative_eq!(b, (2.0 * 6f64.ln()).sqrt() * t, max_relative = 1e-14);
        assert_relative_eq!(b / t, 1.8930, max_relative = 1e-4);
        let weak = fwhm_bound(&pulse, 1e9 * REFERENCE_OMEGA0);
        assert_relative_eq!(weak, (2.0 * LN_2).sqrt() * t, max_relative = 1e-12);
        let matched = fwhm_bound(&pulse, REFERENCE_OMEGA0 / 8f64.sqrt());
        assert_relative_eq!(matched, pulse.fwhm(), max_relative = 1e-14);
    }
}
