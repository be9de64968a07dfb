//! Complex-matrix form of the master equation,
//! ρ̇ = −i[H(t), ρ] + γ(aρa† − ½{a†a, ρ}), used to cross-check the real
//! generator.

use nalgebra::{Matrix3, Matrix4};
use num_complex::Complex64;

use super::state::{DensityState, Level};
use crate::model::{PulseParams, SystemParams};

/// Hamiltonian restricted to the block span{|u,n⟩, |e,n⟩, |g,n+1⟩}, ℏ = 1.
#[rustfmt::skip]
pub fn block_hamiltonian(n: u32, omega: f64, params: &SystemParams) -> Matrix3<f64> {
    let coupling = params.g * f64::from(n + 1).sqrt();
    Matrix3::new(
        0.0, 0.5 * omega, 0.0,
        0.5 * omega, params.delta, coupling,
        0.0, coupling, 0.0,
    )
}

/// Interaction-picture Hamiltonian on {|u,0⟩, |e,0⟩, |g,1⟩, |g,0⟩}: the n = 0
/// block plus the uncoupled |g,0⟩.
pub fn hamiltonian(omega: f64, params: &SystemParams) -> Matrix4<Complex64> {
    let block = block_hamiltonian(0, omega, params);
    let mut h = Matrix4::zeros();
    let levels = [Level::U0, Level::E0, Level::G1];
    for (i, a) in levels.iter().enumerate() {
        for (j, b) in levels.iter().enumerate() {
            h[(*a as usize, *b as usize)] = Complex64::new(block[(i, j)], 0.0);
        }
    }
    h
}

pub fn hamiltonian_at(t: f64, pulse: &PulseParams, params: &SystemParams) -> Matrix4<Complex64> {
    hamiltonian(pulse.amplitude(t), params)
}

/// Cavity annihilation operator restricted to the subspace: a|g,1⟩ = |g,0⟩.
pub fn annihilation() -> Matrix4<Complex64> {
    let mut a = Matrix4::zeros();
    a[(Level::G0 as usize, Level::G1 as usize)] = Complex64::new(1.0, 0.0);
    a
}

/// Right-hand side of the master equation for any 4×4 matrix.
pub fn lindblad_rhs_matrix(
    rho: &Matrix4<Complex64>,
    t: f64,
    pulse: &PulseParams,
    params: &SystemParams,
) -> Matrix4<Complex64> {
    let h = hamiltonian_at(t, pulse, params);
    let a = annihilation();
    let ad = a.adjoint();
    let n = ad * a;
    let minus_i = Complex64::new(0.0, -1.0);
    let gamma = Complex64::new(params.gamma, 0.0);
    let half = Complex64::new(0.5, 0.0);
    (h * rho - rho * h) * minus_i + (a * rho * ad - (n * rho + rho * n) * half) * gamma
}

/// Time derivative of a density state.
pub fn lindblad_rhs_direct(
    rho: &DensityState,
    t: f64,
    pulse: &PulseParams,
    params: &SystemParams,
) -> Matrix4<Complex64> {
    lindblad_rhs_matrix(rho.matrix(), t, pulse, params)
}
