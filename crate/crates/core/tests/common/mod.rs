#![allow(dead_code)]

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use stirap_core::{DensityState, PulseParams, SystemParams};

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// ρ = A·A†/tr(A·A†) for a random complex A. Every fourth draw has rank 1 or 2,
/// so states on the boundary of positivity are covered too.
pub fn random_density(rng: &mut ChaCha8Rng) -> DensityState {
    let rank = match rng.gen_range(0..4) {
        0 => rng.gen_range(1..=2),
        _ => 4,
    };
    let mut a = Matrix4::<Complex64>::zeros();
    for i in 0..4 {
        for j in 0..rank {
            a[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let m = a * a.adjoint();
    let tr = m.trace().re;
    let mut rho = m.unscale(tr);
    // Exact hermiticity; the product is Hermitian only to rounding.
    for i in 0..4 {
        rho[(i, i)].im = 0.0;
        for j in i + 1..4 {
            rho[(j, i)] = rho[(i, j)].conj();
        }
    }
    DensityState::new(rho).expect("random state is valid")
}

/// Random time and physical parameters over several decades.
pub fn random_setting(rng: &mut ChaCha8Rng) -> (f64, PulseParams, SystemParams) {
    let pulse = PulseParams::new(log_uniform(rng, 1e5, 1e9), log_uniform(rng, 1e-7, 1e-3)).unwrap();
    let t = rng.gen_range(-5.0..5.0) * pulse.time_scale;
    let gamma = if rng.gen_bool(0.1) { 0.0 } else { log_uniform(rng, 1e2, 1e8) };
    let params = SystemParams::new(
        log_uniform(rng, 1e4, 1e9),
        rng.gen_range(-1e8..1e8),
        gamma,
    )
    .unwrap();
    (t, pulse, params)
}

/// Scale of the generator entries, used to express rounding-level errors.
pub fn rate_scale(omega: f64, params: &SystemParams) -> f64 {
    [omega.abs(), params.g, params.delta.abs(), params.gamma, 1.0]
        .into_iter()
        .fold(0.0, f64::max)
}
