//! The real 15×15 generator L(t) with V̇ = L(t)·V.

use nalgebra::SMatrix;

use super::state::N_REAL;
use crate::model::{PulseParams, SystemParams};

pub type GeneratorMatrix = SMatrix<f64, N_REAL, N_REAL>;

/// Slots of Re/Im C₀₃, C₁₃, C₂₃.
pub const GROUND_VACUUM_COHERENCES: [usize; 6] = [5, 6, 10, 11, 13, 14];

#[derive(Debug, Clone, Copy)]
enum Coef {
    Omega,
    HalfOmega,
    Delta,
    G,
    TwoG,
    HalfGamma,
    Gamma,
}

/// Nonzero elements (row, column, sign, coefficient), one-based as in V₁..V₁₅.
#[rustfmt::skip]
const ELEMENTS: [(usize, usize, f64, Coef); 37] = [
    (1, 3, -1.0, Coef::Omega),
    (2, 3, -1.0, Coef::Delta), (10, 9, -1.0, Coef::Delta), (12, 11, -1.0, Coef::Delta),
    (2, 5, -1.0, Coef::G), (4, 3, -1.0, Coef::G), (10, 13, -1.0, Coef::G),
    (12, 14, -1.0, Coef::G), (15, 11, -1.0, Coef::G),
    (3, 1, 1.0, Coef::HalfOmega), (4, 10, 1.0, Coef::HalfOmega), (6, 12, 1.0, Coef::HalfOmega),
    (9, 5, 1.0, Coef::HalfOmega), (11, 7, 1.0, Coef::HalfOmega),
    (3, 2, 1.0, Coef::Delta), (9, 10, 1.0, Coef::Delta), (11, 12, 1.0, Coef::Delta),
    (3, 4, 1.0, Coef::G), (5, 2, 1.0, Coef::G), (10, 8, 1.0, Coef::G),
    (11, 15, 1.0, Coef::G), (14, 12, 1.0, Coef::G),
    (3, 8, -1.0, Coef::HalfOmega), (5, 9, -1.0, Coef::HalfOmega), (7, 11, -1.0, Coef::HalfOmega),
    (10, 4, -1.0, Coef::HalfOmega), (12, 6, -1.0, Coef::HalfOmega),
    (4, 4, -1.0, Coef::HalfGamma), (5, 5, -1.0, Coef::HalfGamma), (9, 9, -1.0, Coef::HalfGamma),
    (10, 10, -1.0, Coef::HalfGamma), (14, 14, -1.0, Coef::HalfGamma), (15, 15, -1.0, Coef::HalfGamma),
    (8, 3, 1.0, Coef::Omega),
    (8, 10, -1.0, Coef::TwoG),
    (13, 10, 1.0, Coef::TwoG),
    (13, 13, -1.0, Coef::Gamma),
];

/// Generator coefficients frozen at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub omega: f64,
    pub g: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl Generator {
    #[inline]
    pub fn at(t: f64, pulse: &PulseParams, params: &SystemParams) -> Self {
        Self::with_drive(pulse.amplitude(t), params)
    }

    #[inline]
    pub fn with_drive(omega: f64, params: &SystemParams) -> Self {
        Self {
            omega,
            g: params.g,
            delta: params.delta,
            gamma: params.gamma,
        }
    }

    fn coefficient(&self, c: Coef) -> f64 {
        match c {
            Coef::Omega => self.omega,
            Coef::HalfOmega => 0.5 * self.omega,
            Coef::Delta => self.delta,
            Coef::G => self.g,
            Coef::TwoG => 2.0 * self.g,
            Coef::HalfGamma => 0.5 * self.gamma,
            Coef::Gamma => self.gamma,
        }
    }

    /// Dense matrix assembled from the element table; every other entry is zero.
    pub fn matrix(&self) -> GeneratorMatrix {
        let mut l = GeneratorMatrix::zeros();
        for &(row, col, sign, coef) in &ELEMENTS {
            l[(row - 1, col - 1)] = sign * self.coefficient(coef);
        }
        l
    }

    /// `out = L·v`, written out row by row from the sparsity pattern.
    #[inline(always)]
    pub fn apply(&self, v: &[f64; N_REAL], out: &mut [f64; N_REAL]) {
        self.apply_blocks::<true>(v, out);
    }

    /// Like [`Generator::apply`]; with `WITH_GROUND_VACUUM = false` the rows of the
    /// coherences with |g,0⟩ (slots in [`GROUND_VACUUM_COHERENCES`]) are left
    /// untouched. They form a closed block, so when those entries of `v` are
    /// zero the skipped rows are zero as well.
    #[inline(always)]
    pub fn apply_blocks<const WITH_GROUND_VACUUM: bool>(
        &self,
        v: &[f64; N_REAL],
        out: &mut [f64; N_REAL],
    ) {
        let w = self.omega;
        let hw = 0.5 * w;
        let g = self.g;
        let d = self.delta;
        let hk = 0.5 * self.gamma;

        // Block coupling |u,0⟩, |e,0⟩, |g,1⟩.
        out[0] = -w * v[2];
        out[1] = -d * v[2] - g * v[4];
        out[2] = hw * (v[0] - v[7]) + d * v[1] + g * v[3];
        out[3] = -g * v[2] - hk * v[3] + hw * v[9];
        out[4] = g * v[1] - hk * v[4] - hw * v[8];
        out[7] = w * v[2] - 2.0 * g * v[9];
        out[8] = hw * v[4] - hk * v[8] + d * v[9];
        out[9] = -hw * v[3] + g * (v[7] - v[12]) - d * v[8] - hk * v[9];
        out[12] = 2.0 * g * v[9] - self.gamma * v[12];

        if !WITH_GROUND_VACUUM {
            return;
        }
        // Coherences with |g,0⟩; they evolve among themselves only.
        out[5] = hw * v[11];
        out[6] = -hw * v[10];
        out[10] = hw * v[6] + d * v[11] + g * v[14];
        out[11] = -hw * v[5] - d * v[10] - g * v[13];
        out[13] = g * v[11] - hk * v[13];
        out[14] = -g * v[10] - hk * v[14];
    }
}

pub fn build_generator(t: f64, pulse: &PulseParams, params: &SystemParams) -> GeneratorMatrix {
    Generator::at(t, pulse, params).matrix()
}
