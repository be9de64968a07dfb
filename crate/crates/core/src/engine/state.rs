//! Density matrices on the four-state subspace {|u,0⟩, |e,0⟩, |g,1⟩, |g,0⟩}
//! and their 15-real-coordinate form.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of basis states in the reachable subspace.
pub const DIM: usize = 4;
/// Number of independent real coordinates of a unit-trace Hermitian 4×4 matrix.
pub const N_REAL: usize = 15;

/// Tolerance on hermiticity, trace and diagonal range at the API boundary.
pub const STATE_TOLERANCE: f64 = 1e-9;

/// Basis states, in matrix index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// |u,0⟩
    U0 = 0,
    /// |e,0⟩
    E0 = 1,
    /// |g,1⟩
    G1 = 2,
    /// |g,0⟩
    G0 = 3,
}

/// Coordinates of the diagonal entries C₀₀, C₁₁, C₂₂ inside the real vector.
pub(crate) const DIAGONAL_SLOTS: [usize; 3] = [0, 7, 12];

/// Upper-triangle pairs (i, j) and the vector slot of Re Cᵢⱼ; Im Cᵢⱼ follows it.
pub const COHERENCE_SLOTS: [(usize, usize, usize); 6] = [
    (0, 1, 1),
    (0, 2, 3),
    (0, 3, 5),
    (1, 2, 8),
    (1, 3, 10),
    (2, 3, 13),
];

/// V₁..V₁₅ stored zero-based: V₁ = C₀₀, V₂ = Re C₀₁, V₃ = Im C₀₁, …, V₁₅ = Im C₂₃.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealStateVector(pub [f64; N_REAL]);

impl RealStateVector {
    pub fn zeros() -> Self {
        Self([0.0; N_REAL])
    }

    /// Population of |g,0⟩ implied by unit trace.
    pub fn closure_population(&self) -> f64 {
        1.0 - self.0[0] - self.0[7] - self.0[12]
    }

    pub fn as_array(&self) -> &[f64; N_REAL] {
        &self.0
    }
}

impl std::ops::Index<usize> for RealStateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Hermitian, unit-trace density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState(Matrix4<Complex64>);

impl DensityState {
    /// Validates hermiticity and unit trace to [`STATE_TOLERANCE`].
    pub fn new(matrix: Matrix4<Complex64>) -> Result<Self> {
        for i in 0..DIM {
            for j in i..DIM {
                let d = matrix[(i, j)] - matrix[(j, i)].conj();
                if !(d.norm() <= STATE_TOLERANCE) {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian at ({i}, {j}): deviation {:e}",
                        d.norm()
                    )));
                }
            }
        }
        let trace = matrix.trace();
        if !((trace - Complex64::new(1.0, 0.0)).norm() <= STATE_TOLERANCE) {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        Ok(Self(matrix))
    }

    /// Projector onto a single basis state.
    pub fn pure(level: Level) -> Self {
        let mut m = Matrix4::zeros();
        let k = level as usize;
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    /// Pure state from a (not necessarily normalized) amplitude vector.
    pub fn from_amplitudes(psi: [Complex64; DIM]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("zero amplitude vector".into()));
        }
        let m = Matrix4::from_fn(|i, j| psi[i] * psi[j].conj() / norm);
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn population(&self, level: Level) -> f64 {
        let k = level as usize;
        self.0[(k, k)].re
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Smallest eigenvalue; negative values beyond rounding mean the state is unphysical.
    pub fn min_eigenvalue(&self) -> f64 {
        self.0
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Packs the upper triangle of any 4×4 complex matrix into 15 real coordinates.
/// The (3, 3) entry is not represented.
pub fn pack(m: &Matrix4<Complex64>) -> [f64; N_REAL] {
    let mut v = [0.0; N_REAL];
    for (k, &slot) in DIAGONAL_SLOTS.iter().enumerate() {
        v[slot] = m[(k, k)].re;
    }
    for &(i, j, slot) in &COHERENCE_SLOTS {
        v[slot] = m[(i, j)].re;
        v[slot + 1] = m[(i, j)].im;
    }
    v
}

pub fn density_to_vector(rho: &DensityState) -> RealStateVector {
    RealStateVector(pack(&rho.0))
}

/// Rebuilds the density matrix, with C₃₃ = 1 − V₁ − V₈ − V₁₃.
pub fn vector_to_density(v: &RealStateVector) -> Result<DensityState> {
    let in_range = |p: f64| (-STATE_TOLERANCE..=1.0 + STATE_TOLERANCE).contains(&p);
    for &slot in &DIAGONAL_SLOTS {
        if !in_range(v.0[slot]) {
            return Err(Error::InvalidState(format!(
                "population V{} = {} outside [0, 1]",
                slot + 1,
                v.0[slot]
            )));
        }
    }
    let c33 = v.closure_population();
    if !in_range(c33) {
        return Err(Error::InvalidState(format!(
            "recovered C33 = {c33} outside [0, 1]"
        )));
    }
    if v.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidState("non-finite coordinate".into()));
    }
    let mut m = Matrix4::zeros();
    for (k, &slot) in DIAGONAL_SLOTS.iter().enumerate() {
        m[(k, k)] = Complex64::new(v.0[slot], 0.0);
    }
    m[(3, 3)] = Complex64::new(c33, 0.0);
    for &(i, j, slot) in &COHERENCE_SLOTS {
        let c = Complex64::new(v.0[slot], v.0[slot + 1]);
        m[(i, j)] = c;
        m[(j, i)] = c.conj();
    }
    Ok(DensityState(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pure_u0_maps_to_unit_first_coordinate() {
        let v = density_to_vector(&DensityState::pure(Level::U0));
        let mut expected = [0.0; N_REAL];
        expected[0] = 1.0;
        assert_eq!(v.0, expected);
    }

    #[test]
    fn mixture_recovers_ground_vacuum_by_closure() {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        let rho = DensityState::new(m).unwrap();
        let v = density_to_vector(&rho);
        assert_eq!(v.0[0], 0.5);
        assert!(v.0[1..].iter().all(|&x| x == 0.0));
        let back = vector_to_density(&v).unwrap();
        assert_eq!(back.population(Level::G0), 0.5);
        assert_eq!(back, rho);
    }

    #[test]
    fn rejects_non_hermitian_and_bad_trace() {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = c(1.0, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityState::new(m), Err(Error::InvalidState(_))));
        let mut m = Matrix4::zeros();
        m[(0, 0)] = c(0.9, 0.0);
        assert!(DensityState::new(m).is_err());
        let mut m = Matrix4::zeros();
        m[(0, 0)] = c(1.0, 1e-3);
        assert!(DensityState::new(m).is_err());
    }

    #[test]
    fn vector_to_density_rejects_out_of_range() {
        let mut v = RealStateVector::zeros();
        v.0[0] = 1.5;
        assert!(vector_to_density(&v).is_err());
        let mut v = RealStateVector::zeros();
        v.0[0] = 0.7;
        v.0[12] = 0.7;
        assert!(vector_to_density(&v).is_err());
    }

    #[test]
    fn pure_state_eigenvalues() {
        let s = 0.5f64.sqrt();
        let rho = DensityState::from_amplitudes([c(s, 0.0), c(0.0, 0.0), c(0.0, -s), c(0.0, 0.0)]).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!(rho.min_eigenvalue().abs() < 1e-12);
        assert!((rho.population(Level::G1) - 0.5).abs() < 1e-15);
    }
}
