//! Time integration of the master equation on {|u,0⟩, |e,0⟩, |g,1⟩, |g,0⟩}.
//!
//! The production path is the 15-variable real linear system in
//! [`generator`] stepped by [`integrate`]. [`master`] evaluates the same
//! right-hand side with complex 4×4 matrices and serves as an oracle.

pub mod generator;
pub mod integrate;
pub mod master;
pub mod state;

pub use generator::{build_generator, Generator, GeneratorMatrix};
pub use integrate::{rk4_step, simulate, Sample, Schedule, ScheduleSpec, Trajectory};
pub use master::{block_hamiltonian, hamiltonian, lindblad_rhs_direct};
pub use state::{density_to_vector, vector_to_density, DensityState, Level, RealStateVector};
