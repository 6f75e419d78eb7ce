//! Quantum state transfer in a three-qubit XY chain with a tunable
//! three-spin interaction, and an NMR pulse-sequence compiler for the
//! commuting factors of its propagator.
//!
//! Basis states are ordered `|q1 q2 q3⟩` with `q1` most significant.
//! Chain time is dimensionless (ħ = 1, two-body coupling = 1); the bare
//! chain transfers a state end to end in `t0 = π/(2√2)`.

pub mod error;
pub mod linalg;
pub mod numerics;
pub mod propagator;
pub mod pulse;
pub mod spin;
pub mod transfer;

pub use error::{Error, Result};
pub use linalg::{dist_up_to_global_phase, expm_hermitian_generator, kron, ComplexMatrix};
pub use propagator::{
    find_speedup_threshold, propagate_analytic, swap_13, transfer_propagator, transfer_times, Direction,
    TransferTimes, T0,
};
pub use spin::{Axis, ChainParams, DensityOperator, NmrParams, PauliLabel, PauliString};
pub use transfer::{InitialState, TransferReport};
