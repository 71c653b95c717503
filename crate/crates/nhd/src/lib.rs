//! Desk-scale simulator for non-Hermitian qubit dynamics in the metric
//! formalism, together with the unitary dilations that realise the dynamics
//! on enlarged registers.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] - dense complex matrices, `expm`, Hermitian `eigh`,
//!   principal square roots, closed-form two-level propagators.
//! * [`metric`] - the time-dependent metric, its square root and
//!   derivative, the Hermitian counterpart Hamiltonian, stationary and
//!   time-averaged metrics.
//! * [`dilation`] - Naimark, constant-C, one- and two-ancilla dilation
//!   operators plus the total Hamiltonian generating a dilated evolution.
//! * [`circuit`] - statevector simulation of the dilated registers:
//!   unitaries, post-selection, shot sampling, Pauli estimation.
//! * [`tomography`] - Bloch vectors, two-qubit pure-state tomography, and
//!   metric reconstruction from a dilated state.
//! * [`experiment`] - configuration-driven runner that emits the CSV/JSON
//!   datasets and optional SVG plots.
//! * [`validation`] - the self-check suite behind `nhd validate`.
//!
//! Grid sweeps run on a rayon pool when the default `parallel` feature is
//! enabled and fall back to sequential iteration otherwise; results are
//! bit-identical either way because every sampling task derives its own
//! counter-based RNG stream.

pub mod circuit;
pub mod dilation;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod linalg;
pub mod metric;
pub mod tomography;
pub mod validation;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
