//! Training embedding quantum kernels from data re-uploading circuits.
//!
//! The crate covers the full pipeline on an exact simulator:
//!
//! * [`simulator`] — statevector simulation of SU(2) rotations, controlled
//!   rotations and CNOT/CZ cascades;
//! * [`qnn`] — data re-uploading classifiers, fidelity cost, adjoint
//!   gradients, Adam training and iterative qubit scaling;
//! * [`kernel`] — n-to-n and 1-to-n embedding kernels, Gram matrices,
//!   alignment metrics and kernel combinators;
//! * [`svm`] — an SMO-based soft-margin SVM over precomputed kernels;
//! * [`noise`] — density-matrix replays of the same circuits under per-gate
//!   amplitude damping and phase flip channels;
//! * [`data`] — seeded generators for the four synthetic benchmarks.

pub mod data;
pub mod error;
pub mod kernel;
pub mod noise;
pub mod params_io;
pub mod qnn;
pub mod simulator;
pub mod svm;

pub use error::{Error, Result};
