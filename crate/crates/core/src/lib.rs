//! Classical, global and hybrid shadow tomography on exactly simulated
//! qubit states.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`] holds dense pure states, Pauli strings, operators, subsystem
//!   measurement and transverse-field Ising ground states.
//! * [`ensembles`] provides reproducible random streams and the unitary
//!   ensembles (single-qubit Clifford and Haar, global Haar).
//! * [`shadows`] acquires snapshots, inverts the measurement channel,
//!   evaluates estimators and aggregates them with median-of-means.
//! * [`bounds`] collects the closed-form variance and sample-complexity
//!   bounds together with their independent oracles.
//! * [`experiments`] wires everything into deterministic, table-producing
//!   studies.

pub mod bounds;
pub mod ensembles;
mod error;
pub mod experiments;
mod par;
pub mod qcore;
pub mod shadows;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Dense complex matrix used for operators throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
