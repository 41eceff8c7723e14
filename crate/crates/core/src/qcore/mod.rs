//! Dense simulation of pure states and operators on up to [`MAX_QUBITS`]
//! qubits.

mod measure;
mod operator;
mod pauli;
mod state;
pub mod tfim;

pub use measure::{collapse, complement, measure_subsystem, outcome_distribution, MeasurementRecord};
pub(crate) use measure::sample_index;
pub use operator::{
    heisenberg_evolve, pauli_weight_distribution, trace_norm_distance, DenseOperator,
    DensityOperator, WeightDistribution, MAX_WEIGHT_DECOMPOSITION_QUBITS,
};
pub use pauli::{Axis, PauliString};
pub use state::{make_state, PureState, StateSpec};

use crate::{CMatrix, Error, Result};

/// Memory guard for dense state vectors.
pub const MAX_QUBITS: usize = 14;

/// Max-entry residual of `U^dagger U - I`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - crate::Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub(crate) fn check_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            got: u.ncols(),
        });
    }
    let residual = unitarity_residual(u);
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}
