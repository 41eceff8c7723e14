use num_complex::Complex64;
use serde::Serialize;

use super::pauli::{Axis, PauliString};
use super::{check_unitary, MAX_QUBITS};
use crate::{CMatrix, Error, Result};

/// Max qubits for the 16^L Pauli decomposition.
pub const MAX_WEIGHT_DECOMPOSITION_QUBITS: usize = 6;

/// Unit-trace hermitian matrix. Positivity is not required: reconstructed
/// shadows are valid `DensityOperator`s but generally have negative
/// eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    num_qubits: usize,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(num_qubits: usize, matrix: CMatrix) -> Result<Self> {
        check_square(num_qubits, &matrix)?;
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::domain(format!("density operator trace {trace} is not 1")));
        }
        let residual = hermiticity_residual(&matrix);
        if residual > 1e-10 {
            return Err(Error::domain(format!(
                "density operator is not hermitian (residual {residual:.3e})"
            )));
        }
        Ok(Self { num_qubits, matrix })
    }

    pub(crate) fn from_matrix_unchecked(num_qubits: usize, matrix: CMatrix) -> Self {
        Self { num_qubits, matrix }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn expectation(&self, obs: &PauliString) -> Result<f64> {
        if obs.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                got: obs.num_qubits(),
            });
        }
        let flip = obs.flip_mask();
        let dim = self.matrix.nrows();
        let value: Complex64 = (0..dim)
            .map(|i| self.matrix[(i, i ^ flip)] * obs.phase(i))
            .sum();
        Ok(value.re)
    }

    /// `Tr[rho O]` for a dense operator.
    pub fn expectation_dense(&self, op: &CMatrix) -> Result<f64> {
        if op.nrows() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                got: op.nrows(),
            });
        }
        Ok(trace_of_product(&self.matrix, op).re)
    }
}

/// Dense operator on `num_qubits` qubits, typically a Heisenberg-evolved
/// observable.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    num_qubits: usize,
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn new(num_qubits: usize, matrix: CMatrix) -> Result<Self> {
        check_square(num_qubits, &matrix)?;
        Ok(Self { num_qubits, matrix })
    }

    pub fn from_pauli(obs: &PauliString) -> Self {
        Self {
            num_qubits: obs.num_qubits(),
            matrix: obs.to_dense(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `Tr[O^dagger O]`.
    pub fn hs_norm_sqr(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermiticity_residual(&self.matrix) <= tol
    }

    /// `V^dagger O V`.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<DenseOperator> {
        if unitary.nrows() != self.matrix.nrows() || unitary.ncols() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                got: unitary.nrows(),
            });
        }
        check_unitary(unitary, 1e-10)?;
        Ok(DenseOperator {
            num_qubits: self.num_qubits,
            matrix: unitary.adjoint() * &self.matrix * unitary,
        })
    }
}

/// Heisenberg picture observable `V^dagger O V`.
pub fn heisenberg_evolve(obs: &PauliString, unitary: &CMatrix) -> Result<DenseOperator> {
    DenseOperator::from_pauli(obs).conjugate_by(unitary)
}

/// Mass of an operator on Pauli strings of each weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightDistribution {
    /// `mass[k] = sum over weight-k strings P of |Tr[P O] / 2^L|^2`.
    pub mass: Vec<f64>,
    pub mean_weight: f64,
    /// Largest weight carrying more than [`WeightDistribution::SUPPORT_CUTOFF`].
    pub max_weight: usize,
    /// `site_mass[j]`: mass on strings acting non-trivially on site `j`.
    pub site_mass: Vec<f64>,
}

impl WeightDistribution {
    pub const SUPPORT_CUTOFF: f64 = 1e-12;

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Sites on which the operator acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.site_mass.len())
            .filter(|&j| self.site_mass[j] > Self::SUPPORT_CUTOFF)
            .collect()
    }
}

pub fn pauli_weight_distribution(op: &DenseOperator) -> Result<WeightDistribution> {
    let l = op.num_qubits();
    if l > MAX_WEIGHT_DECOMPOSITION_QUBITS {
        return Err(Error::QubitRange {
            got: l,
            min: 0,
            max: MAX_WEIGHT_DECOMPOSITION_QUBITS,
        });
    }
    let dim = 1usize << l;
    let m = op.matrix();
    let mut mass = vec![0.0; l + 1];
    let mut site_mass = vec![0.0; l];
    // Enumerate all 4^L strings as base-4 digits (0 = I, 1..3 = X, Y, Z).
    for code in 0..(1usize << (2 * l)) {
        let mut factors = Vec::with_capacity(l);
        for site in 0..l {
            let digit = (code >> (2 * (l - 1 - site))) & 3;
            if digit > 0 {
                factors.push((site, Axis::ALL[digit - 1]));
            }
        }
        let weight = factors.len();
        let p = PauliString::new(l, factors)?;
        let flip = p.flip_mask();
        // Tr[P O] = sum_i phase(i) O[i, i ^ flip]
        let coeff: Complex64 = (0..dim).map(|i| p.phase(i) * m[(i, i ^ flip)]).sum();
        let w = (coeff / dim as f64).norm_sqr();
        mass[weight] += w;
        for (site, _) in p.factors() {
            site_mass[site] += w;
        }
    }
    let total: f64 = mass.iter().sum();
    let mean_weight = if total > 0.0 {
        mass.iter().enumerate().map(|(k, w)| k as f64 * w).sum::<f64>() / total
    } else {
        0.0
    };
    let max_weight = mass
        .iter()
        .rposition(|&w| w > WeightDistribution::SUPPORT_CUTOFF)
        .unwrap_or(0);
    Ok(WeightDistribution {
        mass,
        mean_weight,
        max_weight,
        site_mass,
    })
}

/// Sum of singular values of `a - b`.
pub fn trace_norm_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    trace_norm_distance_matrices(a.matrix(), b.matrix())
}

pub(crate) fn trace_norm_distance_matrices(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let diff = a - b;
    Ok(diff.singular_values().iter().sum())
}

pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(num_qubits: usize, m: &CMatrix) -> Result<()> {
    if num_qubits > MAX_QUBITS {
        return Err(Error::QubitRange {
            got: num_qubits,
            min: 0,
            max: MAX_QUBITS,
        });
    }
    let dim = 1usize << num_qubits;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}
