//! Closed-form variance and sample-complexity bounds.
//!
//! Every function here is pure. Inputs named `o` are expectation values
//! `Tr[rho O]` of an observable with `|o| <= 1`.

mod sphere;
mod subset;

pub use sphere::{
    gauss_legendre, perturb_axis_distribution, real_spherical_harmonic, reconstruct_from_axis_distribution,
    AxisDistribution, HarmonicMode, HarmonicTarget, AZIMUTH_NODES, POLAR_NODES,
};
pub use subset::{random_subset_factor, random_subset_factor_doubly_weighted, random_subset_factor_exact, random_subset_factor_oracle};

use serde::{Deserialize, Serialize};

use crate::qcore::{DenseOperator, DensityOperator};
use crate::{Error, Result};

const EXPECTATION_TOL: f64 = 1e-12;

/// A closed-form value paired, when available, with its empirical
/// counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula: String,
    pub inputs: Vec<(String, f64)>,
    pub value: f64,
    pub empirical: Option<f64>,
    pub standard_error: Option<f64>,
}

impl BoundReport {
    pub fn new(formula: impl Into<String>, inputs: &[(&str, f64)], value: f64) -> Self {
        Self {
            formula: formula.into(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            empirical: None,
            standard_error: None,
        }
    }

    pub fn with_empirical(mut self, value: f64, standard_error: f64) -> Self {
        self.empirical = Some(value);
        self.standard_error = Some(standard_error);
        self
    }

    /// `empirical <= value + sigmas * standard_error`; `None` without an
    /// empirical counterpart.
    pub fn holds_within(&self, sigmas: f64) -> Option<bool> {
        Some(self.empirical? <= self.value + sigmas * self.standard_error?)
    }
}

/// Validates `o` and clips rounding excursions back into `[-1, 1]`.
fn check_expectation(o: f64) -> Result<f64> {
    if !o.is_finite() || o.abs() > 1.0 + EXPECTATION_TOL {
        return Err(Error::domain(format!("expectation {o} outside [-1, 1]")));
    }
    Ok(o.clamp(-1.0, 1.0))
}

fn check_accuracy(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta {delta} outside (0, 1)")));
    }
    Ok(())
}

fn ceil_count(x: f64) -> Result<u64> {
    if !x.is_finite() || x > u64::MAX as f64 {
        return Err(Error::domain(format!("sample count {x} is not representable")));
    }
    Ok(x.max(0.0).ceil() as u64)
}

/// `ceil(C var / eps^2 ln(2/delta))`.
pub fn sample_complexity(variance: f64, epsilon: f64, delta: f64, constant: f64) -> Result<u64> {
    check_accuracy(epsilon, delta)?;
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::domain(format!("variance {variance} must be non-negative")));
    }
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(Error::domain(format!("constant {constant} must be positive")));
    }
    ceil_count(constant * variance / (epsilon * epsilon) * (2.0 / delta).ln())
}

/// Exact variance `3^k - o^2` of a local Clifford estimate of a weight-`k`
/// Pauli string.
pub fn local_pauli_variance_bound(k: usize, o: f64) -> Result<f64> {
    let o = check_expectation(o)?;
    Ok(3f64.powi(k as i32) - o * o)
}

/// `3^{k(O_A)} - o^2`, where `k_oa` is the weight of `O` on the measured part.
pub fn hybrid_variance_bound(k_oa: usize, o: f64) -> Result<f64> {
    local_pauli_variance_bound(k_oa, o)
}

/// Samples for relative accuracy `eps`: `ceil((3^k/o^2 - 1)/eps^2 ln(2/delta))`.
pub fn relative_error_sample_bound(k: usize, o: f64, epsilon: f64, delta: f64) -> Result<u64> {
    check_expectation(o)?;
    check_accuracy(epsilon, delta)?;
    if o == 0.0 {
        return Err(Error::ZeroExpectation);
    }
    let pre = 3f64.powi(k as i32) / (o * o) - 1.0;
    ceil_count(pre / (epsilon * epsilon) * (2.0 / delta).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparatorBounds {
    /// Fixed-axis measurement: `1/(o^2 eps^2) ln(2/delta)`.
    pub derandomized: u64,
    /// Two-copy Bell measurement: `1/(o^4 eps^4) ln(2/delta)`.
    pub bell: u64,
}

pub fn comparator_sample_bounds(o: f64, epsilon: f64, delta: f64) -> Result<ComparatorBounds> {
    check_expectation(o)?;
    check_accuracy(epsilon, delta)?;
    if o == 0.0 {
        return Err(Error::ZeroExpectation);
    }
    let log = (2.0 / delta).ln();
    let a = o * o * epsilon * epsilon;
    Ok(ComparatorBounds {
        derandomized: ceil_count(log / a)?,
        bell: ceil_count(log / (a * a))?,
    })
}

/// `4^{k_t}` for an observable that has spread to weight `k_t`.
///
/// The base is 4 as stated for evolved shadows, not the base 3 of the
/// static Clifford law.
pub fn time_evolved_variance_bound(k_t: f64) -> Result<f64> {
    if !(k_t >= 0.0 && k_t.is_finite()) {
        return Err(Error::domain(format!("weight {k_t} must be non-negative")));
    }
    Ok(4f64.powf(k_t))
}

/// Exact variance of a global Haar (or Clifford) shadow estimate of a
/// traceless `O`: `(d+1)/(d+2) (Tr[O^2] + 2 Tr[rho O^2]) - Tr[rho O]^2`.
pub fn global_variance(obs: &DenseOperator, rho: &DensityOperator) -> Result<f64> {
    if obs.num_qubits() != rho.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: rho.num_qubits(),
            got: obs.num_qubits(),
        });
    }
    let trace = obs.trace();
    if trace.norm() > 1e-10 {
        return Err(Error::NotTraceless { trace: trace.norm() });
    }
    let d = (1usize << obs.num_qubits()) as f64;
    let o2 = obs.matrix() * obs.matrix();
    let tr_o2 = obs.hs_norm_sqr();
    let tr_rho_o2 = rho.expectation_dense(&o2)?;
    let o = rho.expectation_dense(obs.matrix())?;
    Ok((d + 1.0) / (d + 2.0) * (tr_o2 + 2.0 * tr_rho_o2) - o * o)
}

/// `2^{L_A} + 1 - o^2` for a global unitary on `A` in a hybrid shadow.
pub fn global_hybrid_variance_bound(subsystem_size: usize, o: f64) -> Result<f64> {
    let o = check_expectation(o)?;
    if subsystem_size == 0 || subsystem_size > 62 {
        return Err(Error::domain(format!("subsystem size {subsystem_size} outside 1..=62")));
    }
    Ok((1u64 << subsystem_size) as f64 + 1.0 - o * o)
}

/// Storage of a hybrid shadow relative to the alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryRatio {
    pub snapshots: f64,
    pub subsystem_size: f64,
    pub collapsed_size: f64,
    pub num_qubits: f64,
    /// `M (L_A + d_B) / 2^L`.
    pub vs_full_state: f64,
}

impl MemoryRatio {
    /// `3^{-k(O_B)} (L_A + d_B) / L`: memory relative to a classical shadow
    /// reaching the same accuracy for an observable of weight `k_ob` on `B`.
    pub fn vs_classical_shadow(&self, k_ob: usize) -> f64 {
        3f64.powi(-(k_ob as i32)) * (self.subsystem_size + self.collapsed_size) / self.num_qubits
    }
}

/// `collapsed_size` defaults to `2^{L - L_A}`, a dense collapsed state.
pub fn memory_ratio(snapshots: u64, subsystem_size: usize, collapsed_size: Option<f64>, num_qubits: usize) -> Result<MemoryRatio> {
    if num_qubits == 0 || subsystem_size > num_qubits || num_qubits > 1023 {
        return Err(Error::domain(format!(
            "need 0 <= L_A <= L and 1 <= L, got L_A={subsystem_size}, L={num_qubits}"
        )));
    }
    let d_b = collapsed_size.unwrap_or_else(|| 2f64.powi((num_qubits - subsystem_size) as i32));
    if !(d_b >= 0.0 && d_b.is_finite()) {
        return Err(Error::domain(format!("collapsed size {d_b} must be non-negative")));
    }
    let m = snapshots as f64;
    Ok(MemoryRatio {
        snapshots: m,
        subsystem_size: subsystem_size as f64,
        collapsed_size: d_b,
        num_qubits: num_qubits as f64,
        vs_full_state: m * (subsystem_size as f64 + d_b) / 2f64.powi(num_qubits as i32),
    })
}
