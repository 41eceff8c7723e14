//! Snapshot acquisition, inverse shadow channels and estimators.
//!
//! Local and hybrid snapshots are never expanded into `2^L x 2^L` matrices
//! to evaluate Pauli estimates: each measured site contributes the scalar
//! `3 <b|U sigma U^dagger|b>` and the unmeasured remainder contributes one
//! expectation in the stored collapsed state.

mod log;
mod reconstruct;
mod stats;

pub use log::{
    decode_snapshot_log, encode_snapshot_log, read_snapshot_log, write_snapshot_log, LOG_MAGIC,
    LOG_VERSION,
};
pub use reconstruct::{
    inverted_snapshot, reconstruct_density, snapshot_estimate_dense, DenseObservable,
    MAX_RECONSTRUCT_QUBITS,
};
pub use stats::{empirical_variance, median_of_means, EstimatorConfig, Summary};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{derive_stream, sample_global_haar, sample_site_unitary, EnsembleKind, SiteUnitary};
use crate::qcore::{measure_subsystem, sample_index, Axis, MeasurementRecord, PauliString, PureState};
use crate::{par, CMatrix, Error, Result};

/// Which sites are measured in each snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetPolicy {
    /// Every site; a plain classical shadow.
    Full,
    /// The same subsystem `A` every time.
    Fixed(Vec<usize>),
    /// A fresh uniformly random subsystem of the given size per snapshot.
    Random(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub ensemble: EnsembleKind,
    pub policy: SubsetPolicy,
}

impl Protocol {
    pub fn local_clifford() -> Self {
        Self {
            ensemble: EnsembleKind::LocalClifford,
            policy: SubsetPolicy::Full,
        }
    }

    pub fn global_haar() -> Self {
        Self {
            ensemble: EnsembleKind::GlobalHaar,
            policy: SubsetPolicy::Full,
        }
    }

    pub fn hybrid_fixed(ensemble: EnsembleKind, subset: Vec<usize>) -> Self {
        Self {
            ensemble,
            policy: SubsetPolicy::Fixed(subset),
        }
    }

    pub fn hybrid_random(ensemble: EnsembleKind, subset_size: usize) -> Self {
        Self {
            ensemble,
            policy: SubsetPolicy::Random(subset_size),
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if !self.ensemble.is_local() && self.policy != SubsetPolicy::Full {
            return Err(Error::domain("global ensemble supports full measurement only"));
        }
        match &self.policy {
            SubsetPolicy::Full => Ok(()),
            SubsetPolicy::Fixed(sites) => {
                if sites.is_empty() {
                    return Err(Error::domain("measured subset must be non-empty"));
                }
                for (i, &s) in sites.iter().enumerate() {
                    if s >= num_qubits {
                        return Err(Error::SiteOutOfRange {
                            site: s,
                            num_qubits,
                        });
                    }
                    if sites[..i].contains(&s) {
                        return Err(Error::DuplicateSite(s));
                    }
                }
                Ok(())
            }
            SubsetPolicy::Random(size) => {
                if !(1..=num_qubits).contains(size) {
                    return Err(Error::domain(format!(
                        "subset size {size} outside 1..={num_qubits}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// One randomized-measurement record.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    /// Every site rotated and measured.
    LocalFull {
        unitaries: Vec<SiteUnitary>,
        outcome: Vec<u8>,
    },
    /// Global unitary followed by a full measurement with outcome index `b`.
    Global { unitary: CMatrix, outcome: usize },
    /// Sites in `record.subset` rotated by `unitaries` (same order) and
    /// measured; the rest kept as the collapsed state.
    Hybrid {
        unitaries: Vec<SiteUnitary>,
        record: MeasurementRecord,
    },
}

impl Snapshot {
    pub fn num_qubits(&self) -> usize {
        match self {
            Snapshot::LocalFull { outcome, .. } => outcome.len(),
            Snapshot::Global { unitary, .. } => unitary.nrows().trailing_zeros() as usize,
            Snapshot::Hybrid { record, .. } => record.subset.len() + record.collapsed.num_qubits(),
        }
    }
}

/// `L_A` distinct sites drawn uniformly, returned sorted.
pub fn choose_random_subset<R: Rng + ?Sized>(num_qubits: usize, size: usize, rng: &mut R) -> Result<Vec<usize>> {
    if !(1..=num_qubits).contains(&size) {
        return Err(Error::domain(format!(
            "subset size {size} outside 1..={num_qubits}"
        )));
    }
    let mut sites: Vec<usize> = (0..num_qubits).collect();
    for i in 0..size {
        let j = rng.random_range(i..num_qubits);
        sites.swap(i, j);
    }
    let mut chosen = sites[..size].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Draw order: subset (random policy), site unitaries in subset order, then
/// the measurement outcome.
pub fn acquire_snapshot<R: Rng + ?Sized>(state: &PureState, protocol: &Protocol, rng: &mut R) -> Result<Snapshot> {
    let l = state.num_qubits();
    protocol.validate(l)?;
    if protocol.ensemble == EnsembleKind::GlobalHaar {
        let unitary = sample_global_haar(l, rng)?;
        let rotated = state.apply_dense(&unitary)?;
        let outcome = sample_index(&rotated.probabilities(), rng);
        return Ok(Snapshot::Global { unitary, outcome });
    }

    let subset: Vec<usize> = match &protocol.policy {
        SubsetPolicy::Full => (0..l).collect(),
        SubsetPolicy::Fixed(sites) => sites.clone(),
        SubsetPolicy::Random(size) => choose_random_subset(l, *size, rng)?,
    };
    let unitaries = subset
        .iter()
        .map(|_| sample_site_unitary(protocol.ensemble, rng))
        .collect::<Result<Vec<_>>>()?;
    let mut rotated = state.clone();
    for (&site, u) in subset.iter().zip(&unitaries) {
        rotated.apply_single_in_place(site, &u.matrix());
    }

    if protocol.policy == SubsetPolicy::Full {
        let index = sample_index(&rotated.probabilities(), rng);
        let outcome = (0..l).map(|s| ((index >> (l - 1 - s)) & 1) as u8).collect();
        Ok(Snapshot::LocalFull { unitaries, outcome })
    } else {
        let record = measure_subsystem(&rotated, &subset, rng)?;
        Ok(Snapshot::Hybrid { unitaries, record })
    }
}

/// Classical (or hybrid) shadow: snapshots sharing one protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowSet {
    pub protocol: Protocol,
    pub num_qubits: usize,
    pub master_seed: u64,
    pub snapshots: Vec<Snapshot>,
}

impl ShadowSet {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn estimates(&self, obs: &PauliString) -> Result<Vec<f64>> {
        self.snapshots.iter().map(|s| snapshot_estimate(s, obs)).collect()
    }
}

/// Acquires `count` snapshots; snapshot `i` draws from stream `(master_seed, i)`.
pub fn acquire_shadow(state: &PureState, protocol: &Protocol, count: usize, master_seed: u64) -> Result<ShadowSet> {
    protocol.validate(state.num_qubits())?;
    let snapshots = par::try_map_indexed(count, |i| {
        let mut rng = derive_stream(master_seed, i as u64);
        acquire_snapshot(state, protocol, &mut rng)
    })?;
    Ok(ShadowSet {
        protocol: protocol.clone(),
        num_qubits: state.num_qubits(),
        master_seed,
        snapshots,
    })
}

/// Like [`acquire_shadow`] but evaluates `obs` immediately instead of
/// retaining snapshots.
pub fn sample_estimates(
    state: &PureState,
    protocol: &Protocol,
    obs: &PauliString,
    count: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    protocol.validate(state.num_qubits())?;
    check_obs(state.num_qubits(), obs)?;
    par::try_map_indexed(count, |i| {
        let mut rng = derive_stream(master_seed, i as u64);
        let s = acquire_snapshot(state, protocol, &mut rng)?;
        snapshot_estimate(&s, obs)
    })
}

fn check_obs(num_qubits: usize, obs: &PauliString) -> Result<()> {
    if obs.num_qubits() != num_qubits {
        return Err(Error::DimensionMismatch {
            expected: num_qubits,
            got: obs.num_qubits(),
        });
    }
    Ok(())
}

/// `Tr[rho_hat O]` for one inverted snapshot and a Pauli string.
pub fn snapshot_estimate(snapshot: &Snapshot, obs: &PauliString) -> Result<f64> {
    check_obs(snapshot.num_qubits(), obs)?;
    match snapshot {
        Snapshot::LocalFull { unitaries, outcome } => Ok(obs
            .factors()
            .map(|(site, axis)| 3.0 * unitaries[site].measured_direction(outcome[site])[axis.index()])
            .product()),
        Snapshot::Global { unitary, outcome } => {
            let dim = unitary.nrows();
            // v = U^dagger |b>
            let v: Vec<Complex64> = (0..dim).map(|i| unitary[(*outcome, i)].conj()).collect();
            let state = PureState::from_parts_unchecked(obs.num_qubits(), v);
            let trace = if obs.is_identity() { dim as f64 } else { 0.0 };
            Ok((dim as f64 + 1.0) * state.expectation(obs)? - trace)
        }
        Snapshot::Hybrid { unitaries, record } => {
            let mut value = 1.0;
            for ((site, u), &bit) in record.subset.iter().zip(unitaries).zip(&record.outcome) {
                if let Some(axis) = obs.axis_at(*site) {
                    value *= 3.0 * u.measured_direction(bit)[axis.index()];
                }
            }
            let rest = crate::qcore::complement(obs.num_qubits(), &record.subset);
            let obs_b = obs.restrict(&rest);
            if !obs_b.is_identity() {
                value *= record.collapsed.expectation(&obs_b)?;
            }
            Ok(value)
        }
    }
}

fn rotate_into_eigenbasis(state: &mut PureState, site: usize, axis: Axis) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rotation = match axis {
        Axis::Z => return,
        Axis::X => nalgebra::Matrix2::new(h, h, h, -h).map(|x| Complex64::new(x, 0.0)),
        // H S^dagger
        Axis::Y => nalgebra::Matrix2::new(
            Complex64::new(h, 0.0),
            Complex64::new(0.0, -h),
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
        ),
    };
    state.apply_single_in_place(site, &rotation);
}

/// Single-shot estimate from measuring each site of `obs` along its own axis;
/// returns the product of the observed eigenvalues.
pub fn fixed_basis_estimate<R: Rng + ?Sized>(state: &PureState, obs: &PauliString, rng: &mut R) -> Result<f64> {
    check_obs(state.num_qubits(), obs)?;
    if obs.is_identity() {
        return Err(Error::IdentityObservable);
    }
    let mut rotated = state.clone();
    for (site, axis) in obs.factors() {
        rotate_into_eigenbasis(&mut rotated, site, axis);
    }
    let record = measure_subsystem(&rotated, &obs.support(), rng)?;
    let parity = record.outcome.iter().map(|&b| b as u32).sum::<u32>() % 2;
    Ok(if parity == 0 { 1.0 } else { -1.0 })
}
