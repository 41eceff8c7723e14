use num_complex::Complex64;
use rand::Rng;

use super::state::PureState;
use crate::{Error, Result};

/// Result of measuring a subset `A` in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    /// Measured sites, in the order their bits appear in `outcome`.
    pub subset: Vec<usize>,
    pub outcome: Vec<u8>,
    /// Normalized post-measurement state on the complement, sites ascending.
    pub collapsed: PureState,
    /// Born probability of `outcome`.
    pub probability: f64,
}

impl MeasurementRecord {
    /// Outcome bits packed with `outcome[0]` as the most significant bit.
    pub fn outcome_index(&self) -> usize {
        self.outcome.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }
}

/// Complement of `subset` in `0..num_qubits`, ascending.
pub fn complement(num_qubits: usize, subset: &[usize]) -> Vec<usize> {
    (0..num_qubits).filter(|s| !subset.contains(s)).collect()
}

fn validate_subset(state: &PureState, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::domain("measured subset must be non-empty"));
    }
    for (i, &s) in subset.iter().enumerate() {
        if s >= state.num_qubits() {
            return Err(Error::SiteOutOfRange {
                site: s,
                num_qubits: state.num_qubits(),
            });
        }
        if subset[..i].contains(&s) {
            return Err(Error::DuplicateSite(s));
        }
    }
    Ok(())
}

#[inline]
fn subset_index(index: usize, masks: &[usize]) -> usize {
    masks
        .iter()
        .fold(0, |acc, &m| (acc << 1) | usize::from(index & m != 0))
}

fn masks_for(num_qubits: usize, sites: &[usize]) -> Vec<usize> {
    sites.iter().map(|&s| 1 << (num_qubits - 1 - s)).collect()
}

/// Born distribution over outcomes on `subset`, indexed as in
/// [`MeasurementRecord::outcome_index`].
pub fn outcome_distribution(state: &PureState, subset: &[usize]) -> Result<Vec<f64>> {
    validate_subset(state, subset)?;
    let masks = masks_for(state.num_qubits(), subset);
    let mut probs = vec![0.0; 1 << subset.len()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        probs[subset_index(i, &masks)] += a.norm_sqr();
    }
    Ok(probs)
}

/// Projects onto `outcome` (indexed as in [`outcome_distribution`]) and
/// returns its probability with the normalized remainder. A zero-probability
/// outcome is an error.
pub fn collapse(state: &PureState, subset: &[usize], outcome: usize) -> Result<(f64, PureState)> {
    validate_subset(state, subset)?;
    let l = state.num_qubits();
    let rest = complement(l, subset);
    let masks = masks_for(l, subset);
    let rest_masks = masks_for(l, &rest);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << rest.len()];
    let mut prob = 0.0;
    for (i, a) in state.amplitudes().iter().enumerate() {
        if subset_index(i, &masks) == outcome {
            amps[subset_index(i, &rest_masks)] = *a;
            prob += a.norm_sqr();
        }
    }
    if prob <= 0.0 {
        return Err(Error::domain("outcome has zero probability"));
    }
    let norm = prob.sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Ok((prob, PureState::from_parts_unchecked(rest.len(), amps)))
}

/// Draws an index from `probs` by inversion; zero-weight entries are never
/// returned.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_nonzero = i;
        if u < cumulative {
            return i;
        }
    }
    last_nonzero
}

/// Measures `subset` in the computational basis, collapsing the rest.
pub fn measure_subsystem<R: Rng + ?Sized>(
    state: &PureState,
    subset: &[usize],
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let probs = outcome_distribution(state, subset)?;
    let index = sample_index(&probs, rng);
    let (probability, collapsed) = collapse(state, subset, index)?;
    let k = subset.len();
    let outcome = (0..k).map(|q| ((index >> (k - 1 - q)) & 1) as u8).collect();
    Ok(MeasurementRecord {
        subset: subset.to_vec(),
        outcome,
        collapsed,
        probability,
    })
}
