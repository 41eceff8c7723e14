use serde::Serialize;
use serde_json::json;

use super::{require, Experiment, Stopwatch};
use crate::bounds::{global_hybrid_variance_bound, local_pauli_variance_bound, random_subset_factor, sample_complexity};
use crate::ensembles::{child_seed, EnsembleKind};
use crate::qcore::{make_state, PauliString, PureState, StateSpec};
use crate::shadows::{acquire_shadow, median_of_means, sample_estimates, EstimatorConfig, Protocol, ShadowSet, Summary, SubsetPolicy};
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub observable: String,
    pub ensemble: EnsembleKind,
    pub policy: String,
    pub snapshots: usize,
    pub batches: usize,
    pub mean: f64,
    pub se_mean: f64,
    pub median_of_means: f64,
    pub variance: f64,
    pub se_variance: f64,
    pub exact: Option<f64>,
    /// Closed-form variance for the protocol, given the exact expectation.
    pub bound: Option<f64>,
}

fn policy_label(policy: &SubsetPolicy) -> String {
    match policy {
        SubsetPolicy::Full => "full".into(),
        SubsetPolicy::Fixed(sites) => {
            let s: Vec<String> = sites.iter().map(|s| (s + 1).to_string()).collect();
            format!("fixed:{}", s.join(" "))
        }
        SubsetPolicy::Random(size) => format!("random:{size}"),
    }
}

fn protocol_bound(protocol: &Protocol, obs: &PauliString, o: f64) -> Result<f64> {
    let l = obs.num_qubits();
    match (&protocol.ensemble, &protocol.policy) {
        (EnsembleKind::GlobalHaar, _) => global_hybrid_variance_bound(l, o),
        (_, SubsetPolicy::Full) => local_pauli_variance_bound(obs.weight(), o),
        (_, SubsetPolicy::Fixed(sites)) => local_pauli_variance_bound(obs.weight_on(sites), o),
        (_, SubsetPolicy::Random(size)) => Ok(random_subset_factor(obs.weight(), *size, l)? - o * o),
    }
}

/// Summary of one observable over an existing shadow. `state` supplies the
/// exact value and bound when known.
pub fn summarize_shadow(shadow: &ShadowSet, obs: &PauliString, batches: usize, state: Option<&PureState>) -> Result<EstimateRow> {
    let values = shadow.estimates(obs)?;
    let s = Summary::from_values(&values)?;
    let exact = state.map(|st| st.expectation(obs)).transpose()?;
    let bound = exact.map(|o| protocol_bound(&shadow.protocol, obs, o)).transpose()?;
    Ok(EstimateRow {
        observable: obs.to_string(),
        ensemble: shadow.protocol.ensemble,
        policy: policy_label(&shadow.protocol.policy),
        snapshots: shadow.len(),
        batches,
        mean: s.mean,
        se_mean: s.se_mean,
        median_of_means: median_of_means(&values, batches)?,
        variance: s.variance,
        se_variance: s.se_variance,
        exact,
        bound,
    })
}

/// Acquires a shadow of `spec` and summarizes `obs`; the shadow is returned
/// for persistence.
pub fn run_estimate(
    spec: &StateSpec,
    obs: &PauliString,
    protocol: &Protocol,
    snapshots: usize,
    batches: usize,
    seed: u64,
) -> Result<(Experiment<EstimateRow>, ShadowSet)> {
    let start = Stopwatch::start();
    require(batches >= 1 && snapshots.is_multiple_of(batches), || format!("M={snapshots} is not a multiple of {batches} batches"))?;
    let state = make_state(spec)?;
    let shadow = acquire_shadow(&state, protocol, snapshots, seed)?;
    let row = summarize_shadow(&shadow, obs, batches, Some(&state))?;
    let experiment = Experiment {
        id: "estimate",
        seed,
        parameters: json!({ "state": spec, "observable": obs.to_string(), "protocol": protocol, "snapshots": snapshots, "batches": batches }),
        rows: vec![row],
        elapsed: start.elapsed(),
    };
    Ok((experiment, shadow))
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageRow {
    pub constant: f64,
    pub snapshots: usize,
    pub batches: usize,
    pub trials: usize,
    pub failures: usize,
    pub failure_fraction: f64,
    pub se_failure_fraction: f64,
    pub delta: f64,
    /// `failure_fraction <= delta + 3 sqrt(delta (1 - delta) / trials)`.
    pub within_delta: bool,
}

/// Fraction of median-of-means estimates that miss the exact value by more
/// than `epsilon`, at the budget prescribed by the local Clifford bound.
/// The budget is rounded up to a multiple of the batch count.
pub fn run_mom_coverage_study(
    spec: &StateSpec,
    obs: &PauliString,
    epsilon: f64,
    delta: f64,
    constants: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Experiment<CoverageRow>> {
    let start = Stopwatch::start();
    require(trials >= 100, || format!("{trials} trials below 100"))?;
    require(!constants.is_empty(), || "no constants given".into())?;
    let state = make_state(spec)?;
    let exact = state.expectation(obs)?;
    let variance = local_pauli_variance_bound(obs.weight(), exact)?;
    let batches = EstimatorConfig::default_batches(delta);
    let protocol = Protocol::local_clifford();

    let mut rows = Vec::new();
    for (ci, &constant) in constants.iter().enumerate() {
        let needed = sample_complexity(variance, epsilon, delta, constant)? as usize;
        let snapshots = needed.max(1).div_ceil(batches) * batches;
        let config = EstimatorConfig::new(snapshots, batches, epsilon, delta, constant)?;
        let mut failures = 0;
        for trial in 0..trials {
            let tag = ((ci as u64) << 32) | trial as u64;
            let values = sample_estimates(&state, &protocol, obs, config.snapshots, child_seed(seed, tag))?;
            let estimate = median_of_means(&values, config.batches)?;
            if (estimate - exact).abs() > epsilon {
                failures += 1;
            }
        }
        let n = trials as f64;
        let fraction = failures as f64 / n;
        rows.push(CoverageRow {
            constant,
            snapshots,
            batches,
            trials,
            failures,
            failure_fraction: fraction,
            se_failure_fraction: (fraction * (1.0 - fraction) / n).sqrt(),
            delta,
            within_delta: fraction <= delta + 3.0 * (delta * (1.0 - delta) / n).sqrt(),
        });
    }
    Ok(Experiment {
        id: "mom-coverage",
        seed,
        parameters: json!({
            "state": spec,
            "observable": obs.to_string(),
            "epsilon": epsilon,
            "delta": delta,
            "constants": constants,
            "trials": trials,
            "variance": variance,
        }),
        rows,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_parity_estimate() {
        let spec = StateSpec::Ghz { num_qubits: 6 };
        let obs = PauliString::parse("Z5Z6", 6).unwrap();
        let protocol = Protocol::hybrid_fixed(EnsembleKind::LocalClifford, vec![0, 1, 2, 3]);
        let (e, shadow) = run_estimate(&spec, &obs, &protocol, 10_000, 10, 0).unwrap();
        let r = &e.rows[0];
        assert!((r.mean - 1.0).abs() < 1e-12);
        assert!(r.variance < 1e-12);
        assert!(r.bound.unwrap().abs() < 1e-12);
        assert_eq!(r.policy, "fixed:1 2 3 4");
        assert_eq!(shadow.len(), 10_000);
        assert!(run_estimate(&spec, &obs, &protocol, 10_001, 10, 0).is_err());
    }

    #[test]
    fn coverage_budget() {
        let spec = StateSpec::zeros(2);
        let obs = PauliString::parse("Z1", 2).unwrap();
        let e = run_mom_coverage_study(&spec, &obs, 0.2, 0.1, &[34.0], 100, 0).unwrap();
        let r = &e.rows[0];
        assert_eq!(r.batches, 24);
        assert_eq!(r.snapshots, 5112);
        assert!(r.within_delta);
        assert!(run_mom_coverage_study(&spec, &obs, 0.2, 0.1, &[34.0], 10, 0).is_err());
    }

    #[test]
    fn generous_tolerance_never_fails() {
        let spec = StateSpec::zeros(2);
        let obs = PauliString::parse("Z1", 2).unwrap();
        let e = run_mom_coverage_study(&spec, &obs, 0.99, 0.1, &[34.0], 100, 0).unwrap();
        assert_eq!(e.rows[0].failures, 0);
    }
}
