use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{require, Experiment, Stopwatch};
use crate::bounds::{local_pauli_variance_bound, time_evolved_variance_bound};
use crate::ensembles::{child_seed, EnsembleKind};
use crate::qcore::{heisenberg_evolve, make_state, pauli_weight_distribution, Axis, PauliString, StateSpec, MAX_WEIGHT_DECOMPOSITION_QUBITS};
use crate::shadows::{acquire_shadow, snapshot_estimate_dense, DenseObservable, Protocol, ShadowSet, Summary};
use crate::{par, CMatrix, Complex64, Result};

const COUPLING: f64 = 1.0;
const TRANSVERSE: f64 = 0.9045;
const LONGITUDINAL: f64 = 0.809;

/// One Floquet period of the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Circuit {
    /// `exp(-i h_x sum X) exp(-i (J sum ZZ + h_z sum Z))` with
    /// `J = 1, h_x = 0.9045, h_z = 0.809`.
    KickedIsingChaotic,
    /// Transverse kick `exp(-i h_x sum X)` alone; operators never spread.
    Free,
}

impl Circuit {
    pub fn name(self) -> &'static str {
        match self {
            Circuit::KickedIsingChaotic => "kicked-ising-chaotic",
            Circuit::Free => "free",
        }
    }
}

/// Dense Floquet unitary on an open chain.
pub fn floquet_unitary(circuit: Circuit, num_qubits: usize) -> CMatrix {
    let l = num_qubits;
    let dim = 1usize << l;
    let (c, s) = (TRANSVERSE.cos(), TRANSVERSE.sin());
    let kick1 = CMatrix::from_row_slice(2, 2, &[Complex64::new(c, 0.0), Complex64::new(0.0, -s), Complex64::new(0.0, -s), Complex64::new(c, 0.0)]);
    let mut kick = CMatrix::identity(1, 1);
    for _ in 0..l {
        kick = kick.kronecker(&kick1);
    }
    if circuit == Circuit::Free {
        return kick;
    }
    // diagonal Ising layer; site 0 is the most significant bit
    let phases: Vec<Complex64> = (0..dim)
        .map(|i| {
            let z = |q: usize| if (i >> (l - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
            let zz: f64 = (0..l.saturating_sub(1)).map(|q| z(q) * z(q + 1)).sum();
            let field: f64 = (0..l).map(z).sum();
            Complex64::from_polar(1.0, -(COUPLING * zz + LONGITUDINAL * field))
        })
        .collect();
    CMatrix::from_fn(dim, dim, |r, col| kick[(r, col)] * phases[col])
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeEvolutionRow {
    pub circuit: &'static str,
    pub protocol: &'static str,
    pub step: usize,
    pub exact: f64,
    pub mean: f64,
    pub se_mean: f64,
    pub variance: f64,
    pub se_variance: f64,
    pub mean_weight: f64,
    pub max_weight: usize,
    /// `4^{k(t)}` with `k(t)` the mean weight.
    pub evolved_bound: f64,
    /// `3 - o(0)^2`, the variance before any evolution.
    pub initial_local_bound: f64,
    /// `O(t)` still acts trivially on the measured subsystem.
    pub front_in_b: bool,
    /// `1 - o(t)^2`, the hybrid bound while the front has not reached `A`.
    pub hybrid_bound: Option<f64>,
}

fn evolved_estimates(shadow: &ShadowSet, obs: &DenseObservable) -> Result<Vec<f64>> {
    par::try_map_indexed(shadow.len(), |i| snapshot_estimate_dense(&shadow.snapshots[i], obs))
}

/// Shadows taken at `t = 0` evaluated against `O(t) = V^{-t} O V^t`, with
/// `O = Z` on the last site and the hybrid subsystem `A` the first `L/2`
/// sites.
pub fn run_time_evolution_study(num_qubits: usize, circuit: Circuit, steps: usize, snapshots: usize, seed: u64) -> Result<Experiment<TimeEvolutionRow>> {
    let start = Stopwatch::start();
    let l = num_qubits;
    require((2..=MAX_WEIGHT_DECOMPOSITION_QUBITS).contains(&l), || format!("L={l} outside 2..={MAX_WEIGHT_DECOMPOSITION_QUBITS}"))?;
    require(snapshots >= 1000, || format!("M={snapshots} below 1000"))?;
    require(steps <= 64, || format!("{steps} steps above 64"))?;

    let state = make_state(&StateSpec::HaarRandom { num_qubits: l, seed: child_seed(seed, 1) })?;
    let obs = PauliString::single(l, l - 1, Axis::Z)?;
    let subsystem: Vec<usize> = (0..l / 2).collect();
    let shadows = [
        ("local", acquire_shadow(&state, &Protocol::local_clifford(), snapshots, child_seed(seed, 2))?),
        ("hybrid", acquire_shadow(&state, &Protocol::hybrid_fixed(EnsembleKind::LocalClifford, subsystem.clone()), snapshots, child_seed(seed, 3))?),
    ];
    let o0 = state.expectation(&obs)?;
    let initial_local_bound = local_pauli_variance_bound(1, o0)?;
    let floquet = floquet_unitary(circuit, l);
    let dim = 1usize << l;
    let mut evolution = CMatrix::identity(dim, dim);

    let mut rows = Vec::new();
    for step in 0..=steps {
        let evolved = heisenberg_evolve(&obs, &evolution)?;
        let weights = pauli_weight_distribution(&evolved)?;
        let exact = state.expectation_dense(evolved.matrix())?;
        let front_in_b = weights.support().iter().all(|s| !subsystem.contains(s));
        let dense = DenseObservable::new(&evolved);
        let open_bound = local_pauli_variance_bound(0, exact)?;
        for (protocol, shadow) in &shadows {
            let s = Summary::from_values(&evolved_estimates(shadow, &dense)?)?;
            rows.push(TimeEvolutionRow {
                circuit: circuit.name(),
                protocol,
                step,
                exact,
                mean: s.mean,
                se_mean: s.se_mean,
                variance: s.variance,
                se_variance: s.se_variance,
                mean_weight: weights.mean_weight,
                max_weight: weights.max_weight,
                evolved_bound: time_evolved_variance_bound(weights.mean_weight)?,
                initial_local_bound,
                front_in_b,
                hybrid_bound: (*protocol == "hybrid" && front_in_b).then_some(open_bound),
            });
        }
        evolution = &floquet * &evolution;
    }
    Ok(Experiment {
        id: "time-evolution",
        seed,
        parameters: json!({
            "num_qubits": l,
            "circuit": circuit.name(),
            "steps": steps,
            "snapshots": snapshots,
            "observable": obs.to_string(),
            "hybrid_subsystem": subsystem,
            "coupling": COUPLING,
            "transverse": TRANSVERSE,
            "longitudinal": if circuit == Circuit::Free { 0.0 } else { LONGITUDINAL },
        }),
        rows,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::unitarity_residual;

    #[test]
    fn floquet_is_unitary() {
        for circuit in [Circuit::KickedIsingChaotic, Circuit::Free] {
            assert!(unitarity_residual(&floquet_unitary(circuit, 4)) < 1e-12);
        }
    }

    #[test]
    fn front_moves_one_site_per_step() {
        let l = 6;
        let v = floquet_unitary(Circuit::KickedIsingChaotic, l);
        let obs = PauliString::single(l, l - 1, Axis::Z).unwrap();
        let mut u = CMatrix::identity(64, 64);
        for t in 0..=5 {
            let w = pauli_weight_distribution(&heisenberg_evolve(&obs, &u).unwrap()).unwrap();
            assert_eq!(w.support(), ((l - 1 - t)..l).collect::<Vec<_>>(), "t={t}");
            u = &v * &u;
        }
        let free = floquet_unitary(Circuit::Free, l);
        let w = pauli_weight_distribution(&heisenberg_evolve(&obs, &(&free * &free)).unwrap()).unwrap();
        assert_eq!(w.support(), vec![l - 1]);
    }

    #[test]
    fn small_study_is_unbiased() {
        let e = run_time_evolution_study(4, Circuit::KickedIsingChaotic, 3, 5000, 1).unwrap();
        assert_eq!(e.rows.len(), 8);
        for r in &e.rows {
            assert!((r.mean - r.exact).abs() < 4.0 * r.se_mean, "{r:?}");
        }
        let hybrid_open: Vec<_> = e.rows.iter().filter(|r| r.protocol == "hybrid" && r.front_in_b).collect();
        assert_eq!(hybrid_open.len(), 2);
    }
}
