use serde::Serialize;
use serde_json::json;

use super::{require, Experiment, Stopwatch};
use crate::bounds::{hybrid_variance_bound, local_pauli_variance_bound, random_subset_factor};
use crate::ensembles::{child_seed, EnsembleKind};
use crate::qcore::{make_state, trace_norm_distance, PauliString, StateSpec};
use crate::shadows::{acquire_shadow, reconstruct_density, sample_estimates, Protocol, ShadowSet, Summary, MAX_RECONSTRUCT_QUBITS};
use crate::Result;

/// Absolute slack for comparisons that are exact in exact arithmetic.
const ROUNDING: f64 = 1e-12;

pub const DEFAULT_TFIM_FIELDS: [f64; 7] = [0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0];

#[derive(Debug, Clone, Serialize)]
pub struct RelativeErrorRow {
    pub branch: &'static str,
    pub num_qubits: usize,
    pub exact: f64,
    pub mean: f64,
    pub se_mean: f64,
    pub std_dev: f64,
    pub se_std_dev: f64,
    pub variance_bound: f64,
    /// `std_dev / |exact|`; undefined when the expectation vanishes.
    pub relative_error: Option<f64>,
    pub se_relative_error: Option<f64>,
}

/// `Z_1` on one Haar-random state per `L` and on the W state, estimated with
/// local Clifford shadows.
pub fn run_relative_error_scan(l_values: &[usize], snapshots: usize, seed: u64) -> Result<Experiment<RelativeErrorRow>> {
    let start = Stopwatch::start();
    require(!l_values.is_empty(), || "no system sizes given".into())?;
    for &l in l_values {
        require((2..=10).contains(&l), || format!("L={l} outside 2..=10"))?;
    }
    require(snapshots >= 1000, || format!("M={snapshots} below 1000"))?;

    let mut rows = Vec::new();
    for (bi, branch) in ["haar", "w-like"].into_iter().enumerate() {
        for &l in l_values {
            let spec = match branch {
                "haar" => StateSpec::HaarRandom {
                    num_qubits: l,
                    seed: child_seed(seed, l as u64),
                },
                _ => StateSpec::WLike { num_qubits: l },
            };
            let state = make_state(&spec)?;
            let obs = PauliString::parse("Z1", l)?;
            let exact = state.expectation(&obs)?;
            let values = sample_estimates(&state, &Protocol::local_clifford(), &obs, snapshots, child_seed(seed, 1000 * (bi as u64 + 1) + l as u64))?;
            let s = Summary::from_values(&values)?;
            let (rel, se_rel) = if exact != 0.0 {
                (Some(s.std_dev() / exact.abs()), Some(s.se_std_dev() / exact.abs()))
            } else {
                (None, None)
            };
            rows.push(RelativeErrorRow {
                branch,
                num_qubits: l,
                exact,
                mean: s.mean,
                se_mean: s.se_mean,
                std_dev: s.std_dev(),
                se_std_dev: s.se_std_dev(),
                variance_bound: local_pauli_variance_bound(1, exact)?,
                relative_error: rel,
                se_relative_error: se_rel,
            });
        }
    }
    Ok(Experiment {
        id: "fig-rel-err",
        seed,
        parameters: json!({ "l_values": l_values, "snapshots": snapshots, "observable": "Z1", "ensemble": "local-clifford" }),
        rows,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HybridVarianceRow {
    pub state: &'static str,
    pub subsystem_size: usize,
    pub k_oa: usize,
    pub exact: f64,
    pub mean: f64,
    pub se_mean: f64,
    pub variance: f64,
    pub se_variance: f64,
    pub bound: f64,
    /// `variance <= bound + 3 se_variance`, up to rounding.
    pub within_bound: bool,
}

/// Hybrid shadows with `A` the first `L_A` sites and `O = Z` on the last two
/// sites, for a random product, a Haar and a GHZ state.
pub fn run_hybrid_variance_scan(num_qubits: usize, snapshots: usize, seed: u64) -> Result<Experiment<HybridVarianceRow>> {
    let start = Stopwatch::start();
    let l = num_qubits;
    require((2..=crate::qcore::MAX_QUBITS).contains(&l), || format!("L={l} outside 2..=14"))?;
    require(snapshots >= 10_000, || format!("M={snapshots} below 10000"))?;
    let obs = PauliString::new(l, [(l - 2, crate::qcore::Axis::Z), (l - 1, crate::qcore::Axis::Z)])?;
    let states = [
        ("random-product", StateSpec::random_product(l, child_seed(seed, 1))),
        ("haar", StateSpec::HaarRandom { num_qubits: l, seed: child_seed(seed, 2) }),
        ("ghz", StateSpec::Ghz { num_qubits: l }),
    ];
    let mut rows = Vec::new();
    for (si, (name, spec)) in states.iter().enumerate() {
        let state = make_state(spec)?;
        let exact = state.expectation(&obs)?;
        for la in 1..=l {
            let subset: Vec<usize> = (0..la).collect();
            let protocol = Protocol::hybrid_fixed(EnsembleKind::LocalClifford, subset.clone());
            let values = sample_estimates(&state, &protocol, &obs, snapshots, child_seed(seed, 100 * (si as u64 + 1) + la as u64))?;
            let s = Summary::from_values(&values)?;
            let k_oa = obs.weight_on(&subset);
            let bound = hybrid_variance_bound(k_oa, exact)?;
            rows.push(HybridVarianceRow {
                state: name,
                subsystem_size: la,
                k_oa,
                exact,
                mean: s.mean,
                se_mean: s.se_mean,
                variance: s.variance,
                se_variance: s.se_variance,
                bound,
                within_bound: s.variance <= bound + 3.0 * s.se_variance + ROUNDING,
            });
        }
    }
    Ok(Experiment {
        id: "fig-hybrid-var",
        seed,
        parameters: json!({ "num_qubits": l, "snapshots": snapshots, "observable": obs.to_string(), "subsystem": "first L_A sites" }),
        rows,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TfimRow {
    pub field: f64,
    pub subsystem_size: usize,
    pub exact: f64,
    pub mean: f64,
    pub se_mean: f64,
    pub variance: f64,
    pub se_variance: f64,
    /// `f(1, L_A, L) - o^2`, the subset-averaged hybrid bound.
    pub bound: f64,
    /// Trace-norm distance between the reconstruction from the first
    /// `inset_snapshots` snapshots and the exact state.
    pub trace_distance: Option<f64>,
}

/// Random-subset hybrid shadows of TFIM ground states with `O = X` on `site`.
pub fn run_tfim_scan(
    num_qubits: usize,
    fields: &[f64],
    subsystem_sizes: &[usize],
    snapshots: usize,
    inset_snapshots: usize,
    site: usize,
    seed: u64,
) -> Result<Experiment<TfimRow>> {
    let start = Stopwatch::start();
    let l = num_qubits;
    require((2..=crate::qcore::MAX_QUBITS).contains(&l), || format!("L={l} outside 2..=14"))?;
    require(!fields.is_empty() && fields.iter().all(|g| *g > 0.0 && g.is_finite()), || "fields must be positive".into())?;
    require(!subsystem_sizes.is_empty() && subsystem_sizes.iter().all(|la| (1..=l).contains(la)), || format!("subsystem sizes must lie in 1..={l}"))?;
    require(snapshots >= 10_000, || format!("M={snapshots} below 10000"))?;
    require(inset_snapshots <= snapshots, || "inset snapshots exceed M".into())?;
    require(inset_snapshots == 0 || l <= MAX_RECONSTRUCT_QUBITS, || format!("reconstruction needs L <= {MAX_RECONSTRUCT_QUBITS}"))?;
    require(site < l, || format!("site {site} outside 0..{l}"))?;

    let obs = PauliString::single(l, site, crate::qcore::Axis::X)?;
    let mut rows = Vec::new();
    for (gi, &g) in fields.iter().enumerate() {
        let state = make_state(&StateSpec::TfimGround { num_qubits: l, field: g })?;
        let exact = state.expectation(&obs)?;
        let rho = state.to_density();
        for &la in subsystem_sizes {
            let protocol = Protocol::hybrid_random(EnsembleKind::LocalClifford, la);
            let tag = 1000 * (gi as u64 + 1) + la as u64;
            let (values, trace_distance) = if inset_snapshots > 0 {
                let shadow = acquire_shadow(&state, &protocol, snapshots, child_seed(seed, tag))?;
                let head = ShadowSet {
                    snapshots: shadow.snapshots[..inset_snapshots].to_vec(),
                    ..shadow.clone()
                };
                let dist = trace_norm_distance(&reconstruct_density(&head)?, &rho)?;
                (shadow.estimates(&obs)?, Some(dist))
            } else {
                (sample_estimates(&state, &protocol, &obs, snapshots, child_seed(seed, tag))?, None)
            };
            let s = Summary::from_values(&values)?;
            rows.push(TfimRow {
                field: g,
                subsystem_size: la,
                exact,
                mean: s.mean,
                se_mean: s.se_mean,
                variance: s.variance,
                se_variance: s.se_variance,
                bound: random_subset_factor(1, la, l)? - exact * exact,
                trace_distance,
            });
        }
    }
    Ok(Experiment {
        id: "fig-tfim",
        seed,
        parameters: json!({
            "num_qubits": l,
            "fields": fields,
            "subsystem_sizes": subsystem_sizes,
            "snapshots": snapshots,
            "inset_snapshots": inset_snapshots,
            "observable": obs.to_string(),
            "boundary": "open",
        }),
        rows,
        elapsed: start.elapsed(),
    })
}
