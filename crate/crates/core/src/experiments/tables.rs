use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{require, Experiment, Stopwatch};
use crate::bounds::{
    perturb_axis_distribution, random_subset_factor, random_subset_factor_doubly_weighted, random_subset_factor_oracle,
    reconstruct_from_axis_distribution, AxisDistribution, HarmonicMode, HarmonicTarget,
};
use crate::ensembles::{child_seed, derive_stream, RngStream};
use crate::qcore::{trace_norm_distance, DensityOperator};
use crate::{CMatrix, Complex64, Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct SubsetFactorRow {
    pub k: usize,
    pub subsystem_size: usize,
    pub num_qubits: usize,
    pub factor: f64,
    pub factor_doubly_weighted: f64,
    /// `3^{min(k, L_A)}`.
    pub saturation: f64,
    pub oracle_mean: Option<f64>,
    pub oracle_se: Option<f64>,
}

/// `f(k, L_A, L)` over a grid, with Monte-Carlo spot checks at `spot_checks`
/// `(k, L_A)` points.
pub fn run_random_subset_table(
    num_qubits: usize,
    k_values: &[usize],
    subsystem_sizes: &[usize],
    spot_checks: &[(usize, usize)],
    draws: usize,
    seed: u64,
) -> Result<Experiment<SubsetFactorRow>> {
    let start = Stopwatch::start();
    let l = num_qubits;
    require(!k_values.is_empty() && !subsystem_sizes.is_empty(), || "empty grid".into())?;
    require(spot_checks.is_empty() || draws >= 2, || "oracle needs at least two draws".into())?;
    let mut rows = Vec::with_capacity(k_values.len() * subsystem_sizes.len());
    for &k in k_values {
        for &la in subsystem_sizes {
            let (oracle_mean, oracle_se) = match spot_checks.iter().position(|&p| p == (k, la)) {
                Some(i) => {
                    let mut rng = derive_stream(child_seed(seed, i as u64), 0);
                    let (m, se) = random_subset_factor_oracle(k, la, l, draws, &mut rng)?;
                    (Some(m), Some(se))
                }
                None => (None, None),
            };
            rows.push(SubsetFactorRow {
                k,
                subsystem_size: la,
                num_qubits: l,
                factor: random_subset_factor(k, la, l)?,
                factor_doubly_weighted: random_subset_factor_doubly_weighted(k, la, l)?,
                saturation: 3f64.powi(k.min(la) as i32),
                oracle_mean,
                oracle_se,
            });
        }
    }
    Ok(Experiment {
        id: "bounds-table",
        seed,
        parameters: json!({
            "num_qubits": l,
            "k_values": k_values,
            "subsystem_sizes": subsystem_sizes,
            "spot_checks": spot_checks,
            "draws": draws,
        }),
        rows,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OvercompletenessRow {
    pub state: usize,
    pub bloch_x: f64,
    pub bloch_y: f64,
    pub bloch_z: f64,
    pub target: &'static str,
    pub l: usize,
    pub m: i32,
    pub amplitude: f64,
    pub permitted: bool,
    /// `unchanged`, `changed`, `rejected` or `negative-mass`.
    pub outcome: &'static str,
    /// Trace-norm change of the reconstructed state.
    pub deviation: Option<f64>,
}

/// Mixed single-qubit state with Bloch vector uniform in the ball of radius
/// `max_radius`.
pub fn random_bloch_state<R: Rng + ?Sized>(rng: &mut R, max_radius: f64) -> ([f64; 3], DensityOperator) {
    let cos_t: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let radius = max_radius * rng.random::<f64>().cbrt();
    let s = (1.0 - cos_t * cos_t).sqrt();
    let r = [radius * s * phi.cos(), radius * s * phi.sin(), radius * cos_t];
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new((1.0 + r[2]) / 2.0, 0.0),
            Complex64::new(r[0] / 2.0, -r[1] / 2.0),
            Complex64::new(r[0] / 2.0, r[1] / 2.0),
            Complex64::new((1.0 - r[2]) / 2.0, 0.0),
        ],
    );
    (r, DensityOperator::new(1, m).expect("Bloch vector inside the unit ball"))
}

/// Adds every real harmonic up to `max_degree` to `p_+` and `p_-` of the Born
/// distribution of `num_states` random states and records the effect on the
/// reconstructed state.
pub fn run_overcompleteness_check(num_states: usize, amplitude: f64, max_degree: usize, seed: u64) -> Result<Experiment<OvercompletenessRow>> {
    let start = Stopwatch::start();
    require(num_states >= 1, || "need at least one state".into())?;
    require(max_degree <= 6, || format!("max degree {max_degree} above 6"))?;
    require(amplitude.is_finite() && amplitude > 0.0, || "amplitude must be positive".into())?;
    let mut rng = RngStream::derive(seed, 0);
    let mut rows = Vec::new();
    for state in 0..num_states {
        let (r, rho) = random_bloch_state(&mut rng, 0.9);
        let p = AxisDistribution::born(&rho)?;
        for target in [HarmonicTarget::Plus, HarmonicTarget::Minus] {
            for l in 0..=max_degree {
                for m in -(l as i32)..=l as i32 {
                    let mode = HarmonicMode { target, l, m };
                    let (permitted, outcome, deviation) = match perturb_axis_distribution(&p, mode, amplitude) {
                        Ok(q) => {
                            let d = trace_norm_distance(&reconstruct_from_axis_distribution(&q)?, &rho)?;
                            (true, if d < 1e-10 { "unchanged" } else { "changed" }, Some(d))
                        }
                        Err(Error::ForbiddenHarmonic { .. }) => (false, "rejected", None),
                        Err(Error::NegativeMass(_)) => (true, "negative-mass", None),
                        Err(e) => return Err(e),
                    };
                    rows.push(OvercompletenessRow {
                        state,
                        bloch_x: r[0],
                        bloch_y: r[1],
                        bloch_z: r[2],
                        target: match target {
                            HarmonicTarget::Plus => "p_plus",
                            HarmonicTarget::Minus => "p_minus",
                        },
                        l,
                        m,
                        amplitude,
                        permitted,
                        outcome,
                        deviation,
                    });
                }
            }
        }
    }
    Ok(Experiment {
        id: "overcompleteness-check",
        seed,
        parameters: json!({ "num_states": num_states, "amplitude": amplitude, "max_degree": max_degree, "max_bloch_radius": 0.9 }),
        rows,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_table_rows() {
        let e = run_random_subset_table(20, &[1, 6, 18], &[1, 2, 10, 20], &[(6, 10)], 20_000, 0).unwrap();
        assert_eq!(e.rows.len(), 12);
        for r in &e.rows {
            if r.subsystem_size == 20 {
                assert_eq!(r.factor, 3f64.powi(r.k as i32));
            }
            if r.subsystem_size == 1 {
                assert!((r.factor - (1.0 + 2.0 * r.k as f64 / 20.0)).abs() < 1e-12);
            }
        }
        let spot = e.rows.iter().find(|r| r.k == 6 && r.subsystem_size == 10).unwrap();
        assert!((spot.oracle_mean.unwrap() - spot.factor).abs() < 3.0 * spot.oracle_se.unwrap());
        assert_eq!(e.rows.iter().filter(|r| r.oracle_mean.is_some()).count(), 1);
    }

    #[test]
    fn overcompleteness_rows() {
        let e = run_overcompleteness_check(3, 0.05, 3, 4).unwrap();
        assert_eq!(e.rows.len(), 3 * 2 * 16);
        for r in &e.rows {
            let fixed = (r.target == "p_plus" && r.l == 0) || (r.target == "p_minus" && r.l == 1);
            assert_eq!(r.permitted, !fixed);
            assert_eq!(r.outcome, if fixed { "rejected" } else { "unchanged" });
        }
    }
}
