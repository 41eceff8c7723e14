//! Browser bindings for the demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the numerics can
//! be tested natively.

use hybrid_shadows::bounds::{
    perturb_axis_distribution, random_subset_factor, reconstruct_from_axis_distribution, AxisDistribution, HarmonicMode,
    HarmonicTarget,
};
use hybrid_shadows::experiments::run_hybrid_variance_scan;
use hybrid_shadows::qcore::{trace_norm_distance, DensityOperator};
use hybrid_shadows::{CMatrix, Complex64};
use wasm_bindgen::prelude::*;

/// Upper limit on qubits for the in-browser variance scan.
const MAX_SCAN_QUBITS: usize = 8;

pub fn subset_factor_rows(num_qubits: usize, subsystem_sizes: &[usize]) -> Result<Vec<f64>, String> {
    let mut out = Vec::with_capacity(num_qubits * subsystem_sizes.len());
    for &la in subsystem_sizes {
        for k in 1..=num_qubits {
            out.push(random_subset_factor(k, la, num_qubits).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

pub fn hybrid_variance_rows(num_qubits: usize, snapshots: usize, seed: u64) -> Result<Vec<f64>, String> {
    if num_qubits > MAX_SCAN_QUBITS {
        return Err(format!("at most {MAX_SCAN_QUBITS} qubits in the browser"));
    }
    let e = run_hybrid_variance_scan(num_qubits, snapshots, seed).map_err(|e| e.to_string())?;
    let state_index = |s: &str| match s {
        "random-product" => 0.0,
        "haar" => 1.0,
        _ => 2.0,
    };
    Ok(e.rows
        .iter()
        .flat_map(|r| [state_index(r.state), r.subsystem_size as f64, r.variance, r.se_variance, r.bound])
        .collect())
}

fn bloch_density(r: [f64; 3]) -> Result<DensityOperator, String> {
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
    DensityOperator::new(1, m).map_err(|e| e.to_string())
}

pub fn axis_perturbation(bloch: [f64; 3], plus: bool, l: usize, m: i32, amplitude: f64) -> Result<f64, String> {
    if bloch.iter().map(|x| x * x).sum::<f64>() > 1.0 {
        return Err("Bloch vector lies outside the unit ball".into());
    }
    let rho = bloch_density(bloch)?;
    let p = AxisDistribution::born(&rho).map_err(|e| e.to_string())?;
    let target = if plus { HarmonicTarget::Plus } else { HarmonicTarget::Minus };
    let q = perturb_axis_distribution(&p, HarmonicMode { target, l, m }, amplitude).map_err(|e| e.to_string())?;
    let back = reconstruct_from_axis_distribution(&q).map_err(|e| e.to_string())?;
    trace_norm_distance(&back, &rho).map_err(|e| e.to_string())
}

/// `f(k, L_A, L)` for `k = 1..=L`, one block of `L` values per subsystem size.
#[wasm_bindgen(js_name = subsetFactorCurves)]
pub fn subset_factor_curves(num_qubits: usize, subsystem_sizes: Vec<usize>) -> Result<Vec<f64>, JsError> {
    subset_factor_rows(num_qubits, &subsystem_sizes).map_err(|e| JsError::new(&e))
}

/// Hybrid variance scan as flat rows of `[state, L_A, variance, se, bound]`,
/// with state 0 = random product, 1 = Haar, 2 = GHZ.
#[wasm_bindgen(js_name = hybridVarianceScan)]
pub fn hybrid_variance_scan(num_qubits: usize, snapshots: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    hybrid_variance_rows(num_qubits, snapshots, seed.into()).map_err(|e| JsError::new(&e))
}

/// Trace-norm change of the reconstructed qubit after adding a harmonic to
/// its axis distribution.
#[wasm_bindgen(js_name = perturbAxisDistribution)]
pub fn perturb_axis(x: f64, y: f64, z: f64, plus: bool, l: usize, m: i32, amplitude: f64) -> Result<f64, JsError> {
    axis_perturbation([x, y, z], plus, l, m, amplitude).map_err(|e| JsError::new(&e))
}
