//! Ground states of the open transverse-field Ising chain
//! `H = -sum_{i<L-1} Z_i Z_{i+1} - g sum_i X_i`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::state::PureState;
use super::MAX_QUBITS;
use crate::{Error, Result};

/// Largest chain diagonalized densely; longer chains use Lanczos.
pub const DENSE_LIMIT: usize = 10;

const LANCZOS_MAX_ITER: usize = 400;
const LANCZOS_TOL: f64 = 1e-13;

fn diagonal_energy(index: usize, l: usize) -> f64 {
    (0..l.saturating_sub(1))
        .map(|i| {
            let a = (index >> (l - 1 - i)) & 1;
            let b = (index >> (l - 2 - i)) & 1;
            if a == b {
                -1.0
            } else {
                1.0
            }
        })
        .sum()
}

pub fn hamiltonian_dense(l: usize, field: f64) -> DMatrix<f64> {
    let dim = 1usize << l;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = diagonal_energy(i, l);
        for site in 0..l {
            h[(i ^ (1 << (l - 1 - site)), i)] = -field;
        }
    }
    h
}

fn apply_hamiltonian(l: usize, field: f64, diag: &[f64], v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = diag[i] * v[i];
        for site in 0..l {
            acc -= field * v[i ^ (1 << (l - 1 - site))];
        }
        *o = acc;
    }
}

fn validate(l: usize, field: f64) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&l) {
        return Err(Error::QubitRange {
            got: l,
            min: 1,
            max: MAX_QUBITS,
        });
    }
    if !field.is_finite() || field <= 0.0 {
        return Err(Error::domain(format!(
            "transverse field must be positive and finite, got {field}"
        )));
    }
    Ok(())
}

/// Ground energy and real ground vector, sign fixed so the components sum to
/// a positive number.
pub fn ground(l: usize, field: f64) -> Result<(f64, Vec<f64>)> {
    validate(l, field)?;
    let (energy, mut vector) = if l <= DENSE_LIMIT {
        dense_ground(l, field)
    } else {
        lanczos_ground(l, field)?
    };
    if vector.iter().sum::<f64>() < 0.0 {
        vector.iter_mut().for_each(|x| *x = -*x);
    }
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    vector.iter_mut().for_each(|x| *x /= norm);
    Ok((energy, vector))
}

pub fn ground_state(l: usize, field: f64) -> Result<PureState> {
    let (_, v) = ground(l, field)?;
    PureState::new(l, v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
}

fn dense_ground(l: usize, field: f64) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(hamiltonian_dense(l, field));
    let (idx, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    (energy, eig.eigenvectors.column(idx).iter().copied().collect())
}

/// Lanczos with full reorthogonalization, started from the uniform vector
/// (which lies in the parity sector of the ground state).
pub(crate) fn lanczos_ground(l: usize, field: f64) -> Result<(f64, Vec<f64>)> {
    let dim = 1usize << l;
    let diag: Vec<f64> = (0..dim).map(|i| diagonal_energy(i, l)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut v = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut w = vec![0.0; dim];
    let mut previous = f64::INFINITY;
    let mut best: Option<(f64, DVector<f64>)> = None;

    for iter in 0..LANCZOS_MAX_ITER.min(dim) {
        apply_hamiltonian(l, field, &diag, &v, &mut w);
        let alpha: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        basis.push(v.clone());
        alphas.push(alpha);
        for q in &basis {
            let overlap: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(q).for_each(|(a, b)| *a -= overlap * b);
        }
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();

        let k = alphas.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let ritz = eig.eigenvectors.column(idx).into_owned();
        let residual = beta * ritz[k - 1].abs();
        best = Some((theta, ritz));
        if residual < LANCZOS_TOL * theta.abs().max(1.0)
            || (iter > 10 && (previous - theta).abs() < 1e-15 * theta.abs())
            || beta < 1e-14
        {
            break;
        }
        previous = theta;
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
    }

    let (energy, ritz) = best.ok_or_else(|| Error::domain("Lanczos produced no iterate"))?;
    let mut vector = vec![0.0; dim];
    for (coef, q) in ritz.iter().zip(&basis) {
        vector.iter_mut().zip(q).for_each(|(a, b)| *a += coef * b);
    }
    Ok((energy, vector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{Axis, PauliString};

    /// Free-fermion ground energy of the open chain: minus the sum of the
    /// singular values of the bidiagonal coupling matrix.
    fn free_fermion_energy(l: usize, g: f64) -> f64 {
        let mut a = DMatrix::<f64>::zeros(l, l);
        for i in 0..l {
            a[(i, i)] = g;
            if i + 1 < l {
                a[(i, i + 1)] = 1.0;
            }
        }
        -a.singular_values().iter().sum::<f64>()
    }

    #[test]
    fn ground_energy_matches_free_fermions() {
        for (l, g) in [(4, 1.0), (6, 0.5), (8, 2.0), (3, 0.1)] {
            let (e, _) = ground(l, g).unwrap();
            assert!((e - free_fermion_energy(l, g)).abs() < 1e-10, "L={l} g={g}");
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        for (l, g) in [(6, 1.0), (8, 0.7), (8, 3.0)] {
            let (e_dense, v_dense) = dense_ground(l, g);
            let (e_lz, v_lz) = lanczos_ground(l, g).unwrap();
            assert!((e_dense - e_lz).abs() < 1e-10);
            let overlap: f64 = v_dense.iter().zip(&v_lz).map(|(a, b)| a * b).sum();
            let norm: f64 = v_lz.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((overlap.abs() / norm - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lanczos_path_for_long_chain() {
        let (e, _) = ground(11, 1.0).unwrap();
        assert!((e - free_fermion_energy(11, 1.0)).abs() < 1e-8);
    }

    #[test]
    fn paramagnetic_limit() {
        let psi = ground_state(8, 100.0).unwrap();
        let x4 = PauliString::single(8, 3, Axis::X).unwrap();
        assert!((psi.expectation(&x4).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn nonpositive_field_rejected() {
        assert!(ground_state(4, 0.0).is_err());
        assert!(ground_state(4, -1.0).is_err());
        assert!(ground_state(4, f64::NAN).is_err());
    }
}
