//! Reproducible random streams and the unitary ensembles used for
//! randomized measurements.

use std::sync::OnceLock;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result};

/// Largest system for which a dense global Haar unitary is drawn.
pub const MAX_GLOBAL_QUBITS: usize = 10;

/// Counter-based random stream keyed by `(master_seed, stream_index)`.
///
/// The pair selects a ChaCha8 key and stream id, so streams can be created
/// in any order on any thread and always replay the same sequence.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn derive(master_seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

/// Seed for a named sub-computation, so independent parts of an experiment
/// never share snapshot streams.
pub fn child_seed(master_seed: u64, tag: u64) -> u64 {
    RngStream::derive(master_seed, tag ^ 0x5eed_0000_0000_0000).next_u64()
}

pub fn derive_stream(master_seed: u64, index: u64) -> RngStream {
    RngStream::derive(master_seed, index)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    LocalClifford,
    LocalHaar,
    GlobalHaar,
}

impl EnsembleKind {
    pub fn is_local(self) -> bool {
        !matches!(self, EnsembleKind::GlobalHaar)
    }
}

/// Single-site unitary as drawn from a local ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SiteUnitary {
    /// Index into [`clifford_table`].
    Clifford(u8),
    Haar(Matrix2<Complex64>),
}

impl SiteUnitary {
    pub fn matrix(&self) -> Matrix2<Complex64> {
        match self {
            SiteUnitary::Clifford(i) => clifford_table()[*i as usize],
            SiteUnitary::Haar(m) => *m,
        }
    }

    /// Bloch vector of `U^dagger |bit>`, the direction measured when outcome
    /// `bit` is observed after rotating by `U`.
    pub fn measured_direction(&self, bit: u8) -> [f64; 3] {
        let u = self.matrix();
        // U^dagger|b> = conjugate of row b of U
        let b = bit as usize;
        let v0 = u[(b, 0)].conj();
        let v1 = u[(b, 1)].conj();
        let c = v0.conj() * v1;
        [2.0 * c.re, 2.0 * c.im, v0.norm_sqr() - v1.norm_sqr()]
    }
}

fn canonical_phase(m: Matrix2<Complex64>) -> Matrix2<Complex64> {
    let pivot = [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
        .into_iter()
        .find(|z| z.norm() > 1e-9)
        .expect("unitary has a nonzero entry");
    let phase = pivot / pivot.norm();
    m.map(|z| z / phase)
}

fn approx_eq(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() < 1e-9)
}

/// The 24 single-qubit Cliffords modulo global phase.
///
/// Canonical ordering: breadth-first closure from the identity, applying the
/// generators `H` then `S` by left multiplication; each element is rescaled
/// so its first nonzero entry (row-major) is real and positive.
pub fn clifford_table() -> &'static [Matrix2<Complex64>; 24] {
    static TABLE: OnceLock<[Matrix2<Complex64>; 24]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = Matrix2::new(h, h, h, -h).map(|x| Complex64::new(x, 0.0));
        let phase = Matrix2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
        );
        let mut found = vec![Matrix2::identity()];
        let mut head = 0;
        while head < found.len() {
            let current = found[head];
            head += 1;
            for g in [&hadamard, &phase] {
                let next = canonical_phase(g * current);
                if !found.iter().any(|m| approx_eq(m, &next)) {
                    found.push(next);
                }
            }
        }
        found.try_into().expect("single-qubit Clifford group has 24 elements")
    })
}

pub fn sample_single_qubit_clifford<R: Rng + ?Sized>(rng: &mut R) -> SiteUnitary {
    SiteUnitary::Clifford(rng.random_range(0..24u8))
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn sample_single_qubit_haar<R: Rng + ?Sized>(rng: &mut R) -> SiteUnitary {
    let u = haar_unitary(2, rng);
    SiteUnitary::Haar(Matrix2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]))
}

pub fn sample_site_unitary<R: Rng + ?Sized>(kind: EnsembleKind, rng: &mut R) -> Result<SiteUnitary> {
    match kind {
        EnsembleKind::LocalClifford => Ok(sample_single_qubit_clifford(rng)),
        EnsembleKind::LocalHaar => Ok(sample_single_qubit_haar(rng)),
        EnsembleKind::GlobalHaar => Err(Error::domain("global ensemble has no site unitaries")),
    }
}

/// Haar unitary on `dim` dimensions: Gram-Schmidt on the columns of a
/// complex Ginibre matrix, which is QR with a positive real R diagonal.
fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(0.0, 0.0));
    for c in 0..dim {
        for r in 0..dim {
            m[(r, c)] = complex_gaussian(rng);
        }
    }
    for c in 0..dim {
        for prev in 0..c {
            let proj: Complex64 = (0..dim).map(|r| m[(r, prev)].conj() * m[(r, c)]).sum();
            for r in 0..dim {
                let p = m[(r, prev)];
                m[(r, c)] -= proj * p;
            }
        }
        let norm = (0..dim).map(|r| m[(r, c)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..dim {
            m[(r, c)] /= norm;
        }
    }
    m
}

pub fn sample_global_haar<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<CMatrix> {
    if !(1..=MAX_GLOBAL_QUBITS).contains(&num_qubits) {
        return Err(Error::QubitRange {
            got: num_qubits,
            min: 1,
            max: MAX_GLOBAL_QUBITS,
        });
    }
    Ok(haar_unitary(1 << num_qubits, rng))
}
