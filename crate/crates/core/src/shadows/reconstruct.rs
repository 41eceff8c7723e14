use num_complex::Complex64;

use super::{ShadowSet, Snapshot};
use crate::ensembles::SiteUnitary;
use crate::qcore::{complement, DenseOperator, DensityOperator};
use crate::{par, Error, Result};

/// Largest system for which inverted snapshots are materialized.
pub const MAX_RECONSTRUCT_QUBITS: usize = 10;

const CHUNK: usize = 64;
const CHUNKS_PER_ROUND: usize = 32;

type Entry = (usize, Complex64);

/// Entries of `(I + 3 n.sigma)/2`, the single-site inverted snapshot.
fn local_factor(u: &SiteUnitary, bit: u8) -> [[Complex64; 2]; 2] {
    let [nx, ny, nz] = u.measured_direction(bit);
    [
        [
            Complex64::new(0.5 * (1.0 + 3.0 * nz), 0.0),
            Complex64::new(1.5 * nx, -1.5 * ny),
        ],
        [
            Complex64::new(1.5 * nx, 1.5 * ny),
            Complex64::new(0.5 * (1.0 - 3.0 * nz), 0.0),
        ],
    ]
}

/// Entries `(row * dim + col, value)` of a tensor product of single-site
/// factors. Bits of unlisted sites stay zero; the complementary part fills
/// them in.
fn product_entries(num_qubits: usize, factors: &[(usize, [[Complex64; 2]; 2])]) -> Vec<Entry> {
    let dim = 1usize << num_qubits;
    let mut entries = vec![(0usize, Complex64::new(1.0, 0.0))];
    for (site, f) in factors {
        let m = 1usize << (num_qubits - 1 - site);
        let mut next = Vec::with_capacity(entries.len() * 4);
        for &(off, v) in &entries {
            for (r, row) in f.iter().enumerate() {
                for (c, x) in row.iter().enumerate() {
                    next.push((off + r * m * dim + c * m, v * x));
                }
            }
        }
        entries = next;
    }
    entries
}

fn spread(local: usize, sites: &[usize], num_qubits: usize) -> usize {
    let k = sites.len();
    sites
        .iter()
        .enumerate()
        .filter(|(q, _)| (local >> (k - 1 - q)) & 1 == 1)
        .map(|(_, s)| 1usize << (num_qubits - 1 - s))
        .sum()
}

/// Calls `visit(row * dim + col, value)` for every entry of the inverted
/// snapshot (entries outside the visited set are zero).
fn visit_inverted(snapshot: &Snapshot, mut visit: impl FnMut(usize, Complex64)) {
    let l = snapshot.num_qubits();
    let dim = 1usize << l;
    match snapshot {
        Snapshot::Global { unitary, outcome } => {
            let v: Vec<Complex64> = (0..dim).map(|i| unitary[(*outcome, i)].conj()).collect();
            let scale = dim as f64 + 1.0;
            for i in 0..dim {
                for j in 0..dim {
                    let mut x = v[i] * v[j].conj() * scale;
                    if i == j {
                        x -= 1.0;
                    }
                    visit(i * dim + j, x);
                }
            }
        }
        Snapshot::LocalFull { unitaries, outcome } => {
            let factors: Vec<_> = unitaries
                .iter()
                .zip(outcome)
                .enumerate()
                .map(|(site, (u, &b))| (site, local_factor(u, b)))
                .collect();
            for (off, v) in product_entries(l, &factors) {
                visit(off, v);
            }
        }
        Snapshot::Hybrid { unitaries, record } => {
            let factors: Vec<_> = record
                .subset
                .iter()
                .zip(unitaries.iter().zip(&record.outcome))
                .map(|(&site, (u, &b))| (site, local_factor(u, b)))
                .collect();
            let a_part = product_entries(l, &factors);
            let rest = complement(l, &record.subset);
            let psi = record.collapsed.amplitudes();
            let rest_offsets: Vec<usize> = (0..psi.len()).map(|i| spread(i, &rest, l)).collect();
            let mut b_part = Vec::with_capacity(psi.len() * psi.len());
            for (i, &oi) in rest_offsets.iter().enumerate() {
                for (j, &oj) in rest_offsets.iter().enumerate() {
                    b_part.push((oi * dim + oj, psi[i] * psi[j].conj()));
                }
            }
            for &(oa, va) in &a_part {
                for &(ob, vb) in &b_part {
                    visit(oa + ob, va * vb);
                }
            }
        }
    }
}

/// Dense inverted snapshot; mostly useful for tests and small systems.
pub fn inverted_snapshot(snapshot: &Snapshot) -> Result<crate::CMatrix> {
    let l = snapshot.num_qubits();
    guard(l)?;
    let dim = 1usize << l;
    let mut flat = vec![Complex64::new(0.0, 0.0); dim * dim];
    visit_inverted(snapshot, |off, v| flat[off] += v);
    Ok(crate::CMatrix::from_row_slice(dim, dim, &flat))
}

fn guard(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_RECONSTRUCT_QUBITS {
        return Err(Error::QubitRange {
            got: num_qubits,
            min: 1,
            max: MAX_RECONSTRUCT_QUBITS,
        });
    }
    Ok(())
}

/// Mean of the inverted snapshots, `rho_s = (1/M) sum_m rho_hat_m`.
///
/// Accumulation runs over fixed-size chunks summed in index order, so the
/// floating-point result does not depend on the worker count.
pub fn reconstruct_density(shadow: &ShadowSet) -> Result<DensityOperator> {
    let l = shadow.num_qubits;
    guard(l)?;
    if shadow.is_empty() {
        return Err(Error::domain("cannot reconstruct from zero snapshots"));
    }
    let dim = 1usize << l;
    let mut total = vec![Complex64::new(0.0, 0.0); dim * dim];
    let chunks: Vec<&[Snapshot]> = shadow.snapshots.chunks(CHUNK).collect();
    for round in chunks.chunks(CHUNKS_PER_ROUND) {
        let partials = par::map_indexed(round.len(), |i| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            for s in round[i] {
                visit_inverted(s, |off, v| acc[off] += v);
            }
            acc
        });
        for partial in partials {
            total.iter_mut().zip(partial).for_each(|(t, p)| *t += p);
        }
    }
    let scale = 1.0 / shadow.len() as f64;
    let matrix = crate::CMatrix::from_row_slice(dim, dim, &total) * Complex64::new(scale, 0.0);
    Ok(DensityOperator::from_matrix_unchecked(l, matrix))
}

/// Dense observable prepared for repeated `Tr[O rho_hat]` contractions.
#[derive(Debug, Clone)]
pub struct DenseObservable {
    num_qubits: usize,
    // transposed, row-major: flat[i * dim + j] = O[j, i]
    transposed: Vec<Complex64>,
}

impl DenseObservable {
    pub fn new(op: &DenseOperator) -> Self {
        let m = op.matrix();
        let dim = m.nrows();
        let mut transposed = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                transposed.push(m[(j, i)]);
            }
        }
        Self {
            num_qubits: op.num_qubits(),
            transposed,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }
}

/// `Tr[O rho_hat]` through a full contraction with a dense `O`.
pub fn snapshot_estimate_dense(snapshot: &Snapshot, obs: &DenseObservable) -> Result<f64> {
    if snapshot.num_qubits() != obs.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: snapshot.num_qubits(),
            got: obs.num_qubits,
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    visit_inverted(snapshot, |off, v| acc += v * obs.transposed[off]);
    Ok(acc.re)
}
