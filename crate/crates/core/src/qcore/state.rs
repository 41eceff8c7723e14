use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::pauli::PauliString;
use super::{check_unitary, MAX_QUBITS};
use crate::ensembles::RngStream;
use crate::{CMatrix, Error, Result};

const NORM_TOL: f64 = 1e-12;

/// Normalized state vector on `num_qubits` qubits. Site 0 is the most
/// significant bit of the basis index.
///
/// The 0-qubit state is the scalar 1; it appears as the collapsed remainder
/// when every site is measured.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::QubitRange {
                got: num_qubits,
                min: 0,
                max: MAX_QUBITS,
            });
        }
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << num_qubits,
                got: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn from_unnormalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::domain("cannot normalize a zero vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(num_qubits, amplitudes)
    }

    pub(crate) fn from_parts_unchecked(num_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn scalar_one() -> Self {
        Self::from_parts_unchecked(0, vec![Complex64::new(1.0, 0.0)])
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        if index >= 1 << num_qubits {
            return Err(Error::domain(format!("basis index {index} out of range")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self::from_parts_unchecked(num_qubits, amps))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.check_dim(other.num_qubits)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `Tr[|psi><psi| P]` for a Pauli string, without forming any matrix.
    pub fn expectation(&self, obs: &PauliString) -> Result<f64> {
        self.check_dim(obs.num_qubits())?;
        let flip = obs.flip_mask();
        let value: Complex64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.amplitudes[i ^ flip].conj() * obs.phase(i) * a)
            .sum();
        Ok(value.re)
    }

    /// `<psi|O|psi>` for a dense operator.
    pub fn expectation_dense(&self, op: &CMatrix) -> Result<f64> {
        self.check_dim_raw(op.nrows())?;
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        Ok((v.adjoint() * op * &v)[(0, 0)].re)
    }

    pub fn to_density(&self) -> super::DensityOperator {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        super::DensityOperator::from_matrix_unchecked(self.num_qubits, &v * v.adjoint())
    }

    /// Applies `unitary` to the listed sites; `support[0]` is the most
    /// significant qubit of the unitary's index.
    pub fn apply_unitary(&self, support: &[usize], unitary: &CMatrix) -> Result<PureState> {
        let mut out = self.clone();
        out.apply_unitary_in_place(support, unitary)?;
        Ok(out)
    }

    pub fn apply_unitary_in_place(&mut self, support: &[usize], unitary: &CMatrix) -> Result<()> {
        self.check_support(support)?;
        let k = support.len();
        let sub = 1usize << k;
        if unitary.nrows() != sub || unitary.ncols() != sub {
            return Err(Error::DimensionMismatch {
                expected: sub,
                got: unitary.nrows(),
            });
        }
        check_unitary(unitary, 1e-10)?;

        let l = self.num_qubits;
        let masks: Vec<usize> = support.iter().map(|&s| 1 << (l - 1 - s)).collect();
        let full_mask: usize = masks.iter().sum();
        // offsets[j] = basis offset of local index j within the support
        let offsets: Vec<usize> = (0..sub)
            .map(|j| {
                (0..k)
                    .filter(|&q| (j >> (k - 1 - q)) & 1 == 1)
                    .map(|q| masks[q])
                    .sum()
            })
            .collect();
        let mut gathered = vec![Complex64::new(0.0, 0.0); sub];
        for base in 0..self.dim() {
            if base & full_mask != 0 {
                continue;
            }
            for (g, off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, g) in gathered.iter().enumerate() {
                    acc += unitary[(r, c)] * g;
                }
                self.amplitudes[base | off] = acc;
            }
        }
        Ok(())
    }

    /// Single-site fast path; the caller guarantees unitarity.
    pub(crate) fn apply_single_in_place(&mut self, site: usize, u: &Matrix2<Complex64>) {
        let l = self.num_qubits;
        let mask = 1usize << (l - 1 - site);
        for i in 0..self.dim() {
            if i & mask != 0 {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | mask];
            self.amplitudes[i] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            self.amplitudes[i | mask] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        }
    }

    pub fn apply_dense(&self, unitary: &CMatrix) -> Result<PureState> {
        self.check_dim_raw(unitary.nrows())?;
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        let w = unitary * v;
        Ok(Self::from_parts_unchecked(self.num_qubits, w.as_slice().to_vec()))
    }

    fn check_support(&self, support: &[usize]) -> Result<()> {
        for (i, &s) in support.iter().enumerate() {
            if s >= self.num_qubits {
                return Err(Error::SiteOutOfRange {
                    site: s,
                    num_qubits: self.num_qubits,
                });
            }
            if support[..i].contains(&s) {
                return Err(Error::DuplicateSite(s));
            }
        }
        Ok(())
    }

    fn check_dim(&self, num_qubits: usize) -> Result<()> {
        if num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                got: num_qubits,
            });
        }
        Ok(())
    }

    fn check_dim_raw(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dim,
            });
        }
        Ok(())
    }
}

/// Recipe for one of the supported initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSpec {
    /// Computational basis product state, one bit per site.
    ComputationalProduct { bits: Vec<u8> },
    /// `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>` on each site.
    BlochProduct { angles: Vec<(f64, f64)> },
    Ghz { num_qubits: usize },
    /// Single-excitation W state `(|10..0> + |010..0> + ...)/sqrt(L)`.
    WLike { num_qubits: usize },
    HaarRandom { num_qubits: usize, seed: u64 },
    /// Ground state of `H = -sum Z_i Z_{i+1} - g sum X_i` on an open chain.
    TfimGround { num_qubits: usize, field: f64 },
}

impl StateSpec {
    pub fn num_qubits(&self) -> usize {
        match self {
            StateSpec::ComputationalProduct { bits } => bits.len(),
            StateSpec::BlochProduct { angles } => angles.len(),
            StateSpec::Ghz { num_qubits }
            | StateSpec::WLike { num_qubits }
            | StateSpec::HaarRandom { num_qubits, .. }
            | StateSpec::TfimGround { num_qubits, .. } => *num_qubits,
        }
    }

    pub fn zeros(num_qubits: usize) -> Self {
        StateSpec::ComputationalProduct {
            bits: vec![0; num_qubits],
        }
    }

    pub fn plus(num_qubits: usize) -> Self {
        StateSpec::BlochProduct {
            angles: vec![(std::f64::consts::FRAC_PI_2, 0.0); num_qubits],
        }
    }

    /// Product state with independent uniformly random Bloch vectors.
    pub fn random_product(num_qubits: usize, seed: u64) -> Self {
        let mut rng = RngStream::derive(seed, 0);
        let angles = (0..num_qubits)
            .map(|_| {
                let cos_theta: f64 = rng.random_range(-1.0..=1.0);
                let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                (cos_theta.acos(), phi)
            })
            .collect();
        StateSpec::BlochProduct { angles }
    }
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&num_qubits) {
        return Err(Error::QubitRange {
            got: num_qubits,
            min: 1,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

pub fn make_state(spec: &StateSpec) -> Result<PureState> {
    let l = spec.num_qubits();
    check_qubits(l)?;
    let dim = 1usize << l;
    let zero = Complex64::new(0.0, 0.0);
    match spec {
        StateSpec::ComputationalProduct { bits } => {
            if let Some(b) = bits.iter().find(|&&b| b > 1) {
                return Err(Error::domain(format!("bit value {b} is not 0 or 1")));
            }
            let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            PureState::basis(l, index)
        }
        StateSpec::BlochProduct { angles } => {
            let mut amps = vec![Complex64::new(1.0, 0.0)];
            for &(theta, phi) in angles {
                let a0 = Complex64::new((theta / 2.0).cos(), 0.0);
                let a1 = Complex64::from_polar((theta / 2.0).sin(), phi);
                amps = amps.iter().flat_map(|&a| [a * a0, a * a1]).collect();
            }
            PureState::from_unnormalized(l, amps)
        }
        StateSpec::Ghz { .. } => {
            let mut amps = vec![zero; dim];
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            amps[0] = h;
            amps[dim - 1] = h;
            Ok(PureState::from_parts_unchecked(l, amps))
        }
        StateSpec::WLike { .. } => {
            let mut amps = vec![zero; dim];
            let c = Complex64::new(1.0 / (l as f64).sqrt(), 0.0);
            for site in 0..l {
                amps[1 << (l - 1 - site)] = c;
            }
            Ok(PureState::from_parts_unchecked(l, amps))
        }
        StateSpec::HaarRandom { seed, .. } => {
            let mut rng = RngStream::derive(*seed, 0);
            let amps = (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            PureState::from_unnormalized(l, amps)
        }
        StateSpec::TfimGround { field, .. } => super::tfim::ground_state(l, *field),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::Axis;

    fn z(site: usize, l: usize) -> PauliString {
        PauliString::single(l, site, Axis::Z).unwrap()
    }

    #[test]
    fn ghz_parity_and_w_magnetization() {
        let ghz = make_state(&StateSpec::Ghz { num_qubits: 6 }).unwrap();
        let zz = PauliString::parse("Z5Z6", 6).unwrap();
        assert!((ghz.expectation(&zz).unwrap() - 1.0).abs() < 1e-12);

        let w = make_state(&StateSpec::WLike { num_qubits: 8 }).unwrap();
        assert!((w.expectation(&z(0, 8)).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn product_expectations() {
        let zero = make_state(&StateSpec::zeros(5)).unwrap();
        assert!((zero.expectation(&z(2, 5)).unwrap() - 1.0).abs() < 1e-12);
        let plus = make_state(&StateSpec::plus(5)).unwrap();
        assert!(plus.expectation(&z(0, 5)).unwrap().abs() < 1e-12);
        let x = PauliString::single(5, 3, Axis::X).unwrap();
        assert!((plus.expectation(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_expectation_matches_dense_contraction() {
        let psi = make_state(&StateSpec::HaarRandom {
            num_qubits: 6,
            seed: 1,
        })
        .unwrap();
        let obs = z(0, 6);
        let dense = psi.expectation_dense(&obs.to_dense()).unwrap();
        let fast = psi.expectation(&obs).unwrap();
        assert!((dense - fast).abs() < 1e-12);
        assert!(fast.abs() < 0.5);

        let xy = PauliString::parse("X2Y4Z5", 6).unwrap();
        let dense = psi.expectation_dense(&xy.to_dense()).unwrap();
        assert!((dense - psi.expectation(&xy).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn size_limits_rejected() {
        assert!(make_state(&StateSpec::Ghz { num_qubits: 0 }).is_err());
        assert!(make_state(&StateSpec::Ghz { num_qubits: 15 }).is_err());
        let psi = make_state(&StateSpec::zeros(3)).unwrap();
        assert!(psi.expectation(&z(0, 4)).is_err());
    }

    #[test]
    fn x_on_site_zero_flips_msb() {
        let psi = make_state(&StateSpec::zeros(2)).unwrap();
        let x = Axis::X.matrix();
        let u = CMatrix::from_fn(2, 2, |r, c| x[(r, c)]);
        let out = psi.apply_unitary(&[0], &u).unwrap();
        assert!((out.amplitudes()[0b10].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_unitary_rejected() {
        let psi = make_state(&StateSpec::zeros(2)).unwrap();
        let m = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(
            psi.apply_unitary(&[1], &m),
            Err(Error::NotUnitary { .. })
        ));
        let id = CMatrix::identity(4, 4);
        assert!(psi.apply_unitary(&[1, 1], &id).is_err());
    }
}
