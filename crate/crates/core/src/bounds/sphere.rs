//! Single-qubit over-completeness: many outcome distributions over
//! measurement axes reconstruct the same state.
//!
//! The sphere average `∫ dn/4π` is evaluated with Gauss-Legendre nodes in
//! `cos θ` times equally spaced azimuths, which is exact for the low-order
//! spherical polynomials involved.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::{Axis, DensityOperator, PauliString};
use crate::{CMatrix, Error, Result};

pub const POLAR_NODES: usize = 16;
pub const AZIMUTH_NODES: usize = 16;
const MAX_DEGREE: usize = 6;

/// Nodes and weights of `n`-point Gauss-Legendre quadrature on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Associated Legendre `P_l^m(x)` for `m >= 0`, without the Condon-Shortley
/// phase.
fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pll = 0.0;
    for ll in m + 2..=l {
        pll = (x * (2 * ll - 1) as f64 * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = pll;
    }
    pll
}

/// Real spherical harmonic `Y_lm`, orthonormal over the unit sphere.
/// Negative `m` selects the `sin(|m| φ)` member.
pub fn real_spherical_harmonic(l: usize, m: i32, n: [f64; 3]) -> f64 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let cos_theta = n[2].clamp(-1.0, 1.0);
    let phi = n[1].atan2(n[0]);
    let norm = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let p = assoc_legendre(l, am, cos_theta);
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => norm * p,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * norm * p * (am as f64 * phi).cos(),
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * norm * p * (am as f64 * phi).sin(),
    }
}

/// Outcome distribution `p(m, n)` over measurement axes `n` and outcomes
/// `m = ±1`, tabulated on the quadrature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDistribution {
    nodes: Vec<[f64; 3]>,
    /// Quadrature weights for `∫ dn/4π`, summing to 1.
    weights: Vec<f64>,
    /// `[p(-1, n), p(+1, n)]` per node.
    values: Vec<[f64; 2]>,
}

impl AxisDistribution {
    fn from_fn(f: impl Fn([f64; 3]) -> [f64; 2]) -> Result<Self> {
        let (xs, ws) = gauss_legendre(POLAR_NODES);
        let mut nodes = Vec::with_capacity(POLAR_NODES * AZIMUTH_NODES);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (x, w) in xs.iter().zip(&ws) {
            let s = (1.0 - x * x).sqrt();
            for j in 0..AZIMUTH_NODES {
                let phi = std::f64::consts::TAU * (j as f64 + 0.5) / AZIMUTH_NODES as f64;
                nodes.push([s * phi.cos(), s * phi.sin(), *x]);
                weights.push(w / 2.0 / AZIMUTH_NODES as f64);
            }
        }
        let values = nodes.iter().map(|&n| f(n)).collect();
        let dist = Self { nodes, weights, values };
        dist.check_positive()?;
        Ok(dist)
    }

    /// `p(m, n) = 1/2`.
    pub fn uniform() -> Self {
        Self::from_fn(|_| [0.5, 0.5]).expect("uniform masses are positive")
    }

    /// Born distribution of a single-qubit state: `p(m, n) = (1 + m r.n)/2`
    /// with `r` its Bloch vector.
    pub fn born(rho: &DensityOperator) -> Result<Self> {
        if rho.num_qubits() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: rho.num_qubits(),
            });
        }
        let r: Vec<f64> = Axis::ALL
            .iter()
            .map(|&a| rho.expectation(&PauliString::single(1, 0, a).expect("site 0 exists")))
            .collect::<Result<_>>()?;
        Self::from_fn(|n| {
            let dot = r[0] * n[0] + r[1] * n[1] + r[2] * n[2];
            [(1.0 - dot) / 2.0, (1.0 + dot) / 2.0]
        })
    }

    fn check_positive(&self) -> Result<()> {
        match self.values.iter().flatten().copied().find(|&v| v < 0.0) {
            Some(v) => Err(Error::NegativeMass(v)),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    /// `∫ dn/4π Σ_m p(m, n)`.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * (v[0] + v[1])).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `∫ dn/4π Σ_m p(m, n) (I + 3 m σ.n)/2`.
pub fn reconstruct_from_axis_distribution(p: &AxisDistribution) -> Result<DensityOperator> {
    p.check_positive()?;
    let mut acc = Matrix2::<Complex64>::zeros();
    let sigma = Axis::ALL.map(|a| a.matrix());
    for ((n, w), v) in p.nodes.iter().zip(&p.weights).zip(&p.values) {
        let plus = v[1] + v[0];
        let minus = v[1] - v[0];
        let sn = sigma[0] * Complex64::new(n[0], 0.0) + sigma[1] * Complex64::new(n[1], 0.0) + sigma[2] * Complex64::new(n[2], 0.0);
        acc += (Matrix2::identity() * Complex64::new(plus, 0.0) + sn * Complex64::new(3.0 * minus, 0.0)) * Complex64::new(w / 2.0, 0.0);
    }
    DensityOperator::new(1, CMatrix::from_fn(2, 2, |r, c| acc[(r, c)]))
}

/// Which combination of the outcome distribution a harmonic is added to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HarmonicTarget {
    /// `p_+ = p(+1) + p(-1)`; its `l = 0` part is fixed by the trace.
    Plus,
    /// `p_- = p(+1) - p(-1)`; its `l = 1` part is fixed by the Bloch vector.
    Minus,
}

impl HarmonicTarget {
    fn fixed_degree(self) -> usize {
        match self {
            HarmonicTarget::Plus => 0,
            HarmonicTarget::Minus => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            HarmonicTarget::Plus => "p_plus",
            HarmonicTarget::Minus => "p_minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonicMode {
    pub target: HarmonicTarget,
    pub l: usize,
    pub m: i32,
}

/// Adds `amplitude * Y_lm` to the target combination, split as
/// `δp(±1) = amplitude Y/2` for `p_+` and `±amplitude Y/2` for `p_-`.
pub fn perturb_axis_distribution(p: &AxisDistribution, mode: HarmonicMode, amplitude: f64) -> Result<AxisDistribution> {
    if mode.l == mode.target.fixed_degree() {
        return Err(Error::ForbiddenHarmonic {
            l: mode.l,
            target: mode.target.name(),
        });
    }
    if mode.l > MAX_DEGREE || mode.m.unsigned_abs() as usize > mode.l {
        return Err(Error::domain(format!("harmonic (l={}, m={}) not supported", mode.l, mode.m)));
    }
    if !amplitude.is_finite() {
        return Err(Error::domain("amplitude must be finite"));
    }
    let sign_minus = match mode.target {
        HarmonicTarget::Plus => 1.0,
        HarmonicTarget::Minus => -1.0,
    };
    let mut out = p.clone();
    for (n, v) in out.nodes.iter().zip(out.values.iter_mut()) {
        let half = amplitude * real_spherical_harmonic(mode.l, mode.m, *n) / 2.0;
        v[1] += half;
        v[0] += sign_minus * half;
    }
    out.check_positive()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::RngStream;
    use crate::qcore::trace_norm_distance;
    use rand::Rng;

    fn random_mixed(rng: &mut RngStream) -> DensityOperator {
        let cos_t: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let radius = 0.9 * rng.random::<f64>().cbrt();
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
        DensityOperator::new(1, m).unwrap()
    }

    #[test]
    fn gauss_legendre_is_exact() {
        let (x, w) = gauss_legendre(POLAR_NODES);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..32 {
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-13, "degree {deg}");
        }
    }

    #[test]
    fn harmonics_are_orthonormal_on_the_grid() {
        let p = AxisDistribution::uniform();
        let modes: Vec<(usize, i32)> = (0..=MAX_DEGREE).flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m))).collect();
        for &(l1, m1) in &modes {
            for &(l2, m2) in &modes {
                let integral: f64 = p
                    .nodes
                    .iter()
                    .zip(&p.weights)
                    .map(|(n, w)| 4.0 * std::f64::consts::PI * w * real_spherical_harmonic(l1, m1, *n) * real_spherical_harmonic(l2, m2, *n))
                    .sum();
                let expected = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!((integral - expected).abs() < 1e-12, "({l1},{m1}) ({l2},{m2})");
            }
        }
    }

    #[test]
    fn uniform_reconstructs_maximally_mixed() {
        let p = AxisDistribution::uniform();
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
        let rho = reconstruct_from_axis_distribution(&p).unwrap();
        let half = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        assert!((rho.matrix() - half).norm() < 1e-12);
    }

    #[test]
    fn born_distribution_reconstructs_state() {
        let zero = DensityOperator::new(1, CMatrix::from_row_slice(2, 2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)])).unwrap();
        let p = AxisDistribution::born(&zero).unwrap();
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
        let back = reconstruct_from_axis_distribution(&p).unwrap();
        assert!(trace_norm_distance(&back, &zero).unwrap() < 1e-10);
        let mut rng = RngStream::derive(9, 9);
        for _ in 0..20 {
            let rho = random_mixed(&mut rng);
            let back = reconstruct_from_axis_distribution(&AxisDistribution::born(&rho).unwrap()).unwrap();
            assert!(trace_norm_distance(&back, &rho).unwrap() < 1e-10);
        }
    }

    #[test]
    fn permitted_perturbations_leave_state_unchanged() {
        let mut rng = RngStream::derive(10, 0);
        for _ in 0..20 {
            let rho = random_mixed(&mut rng);
            let p = AxisDistribution::born(&rho).unwrap();
            for (target, degrees) in [(HarmonicTarget::Plus, vec![2, 3]), (HarmonicTarget::Minus, vec![0, 2, 3])] {
                for l in degrees {
                    for m in -(l as i32)..=l as i32 {
                        let q = perturb_axis_distribution(&p, HarmonicMode { target, l, m }, 0.05).unwrap();
                        let back = reconstruct_from_axis_distribution(&q).unwrap();
                        assert!(trace_norm_distance(&back, &rho).unwrap() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn fixed_harmonics_change_the_state() {
        let p = AxisDistribution::uniform();
        for (target, l) in [(HarmonicTarget::Plus, 0), (HarmonicTarget::Minus, 1)] {
            let err = perturb_axis_distribution(&p, HarmonicMode { target, l, m: 0 }, 0.05).unwrap_err();
            assert!(matches!(err, Error::ForbiddenHarmonic { .. }));
        }
        // bypassing the check on p_- l=1 would tilt the Bloch vector
        let mut tilted = p.clone();
        for (n, v) in tilted.nodes.iter().zip(tilted.values.iter_mut()) {
            let half = 0.05 * real_spherical_harmonic(1, 0, *n) / 2.0;
            v[1] += half;
            v[0] -= half;
        }
        let back = reconstruct_from_axis_distribution(&tilted).unwrap();
        assert!((back.matrix()[(0, 0)].re - 0.5).abs() > 1e-3);
    }

    #[test]
    fn positivity_is_enforced() {
        let zero_state = DensityOperator::new(1, CMatrix::from_row_slice(2, 2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)])).unwrap();
        let p = AxisDistribution::born(&zero_state).unwrap();
        let mode = HarmonicMode { target: HarmonicTarget::Plus, l: 2, m: 0 };
        assert!(matches!(perturb_axis_distribution(&p, mode, 5.0), Err(Error::NegativeMass(_))));
        let bad = HarmonicMode { target: HarmonicTarget::Plus, l: 7, m: 0 };
        assert!(perturb_axis_distribution(&AxisDistribution::uniform(), bad, 0.01).is_err());
    }
}
