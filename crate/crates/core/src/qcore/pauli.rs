use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn matrix(self) -> nalgebra::Matrix2<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Axis::X => nalgebra::Matrix2::new(o, l, l, o),
            Axis::Y => nalgebra::Matrix2::new(o, -i, i, o),
            Axis::Z => nalgebra::Matrix2::new(l, o, o, -l),
        }
    }

    /// Action on a computational basis bit: `P|b> = phase |b ^ flip>`.
    #[inline]
    pub(crate) fn act(self, bit: usize) -> (bool, Complex64) {
        match (self, bit) {
            (Axis::X, _) => (true, Complex64::new(1.0, 0.0)),
            (Axis::Y, 0) => (true, Complex64::new(0.0, 1.0)),
            (Axis::Y, _) => (true, Complex64::new(0.0, -1.0)),
            (Axis::Z, 0) => (false, Complex64::new(1.0, 0.0)),
            (Axis::Z, _) => (false, Complex64::new(-1.0, 0.0)),
        }
    }

    fn symbol(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// A tensor product of single-site Pauli operators, stored sparsely.
///
/// Sites are numbered from 0; site 0 is the most significant bit of a
/// computational basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    num_qubits: usize,
    factors: BTreeMap<usize, Axis>,
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            factors: BTreeMap::new(),
        }
    }

    pub fn new(num_qubits: usize, factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (site, axis) in factors {
            if site >= num_qubits {
                return Err(Error::SiteOutOfRange { site, num_qubits });
            }
            if map.insert(site, axis).is_some() {
                return Err(Error::DuplicateSite(site));
            }
        }
        Ok(Self {
            num_qubits,
            factors: map,
        })
    }

    pub fn single(num_qubits: usize, site: usize, axis: Axis) -> Result<Self> {
        Self::new(num_qubits, [(site, axis)])
    }

    /// Parses labels such as `Z5Z6` or `X1 Y3`, with 1-based site numbers.
    pub fn parse(label: &str, num_qubits: usize) -> Result<Self> {
        let bad = || Error::domain(format!("cannot parse Pauli string {label:?}"));
        let mut factors = Vec::new();
        let mut chars = label.chars().filter(|c| !c.is_whitespace() && *c != '*').peekable();
        if chars.peek().is_none() {
            return Err(bad());
        }
        if label.trim().eq_ignore_ascii_case("I") {
            return Ok(Self::identity(num_qubits));
        }
        while let Some(c) = chars.next() {
            let axis = match c.to_ascii_uppercase() {
                'X' => Axis::X,
                'Y' => Axis::Y,
                'Z' => Axis::Z,
                _ => return Err(bad()),
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let site: usize = digits.parse().map_err(|_| bad())?;
            if site == 0 {
                return Err(bad());
            }
            factors.push((site - 1, axis));
        }
        Self::new(num_qubits, factors)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.factors.iter().map(|(&s, &a)| (s, a))
    }

    pub fn axis_at(&self, site: usize) -> Option<Axis> {
        self.factors.get(&site).copied()
    }

    pub fn support(&self) -> Vec<usize> {
        self.factors.keys().copied().collect()
    }

    /// Number of non-identity factors inside `sites`.
    pub fn weight_on(&self, sites: &[usize]) -> usize {
        sites.iter().filter(|s| self.factors.contains_key(s)).count()
    }

    /// Restriction to `sites`, relabelled to positions within that list.
    pub fn restrict(&self, sites: &[usize]) -> PauliString {
        let factors = sites
            .iter()
            .enumerate()
            .filter_map(|(pos, s)| self.factors.get(s).map(|&a| (pos, a)))
            .collect();
        PauliString {
            num_qubits: sites.len(),
            factors,
        }
    }

    /// Bit mask (over basis indices) of sites the string flips.
    pub(crate) fn flip_mask(&self) -> usize {
        let l = self.num_qubits;
        self.factors
            .iter()
            .filter(|(_, a)| **a != Axis::Z)
            .fold(0, |m, (s, _)| m | (1 << (l - 1 - s)))
    }

    /// Phase acquired by basis state `index`: `P|i> = phase(i) |i ^ flip_mask>`.
    #[inline]
    pub(crate) fn phase(&self, index: usize) -> Complex64 {
        let l = self.num_qubits;
        let mut phase = Complex64::new(1.0, 0.0);
        for (&s, &a) in &self.factors {
            let bit = (index >> (l - 1 - s)) & 1;
            phase *= a.act(bit).1;
        }
        phase
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = 1usize << self.num_qubits;
        let flip = self.flip_mask();
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i ^ flip, i)] = self.phase(i);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        for (s, a) in &self.factors {
            write!(f, "{}{}", a.symbol(), s + 1)?;
        }
        Ok(())
    }
}
