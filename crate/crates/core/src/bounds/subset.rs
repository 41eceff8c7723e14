//! The factor `f(k, L_A, L) = E_A[3^{|A ∩ supp O|}]` that replaces `3^k`
//! when the measured subsystem is a uniformly random set of `L_A` sites.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::shadows::choose_random_subset;
use crate::{Error, Result};

const MAX_SITES: usize = 64;

fn check(k: usize, subsystem_size: usize, num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_SITES {
        return Err(Error::domain(format!("L={num_qubits} outside 1..={MAX_SITES}")));
    }
    if !(1..=num_qubits).contains(&subsystem_size) {
        return Err(Error::domain(format!("L_A={subsystem_size} outside 1..={num_qubits}")));
    }
    if k > num_qubits {
        return Err(Error::domain(format!("k={k} exceeds L={num_qubits}")));
    }
    Ok(())
}

fn binomial(n: usize, r: usize) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn overlap_range(k: usize, subsystem_size: usize, num_qubits: usize) -> std::ops::RangeInclusive<usize> {
    (k + subsystem_size).saturating_sub(num_qubits)..=k.min(subsystem_size)
}

fn weighted_average(k: usize, subsystem_size: usize, num_qubits: usize, weight: impl Fn(usize) -> BigInt) -> BigRational {
    let mut num = BigInt::zero();
    let mut den = BigInt::zero();
    for r in overlap_range(k, subsystem_size, num_qubits) {
        let w = weight(r);
        num += &w * BigInt::from(3u8).pow(r as u32);
        den += w;
    }
    BigRational::new(num, den)
}

/// Exact `f(k, L_A, L)`: the overlap `r = |A ∩ supp O|` of a uniformly random
/// `L_A`-subset with a fixed weight-`k` support is hypergeometric,
/// `P(r) = C(k,r) C(L-k,L_A-r) / C(L,L_A)`.
pub fn random_subset_factor_exact(k: usize, subsystem_size: usize, num_qubits: usize) -> Result<BigRational> {
    check(k, subsystem_size, num_qubits)?;
    Ok(weighted_average(k, subsystem_size, num_qubits, |r| {
        binomial(k, r) * binomial(num_qubits - k, subsystem_size - r)
    }))
}

pub fn random_subset_factor(k: usize, subsystem_size: usize, num_qubits: usize) -> Result<f64> {
    let exact = random_subset_factor_exact(k, subsystem_size, num_qubits)?;
    Ok(exact.to_f64().expect("ratio of bounded integers"))
}

/// The closed form with overlap weights `C(k,r) C(L_A,r) C(L-k,L_A-r)`.
///
/// It agrees with [`random_subset_factor`] at `L_A = 1` and `L_A = L` but
/// carries an extra `C(L_A, r)` elsewhere, so it is not the uniform-subset
/// average in general. Kept for comparison tables.
pub fn random_subset_factor_doubly_weighted(k: usize, subsystem_size: usize, num_qubits: usize) -> Result<f64> {
    check(k, subsystem_size, num_qubits)?;
    let f = weighted_average(k, subsystem_size, num_qubits, |r| {
        binomial(k, r) * binomial(subsystem_size, r) * binomial(num_qubits - k, subsystem_size - r)
    });
    Ok(f.to_f64().expect("ratio of bounded integers"))
}

/// Monte-Carlo average of `3^{|A ∩ {0..k-1}|}` over uniformly drawn `A`;
/// returns `(mean, standard error)`.
pub fn random_subset_factor_oracle<R: Rng + ?Sized>(
    k: usize,
    subsystem_size: usize,
    num_qubits: usize,
    draws: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check(k, subsystem_size, num_qubits)?;
    if draws < 2 {
        return Err(Error::domain("oracle needs at least two draws"));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let a = choose_random_subset(num_qubits, subsystem_size, rng)?;
        let r = a.iter().filter(|&&s| s < k).count();
        let x = 3f64.powi(r as i32);
        sum += x;
        sum_sq += x * x;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}
