//! Special functions: the error function family, Gaussian moments and the
//! q-Pochhammer symbol.

mod erf;
mod qpochhammer;

pub(crate) use erf::erfc_unchecked;
pub use erf::{erf, erfc, erfcx, ln_erfc};
pub use qpochhammer::{q_pochhammer, q_pochhammer_finite, QPochhammerArgs, CONVERGENCE_CUTOFF};

use crate::error::{domain, Error, Result};
use crate::scalar::{approx, int, Real, Scalar};

/// Highest moment order supported anywhere in the crate.
pub const MAX_ORDER: usize = 8;

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            supported: "0..=8",
        });
    }
    Ok(())
}

/// (2k − 1)!! with (−1)!! = 1.
pub(crate) fn double_factorial_odd(k: usize) -> u64 {
    (1..=k as u64).map(|i| 2 * i - 1).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k as u64 {
        acc = acc * (n as u64 - i) / (i + 1);
    }
    acc
}

/// E[Zᵏ] for Z ~ N(0, σ²): zero for odd k, (k−1)!!·σᵏ for even k.
pub(crate) fn centered_gaussian_moment<T: Scalar>(order: usize, sigma_sq: &T) -> T {
    if order % 2 == 1 {
        return T::zero();
    }
    let half = order / 2;
    int::<T>(double_factorial_odd(half)) * num_traits::pow(sigma_sq.clone(), half)
}

/// Raw moment E[Xᵏ] of N(μ, σ²), k ≤ 8.
///
/// Expands (μ + σZ)ᵏ binomially; with μ = 0 odd orders come out as an exact
/// zero and even orders as (k−1)!!·σᵏ.
pub fn gaussian_raw_moment<T: Scalar>(order: usize, mu: &T, sigma: &T) -> Result<T> {
    check_order(order)?;
    if !(*sigma > T::zero()) {
        return Err(domain(format!("sigma must be > 0, got {}", approx(sigma))));
    }
    Ok(raw_moment_unchecked(order, mu, sigma))
}

pub(crate) fn raw_moment_unchecked<T: Scalar>(order: usize, mu: &T, sigma: &T) -> T {
    let sigma_sq = sigma.clone() * sigma.clone();
    let mut acc = T::zero();
    for i in (0..=order).step_by(2) {
        let coeff = int::<T>(binomial(order, i));
        let mu_pow = num_traits::pow(mu.clone(), order - i);
        acc = acc + coeff * mu_pow * centered_gaussian_moment(i, &sigma_sq);
    }
    acc
}

/// E|X| for X ~ N(0, σ²), i.e. √(2/π)·σ.
pub fn gaussian_abs_first_moment<T: Real>(sigma: T) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(domain(format!("sigma must be > 0, got {}", approx(&sigma))));
    }
    Ok(T::FRAC_2_SQRT_PI() * T::FRAC_1_SQRT_2() * sigma)
}

/// Density of N(μ, σ²) at x.
pub fn gaussian_density<T: Real>(mu: T, sigma: T, x: T) -> T {
    let z = (x - mu) / sigma;
    let inv_sqrt_2pi = T::FRAC_2_SQRT_PI() * T::FRAC_1_SQRT_2() / (T::one() + T::one());
    inv_sqrt_2pi / sigma * (-(z * z) / (T::one() + T::one())).exp()
}
