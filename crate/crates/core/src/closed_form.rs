//! Closed-form moments for the three rate regimes.
//!
//! * constant rate a: every even moment factor is a polynomial in a raised
//!   to the N-th power;
//! * geometric "bleed" a(n) = λ^{n−1}·a(1): the factors become products that
//!   converge as N → ∞ when λ < 1;
//! * additive offsets Σ ±aʲ: exact moments from the first two even power
//!   sums of the offsets.
//!
//! All finite-depth forms are generic over [`Scalar`] and exact for rational
//! inputs.

use serde::{Deserialize, Serialize};

use crate::base::Depth;
use crate::error::{domain, Error, Result};
use crate::scalar::{approx, int, is_negative, lit, Real, Scalar};
use crate::specfn::{
    binomial, double_factorial_odd, q_pochhammer, q_pochhammer_finite, QPochhammerArgs,
};

fn check_closed_order(order: usize) -> Result<()> {
    if !(1..=8).contains(&order) {
        return Err(Error::UnsupportedOrder {
            order,
            supported: "1..=8",
        });
    }
    Ok(())
}

fn check_rate<T: Scalar>(a: &T) -> Result<()> {
    if is_negative(a) || !(*a < T::one()) {
        return Err(domain(format!(
            "rate must lie in [0, 1), got {}",
            approx(a)
        )));
    }
    Ok(())
}

fn check_sigma<T: Scalar>(sigma: &T) -> Result<()> {
    if !(*sigma > T::zero()) {
        return Err(domain(format!("sigma must be > 0, got {}", approx(sigma))));
    }
    Ok(())
}

/// E[Xᵏ] = Σ_{i even} C(k,i)·μ^{k−i}·(i−1)!!·σⁱ·F(i), where F(i) is the
/// i-th moment of the branch scale multiplier.
fn assemble<T: Scalar>(order: usize, mu: &T, sigma: &T, scale_moment: impl Fn(usize) -> T) -> T {
    let mut acc = T::zero();
    for i in (0..=order).step_by(2) {
        let coeff = int::<T>(binomial(order, i) * double_factorial_odd(i / 2));
        acc = acc
            + coeff
                * num_traits::pow(mu.clone(), order - i)
                * num_traits::pow(sigma.clone(), i)
                * scale_moment(i);
    }
    acc
}

/// Per-level even moment factor for a constant rate, written out as the
/// polynomials of the moment table.
fn constant_level_factor<T: Scalar>(a: &T, even_order: usize) -> T {
    let a2 = a.clone() * a.clone();
    let p = |coeffs: &[u64]| {
        coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * a2.clone() + int::<T>(c))
    };
    match even_order {
        0 => T::one(),
        2 => a2.clone() + T::one(),
        4 => p(&[1, 6, 1]),
        6 => (a2.clone() + T::one()) * p(&[1, 14, 1]),
        8 => p(&[1, 28, 70, 28, 1]),
        _ => unreachable!("even order above 8"),
    }
}

/// ((1+a)ᵏ + (1−a)ᵏ)/2 by direct expansion.
fn level_factor<T: Scalar>(a: &T, even_order: usize) -> T {
    let up = num_traits::pow(T::one() + a.clone(), even_order);
    let down = num_traits::pow(T::one() - a.clone(), even_order);
    (up + down) / int::<T>(2)
}

/// Raw moment of order 1..=8 for a constant rate a at depth n, general μ.
///
/// With μ = 0 this reduces to (a²+1)ᴺσ², 3(a⁴+6a²+1)ᴺσ⁴,
/// 15(a⁶+15a⁴+15a²+1)ᴺσ⁶ and 105(a⁸+28a⁶+70a⁴+28a²+1)ᴺσ⁸ for the even
/// orders and to zero for the odd ones.
pub fn moment_constant_a<T: Scalar>(order: usize, mu: &T, sigma: &T, a: &T, n: usize) -> Result<T> {
    check_closed_order(order)?;
    check_sigma(sigma)?;
    check_rate(a)?;
    Ok(assemble(order, mu, sigma, |i| {
        num_traits::pow(constant_level_factor(a, i), n)
    }))
}

/// Raw moment of order 1..=8 for any multiplicative schedule, using the
/// product over levels of the scale-moment factors.
pub fn moment_product_form<T: Scalar>(order: usize, mu: &T, sigma: &T, rates: &[T]) -> Result<T> {
    check_closed_order(order)?;
    check_sigma(sigma)?;
    for a in rates {
        check_rate(a)?;
    }
    Ok(assemble(order, mu, sigma, |i| {
        rates
            .iter()
            .fold(T::one(), |acc, a| acc * level_factor(a, i))
    }))
}

/// Kurtosis of the centered constant-rate mixture, 3·((a⁴+6a²+1)/(a²+1)²)ᴺ.
pub fn kurtosis_constant_a<T: Scalar>(a: &T, n: usize) -> Result<T> {
    check_rate(a)?;
    let c2 = constant_level_factor(a, 2);
    let c4 = constant_level_factor(a, 4);
    Ok(int::<T>(3) * num_traits::pow(c4 / (c2.clone() * c2), n))
}

/// (1 + a²)ᴺ, the factor by which n levels inflate the variance. Evaluated
/// as exp(N·ln(1+a²)) so it neither overflows nor loses the tiny
/// per-level increment for large N.
pub fn variance_growth_factor<T: Real>(a: T, n: u64) -> Result<T> {
    Ok(ln_variance_growth_factor(a, n)?.exp())
}

pub fn ln_variance_growth_factor<T: Real>(a: T, n: u64) -> Result<T> {
    check_rate(&a)?;
    Ok(lit::<T>(n as f64) * (a * a).ln_1p())
}

/// Parameters of a geometrically decaying ("bleed") schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleedParams<T> {
    pub a1: T,
    pub lambda: T,
    pub depth: Depth,
    pub sigma: T,
}

impl<T: Real> BleedParams<T> {
    pub fn new(a1: T, lambda: T, depth: impl Into<Depth>, sigma: T) -> Result<Self> {
        let p = Self {
            a1,
            lambda,
            depth: depth.into(),
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        check_rate(&self.a1)?;
        check_sigma(&self.sigma)?;
        if !(self.lambda >= T::zero() && self.lambda <= T::one()) {
            return Err(domain(format!(
                "lambda must lie in [0, 1], got {}",
                approx(&self.lambda)
            )));
        }
        if self.depth.is_infinite() && !(self.lambda < T::one()) {
            return Err(Error::Divergence {
                q: approx(&(self.lambda * self.lambda)),
            });
        }
        Ok(())
    }
}

/// σ²·∏_{i=0}^{N−1}(1 + a₁²λ²ⁱ), exact for rational inputs.
pub fn m2_bleed_exact<T: Scalar>(a1: &T, lambda: &T, sigma: &T, n: usize) -> T {
    let a1_sq = a1.clone() * a1.clone();
    let lambda_sq = lambda.clone() * lambda.clone();
    let neg = T::zero() - a1_sq;
    sigma.clone() * sigma.clone() * q_pochhammer_finite(&neg, &lambda_sq, n)
}

/// 3σ⁴·∏_{i=0}^{N−1}(1 + 6a₁²λ²ⁱ + a₁⁴λ⁴ⁱ), exact for rational inputs.
pub fn m4_bleed_exact<T: Scalar>(a1: &T, lambda: &T, sigma: &T, n: usize) -> T {
    let lambda_sq = lambda.clone() * lambda.clone();
    let mut x = a1.clone() * a1.clone();
    let mut acc = T::one();
    for _ in 0..n {
        acc = acc * (T::one() + int::<T>(6) * x.clone() + x.clone() * x.clone());
        x = x * lambda_sq.clone();
    }
    let s2 = sigma.clone() * sigma.clone();
    int::<T>(3) * s2.clone() * s2 * acc
}

/// Second moment of the centered bleed mixture: σ²·(−a₁²; λ²)_N, including
/// the limit N → ∞ for λ < 1.
///
/// The limit is taken directly as the convergent infinite product.
/// Expressions for it built from (λ²; λ²)₂ and (a₁²; λ²)_∞ that circulate
/// alongside this result do not reproduce the product and are not used.
pub fn m2_bleed<T: Real>(p: &BleedParams<T>) -> Result<T> {
    p.validate()?;
    let args = QPochhammerArgs {
        a: -(p.a1 * p.a1),
        q: p.lambda * p.lambda,
        n: p.depth,
    };
    Ok(p.sigma * p.sigma * q_pochhammer(&args)?)
}

/// Fourth moment of the centered bleed mixture.
///
/// Finite depth uses the product of per-level factors 1 + 6x + x² with
/// x = a₁²λ²ⁱ. The limit factors 1 + 6x + x² = (1 + (3+2√2)x)(1 + (3−2√2)x)
/// into two q-Pochhammer symbols in base λ².
pub fn m4_bleed<T: Real>(p: &BleedParams<T>) -> Result<T> {
    p.validate()?;
    let s4 = p.sigma * p.sigma * p.sigma * p.sigma;
    match p.depth {
        Depth::Finite(n) => Ok(m4_bleed_exact(&p.a1, &p.lambda, &p.sigma, n)),
        Depth::Infinite => {
            let a_sq = p.a1 * p.a1;
            let q = p.lambda * p.lambda;
            let root = lit::<T>(2.0) * T::SQRT_2();
            let three = lit::<T>(3.0);
            let first = q_pochhammer(&QPochhammerArgs::infinite((root - three) * a_sq, q))?;
            let second = q_pochhammer(&QPochhammerArgs::infinite(-(three + root) * a_sq, q))?;
            Ok(three * s4 * first * second)
        }
    }
}

/// Σ_{j=1}^{N} x^j, or x/(1−x) for the infinite sum.
fn power_sum<T: Scalar>(x: &T, depth: Depth) -> T {
    match depth {
        Depth::Finite(n) => {
            let mut acc = T::zero();
            let mut term = x.clone();
            for _ in 0..n {
                acc = acc + term.clone();
                term = term * x.clone();
            }
            acc
        }
        Depth::Infinite => x.clone() / (T::one() - x.clone()),
    }
}

/// Exact raw moments (orders 1, 2, 4) of the additive mixture whose branch
/// scales are 1 + Σⱼ ±aʲ.
///
/// With S₂ = Σ a²ʲ and S₄ = Σ a⁴ʲ over j = 1..N (geometric limits for
/// N → ∞), the scale multiplier m = 1 + s has E[m²] = 1 + S₂ and
/// E[m⁴] = 1 + 6S₂ + 3S₂² − 2S₄, giving
///
/// * M1 = μ
/// * M2 = μ² + σ²(1 + S₂)
/// * M4 = μ⁴ + 6μ²σ²(1 + S₂) + 3σ⁴(1 + 6S₂ + 3S₂² − 2S₄)
///
/// Every branch scale must stay positive, i.e. Σⱼ aʲ < 1 (a < ½ in the
/// limit).
pub fn moments_additive<T: Scalar>(
    order: usize,
    mu: &T,
    sigma: &T,
    a: &T,
    depth: Depth,
) -> Result<T> {
    check_sigma(sigma)?;
    check_rate(a)?;
    if !(power_sum(a, depth) < T::one()) {
        return Err(domain(format!(
            "additive offsets reach 1 (a = {}, depth {depth}); some branch scale is nonpositive",
            approx(a)
        )));
    }
    let a2 = a.clone() * a.clone();
    let s2 = power_sum(&a2, depth);
    let s4 = power_sum(&(a2.clone() * a2), depth);
    let e2 = T::one() + s2.clone();
    let e4 = T::one() + int::<T>(6) * s2.clone() + int::<T>(3) * s2.clone() * s2 - int::<T>(2) * s4;
    let mu2 = mu.clone() * mu.clone();
    let sigma2 = sigma.clone() * sigma.clone();
    match order {
        1 => Ok(mu.clone()),
        2 => Ok(mu2 + sigma2 * e2),
        4 => Ok(mu2.clone() * mu2.clone()
            + int::<T>(6) * mu2 * sigma2.clone() * e2
            + int::<T>(3) * sigma2.clone() * sigma2 * e4),
        _ => Err(Error::UnsupportedOrder {
            order,
            supported: "1, 2, 4",
        }),
    }
}
