//! Evaluation of Gaussian scale mixtures: density, exceedance
//! probabilities, raw moments and log-log tail series.
//!
//! Tail probabilities are carried in log space wherever they may underflow.
//! Component sums run sequentially in component order; a parallel reduction
//! would only move results at the ulp level.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::base::GaussianBase;
use crate::branching::MixtureDistribution;
use crate::error::{domain, Error, Result};
use crate::scalar::{approx, lit, Real, Scalar};
use crate::specfn::{
    binomial, check_order, erfc_unchecked, gaussian_density, ln_erfc, raw_moment_unchecked,
};

/// Below this, plain-sum tail probabilities are recomputed from the log form.
const UNDERFLOW_GUARD: f64 = 1e-300;

/// Mixture density at x.
pub fn density<T: Real>(mixture: &MixtureDistribution<T>, x: T) -> T {
    let mu = *mixture.mu();
    mixture.components().iter().fold(T::zero(), |acc, c| {
        acc + c.weight * gaussian_density(mu, c.scale, x)
    })
}

fn z_score<T: Real>(k: T, mu: T, scale: T) -> T {
    (k - mu) / (T::SQRT_2() * scale)
}

/// P(X > k).
pub fn exceedance<T: Real>(mixture: &MixtureDistribution<T>, k: T) -> T {
    let mu = *mixture.mu();
    let half: T = lit(0.5);
    let p = mixture.components().iter().fold(T::zero(), |acc, c| {
        acc + c.weight * half * erfc_unchecked(z_score(k, mu, c.scale))
    });
    if p < lit(UNDERFLOW_GUARD) {
        ln_exceedance(mixture, k).exp()
    } else {
        p
    }
}

/// ln P(X > k), accurate far below the `f64` underflow threshold.
pub fn ln_exceedance<T: Real>(mixture: &MixtureDistribution<T>, k: T) -> T {
    let mu = *mixture.mu();
    let ln_half = -T::LN_2();
    log_sum_exp(
        mixture
            .components()
            .iter()
            .filter(|c| c.weight > T::zero())
            .map(|c| c.weight.ln() + ln_half + ln_erfc(z_score(k, mu, c.scale))),
    )
}

pub(crate) fn log_sum_exp<T: Real>(terms: impl Iterator<Item = T> + Clone) -> T {
    let max = terms.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() || max.is_nan() {
        return max;
    }
    max + terms.fold(T::zero(), |acc, t| acc + (t - max).exp()).ln()
}

fn ln_binomials(n: usize) -> Vec<f64> {
    if n <= 60 {
        return (0..=n).map(|j| (binomial(n, j) as f64).ln()).collect();
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0_f64;
    out.push(acc);
    for j in 1..=n {
        acc += ((n - j + 1) as f64 / j as f64).ln();
        out.push(acc);
    }
    out
}

fn check_rate<T: Real>(a: T) -> Result<()> {
    if !(a >= T::zero() && a < T::one()) {
        return Err(domain(format!(
            "rate must lie in [0, 1), got {}",
            approx(&a)
        )));
    }
    Ok(())
}

/// ln P(X > k) for a constant rate a at depth n, through the binomial
/// collapse of the branch scales. Costs O(n), so n can be far beyond the
/// enumeration ceiling.
pub fn ln_exceedance_constant_a<T: Real>(
    base: &GaussianBase<T>,
    a: T,
    n: usize,
    k: T,
) -> Result<T> {
    check_rate(a)?;
    let (mu, sigma) = (*base.mu(), *base.sigma());
    let ln_up = a.ln_1p();
    let ln_down = (-a).ln_1p();
    let ln_norm = lit::<T>(n as f64 + 1.0) * T::LN_2();
    let ln_c = ln_binomials(n);
    let terms = (0..=n).map(|j| {
        let ln_scale = lit::<T>(j as f64) * ln_up + lit::<T>((n - j) as f64) * ln_down;
        let scale = sigma * ln_scale.exp();
        lit::<T>(ln_c[j]) - ln_norm + ln_erfc(z_score(k, mu, scale))
    });
    Ok(log_sum_exp(terms))
}

/// P(X > k) for a constant rate a at depth n: the binomial-weighted erfc sum.
pub fn exceedance_constant_a<T: Real>(base: &GaussianBase<T>, a: T, n: usize, k: T) -> Result<T> {
    Ok(ln_exceedance_constant_a(base, a, n, k)?.exp())
}

/// P(X > k | depth n) / P(X > k | depth 0), computed as a difference of logs
/// so ratios stay finite when both probabilities underflow.
pub fn convexity_ratio<T: Real>(base: &GaussianBase<T>, a: T, n: usize, k: T) -> Result<T> {
    Ok(ln_convexity_ratio(base, a, n, k)?.exp())
}

/// Log of [`convexity_ratio`], for ratios that overflow.
pub fn ln_convexity_ratio<T: Real>(base: &GaussianBase<T>, a: T, n: usize, k: T) -> Result<T> {
    let top = ln_exceedance_constant_a(base, a, n, k)?;
    let bottom = ln_exceedance_constant_a(base, a, 0, k)?;
    Ok(top - bottom)
}

/// E[Xᵏ] by summing component raw moments. Exact for rational scalars.
pub fn mixture_raw_moment<T: Scalar>(mixture: &MixtureDistribution<T>, order: usize) -> Result<T> {
    check_order(order)?;
    let mu = mixture.mu();
    Ok(mixture.components().iter().fold(T::zero(), |acc, c| {
        acc + c.weight.clone() * raw_moment_unchecked(order, mu, &c.scale)
    }))
}

/// E|X| of a centered mixture, Σ wᵢ·√(2/π)·σᵢ.
pub fn mixture_abs_first_moment<T: Real>(mixture: &MixtureDistribution<T>) -> Result<T> {
    if *mixture.mu() != T::zero() {
        return Err(domain(
            "absolute moment is only available for mixtures centered at 0",
        ));
    }
    let factor = T::FRAC_2_SQRT_PI() * T::FRAC_1_SQRT_2();
    Ok(mixture
        .components()
        .iter()
        .fold(T::zero(), |acc, c| acc + c.weight * factor * c.scale))
}

/// One point of a log-log survival curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogPoint<T> {
    pub x: T,
    pub ln_x: T,
    pub p_exceed: T,
    pub ln_p: T,
}

/// (ln x, ln P(X > x)) on a geometric grid of `points` values from `x_min`
/// to `x_max`. Probabilities are evaluated in log space; `p_exceed` may be
/// zero where ln P is below about −745.
pub fn loglog_series<T: Real>(
    mixture: &MixtureDistribution<T>,
    x_min: T,
    x_max: T,
    points: usize,
) -> Result<Vec<LogLogPoint<T>>> {
    let grid = geometric_grid(x_min, x_max, points)?;
    if !(x_min > *mixture.mu()) {
        return Err(Error::Range(format!(
            "x_min = {} must exceed mu = {}",
            approx(&x_min),
            approx(mixture.mu())
        )));
    }
    Ok(grid
        .into_iter()
        .map(|x| {
            let ln_p = ln_exceedance(mixture, x);
            LogLogPoint {
                x,
                ln_x: x.ln(),
                p_exceed: ln_p.exp(),
                ln_p,
            }
        })
        .collect())
}

/// `points` values spaced evenly in ln x, endpoints included exactly.
pub fn geometric_grid<T: Real>(x_min: T, x_max: T, points: usize) -> Result<Vec<T>> {
    if points < 2 {
        return Err(Error::Range(format!(
            "need at least 2 points, got {points}"
        )));
    }
    if !(x_min > T::zero() && x_max > x_min && x_max.is_finite()) {
        return Err(Error::Range(format!(
            "need 0 < x_min < x_max < inf, got [{}, {}]",
            approx(&x_min),
            approx(&x_max)
        )));
    }
    let (lo, hi) = (x_min.ln(), x_max.ln());
    let last = lit::<T>((points - 1) as f64);
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                x_min
            } else if i == points - 1 {
                x_max
            } else {
                (lo + (hi - lo) * lit::<T>(i as f64) / last).exp()
            }
        })
        .collect())
}

/// Least-squares slope of ln P against ln x over `window`.
pub fn tail_slope_estimate<T: Real>(series: &[LogLogPoint<T>], window: Range<usize>) -> Result<T> {
    if window.end > series.len() || window.len() < 3 {
        return Err(Error::Range(format!(
            "slope window {window:?} needs at least 3 points inside a series of {}",
            series.len()
        )));
    }
    let pts = &series[window];
    if pts
        .iter()
        .any(|p| !p.ln_x.is_finite() || !p.ln_p.is_finite())
    {
        return Err(Error::Range(
            "slope window contains non-finite values".into(),
        ));
    }
    let n = lit::<T>(pts.len() as f64);
    let mean_x = pts.iter().fold(T::zero(), |a, p| a + p.ln_x) / n;
    let mean_y = pts.iter().fold(T::zero(), |a, p| a + p.ln_p) / n;
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(sxy, sxx), p| {
        let dx = p.ln_x - mean_x;
        (sxy + dx * (p.ln_p - mean_y), sxx + dx * dx)
    });
    if !(sxx > T::zero()) {
        return Err(Error::Range("slope window has no spread in ln x".into()));
    }
    Ok(sxy / sxx)
}

/// Local slope at every point from a centered least-squares window of
/// `2·half_width + 1` points, shrunk (to no fewer than 3) at the ends.
pub fn local_slopes<T: Real>(series: &[LogLogPoint<T>], half_width: usize) -> Result<Vec<T>> {
    let half_width = half_width.max(1);
    let n = series.len();
    if n < 3 {
        return Err(Error::Range("local slopes need at least 3 points".into()));
    }
    (0..n)
        .map(|i| {
            let mut lo = i.saturating_sub(half_width);
            let mut hi = (i + half_width + 1).min(n);
            if hi - lo < 3 {
                if lo == 0 {
                    hi = 3;
                } else {
                    lo = n - 3;
                }
            }
            tail_slope_estimate(series, lo..hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{binomial_mixture, build_mixture, ErrorSchedule};

    fn std_base() -> GaussianBase<f64> {
        GaussianBase::standard()
    }

    #[test]
    fn gaussian_peak() {
        let m = MixtureDistribution::gaussian(&std_base());
        assert!((density(&m, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn exceedance_at_location_is_half() {
        let base = GaussianBase::new(1.5_f64, 2.0).unwrap();
        let m = build_mixture(&base, &ErrorSchedule::bleed(0.3, 0.7, 6).unwrap()).unwrap();
        assert!((exceedance(&m, 1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exceedance_constant_zero_rate() {
        for n in [0, 3, 40] {
            let p = exceedance_constant_a(&std_base(), 0.0, n, 3.0).unwrap();
            let expected = 0.5 * erfc_unchecked(3.0 / 2f64.sqrt());
            assert!((p / expected - 1.0).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn ratio_is_exactly_one_at_depth_zero() {
        assert_eq!(convexity_ratio(&std_base(), 0.1, 0, 10.0).unwrap(), 1.0);
        assert_eq!(convexity_ratio(&std_base(), 0.37, 0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn ratio_rejects_bad_rate() {
        assert!(convexity_ratio(&std_base(), 1.0, 3, 3.0).is_err());
        assert!(convexity_ratio(&std_base(), -0.1, 3, 3.0).is_err());
    }

    #[test]
    fn very_deep_exceedance_is_finite() {
        let p = exceedance_constant_a(&std_base(), 0.01, 10_000, 5.0).unwrap();
        assert!(p.is_finite() && p > 0.0 && p < 1.0);
        let deeper = exceedance_constant_a(&std_base(), 0.01, 20_000, 5.0).unwrap();
        assert!(deeper > p);
    }

    #[test]
    fn ln_exceedance_below_underflow() {
        let m = MixtureDistribution::gaussian(&std_base());
        let lp = ln_exceedance(&m, 40.0);
        // ln(½ erfc(40/√2)) ≈ −800 − ln(40√(2π))
        assert!(lp < -800.0 && lp > -810.0);
        assert_eq!(exceedance(&m, 40.0), 0.0);
    }

    #[test]
    fn abs_moment_needs_centered_mixture() {
        let base = GaussianBase::new(1.0, 1.0).unwrap();
        let m = MixtureDistribution::gaussian(&base);
        assert!(mixture_abs_first_moment(&m).is_err());
    }

    #[test]
    fn abs_moment_invariance() {
        let base = GaussianBase::new(0.0, 2.0).unwrap();
        let sched = ErrorSchedule::bleed(0.2, 0.9, 10).unwrap();
        let m = build_mixture(&base, &sched).unwrap();
        let v = mixture_abs_first_moment(&m).unwrap();
        let expected = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((v / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_order_limit() {
        let m = MixtureDistribution::gaussian(&std_base());
        assert!(mixture_raw_moment(&m, 9).is_err());
        assert_eq!(mixture_raw_moment(&m, 0).unwrap(), 1.0);
    }

    #[test]
    fn first_moment_is_location() {
        let base = GaussianBase::new(0.7_f64, 1.3).unwrap();
        let m = build_mixture(&base, &ErrorSchedule::constant(0.3, 7).unwrap()).unwrap();
        assert!((mixture_raw_moment(&m, 1).unwrap() - 0.7).abs() < 1e-14);
    }

    #[test]
    fn higher_peak_with_depth() {
        let m0 = MixtureDistribution::gaussian(&std_base());
        let m5 = build_mixture(&std_base(), &ErrorSchedule::constant(0.1, 5).unwrap()).unwrap();
        assert!(density(&m5, 0.0) > density(&m0, 0.0));
    }

    #[test]
    fn power_law_slope_is_recovered() {
        let series: Vec<LogLogPoint<f64>> = (1..=20)
            .map(|i| {
                let x = i as f64;
                LogLogPoint {
                    x,
                    ln_x: x.ln(),
                    p_exceed: x.powi(-2),
                    ln_p: -2.0 * x.ln(),
                }
            })
            .collect();
        let s = tail_slope_estimate(&series, 0..20).unwrap();
        assert!((s + 2.0).abs() < 1e-9);
        for s in local_slopes(&series, 2).unwrap() {
            assert!((s + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_windows() {
        let m = MixtureDistribution::gaussian(&std_base());
        let series = loglog_series(&m, 1.0, 5.0, 10).unwrap();
        assert!(tail_slope_estimate(&series, 0..2).is_err());
        assert!(tail_slope_estimate(&series, 8..11).is_err());
        let flat = vec![series[0]; 4];
        assert!(tail_slope_estimate(&flat, 0..4).is_err());
    }

    #[test]
    fn loglog_range_checks() {
        let m = MixtureDistribution::gaussian(&std_base());
        assert!(loglog_series(&m, 0.0, 5.0, 10).is_err());
        assert!(loglog_series(&m, 2.0, 1.0, 10).is_err());
        assert!(loglog_series(&m, 1.0, 5.0, 1).is_err());
        let shifted = m.recentered(3.0);
        assert!(loglog_series(&shifted, 2.0, 5.0, 10).is_err());
    }

    #[test]
    fn gaussian_tail_slope_steepens() {
        let m = MixtureDistribution::gaussian(&std_base());
        let series = loglog_series(&m, 2.0, 8.0, 61).unwrap();
        let slopes = local_slopes(&series, 2).unwrap();
        for w in slopes.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn binomial_mixture_matches_enumeration_tail() {
        let base = std_base();
        let e = build_mixture(&base, &ErrorSchedule::constant(0.2, 9).unwrap()).unwrap();
        let b = binomial_mixture(&base, 0.2, 9).unwrap();
        for k in [1.0, 4.0, 9.0] {
            assert!((exceedance(&e, k) / exceedance(&b, k) - 1.0).abs() < 1e-13);
        }
    }
}
