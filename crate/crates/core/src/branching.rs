//! Branching structure of layered errors on σ.
//!
//! Level j of the recursion perturbs the scale by (1 ± a(j)), each sign with
//! probability ½. Enumerating every sign tuple gives 2^N equally weighted
//! branches; the resulting scale multipliers define an equal-weight
//! Gaussian mixture.

use serde::{Deserialize, Serialize};

use crate::base::GaussianBase;
use crate::error::{domain, Error, Result};
use crate::scalar::{approx, int, is_negative, lit, Real, Scalar};
use crate::specfn::binomial;

/// Largest depth for which branches are enumerated explicitly.
pub const MAX_ENUMERATION_DEPTH: usize = 24;

/// Relative tolerance used to check that additive rates are powers of a
/// single generating rate when the scalar type is inexact.
const GEOMETRIC_TOLERANCE: f64 = 1e-12;

/// How the per-level perturbations combine into a branch scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combination {
    /// scaleᵢ = ∏ⱼ (1 + T[i,j]·a(j))
    Multiplicative,
    /// scaleᵢ = 1 + Σⱼ T[i,j]·aʲ
    Additive,
}

/// Error rates a(1)…a(N) plus the way they combine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSchedule<T> {
    rates: Vec<T>,
    mode: Combination,
}

fn check_rate<T: Scalar>(a: &T, what: &str) -> Result<()> {
    if is_negative(a) || !(*a < T::one()) {
        return Err(Error::Schedule(format!(
            "{what} must lie in [0, 1), got {}",
            approx(a)
        )));
    }
    Ok(())
}

impl<T: Scalar> ErrorSchedule<T> {
    /// a(1) = … = a(N) = a, multiplicative.
    pub fn constant(a: T, depth: usize) -> Result<Self> {
        check_rate(&a, "rate")?;
        Ok(Self {
            rates: vec![a; depth],
            mode: Combination::Multiplicative,
        })
    }

    /// a(n) = λ^{n−1}·a(1), multiplicative. λ = 1 gives the constant schedule.
    pub fn bleed(a1: T, lambda: T, depth: usize) -> Result<Self> {
        check_rate(&a1, "a1")?;
        if is_negative(&lambda) || lambda > T::one() {
            return Err(Error::Schedule(format!(
                "lambda must lie in [0, 1], got {}",
                approx(&lambda)
            )));
        }
        let mut rates = Vec::with_capacity(depth);
        let mut current = a1;
        for _ in 0..depth {
            rates.push(current.clone());
            current = current * lambda.clone();
        }
        Ok(Self {
            rates,
            mode: Combination::Multiplicative,
        })
    }

    /// Rates a, a², …, a^N combined additively.
    pub fn geometric(a: T, depth: usize) -> Result<Self> {
        check_rate(&a, "rate")?;
        let mut rates = Vec::with_capacity(depth);
        let mut current = a.clone();
        for _ in 0..depth {
            rates.push(current.clone());
            current = current * a.clone();
        }
        Ok(Self {
            rates,
            mode: Combination::Additive,
        })
    }

    /// Arbitrary multiplicative rates.
    pub fn explicit(rates: Vec<T>) -> Result<Self> {
        for r in &rates {
            check_rate(r, "rate")?;
        }
        Ok(Self {
            rates,
            mode: Combination::Multiplicative,
        })
    }

    /// Switches the combination mode. Additive mode requires the rates to be
    /// a, a², …, a^N for one generating rate a.
    pub fn with_mode(mut self, mode: Combination) -> Result<Self> {
        if mode == Combination::Additive {
            self.check_geometric()?;
        }
        self.mode = mode;
        Ok(self)
    }

    fn check_geometric(&self) -> Result<()> {
        let Some(a) = self.rates.first() else {
            return Ok(());
        };
        let tol: T = lit(GEOMETRIC_TOLERANCE);
        let mut expected = a.clone();
        for (j, r) in self.rates.iter().enumerate() {
            let diff = if *r > expected {
                r.clone() - expected.clone()
            } else {
                expected.clone() - r.clone()
            };
            if diff > tol.clone() * expected.clone() {
                return Err(Error::Schedule(format!(
                    "additive mode needs rates a^j; rate {} is {} but a^{} = {}",
                    j + 1,
                    approx(r),
                    j + 1,
                    approx(&expected)
                )));
            }
            expected = expected * a.clone();
        }
        Ok(())
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn mode(&self) -> Combination {
        self.mode
    }

    pub fn depth(&self) -> usize {
        self.rates.len()
    }

    /// The common rate when the schedule is multiplicative with all rates
    /// equal; these collapse to a binomial tree. Depth 0 reports rate 0.
    pub fn constant_rate(&self) -> Option<T> {
        if self.mode != Combination::Multiplicative {
            return None;
        }
        match self.rates.first() {
            None => Some(T::zero()),
            Some(a) if self.rates.iter().all(|r| r == a) => Some(a.clone()),
            Some(_) => None,
        }
    }

    /// Converts the rates to another scalar type through `f64`.
    pub fn to_f64(&self) -> ErrorSchedule<f64> {
        ErrorSchedule {
            rates: self.rates.iter().map(approx).collect(),
            mode: self.mode,
        }
    }
}

/// All 2^N sign tuples of length N.
///
/// Row i is the binary expansion of i over N digits, most significant digit
/// in column 0, with digit 0 read as +1 and digit 1 as −1. This is
/// lexicographic order with +1 before −1: for N = 3 the rows run from
/// (+1,+1,+1) down to (−1,−1,−1). Entries are computed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignMatrix {
    depth: usize,
}

pub fn build_sign_matrix(depth: usize) -> Result<SignMatrix> {
    if depth > MAX_ENUMERATION_DEPTH {
        return Err(Error::TooDeep {
            depth,
            max: MAX_ENUMERATION_DEPTH,
        });
    }
    Ok(SignMatrix { depth })
}

impl SignMatrix {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_rows(&self) -> usize {
        1 << self.depth
    }

    /// T[i, j] ∈ {−1, +1}.
    pub fn sign(&self, row: usize, col: usize) -> i8 {
        assert!(
            row < self.n_rows() && col < self.depth,
            "index out of range"
        );
        if (row >> (self.depth - 1 - col)) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn row(&self, row: usize) -> Vec<i8> {
        (0..self.depth).map(|j| self.sign(row, j)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<i8>> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }
}

/// Per-branch scale multipliers, all with probability 2^-N.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSet<T> {
    scales: Vec<T>,
    weight: T,
}

impl<T: Scalar> ScaleSet<T> {
    /// Scales in sign-matrix row order.
    pub fn scales(&self) -> &[T] {
        &self.scales
    }

    pub fn weight(&self) -> &T {
        &self.weight
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn mean(&self) -> T {
        self.scales.iter().fold(T::zero(), |acc, s| acc + s.clone()) * self.weight.clone()
    }
}

/// Builds the 2^N branch scales of a schedule, in the row order of
/// [`SignMatrix`].
pub fn build_scale_set<T: Scalar>(schedule: &ErrorSchedule<T>) -> Result<ScaleSet<T>> {
    let depth = schedule.depth();
    build_sign_matrix(depth)?;
    let mut scales: Vec<T> = Vec::with_capacity(1 << depth);
    match schedule.mode() {
        Combination::Multiplicative => {
            scales.push(T::one());
            for a in schedule.rates() {
                let up = T::one() + a.clone();
                let down = T::one() - a.clone();
                scales = scales
                    .into_iter()
                    .flat_map(|s| [s.clone() * up.clone(), s * down.clone()])
                    .collect();
            }
        }
        Combination::Additive => {
            scales.push(T::zero());
            for a in schedule.rates() {
                scales = scales
                    .into_iter()
                    .flat_map(|s| [s.clone() + a.clone(), s - a.clone()])
                    .collect();
            }
            for s in scales.iter_mut() {
                *s = T::one() + s.clone();
            }
        }
    }
    if let Some(branch) = scales.iter().position(|s| !(*s > T::zero())) {
        return Err(Error::NonPositiveScale {
            branch,
            scale: approx(&scales[branch]),
        });
    }
    let weight = T::one() / num_traits::pow(int::<T>(2), depth);
    Ok(ScaleSet { scales, weight })
}

/// One Gaussian component: probability weight and absolute scale σ·sᵢ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component<T> {
    pub weight: T,
    pub scale: T,
}

/// Finite mixture of Gaussians sharing the location μ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDistribution<T> {
    mu: T,
    sigma: T,
    components: Vec<Component<T>>,
}

impl<T: Scalar> MixtureDistribution<T> {
    /// The base Gaussian as a one-component mixture.
    pub fn gaussian(base: &GaussianBase<T>) -> Self {
        Self {
            mu: base.mu().clone(),
            sigma: base.sigma().clone(),
            components: vec![Component {
                weight: T::one(),
                scale: base.sigma().clone(),
            }],
        }
    }

    /// Builds a mixture from explicit components. Weights must be
    /// nonnegative and sum to one (within 1e-12 for inexact types), scales
    /// strictly positive.
    pub fn from_components(mu: T, sigma: T, components: Vec<Component<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("mixture needs at least one component"));
        }
        let mut total = T::zero();
        for (i, c) in components.iter().enumerate() {
            if !(c.scale > T::zero()) {
                return Err(Error::NonPositiveScale {
                    branch: i,
                    scale: approx(&c.scale),
                });
            }
            if is_negative(&c.weight) {
                return Err(domain(format!("component {i} has negative weight")));
            }
            total = total + c.weight.clone();
        }
        if (approx(&total) - 1.0).abs() > 1e-12 {
            return Err(domain(format!("weights sum to {}, not 1", approx(&total))));
        }
        Ok(Self {
            mu,
            sigma,
            components,
        })
    }

    pub fn mu(&self) -> &T {
        &self.mu
    }

    /// Base scale σ before branching.
    pub fn sigma(&self) -> &T {
        &self.sigma
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn max_scale(&self) -> T {
        self.components
            .iter()
            .map(|c| c.scale.clone())
            .fold(T::zero(), |m, s| if s > m { s } else { m })
    }

    /// Same mixture moved to a different location.
    pub fn recentered(&self, mu: T) -> Self {
        Self {
            mu,
            sigma: self.sigma.clone(),
            components: self.components.clone(),
        }
    }

    pub fn to_f64(&self) -> MixtureDistribution<f64> {
        MixtureDistribution {
            mu: approx(&self.mu),
            sigma: approx(&self.sigma),
            components: self
                .components
                .iter()
                .map(|c| Component {
                    weight: approx(&c.weight),
                    scale: approx(&c.scale),
                })
                .collect(),
        }
    }
}

/// Equal-weight mixture with one component per branch of the schedule.
pub fn build_mixture<T: Scalar>(
    base: &GaussianBase<T>,
    schedule: &ErrorSchedule<T>,
) -> Result<MixtureDistribution<T>> {
    let set = build_scale_set(schedule)?;
    let components = set
        .scales
        .into_iter()
        .map(|s| Component {
            weight: set.weight.clone(),
            scale: base.sigma().clone() * s,
        })
        .collect();
    Ok(MixtureDistribution {
        mu: base.mu().clone(),
        sigma: base.sigma().clone(),
        components,
    })
}

/// Constant-rate mixture collapsed onto its N+1 distinct scales
/// σ(1+a)ʲ(1−a)^{N−j} with weights C(N, j)/2^N.
///
/// Needs no enumeration, so it works past [`MAX_ENUMERATION_DEPTH`]. Binomial
/// coefficients are exact up to N = 62; beyond that they go through `f64`
/// and weights under 2^-1074 flush to zero.
pub fn binomial_mixture<T: Scalar>(
    base: &GaussianBase<T>,
    a: T,
    depth: usize,
) -> Result<MixtureDistribution<T>> {
    check_rate(&a, "rate")?;
    let up = T::one() + a.clone();
    let down = T::one() - a;
    let mut components = Vec::with_capacity(depth + 1);
    let total = num_traits::pow(int::<T>(2), depth.min(62));
    let mut log2_c = 0.0_f64;
    for j in 0..=depth {
        let weight = if depth <= 62 {
            int::<T>(binomial(depth, j)) / total.clone()
        } else {
            if j > 0 {
                log2_c += ((depth - j + 1) as f64 / j as f64).log2();
            }
            lit::<T>((log2_c - depth as f64).exp2())
        };
        let scale = base.sigma().clone()
            * num_traits::pow(up.clone(), j)
            * num_traits::pow(down.clone(), depth - j);
        if !(scale > T::zero()) {
            return Err(Error::NonPositiveScale {
                branch: j,
                scale: approx(&scale),
            });
        }
        components.push(Component { weight, scale });
    }
    Ok(MixtureDistribution {
        mu: base.mu().clone(),
        sigma: base.sigma().clone(),
        components,
    })
}

/// Two-state alternative that branches the variance rather than σ: a "low"
/// scale σ(1−v) and a "high" scale σ√(1 + 2v − v²), whose squares average
/// to σ².
pub fn variance_preserving_pair<T: Real>(sigma: T, v: T) -> Result<(T, T)> {
    if !(sigma > T::zero()) {
        return Err(domain("sigma must be > 0"));
    }
    if !(v >= T::zero() && v < T::one()) {
        return Err(domain(format!("v must lie in [0, 1), got {}", approx(&v))));
    }
    let two = T::one() + T::one();
    let low = sigma * (T::one() - v);
    let high = sigma * (T::one() + two * v - v * v).sqrt();
    Ok((low, high))
}
