//! Gaussian scale mixtures generated by layering uncertainty on a standard
//! deviation.
//!
//! A Gaussian's σ is perturbed by (1 ± a(1)), that perturbation's rate by
//! (1 ± a(2)), and so on for N levels. Enumerating every sign combination
//! gives 2^N equally likely scales and hence an equal-weight Gaussian
//! mixture. This crate builds those mixtures, evaluates densities, tail
//! probabilities (in log space when they underflow) and moments, provides
//! closed forms for constant, geometrically decaying and additive rate
//! schedules, and a seeded Monte Carlo sampler to cross-check all of it.
//!
//! The algebraic parts are generic over [`Scalar`] (including exact
//! rationals); the transcendental parts over [`Real`] (`f32`/`f64`). The
//! aliases below fix the usual choices.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod branching;
pub mod closed_form;
pub mod error;
pub mod mc_oracle;
pub mod mixture_stats;
pub mod quadrature;
pub mod scalar;
pub mod schedule;
pub mod specfn;

pub use base::{Depth, GaussianBase};
pub use branching::{
    binomial_mixture, build_mixture, build_scale_set, build_sign_matrix, variance_preserving_pair,
    Combination, Component, ErrorSchedule, MixtureDistribution, ScaleSet, SignMatrix,
    MAX_ENUMERATION_DEPTH,
};
pub use error::{Error, Result};
pub use scalar::{Real, Scalar};
pub use schedule::{ScheduleKind, ScheduleSpec};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type Mixture = MixtureDistribution<f64>;
pub type Mixture32 = MixtureDistribution<f32>;
pub type ExactMixture = MixtureDistribution<Rational>;

pub type Schedule = ErrorSchedule<f64>;
pub type ExactSchedule = ErrorSchedule<Rational>;

pub type Base = GaussianBase<f64>;
pub type ExactBase = GaussianBase<Rational>;

pub type Scales = ScaleSet<f64>;
pub type ExactScales = ScaleSet<Rational>;
