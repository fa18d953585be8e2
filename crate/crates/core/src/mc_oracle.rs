//! Monte Carlo sampling of branching mixtures.
//!
//! Each draw picks a branch (N fair sign flips, i.e. a uniform branch index
//! for an enumerated mixture, or a weighted pick for a collapsed one) and
//! then a Gaussian with that branch's scale.
//!
//! Samples are generated in fixed chunks of [`CHUNK_SIZE`]. Chunk c draws
//! from ChaCha8 seeded with `seed` on stream c, so the sample stream does
//! not depend on how chunks are spread over threads, and chunk summaries are
//! merged in chunk order. Summaries are therefore bit-identical across runs
//! and thread counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::GaussianBase;
use crate::branching::{Combination, ErrorSchedule, MixtureDistribution};
use crate::error::{domain, Error, Result};

pub const CHUNK_SIZE: u64 = 1 << 16;

/// Power sums are kept up to this order (twice the top moment order, for
/// standard errors).
const POWER_SUMS: usize = 16;

/// Minimum sample count for [`estimate`].
pub const MIN_SAMPLES: u64 = 30;

/// Exceedance estimates need at least this many expected hits to count.
pub const MIN_EXPECTED_HITS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Target {
    /// Raw moment E[Xᵏ], k in 1..=8.
    Moment(usize),
    /// P(X > K).
    Exceedance(f64),
}

impl Target {
    pub fn label(&self) -> String {
        match self {
            Target::Moment(k) => format!("moment_{k}"),
            Target::Exceedance(k) => format!("exceed_{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n_samples: u64,
    pub seed: u64,
    pub targets: Vec<Target>,
    /// Count draws per branch (enumerated mixtures only).
    #[serde(default)]
    pub track_branches: bool,
}

impl SampleSpec {
    pub fn new(n_samples: u64, seed: u64, targets: Vec<Target>) -> Self {
        Self {
            n_samples,
            seed,
            targets,
            track_branches: false,
        }
    }
}

/// Sufficient statistics of a sample: power sums Σxᵏ for k = 1..16 and
/// exceedance counts. Merging is associative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: u64,
    pub seed: u64,
    pub power_sums: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub exceed_counts: Vec<u64>,
    pub targets: Vec<Target>,
    pub branch_counts: Option<Vec<u64>>,
}

impl SampleSummary {
    fn empty(seed: u64, targets: &[Target], branches: Option<usize>) -> Self {
        let thresholds: Vec<f64> = targets
            .iter()
            .filter_map(|t| match t {
                Target::Exceedance(k) => Some(*k),
                Target::Moment(_) => None,
            })
            .collect();
        Self {
            n: 0,
            seed,
            power_sums: vec![0.0; POWER_SUMS],
            exceed_counts: vec![0; thresholds.len()],
            thresholds,
            targets: targets.to_vec(),
            branch_counts: branches.map(|b| vec![0; b]),
        }
    }

    fn push(&mut self, x: f64) {
        self.n += 1;
        let mut p = 1.0;
        for s in self.power_sums.iter_mut() {
            p *= x;
            *s += p;
        }
        for (count, k) in self.exceed_counts.iter_mut().zip(&self.thresholds) {
            if x > *k {
                *count += 1;
            }
        }
    }

    /// Summary of an arbitrary stream of values.
    pub fn from_values(values: impl IntoIterator<Item = f64>, targets: &[Target]) -> Self {
        let mut s = Self::empty(0, targets, None);
        for x in values {
            s.push(x);
        }
        s
    }

    /// Adds another summary over the same targets.
    pub fn merge(&mut self, other: &SampleSummary) -> Result<()> {
        if self.thresholds != other.thresholds {
            return Err(domain("cannot merge summaries with different targets"));
        }
        self.n += other.n;
        for (a, b) in self.power_sums.iter_mut().zip(&other.power_sums) {
            *a += b;
        }
        for (a, b) in self.exceed_counts.iter_mut().zip(&other.exceed_counts) {
            *a += b;
        }
        match (&mut self.branch_counts, &other.branch_counts) {
            (Some(a), Some(b)) if a.len() == b.len() => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            (None, None) => {}
            _ => {
                return Err(domain(
                    "cannot merge summaries with different branch tracking",
                ))
            }
        }
        Ok(())
    }

    /// Sample mean of xᵏ, k ≥ 1.
    pub fn raw_moment(&self, k: usize) -> f64 {
        self.power_sums[k - 1] / self.n as f64
    }
}

/// How a draw picks its branch.
enum BranchPicker<'a> {
    Uniform(usize),
    Weighted(Vec<f64>),
    Process(&'a [f64], Combination),
}

impl BranchPicker<'_> {
    fn for_mixture(mixture: &MixtureDistribution<f64>) -> BranchPicker<'static> {
        let comps = mixture.components();
        let w0 = comps[0].weight;
        if comps.iter().all(|c| c.weight == w0) {
            BranchPicker::Uniform(comps.len())
        } else {
            let mut acc = 0.0;
            let cumulative = comps
                .iter()
                .map(|c| {
                    acc += c.weight;
                    acc
                })
                .collect();
            BranchPicker::Weighted(cumulative)
        }
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Draws `count` values of chunk `chunk`, calling `sink(branch, x)`.
#[allow(clippy::too_many_arguments)]
fn draw_chunk(
    mu: f64,
    scales: &[f64],
    picker: &BranchPicker<'_>,
    sigma: f64,
    seed: u64,
    chunk: u64,
    count: u64,
    mut sink: impl FnMut(Option<usize>, f64),
) {
    let mut rng = chunk_rng(seed, chunk);
    for _ in 0..count {
        let (branch, scale) = match picker {
            BranchPicker::Uniform(n) => {
                let i = rng.random_range(0..*n);
                (Some(i), scales[i])
            }
            BranchPicker::Weighted(cum) => {
                let u: f64 = rng.random::<f64>() * cum[cum.len() - 1];
                let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
                (Some(i), scales[i])
            }
            BranchPicker::Process(rates, mode) => {
                let scale = match mode {
                    Combination::Multiplicative => rates.iter().fold(1.0, |s, a| {
                        if rng.random::<bool>() {
                            s * (1.0 + a)
                        } else {
                            s * (1.0 - a)
                        }
                    }),
                    Combination::Additive => {
                        1.0 + rates.iter().fold(0.0, |s, a| {
                            if rng.random::<bool>() {
                                s + a
                            } else {
                                s - a
                            }
                        })
                    }
                };
                (None, sigma * scale)
            }
        };
        let z: f64 = rng.sample(StandardNormal);
        sink(branch, mu + scale * z);
    }
}

fn check_spec(spec: &SampleSpec) -> Result<()> {
    if spec.n_samples == 0 {
        return Err(Error::InsufficientSamples { n: 0, min: 1 });
    }
    for t in &spec.targets {
        match t {
            Target::Moment(k) if !(1..=8).contains(k) => {
                return Err(Error::UnsupportedOrder {
                    order: *k,
                    supported: "1..=8",
                })
            }
            Target::Exceedance(k) if !k.is_finite() => {
                return Err(domain("exceedance threshold must be finite"))
            }
            _ => {}
        }
    }
    Ok(())
}

fn run(
    mu: f64,
    sigma: f64,
    scales: &[f64],
    picker: &BranchPicker<'_>,
    spec: &SampleSpec,
    branches: Option<usize>,
) -> SampleSummary {
    let n_chunks = spec.n_samples.div_ceil(CHUNK_SIZE);
    let parts: Vec<SampleSummary> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SIZE.min(spec.n_samples - c * CHUNK_SIZE);
            let mut s = SampleSummary::empty(spec.seed, &spec.targets, branches);
            draw_chunk(mu, scales, picker, sigma, spec.seed, c, count, |b, x| {
                s.push(x);
                if let (Some(counts), Some(b)) = (s.branch_counts.as_mut(), b) {
                    counts[b] += 1;
                }
            });
            s
        })
        .collect();
    let mut total = SampleSummary::empty(spec.seed, &spec.targets, branches);
    for p in &parts {
        total.merge(p).expect("chunks share targets");
    }
    total
}

/// Samples a mixture and returns the sufficient statistics.
pub fn sample(mixture: &MixtureDistribution<f64>, spec: &SampleSpec) -> Result<SampleSummary> {
    check_spec(spec)?;
    let picker = BranchPicker::for_mixture(mixture);
    let scales: Vec<f64> = mixture.components().iter().map(|c| c.scale).collect();
    let branches = spec.track_branches.then_some(scales.len());
    Ok(run(
        *mixture.mu(),
        *mixture.sigma(),
        &scales,
        &picker,
        spec,
        branches,
    ))
}

/// Samples the branching process directly: N sign flips per draw, no
/// enumeration, so any depth works.
pub fn sample_schedule(
    base: &GaussianBase<f64>,
    schedule: &ErrorSchedule<f64>,
    spec: &SampleSpec,
) -> Result<SampleSummary> {
    check_spec(spec)?;
    let picker = BranchPicker::Process(schedule.rates(), schedule.mode());
    Ok(run(*base.mu(), *base.sigma(), &[], &picker, spec, None))
}

/// Raw draws of a mixture in stream order (chunked exactly as [`sample`]).
pub fn draw(mixture: &MixtureDistribution<f64>, seed: u64, n: u64) -> Vec<f64> {
    let picker = BranchPicker::for_mixture(mixture);
    let scales: Vec<f64> = mixture.components().iter().map(|c| c.scale).collect();
    let mut out = Vec::with_capacity(n as usize);
    for c in 0..n.div_ceil(CHUNK_SIZE) {
        let count = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
        draw_chunk(
            *mixture.mu(),
            &scales,
            &picker,
            *mixture.sigma(),
            seed,
            c,
            count,
            |_, x| out.push(x),
        );
    }
    out
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub target: Target,
    pub estimate: f64,
    pub std_error: f64,
    /// False when too few samples land beyond an exceedance threshold
    /// (fewer than [`MIN_EXPECTED_HITS`]) for the estimate to confirm
    /// anything.
    pub reliable: bool,
}

impl Estimate {
    /// |estimate − value| ≤ k·SE.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub n: u64,
    pub seed: u64,
    pub estimates: Vec<Estimate>,
    /// Sample kurtosis m₄/m₂² about the sample mean, with a delta-method SE.
    pub kurtosis: Option<Estimate>,
}

impl MomentsReport {
    pub fn get(&self, target: Target) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.target == target)
    }
}

/// Central moments 1..=8 of the sample from its power sums.
fn central_moments(s: &SampleSummary) -> [f64; 9] {
    let m1 = s.raw_moment(1);
    let raw = |k: usize| if k == 0 { 1.0 } else { s.raw_moment(k) };
    let mut out = [0.0; 9];
    out[0] = 1.0;
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = (0..=k)
            .map(|i| crate::specfn::binomial(k, i) as f64 * raw(i) * (-m1).powi((k - i) as i32))
            .sum();
    }
    out
}

/// Turns sufficient statistics into estimates with standard errors.
pub fn estimate(summary: &SampleSummary) -> Result<MomentsReport> {
    let n = summary.n;
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            n,
            min: MIN_SAMPLES,
        });
    }
    let nf = n as f64;
    let mut estimates = Vec::with_capacity(summary.targets.len());
    let mut exceed_idx = 0;
    for t in &summary.targets {
        let e = match *t {
            Target::Moment(k) => {
                let m = summary.raw_moment(k);
                let var = (summary.raw_moment(2 * k) - m * m).max(0.0) * nf / (nf - 1.0);
                Estimate {
                    target: *t,
                    estimate: m,
                    std_error: (var / nf).sqrt(),
                    reliable: true,
                }
            }
            Target::Exceedance(_) => {
                let hits = summary.exceed_counts[exceed_idx];
                exceed_idx += 1;
                let p = hits as f64 / nf;
                Estimate {
                    target: *t,
                    estimate: p,
                    std_error: (p * (1.0 - p) / nf).sqrt(),
                    reliable: p >= MIN_EXPECTED_HITS / nf,
                }
            }
        };
        estimates.push(e);
    }
    let c = central_moments(summary);
    let kurtosis = (c[2] > 0.0).then(|| {
        let g = c[4] / (c[2] * c[2]);
        // gradient of m4/m2² w.r.t. (m2, m4)
        let d2 = -2.0 * c[4] / (c[2] * c[2] * c[2]);
        let d4 = 1.0 / (c[2] * c[2]);
        let v22 = c[4] - c[2] * c[2];
        let v44 = c[8] - c[4] * c[4];
        let v24 = c[6] - c[2] * c[4];
        let var = (d2 * d2 * v22 + 2.0 * d2 * d4 * v24 + d4 * d4 * v44).max(0.0) / nf;
        Estimate {
            target: Target::Moment(4),
            estimate: g,
            std_error: var.sqrt(),
            reliable: true,
        }
    });
    Ok(MomentsReport {
        n,
        seed: summary.seed,
        estimates,
        kurtosis,
    })
}
