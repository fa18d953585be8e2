//! Text form of error schedules.
//!
//! ```text
//! constant:a=<real>,N=<int>
//! bleed:a1=<real>,lambda=<real>,N=<int>
//! geometric:a=<real>,N=<int>
//! explicit:<real>,<real>,...
//! ```
//!
//! Any of these may carry the suffix `;mode=additive` (or
//! `;mode=multiplicative`). `geometric` is additive by default, the others
//! multiplicative.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::branching::{Combination, ErrorSchedule};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScheduleKind {
    Constant { a: f64, depth: usize },
    Bleed { a1: f64, lambda: f64, depth: usize },
    Geometric { a: f64, depth: usize },
    Explicit(Vec<f64>),
}

/// A parsed schedule string. Depth can be overridden for every kind but
/// `explicit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub mode: Combination,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Schedule(msg.into())
}

fn parse_real(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| bad(format!("cannot parse {key}={v:?} as a real number")))?;
    if !x.is_finite() {
        return Err(bad(format!("{key} must be finite")));
    }
    Ok(x)
}

fn parse_depth(v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| bad(format!("cannot parse N={v:?} as a nonnegative integer")))
}

/// Parses `k1=v1,k2=v2` requiring exactly the given keys.
fn parse_params<'a>(body: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let mut found: Vec<Option<&str>> = vec![None; keys.len()];
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
        let k = k.trim();
        let idx = keys.iter().position(|want| *want == k).ok_or_else(|| {
            bad(format!(
                "unknown parameter {k:?}; expected {}",
                keys.join(", ")
            ))
        })?;
        if found[idx].replace(v).is_some() {
            return Err(bad(format!("parameter {k:?} given twice")));
        }
    }
    keys.iter()
        .zip(found)
        .map(|(k, v)| v.ok_or_else(|| bad(format!("missing parameter {k:?}"))))
        .collect()
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (main, mode) = match s.split_once(';') {
            None => (s, None),
            Some((main, suffix)) => {
                let mode = match suffix.trim() {
                    "mode=additive" => Combination::Additive,
                    "mode=multiplicative" => Combination::Multiplicative,
                    other => return Err(bad(format!("unknown suffix {other:?}"))),
                };
                (main, Some(mode))
            }
        };
        let (name, body) = main
            .split_once(':')
            .ok_or_else(|| bad(format!("expected <kind>:<params>, got {main:?}")))?;
        let kind = match name.trim() {
            "constant" => {
                let p = parse_params(body, &["a", "N"])?;
                ScheduleKind::Constant {
                    a: parse_real("a", p[0])?,
                    depth: parse_depth(p[1])?,
                }
            }
            "bleed" => {
                let p = parse_params(body, &["a1", "lambda", "N"])?;
                ScheduleKind::Bleed {
                    a1: parse_real("a1", p[0])?,
                    lambda: parse_real("lambda", p[1])?,
                    depth: parse_depth(p[2])?,
                }
            }
            "geometric" => {
                let p = parse_params(body, &["a", "N"])?;
                ScheduleKind::Geometric {
                    a: parse_real("a", p[0])?,
                    depth: parse_depth(p[1])?,
                }
            }
            "explicit" => {
                let body = body.trim();
                let rates = if body.is_empty() {
                    Vec::new()
                } else {
                    body.split(',')
                        .map(|v| parse_real("rate", v))
                        .collect::<Result<Vec<_>>>()?
                };
                ScheduleKind::Explicit(rates)
            }
            other => return Err(bad(format!("unknown schedule kind {other:?}"))),
        };
        let default_mode = match kind {
            ScheduleKind::Geometric { .. } => Combination::Additive,
            _ => Combination::Multiplicative,
        };
        let spec = ScheduleSpec {
            kind,
            mode: mode.unwrap_or(default_mode),
        };
        spec.build::<f64>()?;
        Ok(spec)
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ScheduleKind::Constant { a, depth } => write!(f, "constant:a={a},N={depth}")?,
            ScheduleKind::Bleed { a1, lambda, depth } => {
                write!(f, "bleed:a1={a1},lambda={lambda},N={depth}")?
            }
            ScheduleKind::Geometric { a, depth } => write!(f, "geometric:a={a},N={depth}")?,
            ScheduleKind::Explicit(rates) => {
                f.write_str("explicit:")?;
                for (i, r) in rates.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{r}")?;
                }
            }
        }
        let default_mode = match self.kind {
            ScheduleKind::Geometric { .. } => Combination::Additive,
            _ => Combination::Multiplicative,
        };
        if self.mode != default_mode {
            match self.mode {
                Combination::Additive => f.write_str(";mode=additive")?,
                Combination::Multiplicative => f.write_str(";mode=multiplicative")?,
            }
        }
        Ok(())
    }
}

impl ScheduleSpec {
    pub fn depth(&self) -> usize {
        match &self.kind {
            ScheduleKind::Constant { depth, .. }
            | ScheduleKind::Bleed { depth, .. }
            | ScheduleKind::Geometric { depth, .. } => *depth,
            ScheduleKind::Explicit(rates) => rates.len(),
        }
    }

    /// Same schedule at another depth.
    pub fn with_depth(&self, n: usize) -> Result<Self> {
        let kind = match &self.kind {
            ScheduleKind::Constant { a, .. } => ScheduleKind::Constant { a: *a, depth: n },
            ScheduleKind::Bleed { a1, lambda, .. } => ScheduleKind::Bleed {
                a1: *a1,
                lambda: *lambda,
                depth: n,
            },
            ScheduleKind::Geometric { a, .. } => ScheduleKind::Geometric { a: *a, depth: n },
            ScheduleKind::Explicit(_) => {
                return Err(bad("an explicit schedule has a fixed depth"));
            }
        };
        Ok(Self {
            kind,
            mode: self.mode,
        })
    }

    /// The common rate when the schedule collapses to a binomial tree.
    pub fn constant_rate(&self) -> Option<f64> {
        if self.mode != Combination::Multiplicative {
            return None;
        }
        match &self.kind {
            ScheduleKind::Constant { a, .. } => Some(*a),
            ScheduleKind::Bleed { a1, lambda, depth } if *lambda == 1.0 || *depth <= 1 => Some(*a1),
            ScheduleKind::Explicit(rates) => match rates.first() {
                None => Some(0.0),
                Some(a) if rates.iter().all(|r| r == a) => Some(*a),
                Some(_) => None,
            },
            _ => None,
        }
    }

    /// Materializes the schedule in scalar type `T`.
    pub fn build<T: Scalar>(&self) -> Result<ErrorSchedule<T>> {
        let conv = |v: f64| T::from_f64(v).ok_or_else(|| bad(format!("{v} not representable")));
        let sched = match &self.kind {
            ScheduleKind::Constant { a, depth } => ErrorSchedule::constant(conv(*a)?, *depth)?,
            ScheduleKind::Bleed { a1, lambda, depth } => {
                ErrorSchedule::bleed(conv(*a1)?, conv(*lambda)?, *depth)?
            }
            ScheduleKind::Geometric { a, depth } => ErrorSchedule::geometric(conv(*a)?, *depth)?,
            ScheduleKind::Explicit(rates) => ErrorSchedule::explicit(
                rates.iter().map(|r| conv(*r)).collect::<Result<Vec<_>>>()?,
            )?,
        };
        if sched.mode() == self.mode {
            Ok(sched)
        } else {
            sched.with_mode(self.mode)
        }
    }
}
