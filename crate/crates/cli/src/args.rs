use std::path::PathBuf;
use std::str::FromStr;

use branchmix::ScheduleSpec;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "branchmix",
    version,
    about = "Densities, tails and moments of layered-uncertainty Gaussian mixtures"
)]
pub struct Cli {
    #[command(flatten)]
    pub shared: Shared,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Shared {
    /// Location of the base Gaussian.
    #[arg(
        long,
        global = true,
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    pub mu: f64,
    /// Scale of the base Gaussian.
    #[arg(
        long,
        global = true,
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub sigma: f64,
    /// Error schedule, e.g. `constant:a=0.1,N=5` or `bleed:a1=0.2,lambda=0.9,N=12`.
    #[arg(long, global = true, default_value = "constant:a=0.1,N=5")]
    pub schedule: ScheduleSpec,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Mixture density on a grid.
    Density {
        #[arg(long, default_value = "-4:4:0.05", allow_hyphen_values = true)]
        x: Grid,
        /// Depths to overlay (default: the schedule's own depth).
        #[arg(long)]
        n_list: Option<List<usize>>,
    },
    /// P(X > K), its log, and the ratio to the base Gaussian.
    Exceed {
        #[arg(long, default_value = "3", allow_hyphen_values = true)]
        k: List<f64>,
        #[arg(long)]
        n_list: Option<List<usize>>,
    },
    /// Convexity ratios P_N(X > K) / P_0(X > K) for constant rates.
    RatioTable {
        #[arg(long, default_value = "0.01,0.1")]
        a: List<f64>,
        #[arg(long, default_value = "5,10,15,20,25")]
        n_list: List<usize>,
        #[arg(long, default_value = "3,5,10")]
        k: List<f64>,
    },
    /// Closed-form moments next to brute-force enumeration.
    Moments {
        #[arg(long, default_value = "1,2,3,4,5,6,7,8")]
        orders: List<usize>,
    },
    /// ln P(X > x) against ln x with local slopes.
    Loglog {
        #[arg(long, default_value = "1:20:0.1")]
        x: Grid,
        #[arg(long)]
        n_list: Option<List<usize>>,
        /// Half width of the least-squares slope window, in grid points.
        #[arg(long, default_value_t = 2)]
        half_width: usize,
    },
    /// Monte Carlo check of moments and exceedances against exact values.
    Validate {
        #[arg(long, default_value_t = 1_000_000)]
        n_samples: u64,
        #[arg(long, default_value = "1,2,3,4")]
        orders: List<usize>,
        #[arg(long, default_value = "1,2,3", allow_hyphen_values = true)]
        k: List<f64>,
        /// Add a target with a deliberately wrong reference value.
        #[arg(long)]
        self_test: bool,
    },
}

/// Comma-separated values.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let items = s
            .split(',')
            .map(|p| {
                let p = p.trim();
                p.parse().map_err(|_| format!("cannot parse {p:?}"))
            })
            .collect::<Result<Vec<T>, _>>()?;
        if items.is_empty() {
            return Err("empty list".into());
        }
        Ok(List(items))
    }
}

/// `min:max:step`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn n_points(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points())
            .map(|i| self.min + i as f64 * self.step)
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts[..] else {
            return Err(format!("expected min:max:step, got {s:?}"));
        };
        let num = |v: &str| -> Result<f64, String> {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("cannot parse {v:?}"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("{v:?} is not finite"))
            }
        };
        let g = Grid {
            min: num(min)?,
            max: num(max)?,
            step: num(step)?,
        };
        if g.step <= 0.0 {
            return Err("step must be positive".into());
        }
        if g.max < g.min {
            return Err(format!("empty range {}:{}", g.min, g.max));
        }
        if g.n_points() > 10_000_000 {
            return Err("grid has more than 10^7 points".into());
        }
        Ok(g)
    }
}
