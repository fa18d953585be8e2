use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{approx, Scalar};

/// Location and scale of the starting Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBase<T> {
    mu: T,
    sigma: T,
}

impl<T: Scalar> GaussianBase<T> {
    pub fn new(mu: T, sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(domain(format!("sigma must be > 0, got {}", approx(&sigma))));
        }
        Ok(Self { mu, sigma })
    }

    pub fn standard() -> Self {
        Self {
            mu: T::zero(),
            sigma: T::one(),
        }
    }

    pub fn mu(&self) -> &T {
        &self.mu
    }

    pub fn sigma(&self) -> &T {
        &self.sigma
    }
}

/// Length of a product or recursion: a finite count or the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Depth {
    Finite(usize),
    Infinite,
}

impl Depth {
    pub fn is_infinite(self) -> bool {
        matches!(self, Depth::Infinite)
    }
}

impl From<usize> for Depth {
    fn from(n: usize) -> Self {
        Depth::Finite(n)
    }
}

impl std::fmt::Display for Depth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Depth::Finite(n) => write!(f, "{n}"),
            Depth::Infinite => f.write_str("inf"),
        }
    }
}
