//! The q-Pochhammer symbol (a; q)_n = ∏_{i=0}^{n−1} (1 − a·qⁱ).

use serde::{Deserialize, Serialize};

use crate::base::Depth;
use crate::error::{Error, Result};
use crate::scalar::{approx, lit, Real, Scalar};

/// Increment below which the infinite product is considered converged.
pub const CONVERGENCE_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QPochhammerArgs<T> {
    pub a: T,
    pub q: T,
    pub n: Depth,
}

impl<T> QPochhammerArgs<T> {
    pub fn new(a: T, q: T, n: impl Into<Depth>) -> Self {
        Self { a, q, n: n.into() }
    }

    pub fn infinite(a: T, q: T) -> Self {
        Self {
            a,
            q,
            n: Depth::Infinite,
        }
    }
}

/// Finite product with index i = 0 … n−1. Exact for rational scalars.
pub fn q_pochhammer_finite<T: Scalar>(a: &T, q: &T, n: usize) -> T {
    let mut acc = T::one();
    let mut a_qi = a.clone();
    for _ in 0..n {
        acc = acc * (T::one() - a_qi.clone());
        a_qi = a_qi * q.clone();
    }
    acc
}

/// (a; q)_n for finite n, or the limit n → ∞ when |q| < 1.
///
/// The infinite product stops once |a·qⁱ| drops below
/// [`CONVERGENCE_CUTOFF`]; the remaining tail perturbs the result by at
/// most about `cutoff / (1 − |q|)` relative.
pub fn q_pochhammer<T: Real>(args: &QPochhammerArgs<T>) -> Result<T> {
    match args.n {
        Depth::Finite(n) => Ok(q_pochhammer_finite(&args.a, &args.q, n)),
        Depth::Infinite => {
            if !(args.q.abs() < T::one()) {
                return Err(Error::Divergence { q: approx(&args.q) });
            }
            let cutoff: T = lit(CONVERGENCE_CUTOFF);
            let mut acc = T::one();
            let mut a_qi = args.a;
            while a_qi.abs() >= cutoff {
                acc = acc * (T::one() - a_qi);
                a_qi = a_qi * args.q;
            }
            Ok(acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn empty_product() {
        let v = q_pochhammer(&QPochhammerArgs::new(0.3, 0.5, 0)).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn zero_a_gives_one() {
        let v = q_pochhammer(&QPochhammerArgs::infinite(0.0, 0.9)).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn divergent_base_rejected() {
        let err = q_pochhammer(&QPochhammerArgs::infinite(0.1, 1.0)).unwrap_err();
        assert_eq!(err, Error::Divergence { q: 1.0 });
        assert!(q_pochhammer(&QPochhammerArgs::infinite(0.1, -1.5)).is_err());
        // finite n is fine for any q
        assert!(q_pochhammer(&QPochhammerArgs::new(0.1, 2.0, 5)).is_ok());
    }

    #[test]
    fn negative_q_converges() {
        let v = q_pochhammer(&QPochhammerArgs::infinite(0.5, -0.5)).unwrap();
        let direct: f64 = (0..200).map(|i| 1.0 - 0.5 * (-0.5f64).powi(i)).product();
        assert!((v - direct).abs() < 1e-14);
    }

    #[test]
    fn exact_small_case() {
        // (1/2; 1/2)_2 = (1 − 1/2)(1 − 1/4) = 3/8
        let half = BigRational::new(1.into(), 2.into());
        let v = q_pochhammer_finite(&half, &half, 2);
        assert_eq!(v, BigRational::new(3.into(), 8.into()));
    }
}
