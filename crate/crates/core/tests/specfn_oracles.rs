//! Special functions against independent references: frozen 50-digit
//! values, a Taylor/continued-fraction evaluation of erfc written here, and
//! numerical quadrature for Gaussian moments.

#![allow(clippy::excessive_precision)]

use branchmix::quadrature::integrate;
use branchmix::specfn::{
    erf, erfc, gaussian_density, gaussian_raw_moment, ln_erfc, q_pochhammer, q_pochhammer_finite,
    QPochhammerArgs,
};
use branchmix::Depth;
use proptest::prelude::*;

/// erfc(z) to 20 significant digits (mpmath, 50-digit working precision).
const ERFC_REFERENCE: &[(f64, f64)] = &[
    (-6.0, 1.9999999999999999785),
    (-3.5, 1.9999992569016276586),
    (-1.0, 1.8427007929497148693),
    (-0.3, 1.3286267594591274162),
    (0.0, 1.0),
    (0.1, 8.875370839817151016e-1),
    (0.25, 7.2367360983176306701e-1),
    (0.46875, 5.0738652678206200841e-1),
    (0.5, 4.7950012218695346232e-1),
    (0.75, 2.888443663464848684e-1),
    (1.0, 1.5729920705028513066e-1),
    (1.5, 3.3894853524689272933e-2),
    (2.0, 4.6777349810472658379e-3),
    (2.5, 4.0695201744495893956e-4),
    (3.0, 2.2090496998585441373e-5),
    (3.5, 7.4309837234141274552e-7),
    (4.0, 1.5417257900280018852e-8),
    (4.5, 1.9661604415428874763e-10),
    (5.0, 1.5374597944280348502e-12),
    (6.0, 2.1519736712498913117e-17),
    (7.0, 4.1838256077794143986e-23),
    (8.0, 1.122429717298292708e-29),
    (9.0, 4.1370317465138102381e-37),
    (10.0, 2.088487583762544757e-45),
];

/// ln erfc(z) past the f64 underflow of erfc itself.
const LN_ERFC_REFERENCE: &[(f64, f64)] = &[
    (15.0, -228.28262515380638614),
    (26.0, -679.83119976319423026),
    (27.0, -732.86888650789741098),
    (30.0, -903.97411711064387808),
    (50.0, -2504.4845878484513719),
    (100.0, -10005.177585122664333),
];

/// erf by its Maclaurin series; accurate for |z| ≤ 2.
fn erf_series(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    let z2 = z * z;
    for n in 1..200 {
        term *= -z2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

/// erfc by the Laplace continued fraction (modified Lentz), z ≥ 2.
fn erfc_continued_fraction(z: f64) -> f64 {
    // erfc z = e^{−z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    let tiny = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for n in 1..500 {
        let a = n as f64 / 2.0;
        d = z + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / (std::f64::consts::PI.sqrt() * f)
}

#[test]
fn erfc_matches_frozen_reference() {
    for &(z, expected) in ERFC_REFERENCE {
        let got = erfc(z).unwrap();
        let rel = (got / expected - 1.0).abs();
        assert!(
            rel <= 1e-13,
            "erfc({z}) = {got:e}, want {expected:e}, rel {rel:e}"
        );
    }
}

#[test]
fn ln_erfc_matches_frozen_reference() {
    for &(z, expected) in LN_ERFC_REFERENCE {
        let got = ln_erfc(z);
        assert!((got - expected).abs() <= 1e-13 * expected.abs(), "z = {z}");
    }
}

#[test]
fn erfc_far_tail_is_positive_and_tiny() {
    let v = erfc(10.0_f64).unwrap();
    assert!(v > 0.0 && v < 1e-44);
}

#[test]
fn erfc_relative_error_on_dense_grid() {
    for i in 0..=1000 {
        let z = i as f64 * 0.01;
        let want = if z <= 2.0 {
            1.0 - erf_series(z)
        } else {
            erfc_continued_fraction(z)
        };
        let got = erfc(z).unwrap();
        let rel = (got / want - 1.0).abs();
        // 1 − erf loses a little to cancellation just below 2
        assert!(rel <= 1e-12, "z = {z}: {got:e} vs {want:e} (rel {rel:e})");
    }
}

#[test]
fn erf_plus_erfc_is_one() {
    for i in 0..=1200 {
        let z = -6.0 + 0.01 * i as f64;
        let s = erf(z).unwrap() + erfc(z).unwrap();
        assert!((s - 1.0).abs() <= 1e-13, "z = {z}");
    }
}

#[test]
fn four_sigma_tail_by_quadrature() {
    let closed = 0.5 * erfc(4.0 / 2f64.sqrt()).unwrap();
    let quad = integrate(|x| gaussian_density(0.0, 1.0, x), 4.0, 40.0, 1e-18).unwrap();
    assert!((closed / quad - 1.0).abs() < 1e-10);
    assert!((closed - 3.167e-5).abs() < 1e-8);
}

#[test]
fn q_pochhammer_bleed_factor() {
    let v = q_pochhammer(&QPochhammerArgs::infinite(-0.04, 0.81)).unwrap();
    let direct: f64 = (0..2000).map(|i| 1.0 + 0.04 * 0.81f64.powi(i)).product();
    assert!((v / direct - 1.0).abs() < 1e-14);
    assert!((v - 1.2315).abs() < 1e-4);
}

fn gaussian_moment_by_quadrature(order: usize, mu: f64, sigma: f64) -> f64 {
    let f = |x: f64| x.powi(order as i32) * gaussian_density(mu, sigma, x);
    let (lo, hi) = (mu - 14.0 * sigma, mu + 14.0 * sigma);
    // split at μ so the peak sits on a panel edge
    integrate(f, lo, mu, 1e-13).unwrap() + integrate(f, mu, hi, 1e-13).unwrap()
}

#[test]
fn gaussian_moments_match_quadrature() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let mu: f64 = rng.random_range(-2.0..2.0);
        let sigma: f64 = rng.random_range(0.3..2.5);
        for order in 0..=8 {
            let exact = gaussian_raw_moment(order, &mu, &sigma).unwrap();
            let quad = gaussian_moment_by_quadrature(order, mu, sigma);
            let scale = exact.abs().max(sigma.powi(order as i32));
            assert!(
                (exact - quad).abs() <= 1e-9 * scale,
                "order {order}, mu {mu}, sigma {sigma}: {exact} vs {quad}"
            );
        }
    }
}

proptest! {
    #[test]
    fn q_pochhammer_recurrence(a in -1.0f64..=1.0, q in -0.99f64..=0.99, n in 0usize..=50) {
        let here = q_pochhammer(&QPochhammerArgs::new(a, q, n)).unwrap();
        let next = q_pochhammer(&QPochhammerArgs::new(a, q, Depth::Finite(n + 1))).unwrap();
        let step = here * (1.0 - a * q.powi(n as i32));
        let tol = 1e-14 * next.abs().max(1e-300) + 1e-300;
        prop_assert!((next - step).abs() <= tol.max(1e-14 * here.abs()), "{next} vs {step}");
    }

    #[test]
    fn finite_and_generic_products_agree(a in -1.0f64..=1.0, q in -0.99f64..=0.99, n in 0usize..=50) {
        let generic = q_pochhammer(&QPochhammerArgs::new(a, q, n)).unwrap();
        prop_assert_eq!(generic, q_pochhammer_finite(&a, &q, n));
    }

    #[test]
    fn infinite_product_is_the_limit(a in -0.9f64..=0.9, q in -0.9f64..=0.9) {
        let inf = q_pochhammer(&QPochhammerArgs::infinite(a, q)).unwrap();
        let long = q_pochhammer(&QPochhammerArgs::new(a, q, 2000)).unwrap();
        prop_assert!((inf - long).abs() <= 1e-13 * long.abs().max(1e-3));
    }
}
