use anomaly_core::grid::{Boundary, Grid1D};
use anomaly_core::stable_law::{self, characteristic_function, StableParams};
use anomaly_core::verification::compare_cdf;
use anomaly_core::Error;
use approx::assert_relative_eq;
use proptest::prelude::*;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

fn std(alpha: f64, gamma: f64) -> StableParams {
    StableParams::standard(alpha, gamma).unwrap()
}

#[test]
fn construction_rejects_out_of_range() {
    for (a, g, s) in [(0.0, 0.0, 1.0), (2.1, 0.0, 1.0), (1.5, 1.2, 1.0), (1.5, 0.0, 0.0), (f64::NAN, 0.0, 1.0)] {
        assert!(matches!(StableParams::new(a, g, s, 0.0), Err(Error::Domain(_))), "{a} {g} {s}");
    }
}

#[test]
fn characteristic_function_cases() {
    let s = 0.7;
    let p = StableParams::new(2.0, 0.0, s, 0.0).unwrap();
    for xi in [-3.0, -0.5, 0.0, 1.0, 2.5] {
        let c = characteristic_function(&p, xi).unwrap();
        assert_relative_eq!(c.re, (-s * s * xi * xi).exp(), epsilon = 1e-15);
        assert_eq!(c.im, 0.0);
    }
    let c = characteristic_function(&std(1.0, 0.0), 1.0).unwrap();
    assert_relative_eq!(c.re, (-1.0f64).exp(), epsilon = 1e-15);
    let c = characteristic_function(&std(1.0, 0.6), 0.0).unwrap();
    assert_eq!((c.re, c.im), (1.0, 0.0));
}

#[test]
fn gaussian_density_has_variance_two_sigma_squared() {
    let p = std(2.0, 0.0);
    for k in 0..=40 {
        let x = -8.0 + 0.4 * k as f64;
        let exact = (-x * x / 4.0).exp() / (4.0 * PI).sqrt();
        assert!((stable_law::pdf(&p, x).unwrap() - exact).abs() < 1e-8, "x={x}");
    }
}

#[test]
fn cauchy_and_levy_closed_forms() {
    let c = std(1.0, 0.0);
    let l = std(0.5, 1.0);
    for k in 0..=60 {
        let x = -15.0 + 0.5 * k as f64;
        assert!((stable_law::pdf(&c, x).unwrap() - 1.0 / (PI * (1.0 + x * x))).abs() < 1e-6);
        if x > 0.0 {
            let exact = (2.0 * PI).sqrt().recip() * x.powf(-1.5) * (-0.5 / x).exp();
            assert!((stable_law::pdf(&l, x).unwrap() - exact).abs() < 1e-6, "x={x}");
        }
    }
    assert!((stable_law::cdf(&c, 1.0).unwrap() - 0.75).abs() < 1e-6);
    // Lévy cdf is erfc(1/√(2x))
    for x in [0.3, 1.0, 4.0, 20.0] {
        let exact = statrs::function::erf::erfc((0.5 / x as f64).sqrt());
        assert!((stable_law::cdf(&l, x).unwrap() - exact).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn pareto_tail_constant() {
    // x^{1+α} f(x) → Γ(1+α) sin(πα/2) / π for the standard symmetric law
    let a = 1.5;
    let c = gamma(1.0 + a) * (PI * a / 2.0).sin() / PI;
    let v = stable_law::pdf(&std(a, 0.0), 50.0).unwrap() * 50f64.powf(1.0 + a);
    assert!((v / c - 1.0).abs() < 0.02, "{v} vs {c}");
    let v30 = stable_law::pdf(&std(a, 0.0), 30.0).unwrap() * 30f64.powf(1.0 + a);
    assert!((v - c).abs() < (v30 - c).abs());
}

#[test]
fn density_integrates_to_one() {
    for (a, g) in [(1.5, 0.0), (1.2, 0.5), (0.8, -0.3), (1.0, 0.0)] {
        let p = std(a, g);
        let m = stable_law::cdf(&p, 1e4).unwrap() - stable_law::cdf(&p, -1e4).unwrap();
        let tail = 2.0 * gamma(a) * (PI * a / 2.0).sin() / PI * 1e4f64.powf(-a);
        assert!((m - 1.0).abs() < 2.0 * tail + 1e-6, "({a},{g}) mass {m}");
        let q = anomaly_core::quad::integrate(|x| stable_law::pdf(&p, x).unwrap(), -30.0, 30.0, 1e-10, 1e-10);
        let inner = stable_law::cdf(&p, 30.0).unwrap() - stable_law::cdf(&p, -30.0).unwrap();
        assert!((q.value - inner).abs() < 1e-5, "({a},{g}) {} vs {inner}", q.value);
    }
}

#[test]
fn cdf_matches_pdf_by_differencing() {
    for (a, g) in [(1.7, 0.0), (1.3, 0.8), (0.7, 0.4)] {
        let p = std(a, g);
        for x in [-2.0, -0.4, 0.3, 1.1, 3.0] {
            let h = 1e-3;
            let d = (stable_law::cdf(&p, x + h).unwrap() - stable_law::cdf(&p, x - h).unwrap()) / (2.0 * h);
            assert!((d - stable_law::pdf(&p, x).unwrap()).abs() < 1e-5, "({a},{g}) x={x}");
        }
    }
}

#[test]
fn normal_case_cdf_is_half_at_zero() {
    assert!((stable_law::cdf(&std(2.0, 0.0), 0.0).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn totally_skewed_samples_are_positive() {
    let s = stable_law::sample(&std(0.5, 1.0), 20_000, 5).unwrap();
    assert!(s.iter().all(|&v| v > 0.0));
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let p = std(1.3, 0.2);
    let a = stable_law::sample(&p, 10_000, 42).unwrap();
    let b = stable_law::sample(&p, 10_000, 42).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(a, stable_law::sample(&p, 10_000, 43).unwrap());
    // a prefix of a longer draw is the shorter draw
    let c = stable_law::sample(&p, 5_000, 42).unwrap();
    assert_eq!(&a[..5_000], &c[..]);
}

#[test]
fn convolution_stability() {
    for (a, seed) in [(1.5, 1), (0.9, 2)] {
        let p = std(a, 0.0);
        let x = stable_law::sample(&p, 50_000, seed).unwrap();
        let y = stable_law::sample(&p, 50_000, seed + 100).unwrap();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
        let scaled = StableParams::new(a, 0.0, 2f64.powf(1.0 / a), 0.0).unwrap();
        let grid = Grid1D::new(-20.0, 0.1, 401, Boundary::FreeSpace).unwrap();
        let r = compare_cdf(&sum, |v| stable_law::cdf(&scaled, v), &grid, 0.01).unwrap();
        assert!(r.pass, "alpha {a}: KS {}", r.ks_distance);
    }
}

#[test]
fn alpha_one_skewed_sampler_matches_cdf() {
    let p = StableParams::new(1.0, 0.5, 2.0, 1.0).unwrap();
    let s = stable_law::sample(&p, 50_000, 9).unwrap();
    let grid = Grid1D::new(-30.0, 0.2, 301, Boundary::FreeSpace).unwrap();
    let r = compare_cdf(&s, |v| stable_law::cdf(&p, v), &grid, 0.01).unwrap();
    assert!(r.pass, "KS {}", r.ks_distance);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characteristic_function_bounded_and_conjugate(a in 0.1f64..=2.0, g in -1.0f64..=1.0, xi in -20.0f64..20.0) {
        let p = StableParams::new(a, g, 1.3, 0.4).unwrap();
        let c = characteristic_function(&p, xi).unwrap();
        prop_assert!(c.norm() <= 1.0 + 1e-15);
        if xi.abs() > 1e-3 {
            prop_assert!(c.norm() < 1.0);
        }
        let s = StableParams::new(a, 0.0, 1.3, 0.0).unwrap();
        let (u, v) = (characteristic_function(&s, xi).unwrap(), characteristic_function(&s, -xi).unwrap());
        prop_assert!((u - v.conj()).norm() < 1e-15);
    }

    #[test]
    fn symmetric_cdf_reflects(a in 0.6f64..=2.0, x in 0.0f64..10.0) {
        let p = std(a, 0.0);
        let s = stable_law::cdf(&p, x).unwrap() + stable_law::cdf(&p, -x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-7);
    }
}
