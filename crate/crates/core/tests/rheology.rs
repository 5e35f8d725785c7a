use anomaly_core::grid::TimeGrid;
use anomaly_core::rheology::{
    complex_modulus, dynamic_moduli, qlv_stress, relaxation_modulus, sb_free_energy, stress_response, vevp_simulate,
    RheoModel, StrainHistory,
};
use anomaly_core::Error;
use num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_li};
use std::f64::consts::PI;

fn sb(e: f64, alpha: f64) -> RheoModel {
    RheoModel::Sb { e, alpha }
}

fn log_slope(m: &RheoModel, t: f64) -> f64 {
    let h = 1e-3;
    let a = relaxation_modulus(m, t * (1.0 + h)).unwrap().ln();
    let b = relaxation_modulus(m, t * (1.0 - h)).unwrap().ln();
    (a - b) / ((1.0 + h).ln() - (1.0 - h).ln())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Exact Caputo derivative at t of the piecewise-linear interpolant of u on a
/// uniform grid: each cell contributes slope · ∫ (t − s)^{−α} ds / Γ(1 − α).
fn caputo_piecewise_linear(u: &[f64], dt: f64, alpha: f64, n: usize) -> f64 {
    let t = n as f64 * dt;
    let mut acc = 0.0;
    for j in 0..n {
        let slope = (u[j + 1] - u[j]) / dt;
        let (a, b) = (t - j as f64 * dt, t - (j + 1) as f64 * dt);
        acc += slope * (a.powf(1.0 - alpha) - b.powf(1.0 - alpha)) / (1.0 - alpha);
    }
    acc / gamma(1.0 - alpha)
}

#[test]
fn invalid_models_rejected() {
    assert!(matches!(sb(1.0, 1.2).validate(), Err(Error::OrderRange(_))));
    assert!(sb(-1.0, 0.5).validate().is_err());
    let fkv = RheoModel::Fkv { e1: 1.0, alpha1: 0.7, e2: 1.0, alpha2: 0.3 };
    assert!(matches!(fkv.validate(), Err(Error::OrderRange(_))));
    let qlv = RheoModel::Qlv { a: 1.0, b: 1.0, c: 0.0, d: 0.0, alpha: 0.5 };
    assert!(qlv.validate().is_err());
    assert!(relaxation_modulus(&sb(1.0, 0.5), 0.0).is_err());
    assert!(relaxation_modulus(&sb(1.0, 0.5), -1.0).is_err());
}

#[test]
fn sb_modulus_tends_to_spring() {
    let g = relaxation_modulus(&sb(3.0, 1e-3), 1.0).unwrap();
    assert!(rel(g, 3.0) < 5e-3);
}

#[test]
fn fkv_power_law_regimes() {
    let m = RheoModel::Fkv { e1: 1.0, alpha1: 0.3, e2: 1.0, alpha2: 0.7 };
    assert!((log_slope(&m, 1e-8) + 0.7).abs() < 0.02);
    assert!((log_slope(&m, 1e8) + 0.3).abs() < 0.02);
}

#[test]
fn fm_power_law_regimes() {
    let m = RheoModel::Fm { e1: 1.0, alpha1: 0.3, e2: 1.0, alpha2: 0.7 };
    assert!((log_slope(&m, 1e-6) + 0.3).abs() < 0.02);
    assert!((log_slope(&m, 1e6) + 0.7).abs() < 0.02);
    // both ends are single SB elements
    assert!(rel(relaxation_modulus(&m, 1e-8).unwrap(), 1e-8f64.powf(-0.3) / gamma(0.7)) < 0.01);
    assert!(rel(relaxation_modulus(&m, 1e8).unwrap(), 1e8f64.powf(-0.7) / gamma(0.3)) < 0.01);
}

#[test]
fn sb_dynamic_moduli() {
    let (g1, g2) = dynamic_moduli(&sb(1.0, 0.5), 1.0).unwrap();
    assert!((g1 - 0.5f64.sqrt()).abs() < 1e-14);
    assert!((g2 - 0.5f64.sqrt()).abs() < 1e-14);
    for &(alpha, w) in &[(0.2, 0.3), (0.45, 2.0), (0.8, 17.0)] {
        let (g1, g2) = dynamic_moduli(&sb(2.5, alpha), w).unwrap();
        assert!(rel(g2 / g1, (alpha * PI / 2.0).tan()) < 1e-12);
        assert!(rel(g1.hypot(g2), 2.5 * w.powf(alpha)) < 1e-12);
    }
    let (g1, g2) = dynamic_moduli(&sb(1.0, 0.9999), 1.0).unwrap();
    assert!(g1 / g2 < 1e-3);
}

#[test]
fn fkv_moduli_add() {
    let m = RheoModel::Fkv { e1: 2.0, alpha1: 0.2, e2: 0.5, alpha2: 0.9 };
    let g = complex_modulus(&m, 3.0).unwrap();
    let a = complex_modulus(&sb(2.0, 0.2), 3.0).unwrap();
    let b = complex_modulus(&sb(0.5, 0.9), 3.0).unwrap();
    assert!((g - a - b).norm() < 1e-12 * g.norm());
}

/// Simpson's rule for a complex integrand on [a, b] with n (even) cells.
fn simpson(f: impl Fn(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * (h / 3.0)
}

#[test]
fn fm_modulus_matches_fourier_transform_of_relaxation() {
    // G*(ω) = iω ∫0^∞ G(t) e^{−iωt} dt, split at t = 1 and T. Near zero t = u^q
    // removes the t^{−α1} singularity; past T the tail uses the large-t
    // expansion of G term by term, each integrated along t = T − iy.
    let (e1, a1, e2, a2) = (1.0, 0.3, 1.0, 0.7);
    let m = RheoModel::Fm { e1, alpha1: a1, e2, alpha2: a2 };
    let g = |t: f64| relaxation_modulus(&m, t).unwrap();
    let q = 1.0 / (1.0 - a1);
    let big_t = 200.0f64;
    let a = a2 - a1;
    let tail_terms: Vec<(f64, f64)> = (1..=6)
        .map(|k| {
            let p = a1 + a * k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            (sign * e1 * (e2 / e1).powi(k) / gamma(1.0 - p), p)
        })
        .collect();
    assert!(rel(tail_terms.iter().map(|&(c, p)| c * big_t.powf(-p)).sum::<f64>(), g(big_t)) < 1e-6);

    let near_u: Vec<f64> = (0..=2000).map(|k| k as f64 / 2000.0).collect();
    let near_g: Vec<f64> = near_u.iter().map(|&u| if u == 0.0 { e1 / gamma(1.0 - a1) } else { g(u.powf(q)) * u.powf(q * a1) }).collect();
    let n_mid = 19_900;
    let mid_h = (big_t - 1.0) / n_mid as f64;
    let mid_g: Vec<f64> = (0..=n_mid).map(|k| g(1.0 + k as f64 * mid_h)).collect();

    for &w in &[0.1, 0.3, 1.0, 3.0, 10.0] {
        let osc = |t: f64| Complex64::from_polar(1.0, -w * t);
        let near = simpson(|u| osc(u.powf(q)) * near_g[(u * 2000.0).round() as usize] * q, 0.0, 1.0, 2000);
        let mid = simpson(|t| osc(t) * mid_g[((t - 1.0) / mid_h).round() as usize], 1.0, big_t, n_mid);
        let mut tail = Complex64::new(0.0, 0.0);
        for &(c, p) in &tail_terms {
            let f = |s: f64| Complex64::new(big_t, -s / w).powf(-p) * (-s).exp();
            tail += simpson(f, 0.0, 50.0, 10_000) * c;
        }
        tail *= Complex64::new(0.0, -1.0 / w) * osc(big_t);
        let oracle = Complex64::new(0.0, w) * (near + mid + tail);
        let gs = complex_modulus(&m, w).unwrap();
        assert!((gs - oracle).norm() < 0.01 * gs.norm(), "w={w}: {gs} vs {oracle}");
    }
}

#[test]
fn zero_strain_gives_zero_stress() {
    let h = StrainHistory::new(TimeGrid::new(0.01, 50).unwrap(), vec![0.0; 51]).unwrap();
    for m in [
        sb(1.0, 0.4),
        RheoModel::Fkv { e1: 1.0, alpha1: 0.2, e2: 2.0, alpha2: 0.6 },
        RheoModel::Fm { e1: 1.0, alpha1: 0.2, e2: 2.0, alpha2: 0.6 },
    ] {
        assert!(stress_response(&m, &h).unwrap().iter().all(|&s| s == 0.0));
    }
    assert_eq!(sb_free_energy(1.0, 0.5, &h).unwrap(), 0.0);
}

#[test]
fn sb_step_strain_follows_relaxation_modulus() {
    let h = StrainHistory::step(TimeGrid::new(0.01, 400).unwrap(), 0.05).unwrap();
    let m = sb(4.0, 0.35);
    let s = stress_response(&m, &h).unwrap();
    for n in 10..=400 {
        let t = n as f64 * 0.01;
        assert!(rel(s[n], 0.05 * 4.0 * t.powf(-0.35) / gamma(0.65)) < 0.02);
    }
    let fkv = RheoModel::Fkv { e1: 1.0, alpha1: 0.2, e2: 3.0, alpha2: 0.8 };
    let s = stress_response(&fkv, &h).unwrap();
    for n in (10..=400).step_by(13) {
        assert!(rel(s[n], 0.05 * relaxation_modulus(&fkv, n as f64 * 0.01).unwrap()) < 0.02);
    }
}

#[test]
fn fm_quick_ramp_follows_relaxation_modulus() {
    // strain ramps to ε₀ over the first cell; exact stress is ε₀/Δt ∫ G over [t − Δt, t]
    let dt = 1e-3;
    let m = RheoModel::Fm { e1: 2.0, alpha1: 0.25, e2: 1.0, alpha2: 0.75 };
    let eps: Vec<f64> = (0..=2000).map(|n| if n == 0 { 0.0 } else { 0.01 }).collect();
    let h = StrainHistory::new(TimeGrid::new(dt, 2000).unwrap(), eps).unwrap();
    let s = stress_response(&m, &h).unwrap();
    for n in [100, 300, 700, 1200, 2000] {
        let t = n as f64 * dt;
        let k = 200;
        let hq = dt / k as f64;
        let avg: f64 = (0..k).map(|i| relaxation_modulus(&m, t - dt + (i as f64 + 0.5) * hq).unwrap()).sum::<f64>() / k as f64;
        assert!(rel(s[n], 0.01 * avg) < 0.02, "t={t}: {} vs {}", s[n], 0.01 * avg);
    }
}

#[test]
fn sb_stress_exact_for_piecewise_linear_strain() {
    let dt = 0.02;
    let eps: Vec<f64> = (0..=150).map(|n| ((n as f64) * 0.37).sin() * (n as f64 * dt)).collect();
    let h = StrainHistory::new(TimeGrid::new(dt, 150).unwrap(), eps.clone()).unwrap();
    let s = stress_response(&sb(1.7, 0.55), &h).unwrap();
    for n in 1..=150 {
        let exact = 1.7 * caputo_piecewise_linear(&eps, dt, 0.55, n);
        assert!((s[n] - exact).abs() < 1e-10 * (1.0 + exact.abs()));
    }
}

#[test]
fn fm_reduces_to_classical_maxwell() {
    // spring E in series with dashpot η: σ + (η/E) σ' = η ε', ramp ε = t
    let (e, eta) = (2.0, 1.5);
    let m = RheoModel::Fm { e1: e, alpha1: 1e-3, e2: eta, alpha2: 0.999 };
    let dt = 1e-3;
    let h = StrainHistory::from_fn(TimeGrid::new(dt, 3000).unwrap(), |t| t).unwrap();
    let s = stress_response(&m, &h).unwrap();
    for n in (50..=3000).step_by(50) {
        let t = n as f64 * dt;
        let exact = eta * (1.0 - (-e * t / eta).exp());
        assert!(rel(s[n], exact) < 0.02, "t={t}: {} vs {exact}", s[n]);
    }
}

#[test]
fn linear_models_superpose() {
    let tg = TimeGrid::new(0.01, 300).unwrap();
    let h1 = StrainHistory::from_fn(tg, |t| (3.0 * t).sin()).unwrap();
    let h2 = StrainHistory::from_fn(tg, |t| t * t - 0.4 * t).unwrap();
    let (a, b) = (1.3, -0.7);
    let mix: Vec<f64> = h1.strain.iter().zip(&h2.strain).map(|(x, y)| a * x + b * y).collect();
    let hm = StrainHistory::new(tg, mix).unwrap();
    for m in [
        sb(2.0, 0.45),
        RheoModel::Fkv { e1: 1.0, alpha1: 0.1, e2: 0.5, alpha2: 0.9 },
        RheoModel::Fm { e1: 1.0, alpha1: 0.3, e2: 4.0, alpha2: 0.8 },
    ] {
        let s1 = stress_response(&m, &h1).unwrap();
        let s2 = stress_response(&m, &h2).unwrap();
        let sm = stress_response(&m, &hm).unwrap();
        for n in 0..=300 {
            let lin = a * s1[n] + b * s2[n];
            assert!((sm[n] - lin).abs() < 1e-10 * (1.0 + lin.abs()), "{m:?} n={n}");
        }
    }
}

fn cycle_work(s: &[f64], eps: &[f64], from: usize, to: usize) -> f64 {
    (from..to).map(|n| 0.5 * (s[n] + s[n + 1]) * (eps[n + 1] - eps[n])).sum()
}

#[test]
fn sb_cycles_dissipate() {
    let dt = 1e-3;
    let per = 1000;
    let tg = TimeGrid::new(dt, 5 * per).unwrap();
    let tri = |t: f64| {
        let x = t.fract();
        if x < 0.25 { 4.0 * x } else if x < 0.75 { 2.0 - 4.0 * x } else { 4.0 * x - 4.0 }
    };
    let trap = |t: f64| (1.5 * tri(t)).clamp(-1.0, 1.0);
    let shapes: [&dyn Fn(f64) -> f64; 3] = [&|t: f64| (2.0 * PI * t).sin(), &tri, &trap];
    let m = sb(1.0, 0.5);
    for f in shapes {
        let h = StrainHistory::from_fn(tg, f).unwrap();
        let s = stress_response(&m, &h).unwrap();
        for c in 0..5 {
            assert!(cycle_work(&s, &h.strain, c * per, (c + 1) * per) > 0.0);
        }
    }
    // late sine cycles approach the steady value π ε₀² G''(ω)
    let h = StrainHistory::from_fn(tg, |t| (2.0 * PI * t).sin()).unwrap();
    let s = stress_response(&m, &h).unwrap();
    let (_, g2) = dynamic_moduli(&m, 2.0 * PI).unwrap();
    assert!(rel(cycle_work(&s, &h.strain, 4 * per, 5 * per), PI * g2) < 0.03);
}

#[test]
fn qlv_small_b_is_linear() {
    // B → 0: σ ≈ A B ∫ g(t − s) ε'(s) ds; ramp ε = t gives A B (C t + D t^{1−α}/(1−α))
    let (a, b, c, d, alpha) = (50.0, 1e-4, 0.6, 0.4, 0.35);
    let m = RheoModel::Qlv { a, b, c, d, alpha };
    let h = StrainHistory::from_fn(TimeGrid::new(0.005, 400).unwrap(), |t| t).unwrap();
    let s = qlv_stress(&m, &h).unwrap();
    for n in 1..=400 {
        let t = n as f64 * 0.005;
        let lin = a * b * (c * t + d * t.powf(1.0 - alpha) / (1.0 - alpha));
        assert!(rel(s[n], lin) < 0.01);
    }
    // with C = 0 the response is an SB element of modulus A B D Γ(1 − α)
    let m0 = RheoModel::Qlv { a, b, c: 0.0, d, alpha };
    let s0 = qlv_stress(&m0, &h).unwrap();
    let ssb = stress_response(&sb(a * b * d * gamma(1.0 - alpha), alpha), &h).unwrap();
    for n in 1..=400 {
        assert!(rel(s0[n], ssb[n]) < 0.01);
    }
}

#[test]
fn qlv_without_memory_is_elastic() {
    let (a, b, c) = (2.0, 3.0, 0.8);
    let m = RheoModel::Qlv { a, b, c, d: 0.0, alpha: 0.5 };
    let h = StrainHistory::from_fn(TimeGrid::new(0.01, 200).unwrap(), |t| 0.3 * (2.0 * t).sin()).unwrap();
    let s = qlv_stress(&m, &h).unwrap();
    for (sv, e) in s.iter().zip(&h.strain) {
        let exact = c * a * ((b * e).exp() - 1.0);
        assert!((sv - exact).abs() < 1e-12 * (1.0 + exact.abs()));
    }
}

#[test]
fn qlv_nonlinear_ramp_matches_incomplete_gamma() {
    // ε = t: σ = A B [C (e^{Bt} − 1)/B + D e^{Bt} B^{α−1} γ(1 − α, B t)]
    let (a, b, c, d, alpha) = (1.5, 1.2, 0.3, 0.7, 0.4);
    let m = RheoModel::Qlv { a, b, c, d, alpha };
    let dt = 1e-3;
    let h = StrainHistory::from_fn(TimeGrid::new(dt, 2000).unwrap(), |t| t).unwrap();
    let s = qlv_stress(&m, &h).unwrap();
    for n in (20..=2000).step_by(20) {
        let t = n as f64 * dt;
        let exact = a * ((b * t).exp() - 1.0) * c + a * b * d * (b * t).exp() * b.powf(alpha - 1.0) * gamma_li(1.0 - alpha, b * t);
        assert!(rel(s[n], exact) < 1e-3, "t={t}: {} vs {exact}", s[n]);
    }
}

#[test]
fn free_energy_limits() {
    // ramp to ε₀ over [0, T]: ψ = E r² ((2^{2−α} − 2) T^{2−α}) / (2Γ(1−α)(1−α)(2−α)), r = ε₀/T
    let exact = |e: f64, alpha: f64, eps0: f64, big_t: f64| {
        let r = eps0 / big_t;
        e * r * r * (2f64.powf(2.0 - alpha) - 2.0) * big_t.powf(2.0 - alpha) / (2.0 * gamma(1.0 - alpha) * (1.0 - alpha) * (2.0 - alpha))
    };
    let (e, eps0) = (3.0, 0.2);
    let h = StrainHistory::from_fn(TimeGrid::new(0.01, 200).unwrap(), |t| eps0 * t / 2.0).unwrap();
    for alpha in [1e-3, 0.3, 0.7, 0.99] {
        let psi = sb_free_energy(e, alpha, &h).unwrap();
        assert!(rel(psi, exact(e, alpha, eps0, 2.0)) < 1e-9, "alpha={alpha}");
    }
    let spring = e * eps0 * eps0 / 2.0;
    assert!(rel(sb_free_energy(e, 1e-3, &h).unwrap(), spring) < 0.02);
    assert!(sb_free_energy(e, 0.99, &h).unwrap() < 0.05 * spring);
}

#[test]
fn free_energy_nonnegative_on_oscillating_histories() {
    let tg = TimeGrid::new(0.02, 120).unwrap();
    for (k, alpha) in [(1.0, 0.2), (4.0, 0.5), (9.0, 0.8)] {
        let h = StrainHistory::from_fn(tg, |t| (k * t).sin() * (1.0 - t / 3.0)).unwrap();
        assert!(sb_free_energy(1.0, alpha, &h).unwrap() >= 0.0);
    }
}

#[test]
fn history_compatibility_checks() {
    assert!(matches!(StrainHistory::from_samples(&[0.0, 0.1, 0.2, 0.35], vec![0.0; 4]), Err(Error::Grid(_))));
    assert!(matches!(StrainHistory::from_samples(&[0.1, 0.2, 0.3], vec![0.0; 3]), Err(Error::Grid(_))));
    let ok = StrainHistory::from_samples(&[0.0, 0.1, 0.2, 0.3], vec![0.0, 0.1, 0.2, 0.3]).unwrap();
    assert_eq!(ok.tgrid.n_steps, 3);

    let step = StrainHistory::step(TimeGrid::new(0.1, 10).unwrap(), 1.0).unwrap();
    let fm = RheoModel::Fm { e1: 1.0, alpha1: 0.2, e2: 1.0, alpha2: 0.6 };
    assert!(matches!(stress_response(&fm, &step), Err(Error::Compatibility(_))));
    assert!(stress_response(&sb(1.0, 0.5), &step).is_ok());
    let jump = StrainHistory::new(TimeGrid::new(0.1, 10).unwrap(), vec![1.0; 11]).unwrap();
    assert!(matches!(stress_response(&fm, &jump), Err(Error::Compatibility(_))));
}

fn vevp(sigma_y: f64, k: f64, hard: f64, alpha_k: f64) -> RheoModel {
    RheoModel::Vevp { e: 10.0, alpha: 0.3, sigma_y, k, h: hard, alpha_k }
}

#[test]
fn vevp_elastic_below_yield() {
    let m = vevp(100.0, 1.0, 1.0, 0.5);
    let h = StrainHistory::from_fn(TimeGrid::new(0.01, 300).unwrap(), |t| 0.5 * (2.0 * t).sin()).unwrap();
    let r = vevp_simulate(&m, &h).unwrap();
    assert!(r.plastic_strain.iter().all(|&p| p == 0.0));
    assert!(r.q.iter().all(|&q| q == 0.0));
    let s = stress_response(&sb(10.0, 0.3), &h).unwrap();
    assert_eq!(r.stress, s);
}

#[test]
fn vevp_monotone_loading_hardens() {
    let m = vevp(1.0, 0.5, 2.0, 0.6);
    let h = StrainHistory::from_fn(TimeGrid::new(0.01, 400).unwrap(), |t| 2.0 * t).unwrap();
    let r = vevp_simulate(&m, &h).unwrap();
    let first = r.q.iter().position(|&q| q > 0.0).expect("never yielded");
    for n in first..400 {
        assert!(r.q[n + 1] > r.q[n], "q stalled at step {n}");
    }
    assert!(r.q.windows(2).all(|w| w[1] >= w[0]));
    assert!(r.stress.iter().all(|s| s.is_finite()));
}

#[test]
fn vevp_reduces_to_perzyna() {
    // α → 0, αK → 1, H = 0: σ' = E(ε' − γ'), γ' = ⟨σ − σY⟩ / K
    let (e, sy, k, rate) = (10.0, 1.0, 0.5, 1.0);
    let m = RheoModel::Vevp { e, alpha: 1e-3, sigma_y: sy, k, h: 0.0, alpha_k: 0.999 };
    let dt = 1e-3;
    let h = StrainHistory::from_fn(TimeGrid::new(dt, 1000).unwrap(), |t| rate * t).unwrap();
    let r = vevp_simulate(&m, &h).unwrap();

    let rhs = |s: f64| e * (rate - ((s - sy) / k).max(0.0));
    let sub = 20;
    let hh = dt / sub as f64;
    let mut s = 0.0;
    let mut gam = 0.0;
    for n in 1..=1000 {
        for _ in 0..sub {
            let k1 = rhs(s);
            let k2 = rhs(s + 0.5 * hh * k1);
            let k3 = rhs(s + 0.5 * hh * k2);
            let k4 = rhs(s + hh * k3);
            let g = |v: f64| ((v - sy) / k).max(0.0);
            gam += hh / 6.0 * (g(s) + 2.0 * g(s + 0.5 * hh * k1) + 2.0 * g(s + 0.5 * hh * k2) + g(s + hh * k3));
            s += hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if n % 50 == 0 {
            assert!(rel(r.stress[n], s) < 0.02, "t={}: {} vs {s}", n as f64 * dt, r.stress[n]);
            assert!((r.plastic_strain[n] - gam).abs() < 1e-3);
            if gam > 0.05 {
                assert!(rel(r.plastic_strain[n], gam) < 0.02, "t={}: {} vs {gam}", n as f64 * dt, r.plastic_strain[n]);
            }
        }
    }
}
