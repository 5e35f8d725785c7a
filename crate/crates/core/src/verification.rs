//! Density comparisons, power-law fits and the GSER estimator.

use crate::error::{domain, Error, Result};
use crate::gamma::gamma;
use crate::grid::Grid1D;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub ks_distance: f64,
    pub l1_distance: f64,
    pub n_samples: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Compare two densities sampled at the nodes of `bins` (cell width dx).
/// KS is the largest gap between the running cell sums; L1 is Σ|a − b| dx.
pub fn compare_densities(a: &[f64], b: &[f64], bins: &Grid1D, threshold: f64, n_samples: usize) -> Result<ComparisonReport> {
    if a.len() != bins.n || b.len() != bins.n {
        return domain("density arrays must match the bin grid");
    }
    if a.iter().chain(b).any(|v| !(v.is_finite() && *v >= -1e-12)) {
        return domain("densities must be finite and nonnegative");
    }
    let dx = bins.dx;
    for (name, d) in [("first", a), ("second", b)] {
        let mass = d.iter().sum::<f64>() * dx;
        if !(0.98..=1.02).contains(&mass) {
            return Err(Error::Normalization(format!("{name} density integrates to {mass:.4}")));
        }
    }
    let (mut ca, mut cb, mut ks, mut l1) = (0.0, 0.0, 0.0f64, 0.0);
    for (x, y) in a.iter().zip(b) {
        ca += x * dx;
        cb += y * dx;
        ks = ks.max((ca - cb).abs());
        l1 += (x - y).abs() * dx;
    }
    Ok(ComparisonReport { ks_distance: ks, l1_distance: l1, n_samples, threshold, pass: ks <= threshold })
}

/// Compare an empirical density on `bins` with a reference density function.
pub fn compare_density(
    ensemble_density: &[f64],
    reference: impl Fn(f64) -> Result<f64>,
    bins: &Grid1D,
    threshold: f64,
    n_samples: usize,
) -> Result<ComparisonReport> {
    let r = bins.nodes().into_iter().map(reference).collect::<Result<Vec<_>>>()?;
    compare_densities(ensemble_density, &r, bins, threshold, n_samples)
}

/// KS distance between the empirical CDF of `samples` and `cdf`, both taken
/// at the points of `grid`. L1 is reported as ∫|F_n − F| over the grid span.
pub fn compare_cdf(samples: &[f64], cdf: impl Fn(f64) -> Result<f64>, grid: &Grid1D, threshold: f64) -> Result<ComparisonReport> {
    if samples.is_empty() {
        return domain("no samples to compare");
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut ks = 0.0f64;
    let mut l1 = 0.0;
    for x in grid.nodes() {
        let fe = s.partition_point(|&v| v <= x) as f64 / n;
        let d = (fe - cdf(x)?).abs();
        ks = ks.max(d);
        l1 += d * grid.dx;
    }
    Ok(ComparisonReport { ks_distance: ks, l1_distance: l1, n_samples: samples.len(), threshold, pass: ks <= threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares line through (ln t, ln y). Requires at least 5 points
/// spanning a factor of 10 in t.
pub fn fit_exponent(series: &[(f64, f64)]) -> Result<ExponentFit> {
    let tmin = series.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let tmax = series.iter().map(|p| p.0).fold(0.0, f64::max);
    if series.len() >= 5 && tmin > 0.0 && tmax / tmin < 10.0 {
        return domain(format!("degenerate range: t spans only a factor {:.3}", tmax / tmin));
    }
    fit_loglog(series)
}

/// The log-log line fit of `fit_exponent` without the range requirement,
/// for windows fixed by the problem (e.g. a tail window [20σ, 100σ]).
pub fn fit_loglog(series: &[(f64, f64)]) -> Result<ExponentFit> {
    if series.len() < 5 {
        return domain(format!("exponent fit needs at least 5 points, got {}", series.len()));
    }
    if series.iter().any(|&(t, y)| !(t > 0.0 && y > 0.0)) {
        return domain("exponent fit needs t > 0 and y > 0");
    }
    let n = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ExponentFit { exponent: slope, intercept, r2 })
}

const SLOPE_CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GserPoint {
    pub omega: f64,
    pub modulus: f64,
    /// Local log-log slope of the MSD at t = 1/ω, after clamping to [0, 1].
    pub slope: f64,
    pub clamped: bool,
}

/// |G*(ω)| ≈ kT / (π a ⟨Δr²(1/ω)⟩ Γ(1 + α(ω))), one value per MSD sample.
/// Slopes are centred differences in log-log (one-sided at the ends).
pub fn gser_modulus(msd: &[(f64, f64)], kt: f64, a: f64) -> Result<Vec<GserPoint>> {
    if msd.len() < 2 {
        return domain("GSER needs at least two MSD samples");
    }
    if !(kt > 0.0 && a > 0.0) {
        return domain("GSER needs kT > 0 and a > 0");
    }
    if msd.iter().any(|&(t, y)| !(t > 0.0 && y > 0.0)) {
        return domain("GSER needs positive times and MSD values");
    }
    if msd.windows(2).any(|w| w[1].0 <= w[0].0) {
        return domain("GSER needs increasing times");
    }
    let n = msd.len();
    let lt: Vec<f64> = msd.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = msd.iter().map(|p| p.1.ln()).collect();
    let mut out = Vec::with_capacity(n);
    let mut n_clamped = 0;
    for i in 0..n {
        let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
        let raw = (ly[hi] - ly[lo]) / (lt[hi] - lt[lo]);
        let slope = raw.clamp(0.0, 1.0);
        // rounding on an exact power law must not count as a clamp
        let clamped = (slope - raw).abs() > SLOPE_CLAMP_TOL;
        n_clamped += clamped as usize;
        let modulus = kt / (PI * a * msd[i].1 * gamma(1.0 + slope));
        out.push(GserPoint { omega: 1.0 / msd[i].0, modulus, slope, clamped });
    }
    if n_clamped > 0 {
        log::warn!("GSER: {n_clamped} local slopes fell outside [0,1] and were clamped");
    }
    Ok(out)
}
