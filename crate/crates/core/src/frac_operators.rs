//! Discrete fractional operators on uniform grids.
//!
//! Conventions used throughout:
//! * Left GL (shift s): h^{−α} Σ_j g_j u(x − (j − s)h), history toward smaller x.
//!   Right GL mirrors it toward larger x.
//! * `riesz_apply` returns +(−Δ)^{α/2}u, a positive operator. Solvers subtract it.
//! * L1 Caputo at t_{n+1}: (u_{n+1} − u_n + Σ_{j=1}^n d_j (u_{n+1−j} − u_{n−j})) / (Δt^α Γ(2−α)).

use crate::error::{domain, Error, Result};
use crate::gamma::gamma;
use crate::grid::{Boundary, Grid1D, OrderField};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub const DEFAULT_SHIFT: usize = 1;
const CACHE_LIMIT: usize = 4096;
// weights retained per output node for periodic GL sums
const PERIODIC_WRAPS: usize = 64;

type Table = Arc<Vec<f64>>;
type Cache = Mutex<HashMap<(u64, usize), Table>>;

fn cached(cache: &'static OnceLock<Cache>, alpha: f64, m: usize, make: impl FnOnce() -> Vec<f64>) -> Table {
    let c = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (alpha.to_bits(), m);
    if let Some(t) = c.lock().unwrap().get(&key) {
        return t.clone();
    }
    let t = Arc::new(make());
    let mut g = c.lock().unwrap();
    if g.len() >= CACHE_LIMIT {
        g.clear();
    }
    g.insert(key, t.clone());
    t
}

/// GL weights g_0..g_m from g_0 = 1, g_j = g_{j−1}(j − 1 − α)/j.
pub fn gl_weights(alpha: f64, m: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(m + 1);
    g.push(1.0);
    for j in 1..=m {
        let jf = j as f64;
        g.push(g[j - 1] * (jf - 1.0 - alpha) / jf);
    }
    g
}

pub(crate) fn gl_table(alpha: f64, m: usize) -> Table {
    static C: OnceLock<Cache> = OnceLock::new();
    cached(&C, alpha, m, || gl_weights(alpha, m))
}

/// L1 convolution weights d_0..d_m, d_j = (j+1)^{1−α} − j^{1−α}.
pub fn l1_weights(alpha: f64, m: usize) -> Vec<f64> {
    let e = 1.0 - alpha;
    (0..=m).map(|j| ((j + 1) as f64).powf(e) - (j as f64).powf(e)).collect()
}

pub(crate) fn l1_table(alpha: f64, m: usize) -> Table {
    static C: OnceLock<Cache> = OnceLock::new();
    cached(&C, alpha, m, || l1_weights(alpha, m))
}

/// L1 scaling Δt^α Γ(2−α); exactly Δt at α = 1.
pub fn l1_mu(alpha: f64, dt: f64) -> f64 {
    if alpha == 1.0 {
        dt
    } else {
        dt.powf(alpha) * gamma(2.0 - alpha)
    }
}

fn check_free_space(u: &[f64], g: &Grid1D) -> Result<()> {
    if g.bc != Boundary::FreeSpace {
        return Ok(());
    }
    let max = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = u[0].abs().max(u[u.len() - 1].abs());
    if max > 0.0 && edge > 1e-8 * max {
        return Err(Error::Boundary(format!(
            "free-space truncation: edge value {edge:.3e} exceeds 1e-8 of max {max:.3e}"
        )));
    }
    Ok(())
}

/// Shifted GL derivative of order α ∈ (0, 2]. Sums are truncated at the
/// domain ends, except on periodic grids where indices wrap.
pub fn gl_derivative(u: &[f64], g: &Grid1D, alpha: f64, side: Side, shift: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("GL order must lie in (0,2], got {alpha}"));
    }
    if u.len() != g.n {
        return domain(format!("array length {} does not match grid size {}", u.len(), g.n));
    }
    check_free_space(u, g)?;
    let n = g.n;
    let scale = g.dx.powf(-alpha);
    if g.bc == Boundary::Periodic {
        let m = PERIODIC_WRAPS * n;
        let w = gl_table(alpha, m);
        // far-tail weights vary slowly over a period and see only the mean of u;
        // Σ g_j = 0 fixes their total at −Σ_{j≤m} g_j
        let tail = -w.iter().sum::<f64>() * u.iter().sum::<f64>() / n as f64;
        let out = (0..n)
            .map(|i| {
                let mut s = tail;
                for (j, wj) in w.iter().enumerate() {
                    let off = (j as i64 - shift as i64).rem_euclid(n as i64) as usize;
                    let k = match side {
                        Side::Left => (i + n - off) % n,
                        Side::Right => (i + off) % n,
                    };
                    s += wj * u[k];
                }
                s * scale
            })
            .collect();
        return Ok(out);
    }
    let w = gl_table(alpha, n + shift);
    let out = (0..n)
        .map(|i| {
            let mut s = 0.0;
            match side {
                Side::Left => {
                    let top = i + shift;
                    let j0 = top.saturating_sub(n - 1);
                    for j in j0..=top {
                        s += w[j] * u[top - j];
                    }
                }
                Side::Right => {
                    let j0 = shift.saturating_sub(i);
                    for j in j0..=(n - 1 + shift - i) {
                        s += w[j] * u[i + j - shift];
                    }
                }
            }
            s * scale
        })
        .collect();
    Ok(out)
}

/// Discrete fractional Laplacian (−Δ)^{α/2} as (½ left + ½ right) GL / cos(πα/2).
pub fn riesz_apply(u: &[f64], g: &Grid1D, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("Riesz order must lie in (0,2), got {alpha}"));
    }
    if (alpha - 1.0).abs() < 1e-6 {
        return domain(format!("Riesz order {alpha} is singular (cos(πα/2) = 0)"));
    }
    let l = gl_derivative(u, g, alpha, Side::Left, DEFAULT_SHIFT)?;
    let r = gl_derivative(u, g, alpha, Side::Right, DEFAULT_SHIFT)?;
    let c = (PI * alpha / 2.0).cos();
    Ok(l.iter().zip(&r).map(|(a, b)| (0.5 * a + 0.5 * b) / c).collect())
}

/// Angular wavenumbers in FFT order for n points at spacing dx.
pub fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let l = n as f64 * dx;
    (0..n)
        .map(|k| {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            2.0 * PI * kk / l
        })
        .collect()
}

/// Multiply the DFT of `u` by `symbol(ξ)` and transform back (real part).
pub fn apply_symbol(u: &[f64], dx: f64, symbol: impl Fn(f64) -> Complex64) -> Vec<f64> {
    let n = u.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (b, xi) in buf.iter_mut().zip(wavenumbers(n, dx)) {
        *b *= symbol(xi);
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// (−Δ)^{α/2} on a periodic grid via the multiplier |ξ|^α.
pub fn spectral_frac_laplacian(u: &[f64], g: &Grid1D, alpha: f64) -> Result<Vec<f64>> {
    if g.bc != Boundary::Periodic {
        return Err(Error::Boundary("spectral fractional Laplacian needs a periodic grid".into()));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("order must lie in (0,2], got {alpha}"));
    }
    if u.len() != g.n {
        return domain(format!("array length {} does not match grid size {}", u.len(), g.n));
    }
    Ok(apply_symbol(u, g.dx, |xi| Complex64::new(xi.abs().powf(alpha), 0.0)))
}

/// L1 history term Σ_{j=1}^n d_j (u_{n+1−j} − u_{n−j}) for a history u_0..u_{n+1}.
pub(crate) fn l1_history(u: &[f64], d: &[f64]) -> f64 {
    let n = u.len() - 2;
    let mut h = 0.0;
    for j in 1..=n {
        h += d[j] * (u[n + 1 - j] - u[n - j]);
    }
    h
}

fn l1_eval(u: &[f64], alpha: f64, dt: f64) -> f64 {
    let n = u.len() - 2;
    let d = l1_table(alpha, n);
    let h = l1_history(u, &d);
    (u[n + 1] - u[n] + h) / l1_mu(alpha, dt)
}

/// L1 Caputo derivative of order α ∈ (0,1) at the last point of `u`
/// (samples u_0..u_{n+1} on a uniform grid of step `dt`).
pub fn caputo_l1(u: &[f64], dt: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("Caputo order must lie in (0,1), got {alpha}"));
    }
    if u.len() < 2 || !(dt > 0.0) {
        return domain("L1 needs at least two samples and dt > 0");
    }
    Ok(l1_eval(u, alpha, dt))
}

/// Variable-order L1: the order is frozen at (x, t_{n+1}) and used in both the
/// weights and the prefactor.
pub fn vo_caputo_l1(u: &[f64], dt: f64, order: &OrderField, x: f64) -> Result<f64> {
    if u.len() < 2 || !(dt > 0.0) {
        return domain("L1 needs at least two samples and dt > 0");
    }
    let t = (u.len() - 1) as f64 * dt;
    let alpha = order.eval_in(x, t, 0.0, 1.0, true)?;
    Ok(l1_eval(u, alpha, dt))
}

/// L1 Caputo derivative on a nonuniform grid `t` (same length as `u`),
/// evaluated at the last node.
pub fn caputo_l1_nonuniform(u: &[f64], t: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("Caputo order must lie in (0,1), got {alpha}"));
    }
    if u.len() != t.len() || u.len() < 2 {
        return domain("L1 needs matching sample and time arrays of length >= 2");
    }
    let m = u.len() - 1;
    let tn = t[m];
    let e = 1.0 - alpha;
    let mut s = 0.0;
    for k in 0..m {
        let w = ((tn - t[k]).powf(e) - (tn - t[k + 1]).powf(e)) / (t[k + 1] - t[k]);
        s += w * (u[k + 1] - u[k]);
    }
    Ok(s / gamma(2.0 - alpha))
}

/// Riesz–Caputo space derivative (Γ(2−α)/2)(left Caputo − right Caputo),
/// α ∈ (0,1), with L1 quadrature on both sides. The end nodes see only one
/// side of the domain and are flagged in the log.
pub fn riesz_caputo(u: &[f64], g: &Grid1D, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("Riesz–Caputo order must lie in (0,1), got {alpha}"));
    }
    if u.len() != g.n {
        return domain(format!("array length {} does not match grid size {}", u.len(), g.n));
    }
    let n = g.n;
    let d = l1_table(alpha, n);
    let c = 0.5 * g.dx.powf(-alpha);
    let out = (0..n)
        .map(|i| {
            let mut left = 0.0;
            for j in 0..i {
                left += d[j] * (u[i - j] - u[i - j - 1]);
            }
            let mut right = 0.0;
            for j in 0..(n - 1 - i) {
                right += d[j] * (u[i + j + 1] - u[i + j]);
            }
            c * (left + right)
        })
        .collect();
    log::debug!("riesz_caputo: end nodes 0 and {} use one-sided sums", n - 1);
    Ok(out)
}

/// Mesh t_j = T (j/n)^r, j = 0..n, clustered near 0 for r > 1.
pub fn graded_mesh(n: usize, horizon: f64, r: f64) -> Vec<f64> {
    (0..=n).map(|j| horizon * (j as f64 / n as f64).powf(r)).collect()
}

/// Implicit L1 solution of Caputo^α u = −λ u, u(0) = u0, on the mesh `t`
/// (t[0] = 0, strictly increasing).
pub fn l1_relaxation(alpha: f64, lambda: f64, u0: f64, t: &[f64]) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("Caputo order must lie in (0,1), got {alpha}"));
    }
    if t.len() < 2 || t[0] != 0.0 || t.windows(2).any(|w| w[1] <= w[0]) {
        return domain("mesh must start at 0 and increase strictly");
    }
    let e = 1.0 - alpha;
    let g2 = gamma(2.0 - alpha);
    let mut u = vec![u0];
    for m in 1..t.len() {
        let tm = t[m];
        let mut hist = 0.0;
        for k in 0..m - 1 {
            let w = ((tm - t[k]).powf(e) - (tm - t[k + 1]).powf(e)) / (t[k + 1] - t[k]);
            hist += w * (u[k + 1] - u[k]);
        }
        let wl = (tm - t[m - 1]).powf(e) / (tm - t[m - 1]);
        u.push((wl * u[m - 1] - hist) / (wl + lambda * g2));
    }
    Ok(u)
}
