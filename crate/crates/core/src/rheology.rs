//! Fractional viscoelastic and visco-elasto-plastic constitutive models.
//!
//! Stresses are computed on uniform strain histories with the same L1 stencil
//! used for Caputo derivatives in time. A strain history may declare a step at
//! t = 0⁺: then `strain[0]` is the post-step value and the step's contribution
//! is added in closed form (Boltzmann superposition), which the L1 stencil
//! could not resolve on the first cell.

use crate::error::{domain, Error, Result};
use crate::frac_operators::{caputo_l1, l1_mu, l1_table};
use crate::gamma::gamma;
use crate::grid::TimeGrid;
use crate::special_functions::{mittag_leffler, MLParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RheoModel {
    /// Scott-Blair element σ = E Caputo^α ε.
    Sb { e: f64, alpha: f64 },
    /// Two SB elements in parallel.
    Fkv { e1: f64, alpha1: f64, e2: f64, alpha2: f64 },
    /// Two SB elements in series: σ + (E2/E1) Caputo^{α2−α1} σ = E2 Caputo^{α2} ε.
    Fm { e1: f64, alpha1: f64, e2: f64, alpha2: f64 },
    /// Quasi-linear viscoelasticity with σᵉ(ε) = A(e^{Bε} − 1), g(t) = C + D t^{−α}.
    Qlv { a: f64, b: f64, c: f64, d: f64, alpha: f64 },
    /// SB element with a yield surface |σ| − [σY + K Caputo^{αK} q + H q].
    Vevp { e: f64, alpha: f64, sigma_y: f64, k: f64, h: f64, alpha_k: f64 },
}

fn order_ok(a: f64, name: &str) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::OrderRange(format!("{name} must lie in (0,1), got {a}")))
    }
}

fn positive(v: f64, name: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive, got {v}"))
    }
}

fn nonneg(v: f64, name: &str) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be nonnegative, got {v}"))
    }
}

impl RheoModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RheoModel::Sb { e, alpha } => {
                positive(e, "E")?;
                order_ok(alpha, "alpha")
            }
            RheoModel::Fkv { e1, alpha1, e2, alpha2 } | RheoModel::Fm { e1, alpha1, e2, alpha2 } => {
                positive(e1, "E1")?;
                positive(e2, "E2")?;
                order_ok(alpha1, "alpha1")?;
                order_ok(alpha2, "alpha2")?;
                if alpha1 >= alpha2 {
                    return Err(Error::OrderRange(format!("need alpha1 < alpha2, got {alpha1} >= {alpha2}")));
                }
                Ok(())
            }
            RheoModel::Qlv { a, b, c, d, alpha } => {
                positive(a, "A")?;
                positive(b, "B")?;
                nonneg(c, "C")?;
                nonneg(d, "D")?;
                if c + d == 0.0 {
                    return domain("QLV kernel needs C + D > 0");
                }
                order_ok(alpha, "alpha")
            }
            RheoModel::Vevp { e, alpha, sigma_y, k, h, alpha_k } => {
                positive(e, "E")?;
                order_ok(alpha, "alpha")?;
                positive(sigma_y, "sigmaY")?;
                nonneg(k, "K")?;
                nonneg(h, "H")?;
                order_ok(alpha_k, "alphaK")
            }
        }
    }
}

fn sb_modulus(e: f64, alpha: f64, t: f64) -> f64 {
    e * t.powf(-alpha) / gamma(1.0 - alpha)
}

/// G(t), the stress per unit step strain.
pub fn relaxation_modulus(m: &RheoModel, t: f64) -> Result<f64> {
    m.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("relaxation modulus needs t > 0, got {t}"));
    }
    Ok(match *m {
        RheoModel::Sb { e, alpha } | RheoModel::Vevp { e, alpha, .. } => sb_modulus(e, alpha, t),
        RheoModel::Fkv { e1, alpha1, e2, alpha2 } => sb_modulus(e1, alpha1, t) + sb_modulus(e2, alpha2, t),
        RheoModel::Fm { e1, alpha1, e2, alpha2 } => {
            let a = alpha2 - alpha1;
            let ml = MLParams::new(a, 1.0 - alpha1)?;
            e1 * t.powf(-alpha1) * mittag_leffler(ml, -(e1 / e2) * t.powf(a))?
        }
        // small-strain limit: A·B·g(t)
        RheoModel::Qlv { a, b, c, d, alpha } => a * b * (c + d * t.powf(-alpha)),
    })
}

/// Complex modulus G*(ω).
pub fn complex_modulus(m: &RheoModel, omega: f64) -> Result<Complex64> {
    m.validate()?;
    if !(omega > 0.0 && omega.is_finite()) {
        return domain(format!("frequency must be positive, got {omega}"));
    }
    let iw = |a: f64| Complex64::from_polar(omega.powf(a), FRAC_PI_2 * a);
    Ok(match *m {
        RheoModel::Sb { e, alpha } | RheoModel::Vevp { e, alpha, .. } => iw(alpha) * e,
        RheoModel::Fkv { e1, alpha1, e2, alpha2 } => iw(alpha1) * e1 + iw(alpha2) * e2,
        RheoModel::Fm { e1, alpha1, e2, alpha2 } => iw(alpha2) * e2 / (iw(alpha2 - alpha1) * (e2 / e1) + 1.0),
        RheoModel::Qlv { .. } => {
            return Err(Error::Compatibility("QLV is nonlinear; it has no dynamic modulus".into()));
        }
    })
}

/// (storage, loss) moduli.
pub fn dynamic_moduli(m: &RheoModel, omega: f64) -> Result<(f64, f64)> {
    let g = complex_modulus(m, omega)?;
    Ok((g.re, g.im))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrainHistory {
    pub tgrid: TimeGrid,
    /// Strain at t_0..t_N.
    pub strain: Vec<f64>,
    /// Strain jumps from 0 to `strain[0]` at t = 0⁺.
    pub declared_step: bool,
}

impl StrainHistory {
    pub fn new(tgrid: TimeGrid, strain: Vec<f64>) -> Result<Self> {
        if strain.len() != tgrid.n_steps + 1 {
            return domain(format!("strain has {} samples for {} steps", strain.len(), tgrid.n_steps));
        }
        if strain.iter().any(|e| !e.is_finite()) {
            return domain("strain must be finite");
        }
        Ok(StrainHistory { tgrid, strain, declared_step: false })
    }

    /// Strain ε(t_j) from a function of time.
    pub fn from_fn(tgrid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(tgrid, tgrid.times().into_iter().map(f).collect())
    }

    /// Step of size ε₀ at t = 0⁺, held constant.
    pub fn step(tgrid: TimeGrid, eps0: f64) -> Result<Self> {
        let mut h = Self::new(tgrid, vec![eps0; tgrid.n_steps + 1])?;
        h.declared_step = true;
        Ok(h)
    }

    /// History sampled at explicit times, which must be uniformly spaced from 0.
    pub fn from_samples(times: &[f64], strain: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(Error::Grid("sample times must start at 0 and hold at least two points".into()));
        }
        let dt = times[1] - times[0];
        for (j, &t) in times.iter().enumerate() {
            if (t - j as f64 * dt).abs() > 1e-9 * dt.max(t.abs()) {
                return Err(Error::Grid(format!("nonuniform time grid at sample {j} (t={t})")));
            }
        }
        Self::new(TimeGrid::new(dt, times.len() - 1)?, strain)
    }

    pub fn dt(&self) -> f64 {
        self.tgrid.dt
    }

    fn check_initial(&self, allow_step: bool, model: &str) -> Result<()> {
        if self.strain[0] != 0.0 && !self.declared_step {
            return Err(Error::Compatibility(format!(
                "strain starts at {} without a declared step; {model} needs homogeneous initial data",
                self.strain[0]
            )));
        }
        if self.declared_step && !allow_step {
            return Err(Error::Compatibility(format!("{model} does not accept a declared initial step")));
        }
        Ok(())
    }
}

/// Σ_{j=1}^{n} d_j (u_{n+1−j} − u_{n−j}) for u_0..u_n.
fn l1_hist(u: &[f64], d: &[f64]) -> f64 {
    let n = u.len() - 1;
    let mut h = 0.0;
    for j in 1..=n {
        h += d[j] * (u[n + 1 - j] - u[n - j]);
    }
    h
}

/// E·Caputo^α ε on the grid, with σ_0 = 0 (or ∞ after a declared step).
fn sb_stress(e: f64, alpha: f64, h: &StrainHistory) -> Result<Vec<f64>> {
    let dt = h.dt();
    let eps0 = if h.declared_step { h.strain[0] } else { 0.0 };
    let mut s = Vec::with_capacity(h.strain.len());
    s.push(if eps0 != 0.0 { f64::INFINITY * eps0.signum() } else { 0.0 });
    for n in 1..h.strain.len() {
        let mut v = e * caputo_l1(&h.strain[..=n], dt, alpha)?;
        if eps0 != 0.0 {
            v += eps0 * sb_modulus(e, alpha, h.tgrid.t(n));
        }
        s.push(v);
    }
    Ok(s)
}

/// Stress history for SB, FKV and FM models.
pub fn stress_response(m: &RheoModel, h: &StrainHistory) -> Result<Vec<f64>> {
    m.validate()?;
    match *m {
        RheoModel::Sb { e, alpha } => {
            h.check_initial(true, "SB")?;
            sb_stress(e, alpha, h)
        }
        RheoModel::Fkv { e1, alpha1, e2, alpha2 } => {
            h.check_initial(true, "FKV")?;
            let s1 = sb_stress(e1, alpha1, h)?;
            let s2 = sb_stress(e2, alpha2, h)?;
            Ok(s1.iter().zip(&s2).map(|(a, b)| a + b).collect())
        }
        RheoModel::Fm { e1, alpha1, e2, alpha2 } => {
            h.check_initial(false, "FM")?;
            Ok(fm_stress(e1, alpha1, e2, alpha2, h))
        }
        RheoModel::Qlv { .. } => qlv_stress(m, h),
        RheoModel::Vevp { .. } => Ok(vevp_simulate(m, h)?.stress),
    }
}

fn fm_stress(e1: f64, alpha1: f64, e2: f64, alpha2: f64, h: &StrainHistory) -> Vec<f64> {
    let dt = h.dt();
    let a = alpha2 - alpha1;
    let n_all = h.strain.len();
    let d2 = l1_table(alpha2, n_all);
    let da = l1_table(a, n_all);
    let c2 = 1.0 / l1_mu(alpha2, dt);
    let ca = 1.0 / l1_mu(a, dt);
    let r = e2 / e1;
    let eps = &h.strain;
    let mut s = vec![0.0];
    for n in 0..n_all - 1 {
        let h2 = l1_hist(&eps[..=n], &d2);
        let ha = l1_hist(&s, &da);
        let num = e2 * c2 * (eps[n + 1] - eps[n] + h2) - r * ca * (-s[n] + ha);
        s.push(num / (1.0 + r * ca));
    }
    s
}

/// QLV stress σ(t) = ∫ g(t−s) dσᵉ(ε(s)). The regular part C integrates exactly;
/// the weakly singular part D t^{−α} uses L1 weights, which integrate the
/// kernel exactly over every cell including the first.
pub fn qlv_stress(m: &RheoModel, h: &StrainHistory) -> Result<Vec<f64>> {
    m.validate()?;
    let RheoModel::Qlv { a, b, c, d, alpha } = *m else {
        return domain("qlv_stress needs a QLV model");
    };
    h.check_initial(true, "QLV")?;
    if d > 0.0 {
        log::warn!("QLV kernel C + D t^-alpha diverges at 0+, so g(0+) = 1 holds only for D = 0");
    }
    let y: Vec<f64> = h.strain.iter().map(|&e| a * ((b * e).exp() - 1.0)).collect();
    let dt = h.dt();
    let y0 = if h.declared_step { y[0] } else { 0.0 };
    let w = l1_table(alpha, y.len());
    let kd = d * dt.powf(-alpha) / (1.0 - alpha);
    let mut s = Vec::with_capacity(y.len());
    s.push(if y0 != 0.0 && d > 0.0 { f64::INFINITY * y0.signum() } else { c * y0 });
    for n in 1..y.len() {
        let mut sing = 0.0;
        for j in 0..n {
            sing += w[j] * (y[n - j] - y[n - j - 1]);
        }
        let mut v = c * (y[n] - y[0]) + kd * sing;
        if y0 != 0.0 {
            v += y0 * (c + d * h.tgrid.t(n).powf(-alpha));
        }
        s.push(v);
    }
    Ok(s)
}

/// SB free energy at the final time of the history,
/// ψ = E/(2Γ(1−α)) ∬_0^t (2t − τ₁ − τ₂)^{−α} ε̇(τ₁) ε̇(τ₂) dτ₁ dτ₂,
/// with ε̇ constant on each cell and the kernel integrated exactly per cell.
pub fn sb_free_energy(e: f64, alpha: f64, h: &StrainHistory) -> Result<f64> {
    RheoModel::Sb { e, alpha }.validate()?;
    h.check_initial(false, "free energy")?;
    let n = h.tgrid.n_steps;
    let dt = h.dt();
    let rate: Vec<f64> = h.strain.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
    // cell (i, j) only depends on i + j: I = F(i + j) with W at s = (2n − k) dt
    let cw = 1.0 / ((1.0 - alpha) * (2.0 - alpha));
    let wv: Vec<f64> = (0..=2 * n).map(|k| cw * (((2 * n - k) as f64) * dt).powf(2.0 - alpha)).collect();
    let f = |m: usize| wv[m + 2] - 2.0 * wv[m + 1] + wv[m];
    let mut total = 0.0;
    let mut corner = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += f(i + j) * rate[j];
        }
        total += rate[i] * row;
    }
    if n > 0 {
        corner = f(2 * n - 2) * rate[n - 1] * rate[n - 1];
    }
    let psi = e / (2.0 * gamma(1.0 - alpha)) * total;
    if corner.abs() > 0.5 * total.abs() {
        log::warn!("free energy dominated by the final cell; refine the time grid");
    }
    if psi < 0.0 {
        if psi < -1e-12 * e * h.strain.iter().map(|v| v * v).fold(0.0, f64::max) {
            log::warn!("free energy quadrature returned {psi:.3e} < 0");
        }
        return Ok(0.0);
    }
    Ok(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VevpResult {
    pub stress: Vec<f64>,
    pub plastic_strain: Vec<f64>,
    pub q: Vec<f64>,
}

/// Elastic predictor / plastic corrector for the fractional visco-elasto-plastic
/// element. The SB law acts on ε − εᵖ; the flow rule is associative in 1D.
pub fn vevp_simulate(m: &RheoModel, h: &StrainHistory) -> Result<VevpResult> {
    m.validate()?;
    let RheoModel::Vevp { e, alpha, sigma_y, k, h: hard, alpha_k } = *m else {
        return domain("vevp_simulate needs a VEVP model");
    };
    h.check_initial(false, "VEVP")?;
    let dt = h.dt();
    let n_all = h.strain.len();
    let dk = l1_table(alpha_k, n_all);
    let ce = e / l1_mu(alpha, dt);
    let ck = k / l1_mu(alpha_k, dt);
    let tol = 1e-10 * sigma_y;

    let mut el = vec![0.0];
    let mut ep = vec![0.0];
    let mut q = vec![0.0];
    let mut s = vec![0.0];
    for n in 0..n_all - 1 {
        el.push(h.strain[n + 1] - ep[n]);
        let trial = e * caputo_l1(&el, dt, alpha)?;
        let hq = l1_hist(&q, &dk);
        let f_trial = trial.abs() - (sigma_y + ck * hq + hard * q[n]);
        if f_trial <= 0.0 {
            s.push(trial);
            ep.push(ep[n]);
            q.push(q[n]);
            continue;
        }
        let sign = trial.signum();
        let resid = |g: f64| (trial.abs() - ce * g) - (sigma_y + ck * (g + hq) + hard * (q[n] + g));
        let slope = -(ce + ck + hard);
        let mut g = 0.0;
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let r = resid(g);
            if r.abs() <= tol {
                converged = true;
                break;
            }
            g -= r / slope;
        }
        if !converged && resid(g).abs() > tol {
            return Err(Error::Convergence(format!(
                "plastic corrector did not converge at t={} (residual {:.3e})",
                h.tgrid.t(n + 1),
                resid(g)
            )));
        }
        let g = g.max(0.0);
        ep.push(ep[n] + g * sign);
        q.push(q[n] + g);
        let last = el.len() - 1;
        el[last] = h.strain[n + 1] - ep[n + 1];
        s.push(trial - ce * g * sign);
    }
    Ok(VevpResult { stress: s, plastic_strain: ep, q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fm_requires_ordered_exponents() {
        let m = RheoModel::Fm { e1: 1.0, alpha1: 0.6, e2: 1.0, alpha2: 0.4 };
        assert!(matches!(m.validate(), Err(Error::OrderRange(_))));
    }

    #[test]
    fn undeclared_initial_strain_rejected() {
        let h = StrainHistory::new(TimeGrid::new(0.1, 3).unwrap(), vec![1.0; 4]).unwrap();
        let m = RheoModel::Sb { e: 1.0, alpha: 0.5 };
        assert!(matches!(stress_response(&m, &h), Err(Error::Compatibility(_))));
    }

    #[test]
    fn nonuniform_samples_rejected() {
        assert!(matches!(
            StrainHistory::from_samples(&[0.0, 0.1, 0.25], vec![0.0; 3]),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn corrector_lands_on_yield_surface() {
        let m = RheoModel::Vevp { e: 10.0, alpha: 0.3, sigma_y: 1.0, k: 0.5, h: 2.0, alpha_k: 0.6 };
        let h = StrainHistory::from_fn(TimeGrid::new(0.01, 200).unwrap(), |t| t).unwrap();
        let r = vevp_simulate(&m, &h).unwrap();
        let dk = l1_table(0.6, 201);
        for n in 1..=200 {
            if r.q[n] > r.q[n - 1] {
                let hq = l1_hist(&r.q[..n], &dk);
                let yield_s = 1.0 + 0.5 / l1_mu(0.6, 0.01) * (r.q[n] - r.q[n - 1] + hq) + 2.0 * r.q[n];
                assert!((r.stress[n].abs() - yield_s).abs() < 1e-9);
            }
        }
    }
}
