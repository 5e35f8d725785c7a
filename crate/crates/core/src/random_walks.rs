//! Path simulators for Lévy flights, subordinated walks, CTRWs and Lévy walks,
//! with ensemble statistics.
//!
//! Every path draws from its own stream `(seed, path index)` and paths are
//! assembled in index order, so results do not depend on the thread count.
//! All processes start at the origin.

use crate::error::{domain, Error, Result};
use crate::grid::{Grid1D, TimeGrid};
use crate::rng::{self, StreamRng};
use crate::stable_law::{StableParams, StableSampler};
use rand::Rng;
use rand_distr::{Exp1, Open01};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Operational steps a subordinated path may take before giving up.
pub const MAX_OPERATIONAL_STEPS: usize = 1 << 24;

/// Waiting-time law of a CTRW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum WaitLaw {
    /// ψ(t) = rate·e^{−rate·t}
    Exponential { rate: f64 },
    /// One-sided β-stable waits with Laplace transform e^{−c s^β}.
    Stable { beta: f64, c: f64 },
}

impl WaitLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            WaitLaw::Exponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            WaitLaw::Stable { beta, c } if beta > 0.0 && beta < 1.0 && c > 0.0 && c.is_finite() => Ok(()),
            w => domain(format!("invalid waiting-time law {w:?}")),
        }
    }

    /// Survival function Ψ(t) = P(wait > t). Only closed-form for exponential waits.
    pub fn survival(&self, t: f64) -> Result<f64> {
        match *self {
            WaitLaw::Exponential { rate } => Ok((-rate * t).exp()),
            WaitLaw::Stable { beta, c } => {
                let p = subordinator_law(beta, c)?;
                Ok(1.0 - crate::stable_law::cdf(&p, t)?)
            }
        }
    }
}

/// Totally skewed β-stable law with Laplace transform e^{−c s^β}.
pub fn subordinator_law(beta: f64, c: f64) -> Result<StableParams> {
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("subordinator index must lie in (0,1), got {beta}"));
    }
    StableParams::new(beta, 1.0, (c * (FRAC_PI_2 * beta).cos()).powf(1.0 / beta), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WalkKind {
    /// Increments S_α(γ, σ dt^{1/α}, μ dt).
    Flight { jump: StableParams },
    /// Flight with law `jump` (α = 2 gives Brownian motion) run on the inverse
    /// of a β-stable subordinator with Laplace transform e^{−τ s^β}.
    SubordinatedBm { beta: f64, jump: StableParams },
    /// Uncoupled CTRW: i.i.d. waits and i.i.d. jumps.
    Ctrw { wait: WaitLaw, jump: StableParams },
    /// Ballistic flights at `speed` with Lomax durations
    /// ψ(τ) = (γ/τ0)(1 + τ/τ0)^{−(1+γ)} and directions ±1.
    LevyWalk { speed: f64, tau0: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    #[serde(flatten)]
    pub kind: WalkKind,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Keep every `record_every`-th step of the simulation grid.
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

impl WalkSpec {
    pub fn new(kind: WalkKind, dt: f64, horizon: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let s = WalkSpec { kind, dt, horizon, n_paths, seed, record_every: 1 };
        s.validate()?;
        Ok(s)
    }

    pub fn with_record_every(mut self, k: usize) -> Result<Self> {
        self.record_every = k;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return domain(format!("horizon {} must be at least dt {}", self.horizon, self.dt));
        }
        if self.n_paths == 0 {
            return domain("n_paths must be at least 1");
        }
        if self.record_every == 0 {
            return domain("record_every must be at least 1");
        }
        match self.kind {
            WalkKind::Flight { jump } => jump.validate(),
            WalkKind::SubordinatedBm { beta, jump } => {
                jump.validate()?;
                if !(beta > 0.0 && beta < 1.0) {
                    return domain(format!("subordinator beta must lie in (0,1), got {beta}"));
                }
                Ok(())
            }
            WalkKind::Ctrw { wait, jump } => {
                wait.validate()?;
                jump.validate()
            }
            WalkKind::LevyWalk { speed, tau0, gamma } => {
                if !(speed >= 0.0 && speed.is_finite()) {
                    return domain(format!("speed must be nonnegative, got {speed}"));
                }
                if !(tau0 > 0.0 && gamma > 0.0) {
                    return domain(format!("Lévy walk needs tau0 > 0 and gamma > 0, got {tau0}, {gamma}"));
                }
                Ok(())
            }
        }
    }

    /// Simulation steps and the recorded output grid.
    fn grids(&self) -> Result<(usize, TimeGrid)> {
        let steps = (self.horizon / self.dt).round() as usize;
        let out = steps / self.record_every;
        if out == 0 {
            return domain("record_every exceeds the number of steps");
        }
        Ok((out * self.record_every, TimeGrid::new(self.dt * self.record_every as f64, out)?))
    }
}

/// Positions of `n_paths` paths on a common output grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub times: TimeGrid,
    pub n_paths: usize,
    positions: Vec<f64>,
    /// Subordinated walks: operational time τ(t) at each output time.
    pub op_time: Option<Vec<f64>>,
    /// CTRW and Lévy walk: number of renewal events up to each output time.
    pub events: Option<Vec<u32>>,
    pub meta: WalkSpec,
}

impl PathEnsemble {
    pub fn n_times(&self) -> usize {
        self.times.n_steps + 1
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let m = self.n_times();
        &self.positions[i * m..(i + 1) * m]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.positions[i * self.n_times() + j]
    }

    /// All positions at output index j.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.at(i, j)).collect()
    }

    /// Output index of time t, which must lie on the output grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let j = (t / self.times.dt).round();
        if j < 0.0 || j as usize > self.times.n_steps || (j * self.times.dt - t).abs() > 1e-9 * t.abs().max(1.0) {
            return domain(format!("time {t} is not on the ensemble output grid"));
        }
        Ok(j as usize)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
}

struct PathOut {
    x: Vec<f64>,
    tau: Vec<f64>,
    events: Vec<u32>,
}

fn run_paths(spec: &WalkSpec, f: impl Fn(usize, &mut StreamRng) -> Result<PathOut> + Sync) -> Result<PathEnsemble> {
    spec.validate()?;
    let (_, times) = spec.grids()?;
    let rows: Vec<PathOut> = (0..spec.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(spec.seed, rng::PATH_STREAMS + i as u64);
            f(i, &mut r)
        })
        .collect::<Result<_>>()?;
    let has_tau = rows.first().is_some_and(|r| !r.tau.is_empty());
    let has_ev = rows.first().is_some_and(|r| !r.events.is_empty());
    let mut positions = Vec::with_capacity(spec.n_paths * (times.n_steps + 1));
    let mut tau = Vec::new();
    let mut events = Vec::new();
    for r in rows {
        positions.extend_from_slice(&r.x);
        tau.extend_from_slice(&r.tau);
        events.extend_from_slice(&r.events);
    }
    Ok(PathEnsemble {
        times,
        n_paths: spec.n_paths,
        positions,
        op_time: has_tau.then_some(tau),
        events: has_ev.then_some(events),
        meta: *spec,
    })
}

/// Law of the increment over a step h of the Lévy process whose unit-time law is `p`.
pub fn increment_law(p: &StableParams, h: f64) -> Result<StableParams> {
    p.validate()?;
    let sigma = p.sigma * h.powf(1.0 / p.alpha);
    // at α = 1 the skewed law is not strictly stable; the log term moves the centre
    let shift = if p.alpha == 1.0 { 2.0 / PI * p.gamma * p.sigma * h * h.ln() } else { 0.0 };
    StableParams::new(p.alpha, p.gamma, sigma, p.mu * h + shift)
}

pub fn simulate_flight(spec: &WalkSpec) -> Result<PathEnsemble> {
    let WalkKind::Flight { jump } = spec.kind else {
        return domain("simulate_flight needs a Flight spec");
    };
    spec.validate()?;
    let (steps, _) = spec.grids()?;
    let s = StableSampler::new(&increment_law(&jump, spec.dt)?)?;
    let every = spec.record_every;
    run_paths(spec, |_, r| {
        let mut x = Vec::with_capacity(steps / every + 1);
        let mut pos = 0.0;
        x.push(pos);
        for k in 1..=steps {
            pos += s.draw(r);
            if k % every == 0 {
                x.push(pos);
            }
        }
        Ok(PathOut { x, tau: vec![], events: vec![] })
    })
}

/// One subordinated path in full detail.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatedPath {
    /// Subordinator D at operational times mΔτ, m = 0, 1, ...
    pub d: Vec<f64>,
    /// Parent path at the same operational times.
    pub parent: Vec<f64>,
    /// Operational index m(t) = min{m : D_m > t} − 1 at each output time, so
    /// τ(t) = m(t)Δτ starts at 0.
    pub index: Vec<usize>,
    /// X(t) = parent[m(t)].
    pub x: Vec<f64>,
}

/// Path `i` of a subordinated ensemble, exactly as `simulate_subordinated` draws it.
pub fn subordinated_path(spec: &WalkSpec, i: usize) -> Result<SubordinatedPath> {
    let WalkKind::SubordinatedBm { beta, jump } = spec.kind else {
        return domain("subordinated_path needs a SubordinatedBm spec");
    };
    spec.validate()?;
    let (_, times) = spec.grids()?;
    let sd = StableSampler::new(&subordinator_law(beta, spec.dt)?)?;
    let sb = StableSampler::new(&increment_law(&jump, spec.dt)?)?;
    let mut r = rng::stream(spec.seed, rng::PATH_STREAMS + i as u64);
    subordinated_draw(&sd, &sb, &times, spec.horizon, &mut r)
}

fn subordinated_draw(
    sd: &StableSampler,
    sb: &StableSampler,
    times: &TimeGrid,
    horizon: f64,
    r: &mut StreamRng,
) -> Result<SubordinatedPath> {
    let t_end = times.horizon().max(horizon);
    let mut d = vec![0.0];
    let mut parent = vec![0.0];
    let mut cap = 1024usize;
    while d[d.len() - 1] <= t_end {
        if d.len() >= cap {
            // extend the operational grid geometrically
            cap *= 2;
            if cap > MAX_OPERATIONAL_STEPS {
                return Err(Error::Horizon(format!(
                    "subordinator stayed below t={t_end} after {MAX_OPERATIONAL_STEPS} operational steps"
                )));
            }
            d.reserve(cap - d.len());
            parent.reserve(cap - parent.len());
        }
        let dd = d[d.len() - 1] + sd.draw(r);
        let bb = parent[parent.len() - 1] + sb.draw(r);
        d.push(dd);
        parent.push(bb);
    }
    let index: Vec<usize> = times.times().iter().map(|&t| d.partition_point(|&v| v <= t) - 1).collect();
    let x = index.iter().map(|&m| parent[m]).collect();
    Ok(SubordinatedPath { d, parent, index, x })
}

pub fn simulate_subordinated(spec: &WalkSpec) -> Result<PathEnsemble> {
    let WalkKind::SubordinatedBm { beta, jump } = spec.kind else {
        return domain("simulate_subordinated needs a SubordinatedBm spec");
    };
    spec.validate()?;
    let (_, times) = spec.grids()?;
    let sd = StableSampler::new(&subordinator_law(beta, spec.dt)?)?;
    let sb = StableSampler::new(&increment_law(&jump, spec.dt)?)?;
    let dt = spec.dt;
    run_paths(spec, |_, r| {
        let p = subordinated_draw(&sd, &sb, &times, spec.horizon, r)?;
        let tau = p.index.iter().map(|&m| m as f64 * dt).collect();
        Ok(PathOut { x: p.x, tau, events: vec![] })
    })
}

fn draw_wait(w: &WaitLaw, s: Option<&StableSampler>, r: &mut StreamRng) -> f64 {
    match (w, s) {
        (WaitLaw::Exponential { rate }, _) => r.sample::<f64, _>(Exp1) / rate,
        (WaitLaw::Stable { .. }, Some(s)) => s.draw(r),
        _ => unreachable!("stable waits always carry a sampler"),
    }
}

pub fn simulate_ctrw(spec: &WalkSpec) -> Result<PathEnsemble> {
    let WalkKind::Ctrw { wait, jump } = spec.kind else {
        return domain("simulate_ctrw needs a Ctrw spec");
    };
    spec.validate()?;
    let (_, times) = spec.grids()?;
    let ws = match wait {
        WaitLaw::Stable { beta, c } => Some(StableSampler::new(&subordinator_law(beta, c)?)?),
        WaitLaw::Exponential { .. } => None,
    };
    let js = StableSampler::new(&jump)?;
    let out_t = times.times();
    run_paths(spec, |_, r| {
        let mut x = Vec::with_capacity(out_t.len());
        let mut events = Vec::with_capacity(out_t.len());
        let mut pos = 0.0;
        let mut count = 0u32;
        let mut next = draw_wait(&wait, ws.as_ref(), r);
        for &t in &out_t {
            while next <= t {
                pos += js.draw(r);
                count += 1;
                next += draw_wait(&wait, ws.as_ref(), r);
            }
            x.push(pos);
            events.push(count);
        }
        Ok(PathOut { x, tau: vec![], events })
    })
}

pub fn simulate_levy_walk(spec: &WalkSpec) -> Result<PathEnsemble> {
    let WalkKind::LevyWalk { speed, tau0, gamma } = spec.kind else {
        return domain("simulate_levy_walk needs a LevyWalk spec");
    };
    spec.validate()?;
    let (_, times) = spec.grids()?;
    let out_t = times.times();
    run_paths(spec, |_, r| {
        let mut x = Vec::with_capacity(out_t.len());
        let mut events = Vec::with_capacity(out_t.len());
        let mut start_t = 0.0;
        let mut start_x = 0.0;
        let mut count = 0u32;
        let mut dir = direction(r);
        let mut end_t = lomax(tau0, gamma, r);
        for &t in &out_t {
            while end_t <= t {
                start_x += dir * speed * (end_t - start_t);
                start_t = end_t;
                count += 1;
                dir = direction(r);
                end_t += lomax(tau0, gamma, r);
            }
            let bound = speed * t;
            x.push((start_x + dir * speed * (t - start_t)).clamp(-bound, bound));
            events.push(count);
        }
        Ok(PathOut { x, tau: vec![], events })
    })
}

fn direction(r: &mut StreamRng) -> f64 {
    if r.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn lomax(tau0: f64, gamma: f64, r: &mut StreamRng) -> f64 {
    let u: f64 = r.sample(Open01);
    tau0 * (u.powf(-1.0 / gamma) - 1.0)
}

/// Dispatch on the spec kind.
pub fn simulate(spec: &WalkSpec) -> Result<PathEnsemble> {
    match spec.kind {
        WalkKind::Flight { .. } => simulate_flight(spec),
        WalkKind::SubordinatedBm { .. } => simulate_subordinated(spec),
        WalkKind::Ctrw { .. } => simulate_ctrw(spec),
        WalkKind::LevyWalk { .. } => simulate_levy_walk(spec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MsdPoint {
    pub t: f64,
    pub msd: f64,
    pub stderr: f64,
}

/// Sample mean of x² at each output time, with its standard error.
pub fn msd_estimate(e: &PathEnsemble) -> Result<Vec<MsdPoint>> {
    if e.n_paths < 2 {
        return domain("MSD needs at least two paths");
    }
    let n = e.n_paths as f64;
    Ok((0..e.n_times())
        .map(|j| {
            let (mut s, mut s2) = (0.0, 0.0);
            for i in 0..e.n_paths {
                let v = e.at(i, j) * e.at(i, j);
                s += v;
                s2 += v * v;
            }
            let mean = s / n;
            let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
            MsdPoint { t: e.times.t(j), msd: mean, stderr: (var / n).sqrt() }
        })
        .collect())
}

/// Normalized histogram at time t. Bins are centred on the nodes of `bins`
/// with width dx; the result integrates to the captured fraction of paths.
pub fn empirical_density(e: &PathEnsemble, t: f64, bins: &Grid1D) -> Result<Vec<f64>> {
    let j = e.index_of(t)?;
    let (h, outside) = histogram(&e.column(j), bins);
    let frac = outside as f64 / e.n_paths as f64;
    if frac > 0.01 {
        log::warn!("empirical density at t={t}: {:.2}% of paths fall outside the bins", 100.0 * frac);
    }
    let norm = e.n_paths as f64 * bins.dx;
    Ok(h.iter().map(|&c| c as f64 / norm).collect())
}

/// Counts per bin and the number of samples outside all bins.
pub fn histogram(samples: &[f64], bins: &Grid1D) -> (Vec<u64>, usize) {
    let mut h = vec![0u64; bins.n];
    let mut outside = 0;
    for &x in samples {
        let k = ((x - bins.x0) / bins.dx).round();
        if k >= 0.0 && k < bins.n as f64 {
            h[k as usize] += 1;
        } else {
            outside += 1;
        }
    }
    (h, outside)
}
