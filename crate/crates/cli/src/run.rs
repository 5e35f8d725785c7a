//! Dispatch a validated config to the toolkit and render CSV artifacts in memory.

use crate::config::{ExperimentConfig, HistorySpec, Params, RheologyParams, SampleParams, Shape, SolveParams, VerifyParams, WalkParams};
use crate::csv::Table;
use anomaly_core::fade_solvers::{self, FadeProblem};
use anomaly_core::grid::TimeGrid;
use anomaly_core::random_walks::{self, empirical_density, msd_estimate, WalkKind, WalkSpec};
use anomaly_core::rheology::{self, RheoModel, StrainHistory};
use anomaly_core::stable_law::{self, StableParams};
use anomaly_core::verification::{compare_density, fit_exponent, ComparisonReport};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{module}: {source}")]
pub struct ModuleError {
    pub module: &'static str,
    #[source]
    pub source: anomaly_core::Error,
}

fn in_module(module: &'static str) -> impl Fn(anomaly_core::Error) -> ModuleError {
    move |source| ModuleError { module, source }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// False only when a `verify` comparison fails its threshold.
    pub passed: bool,
}

fn artifact(name: &str, t: Table) -> Artifact {
    Artifact { name: name.to_string(), bytes: t.into_bytes() }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, ModuleError> {
    let mut passed = true;
    let artifacts = match &cfg.params {
        Params::Sample(p) => sample(p, cfg.seed)?,
        Params::Walk(p) => walk(p, cfg.seed)?,
        Params::Solve(p) => solve(p)?,
        Params::Rheology(p) => rheology(p)?,
        Params::Verify(p) => {
            let (a, report) = verify(p, cfg.seed)?;
            passed = report.pass;
            a
        }
    };
    Ok(Outcome { artifacts, passed })
}

fn sample(p: &SampleParams, seed: u64) -> Result<Vec<Artifact>, ModuleError> {
    let err = in_module("stable_law");
    let xs = stable_law::sample(&p.stable, p.n_samples, seed).map_err(&err)?;
    let mut t = Table::new(&["index", "x"]);
    for (i, x) in xs.iter().enumerate() {
        t.row().int(i as u64).num(*x);
    }
    let mut out = vec![artifact("samples.csv", t)];
    if let Some(g) = &p.grid {
        let mut d = Table::new(&["x", "pdf", "cdf"]);
        for x in g.nodes() {
            let (f, c) = (stable_law::pdf(&p.stable, x).map_err(&err)?, stable_law::cdf(&p.stable, x).map_err(&err)?);
            d.row().num(x).num(f).num(c);
        }
        out.push(artifact("density.csv", d));
    }
    Ok(out)
}

fn walk_spec(kind: WalkKind, dt: f64, horizon: f64, n_paths: usize, record_every: usize, seed: u64) -> Result<WalkSpec, ModuleError> {
    let err = in_module("random_walks");
    WalkSpec::new(kind, dt, horizon, n_paths, seed).map_err(&err)?.with_record_every(record_every).map_err(&err)
}

fn walk(p: &WalkParams, seed: u64) -> Result<Vec<Artifact>, ModuleError> {
    let err = in_module("random_walks");
    let spec = walk_spec(p.kind, p.dt, p.horizon, p.n_paths, p.record_every, seed)?;
    let e = random_walks::simulate(&spec).map_err(&err)?;
    let mut out = vec![];
    if e.n_paths >= 2 {
        let msd = msd_estimate(&e).map_err(&err)?;
        let mut t = Table::new(&["t", "msd", "stderr"]);
        for m in &msd {
            t.row().num(m.t).num(m.msd).num(m.stderr);
        }
        out.push(artifact("msd.csv", t));
        // fit past the first decade, where discretization transients live
        let tail: Vec<(f64, f64)> = msd.iter().filter(|m| m.t >= p.horizon / 100.0 && m.msd > 0.0).map(|m| (m.t, m.msd)).collect();
        match fit_exponent(&tail) {
            Ok(f) => {
                let mut t = Table::new(&["exponent", "intercept", "r2"]);
                t.row().num(f.exponent).num(f.intercept).num(f.r2);
                out.push(artifact("msd_fit.csv", t));
            }
            Err(e) => log::warn!("MSD exponent fit skipped: {e}"),
        }
    }
    if let Some((time, bins)) = &p.density {
        let d = empirical_density(&e, *time, bins).map_err(&err)?;
        let mut t = Table::new(&["x", "density"]);
        for (x, v) in bins.nodes().into_iter().zip(d) {
            t.row().num(x).num(v);
        }
        out.push(artifact("density.csv", t));
    }
    let mut t = Table::new(&["path", "t", "x"]);
    let times = e.times.times();
    for i in 0..e.n_paths.min(16) {
        for (tj, x) in times.iter().zip(e.path(i)) {
            t.row().int(i as u64).num(*tj).num(*x);
        }
    }
    out.push(artifact("paths.csv", t));
    Ok(out)
}

fn solve(p: &SolveParams) -> Result<Vec<Artifact>, ModuleError> {
    let err = in_module("fade_solvers");
    let tgrid = TimeGrid::new(p.dt, p.steps).map_err(&err)?;
    let mut prob = FadeProblem::new(p.kind, p.grid, tgrid, p.d, p.ic.on(&p.grid));
    prob.v = p.v;
    prob.p = p.p;
    prob.alpha = p.alpha.clone();
    prob.beta = p.beta.clone();
    prob.mim_ratio = p.mim_ratio;
    prob.record_every = p.record_every;
    prob.probes = p.probes.clone();
    let s = fade_solvers::solve(&prob).map_err(&err)?;
    let nodes = s.grid.nodes();
    let mut field = Table::new(&["t", "x", "c"]);
    for (t, snap) in s.times.iter().zip(&s.snapshots) {
        for (x, c) in nodes.iter().zip(snap) {
            field.row().num(*t).num(*x).num(*c);
        }
    }
    let mut mass = Table::new(&["step", "t", "mass"]);
    for (k, m) in s.mass_ledger.iter().enumerate() {
        mass.row().int(k as u64).num(tgrid.t(k)).num(*m);
    }
    let mut out = vec![artifact("field.csv", field), artifact("mass.csv", mass)];
    for (k, b) in s.btc.iter().enumerate() {
        let mut t = Table::new(&["t", "c"]);
        for (j, c) in b.iter().enumerate() {
            t.row().num(tgrid.t(j)).num(*c);
        }
        out.push(artifact(&format!("btc_{k}.csv"), t));
    }
    Ok(out)
}

fn history(h: &HistorySpec) -> Result<StrainHistory, anomaly_core::Error> {
    let tg = TimeGrid::new(h.dt, h.n_steps)?;
    match h.shape {
        Shape::Step { amplitude } => StrainHistory::step(tg, amplitude),
        Shape::Ramp { rate } => StrainHistory::from_fn(tg, |t| rate * t),
        Shape::Sine { amplitude, period } => StrainHistory::from_fn(tg, |t| amplitude * (2.0 * PI * t / period).sin()),
    }
}

fn rheology(p: &RheologyParams) -> Result<Vec<Artifact>, ModuleError> {
    let err = in_module("rheology");
    let m = &p.model;
    let mut out = vec![];
    if let Some(s) = &p.relaxation {
        let mut t = Table::new(&["t", "G"]);
        for x in s.points() {
            let g = rheology::relaxation_modulus(m, x).map_err(&err)?;
            t.row().num(x).num(g);
        }
        out.push(artifact("relaxation.csv", t));
    }
    if let Some(s) = &p.moduli {
        let mut t = Table::new(&["omega", "G1", "G2"]);
        for w in s.points() {
            let (g1, g2) = rheology::dynamic_moduli(m, w).map_err(&err)?;
            t.row().num(w).num(g1).num(g2);
        }
        out.push(artifact("moduli.csv", t));
    }
    if let Some(hs) = &p.history {
        let h = history(hs).map_err(&err)?;
        let n = h.strain.len();
        let (stress, plastic, q) = match m {
            RheoModel::Vevp { .. } => {
                let r = rheology::vevp_simulate(m, &h).map_err(&err)?;
                (r.stress, r.plastic_strain, r.q)
            }
            RheoModel::Qlv { .. } => (rheology::qlv_stress(m, &h).map_err(&err)?, vec![0.0; n], vec![0.0; n]),
            _ => (rheology::stress_response(m, &h).map_err(&err)?, vec![0.0; n], vec![0.0; n]),
        };
        let mut t = Table::new(&["t", "strain", "stress", "plastic", "q"]);
        for k in 0..n {
            t.row().num(h.tgrid.t(k)).num(h.strain[k]).num(stress[k]).num(plastic[k]).num(q[k]);
        }
        out.push(artifact("driver.csv", t));
    }
    Ok(out)
}

/// Lévy flight ensemble at time t against the fundamental solution
/// S_α(γ, σ t^{1/α}, μ t).
fn verify(p: &VerifyParams, seed: u64) -> Result<(Vec<Artifact>, ComparisonReport), ModuleError> {
    let err = in_module("verification");
    let spec = walk_spec(WalkKind::Flight { jump: p.jump }, p.dt, p.t, p.n_paths, 1, seed)?;
    let e = random_walks::simulate(&spec).map_err(in_module("random_walks"))?;
    let t_end = e.times.horizon();
    let law = StableParams::new(p.jump.alpha, p.jump.gamma, p.jump.sigma * t_end.powf(1.0 / p.jump.alpha), p.jump.mu * t_end)
        .map_err(&err)?;
    let emp = empirical_density(&e, t_end, &p.grid).map_err(&err)?;
    let reference: Vec<f64> = p.grid.nodes().into_iter().map(|x| stable_law::pdf(&law, x)).collect::<Result<_, _>>().map_err(&err)?;
    let report = compare_density(&emp, |x| stable_law::pdf(&law, x), &p.grid, p.threshold, e.n_paths).map_err(&err)?;
    let mut d = Table::new(&["x", "empirical", "reference"]);
    for ((x, a), b) in p.grid.nodes().into_iter().zip(&emp).zip(&reference) {
        d.row().num(x).num(*a).num(*b);
    }
    let mut r = Table::new(&["ks_distance", "l1_distance", "n_samples", "threshold", "pass"]);
    r.row().num(report.ks_distance).num(report.l1_distance).int(report.n_samples as u64).num(report.threshold).text(if report.pass { "true" } else { "false" });
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    let report_json = Artifact { name: "report.json".into(), bytes: json };
    Ok((vec![artifact("report.csv", r), report_json, artifact("density.csv", d)], report))
}
