//! JSON experiment configs. Validation walks the whole document and collects
//! every violation with its key path before anything runs.

use anomaly_core::fade_solvers::FadeKind;
use anomaly_core::grid::{Boundary, Grid1D, OrderField};
use anomaly_core::random_walks::{WaitLaw, WalkKind};
use anomaly_core::rheology::RheoModel;
use anomaly_core::stable_law::StableParams;
use serde_json::{Map, Value};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sample,
    Walk,
    Solve,
    Rheology,
    Verify,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::Sample, Command::Walk, Command::Solve, Command::Rheology, Command::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Walk => "walk",
            Command::Solve => "solve",
            Command::Rheology => "rheology",
            Command::Verify => "verify",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Parse { line: usize, column: usize, message: String },
    Invalid(Vec<Violation>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, column, message } => write!(f, "config parse error at line {line}, column {column}: {message}"),
            ConfigError::Invalid(v) => {
                write!(f, "config has {} violation(s):", v.len())?;
                for x in v {
                    write!(f, "\n  {x}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct SampleParams {
    pub stable: StableParams,
    pub n_samples: usize,
    /// Nodes at which pdf and cdf are tabulated.
    pub grid: Option<Grid1D>,
}

#[derive(Debug, Clone)]
pub struct WalkParams {
    pub kind: WalkKind,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub record_every: usize,
    /// Position density at time t on the given bins.
    pub density: Option<(f64, Grid1D)>,
}

#[derive(Debug, Clone)]
pub enum InitialCondition {
    Delta { x: f64 },
    Gaussian { x: f64, width: f64 },
    Uniform { value: f64 },
    Values(Vec<f64>),
}

impl InitialCondition {
    pub fn on(&self, g: &Grid1D) -> Vec<f64> {
        match self {
            InitialCondition::Delta { x } => anomaly_core::fade_solvers::delta_ic(g, *x),
            InitialCondition::Gaussian { x, width } => {
                let norm = 1.0 / (width * (2.0 * std::f64::consts::PI).sqrt());
                g.nodes().into_iter().map(|y| norm * (-0.5 * ((y - x) / width).powi(2)).exp()).collect()
            }
            InitialCondition::Uniform { value } => vec![*value; g.n],
            InitialCondition::Values(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveParams {
    pub kind: FadeKind,
    pub grid: Grid1D,
    pub dt: f64,
    pub steps: usize,
    pub d: f64,
    pub v: f64,
    pub p: f64,
    pub alpha: OrderField,
    pub beta: OrderField,
    pub mim_ratio: f64,
    pub record_every: usize,
    pub ic: InitialCondition,
    pub probes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Step { amplitude: f64 },
    Ramp { rate: f64 },
    Sine { amplitude: f64, period: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistorySpec {
    pub dt: f64,
    pub n_steps: usize,
    pub shape: Shape,
}

/// Log-spaced sweep of `n` points on [min, max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.min.ln(), self.max.ln());
        (0..self.n).map(|k| (a + (b - a) * k as f64 / (self.n - 1) as f64).exp()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RheologyParams {
    pub model: RheoModel,
    pub history: Option<HistorySpec>,
    pub relaxation: Option<Sweep>,
    pub moduli: Option<Sweep>,
}

#[derive(Debug, Clone)]
pub struct VerifyParams {
    pub jump: StableParams,
    pub dt: f64,
    pub t: f64,
    pub n_paths: usize,
    pub grid: Grid1D,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub enum Params {
    Sample(SampleParams),
    Walk(WalkParams),
    Solve(SolveParams),
    Rheology(RheologyParams),
    Verify(VerifyParams),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub params: Params,
    /// The document as validated (seed override applied), with sorted keys.
    pub canonical: Value,
}

type Rule = (&'static str, fn(f64) -> bool);

const FINITE: Rule = ("must be a finite number", |v| v.is_finite());
const POSITIVE: Rule = ("must be positive", |v| v > 0.0 && v.is_finite());
const NONNEG: Rule = ("must be nonnegative", |v| v >= 0.0 && v.is_finite());
const UNIT: Rule = ("must lie in [0,1]", |v| (0.0..=1.0).contains(&v));
const OPEN_UNIT: Rule = ("must lie in (0,1)", |v| v > 0.0 && v < 1.0);
const STABLE_ALPHA: Rule = ("must lie in (0,2]", |v| v > 0.0 && v <= 2.0);
const SKEW: Rule = ("must lie in [-1,1]", |v| (-1.0..=1.0).contains(&v));
const SPACE_ORDER: Rule = ("must lie in (1,2]", |v| v > 1.0 && v <= 2.0);
const TIME_ORDER: Rule = ("must lie in (0,1]", |v| v > 0.0 && v <= 1.0);

#[derive(Default)]
struct Errs(Vec<Violation>);

impl Errs {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation { path: path.into(), message: message.into() });
    }
}

fn join(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_string()
    } else {
        format!("{parent}.{key}")
    }
}

/// One JSON object being read; keys never asked for are reported as unknown.
struct Section<'a> {
    path: String,
    map: &'a Map<String, Value>,
    used: Vec<&'a str>,
}

impl<'a> Section<'a> {
    fn new(path: String, map: &'a Map<String, Value>) -> Self {
        Section { path, map, used: vec![] }
    }

    fn at(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn get(&mut self, key: &'a str) -> Option<&'a Value> {
        self.used.push(key);
        self.map.get(key)
    }

    fn num(&mut self, e: &mut Errs, key: &'a str, default: Option<f64>, rule: Rule) -> f64 {
        match (self.get(key), default) {
            (None, Some(d)) => d,
            (None, None) => {
                e.push(self.at(key), "missing required number");
                f64::NAN
            }
            (Some(v), _) => match v.as_f64() {
                Some(x) if rule.1(x) => x,
                Some(x) => {
                    e.push(self.at(key), format!("{} {}, got {x}", key, rule.0));
                    f64::NAN
                }
                None => {
                    e.push(self.at(key), format!("expected a number, got {v}"));
                    f64::NAN
                }
            },
        }
    }

    fn count(&mut self, e: &mut Errs, key: &'a str, default: Option<u64>, min: u64) -> u64 {
        match (self.get(key), default) {
            (None, Some(d)) => d,
            (None, None) => {
                e.push(self.at(key), "missing required integer");
                0
            }
            (Some(v), _) => match v.as_u64() {
                Some(x) if x >= min => x,
                _ => {
                    e.push(self.at(key), format!("expected an integer >= {min}, got {v}"));
                    0
                }
            },
        }
    }

    fn choice(&mut self, e: &mut Errs, key: &'a str, options: &[&str], default: Option<&'a str>) -> Option<&'a str> {
        match (self.get(key), default) {
            (None, Some(d)) => Some(d),
            (None, None) => {
                e.push(self.at(key), format!("missing; expected one of {options:?}"));
                None
            }
            (Some(v), _) => match v.as_str() {
                Some(s) if options.contains(&s) => Some(s),
                _ => {
                    e.push(self.at(key), format!("expected one of {options:?}, got {v}"));
                    None
                }
            },
        }
    }

    fn obj(&mut self, e: &mut Errs, key: &'a str, required: bool) -> Option<Section<'a>> {
        match self.get(key) {
            None => {
                if required {
                    e.push(self.at(key), "missing required object");
                }
                None
            }
            Some(Value::Object(m)) => Some(Section::new(self.at(key), m)),
            Some(v) => {
                e.push(self.at(key), format!("expected an object, got {v}"));
                None
            }
        }
    }

    fn numbers(&mut self, e: &mut Errs, key: &'a str) -> Option<Vec<f64>> {
        let v = self.get(key)?;
        let arr = v.as_array().and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>());
        if arr.is_none() {
            e.push(self.at(key), "expected an array of numbers");
        }
        arr
    }

    fn finish(self, e: &mut Errs) {
        for k in self.map.keys() {
            if !self.used.contains(&k.as_str()) {
                e.push(join(&self.path, k), "unknown key");
            }
        }
    }
}

fn stable(e: &mut Errs, mut s: Section<'_>) -> StableParams {
    let p = StableParams {
        alpha: s.num(e, "alpha", None, STABLE_ALPHA),
        gamma: s.num(e, "gamma", Some(0.0), SKEW),
        sigma: s.num(e, "sigma", Some(1.0), POSITIVE),
        mu: s.num(e, "mu", Some(0.0), FINITE),
    };
    s.finish(e);
    p
}

fn grid(e: &mut Errs, mut s: Section<'_>, with_boundary: bool) -> Option<Grid1D> {
    let x0 = s.num(e, "x0", None, FINITE);
    let dx = s.num(e, "dx", None, POSITIVE);
    let n = s.count(e, "n", None, 3) as usize;
    let bc = if with_boundary {
        match s.choice(e, "boundary", &["free_space", "reflecting", "absorbing", "periodic"], Some("free_space")) {
            Some("reflecting") => Boundary::Reflecting,
            Some("absorbing") => Boundary::Absorbing,
            Some("periodic") => Boundary::Periodic,
            _ => Boundary::FreeSpace,
        }
    } else {
        Boundary::Absorbing
    };
    let path = s.path.clone();
    s.finish(e);
    if n >= 3 && x0.is_finite() && dx > 0.0 {
        match Grid1D::new(x0, dx, n, bc) {
            Ok(g) => return Some(g),
            Err(err) => e.push(path, err.to_string()),
        }
    }
    None
}

fn order_field(e: &mut Errs, s: &mut Section<'_>, key: &'static str, default: f64, rule: Rule) -> OrderField {
    let path = s.at(key);
    match s.get(key) {
        None => OrderField::Constant(default),
        Some(Value::Number(n)) => {
            let v = n.as_f64().unwrap_or(f64::NAN);
            if !rule.1(v) {
                e.push(path, format!("{key} {}, got {v}", rule.0));
            }
            OrderField::Constant(v)
        }
        Some(Value::Object(m)) => {
            let mut o = Section::new(path, m);
            let f = match o.choice(e, "kind", &["step_x", "step_t", "ramp_t"], None) {
                Some("step_x") => OrderField::StepX {
                    left: o.num(e, "left", None, rule),
                    right: o.num(e, "right", None, rule),
                    x_step: o.num(e, "x_step", None, FINITE),
                },
                Some("step_t") => OrderField::StepT {
                    before: o.num(e, "before", None, rule),
                    after: o.num(e, "after", None, rule),
                    t_step: o.num(e, "t_step", None, NONNEG),
                },
                Some("ramp_t") => OrderField::RampT {
                    start: o.num(e, "start", None, rule),
                    slope: o.num(e, "slope", None, FINITE),
                },
                _ => OrderField::Constant(default),
            };
            o.finish(e);
            f
        }
        Some(v) => {
            e.push(path, format!("expected a number or an order-field object, got {v}"));
            OrderField::Constant(default)
        }
    }
}

fn sample(e: &mut Errs, root: &mut Section<'_>) -> Params {
    let st = root.obj(e, "stable", true).map(|s| stable(e, s));
    let n_samples = root.count(e, "n_samples", None, 1) as usize;
    let g = root.obj(e, "grid", false).and_then(|s| grid(e, s, false));
    Params::Sample(SampleParams { stable: st.unwrap_or(NAN_STABLE), n_samples, grid: g })
}

const NAN_STABLE: StableParams = StableParams { alpha: f64::NAN, gamma: 0.0, sigma: 1.0, mu: 0.0 };

fn jump(e: &mut Errs, w: &mut Section<'_>) -> StableParams {
    w.obj(e, "jump", true).map(|s| stable(e, s)).unwrap_or(NAN_STABLE)
}

fn walk(e: &mut Errs, root: &mut Section<'_>) -> Params {
    let mut w = match root.obj(e, "walk", true) {
        Some(w) => w,
        None => return Params::Walk(WalkParams { kind: WalkKind::Flight { jump: NAN_STABLE }, dt: 0.0, horizon: 0.0, n_paths: 0, record_every: 1, density: None }),
    };
    let kind_name = w.choice(e, "kind", &["flight", "subordinated", "ctrw", "levy_walk"], None);
    let dt = w.num(e, "dt", None, POSITIVE);
    let horizon = w.num(e, "horizon", None, POSITIVE);
    if horizon < dt {
        e.push(w.at("horizon"), format!("horizon {horizon} must be at least dt {dt}"));
    }
    let n_paths = w.count(e, "n_paths", None, 1) as usize;
    let record_every = w.count(e, "record_every", Some(1), 1) as usize;

    let kind = match kind_name {
        Some("flight") => WalkKind::Flight { jump: jump(e, &mut w) },
        Some("subordinated") => WalkKind::SubordinatedBm { beta: w.num(e, "beta", None, OPEN_UNIT), jump: jump(e, &mut w) },
        Some("ctrw") => {
            let wait = match w.obj(e, "wait", true) {
                Some(mut s) => {
                    let law = match s.choice(e, "law", &["exponential", "stable"], None) {
                        Some("exponential") => WaitLaw::Exponential { rate: s.num(e, "rate", None, POSITIVE) },
                        Some("stable") => WaitLaw::Stable { beta: s.num(e, "beta", None, OPEN_UNIT), c: s.num(e, "c", Some(1.0), POSITIVE) },
                        _ => WaitLaw::Exponential { rate: 1.0 },
                    };
                    s.finish(e);
                    law
                }
                None => WaitLaw::Exponential { rate: 1.0 },
            };
            WalkKind::Ctrw { wait, jump: jump(e, &mut w) }
        }
        Some("levy_walk") => WalkKind::LevyWalk {
            speed: w.num(e, "speed", None, NONNEG),
            tau0: w.num(e, "tau0", Some(1.0), POSITIVE),
            gamma: w.num(e, "gamma", None, POSITIVE),
        },
        _ => WalkKind::Flight { jump: NAN_STABLE },
    };
    w.finish(e);
    let density = root.obj(e, "density", false).and_then(|mut s| {
        let t = s.num(e, "t", None, POSITIVE);
        if t > horizon {
            e.push(s.at("t"), format!("density time {t} exceeds the horizon {horizon}"));
        }
        let g = s.obj(e, "grid", true).and_then(|gs| grid(e, gs, false));
        s.finish(e);
        g.map(|g| (t, g))
    });
    Params::Walk(WalkParams { kind, dt, horizon, n_paths, record_every, density })
}

fn solve(e: &mut Errs, root: &mut Section<'_>) -> Params {
    let dummy_grid = Grid1D { x0: 0.0, dx: 1.0, n: 3, bc: Boundary::Absorbing };
    let Some(mut s) = root.obj(e, "solve", true) else {
        return Params::Solve(SolveParams {
            kind: FadeKind::SpaceFade,
            grid: dummy_grid,
            dt: 0.0,
            steps: 0,
            d: 0.0,
            v: 0.0,
            p: 0.5,
            alpha: OrderField::Constant(2.0),
            beta: OrderField::Constant(1.0),
            mim_ratio: 0.0,
            record_every: 1,
            ic: InitialCondition::Uniform { value: 0.0 },
            probes: vec![],
        });
    };
    let kind = match s.choice(e, "kind", &["space", "ffade", "time", "mim", "variable_order"], None) {
        Some("ffade") => FadeKind::Ffade,
        Some("time") => FadeKind::TimeFade,
        Some("mim") => FadeKind::Fmim,
        Some("variable_order") => FadeKind::VoFade,
        _ => FadeKind::SpaceFade,
    };
    let g = s.obj(e, "grid", true).and_then(|gs| grid(e, gs, true));
    let dt = s.num(e, "dt", None, POSITIVE);
    let steps = s.count(e, "steps", None, 1) as usize;
    let d = s.num(e, "d", None, POSITIVE);
    let v = s.num(e, "v", Some(0.0), FINITE);
    let p = s.num(e, "p", Some(0.5), UNIT);
    let alpha = order_field(e, &mut s, "alpha", 2.0, SPACE_ORDER);
    let beta = order_field(e, &mut s, "beta", 1.0, TIME_ORDER);
    let mim_ratio = if kind == FadeKind::Fmim { s.num(e, "mim_ratio", None, NONNEG) } else { 0.0 };
    let record_every = s.count(e, "record_every", Some(steps.max(1) as u64), 1) as usize;
    let probes = s.numbers(e, "probes").unwrap_or_default();
    let ic = match s.obj(e, "ic", true) {
        Some(mut c) => {
            let ic = match c.choice(e, "kind", &["delta", "gaussian", "uniform", "values"], None) {
                Some("delta") => InitialCondition::Delta { x: c.num(e, "x", Some(0.0), FINITE) },
                Some("gaussian") => InitialCondition::Gaussian { x: c.num(e, "x", Some(0.0), FINITE), width: c.num(e, "width", None, POSITIVE) },
                Some("uniform") => InitialCondition::Uniform { value: c.num(e, "value", None, NONNEG) },
                Some("values") => {
                    let vals = c.numbers(e, "values");
                    match (vals, &g) {
                        (None, _) => e.push(c.at("values"), "missing array of nodal values"),
                        (Some(v), Some(g)) if v.len() != g.n => e.push(c.at("values"), format!("has {} values for {} grid nodes", v.len(), g.n)),
                        _ => {}
                    }
                    InitialCondition::Values(c.map.get("values").and_then(Value::as_array).map(|a| a.iter().filter_map(Value::as_f64).collect()).unwrap_or_default())
                }
                _ => InitialCondition::Uniform { value: 0.0 },
            };
            c.finish(e);
            ic
        }
        None => InitialCondition::Uniform { value: 0.0 },
    };
    if let Some(g) = &g {
        for (i, &x) in probes.iter().enumerate() {
            if x < g.x0 || x > g.x_end() {
                e.push(format!("{}[{i}]", s.at("probes")), format!("probe {x} lies outside [{}, {}]", g.x0, g.x_end()));
            }
        }
    }
    s.finish(e);
    Params::Solve(SolveParams { kind, grid: g.unwrap_or(dummy_grid), dt, steps, d, v, p, alpha, beta, mim_ratio, record_every, ic, probes })
}

fn sweep(e: &mut Errs, mut s: Section<'_>) -> Sweep {
    let min = s.num(e, "min", None, POSITIVE);
    let max = s.num(e, "max", None, POSITIVE);
    if max <= min {
        e.push(s.at("max"), format!("max {max} must exceed min {min}"));
    }
    let n = s.count(e, "n", None, 2) as usize;
    s.finish(e);
    Sweep { min, max, n }
}

fn rheology(e: &mut Errs, root: &mut Section<'_>) -> Params {
    let model = match root.obj(e, "model", true) {
        Some(mut m) => {
            let model = match m.choice(e, "kind", &["sb", "fkv", "fm", "qlv", "vevp"], None) {
                Some("sb") => RheoModel::Sb { e: m.num(e, "e", None, POSITIVE), alpha: m.num(e, "alpha", None, OPEN_UNIT) },
                Some(k @ ("fkv" | "fm")) => {
                    let (e1, alpha1) = (m.num(e, "e1", None, POSITIVE), m.num(e, "alpha1", None, OPEN_UNIT));
                    let (e2, alpha2) = (m.num(e, "e2", None, POSITIVE), m.num(e, "alpha2", None, OPEN_UNIT));
                    if alpha1 >= alpha2 {
                        e.push(m.at("alpha2"), format!("alpha1 < alpha2 is required, got {alpha1} >= {alpha2}"));
                    }
                    if k == "fkv" {
                        RheoModel::Fkv { e1, alpha1, e2, alpha2 }
                    } else {
                        RheoModel::Fm { e1, alpha1, e2, alpha2 }
                    }
                }
                Some("qlv") => {
                    let q = RheoModel::Qlv {
                        a: m.num(e, "a", None, POSITIVE),
                        b: m.num(e, "b", None, POSITIVE),
                        c: m.num(e, "c", None, NONNEG),
                        d: m.num(e, "d", None, NONNEG),
                        alpha: m.num(e, "alpha", None, OPEN_UNIT),
                    };
                    if let RheoModel::Qlv { c: 0.0, d: 0.0, .. } = q {
                        e.push(m.at("d"), "QLV kernel needs c + d > 0");
                    }
                    q
                }
                Some("vevp") => RheoModel::Vevp {
                    e: m.num(e, "e", None, POSITIVE),
                    alpha: m.num(e, "alpha", None, OPEN_UNIT),
                    sigma_y: m.num(e, "sigma_y", None, POSITIVE),
                    k: m.num(e, "k", None, NONNEG),
                    h: m.num(e, "h", None, NONNEG),
                    alpha_k: m.num(e, "alpha_k", None, OPEN_UNIT),
                },
                _ => RheoModel::Sb { e: f64::NAN, alpha: f64::NAN },
            };
            m.finish(e);
            model
        }
        None => RheoModel::Sb { e: f64::NAN, alpha: f64::NAN },
    };
    let history = root.obj(e, "history", false).map(|mut h| {
        let dt = h.num(e, "dt", None, POSITIVE);
        let n_steps = h.count(e, "n_steps", None, 1) as usize;
        let shape = match h.choice(e, "shape", &["step", "ramp", "sine"], None) {
            Some("step") => {
                if matches!(model, RheoModel::Fm { .. } | RheoModel::Vevp { .. }) {
                    e.push(h.at("shape"), "a step history needs homogeneous-start support, which fm and vevp lack");
                }
                Shape::Step { amplitude: h.num(e, "amplitude", None, FINITE) }
            }
            Some("ramp") => Shape::Ramp { rate: h.num(e, "rate", None, FINITE) },
            Some("sine") => Shape::Sine { amplitude: h.num(e, "amplitude", None, FINITE), period: h.num(e, "period", None, POSITIVE) },
            _ => Shape::Ramp { rate: 0.0 },
        };
        h.finish(e);
        HistorySpec { dt, n_steps, shape }
    });
    let relaxation = root.obj(e, "relaxation", false).map(|s| sweep(e, s));
    let moduli = root.obj(e, "moduli", false).map(|s| sweep(e, s));
    if moduli.is_some() && matches!(model, RheoModel::Qlv { .. }) {
        e.push("moduli", "QLV is nonlinear and has no dynamic moduli");
    }
    if history.is_none() && relaxation.is_none() && moduli.is_none() {
        e.push("history", "at least one of history, relaxation or moduli is required");
    }
    Params::Rheology(RheologyParams { model, history, relaxation, moduli })
}

fn verify(e: &mut Errs, root: &mut Section<'_>) -> Params {
    let dummy_grid = Grid1D { x0: 0.0, dx: 1.0, n: 3, bc: Boundary::Absorbing };
    let Some(mut s) = root.obj(e, "verify", true) else {
        return Params::Verify(VerifyParams { jump: NAN_STABLE, dt: 0.0, t: 0.0, n_paths: 0, grid: dummy_grid, threshold: 0.0 });
    };
    let jump = s.obj(e, "jump", true).map(|j| stable(e, j)).unwrap_or(NAN_STABLE);
    let dt = s.num(e, "dt", None, POSITIVE);
    let t = s.num(e, "t", None, POSITIVE);
    if t < dt {
        e.push(s.at("t"), format!("t {t} must be at least dt {dt}"));
    }
    let n_paths = s.count(e, "n_paths", None, 1) as usize;
    let g = s.obj(e, "grid", true).and_then(|gs| grid(e, gs, false));
    let threshold = s.num(e, "threshold", Some(0.02), UNIT);
    s.finish(e);
    Params::Verify(VerifyParams { jump, dt, t, n_paths, grid: g.unwrap_or(dummy_grid), threshold })
}

/// Parse and validate a config. `seed_override` (from `--seed`) replaces the
/// document's seed and satisfies the seed requirement on its own.
pub fn validate_config(doc: &str, seed_override: Option<u64>) -> Result<ExperimentConfig, ConfigError> {
    let mut value: Value = serde_json::from_str(doc).map_err(|err| ConfigError::Parse {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    })?;
    let Value::Object(map) = &mut value else {
        return Err(ConfigError::Invalid(vec![Violation { path: "$".into(), message: "config must be a JSON object".into() }]));
    };
    if let Some(s) = seed_override {
        map.insert("seed".into(), Value::from(s));
    }
    let mut e = Errs::default();
    let mut root = Section::new(String::new(), map);
    let command = root
        .choice(&mut e, "command", &Command::ALL.map(Command::name), None)
        .and_then(Command::parse);
    let seed = match root.get("seed") {
        None => {
            e.push("seed", "missing; a seed is required for reproducibility");
            0
        }
        Some(v) => v.as_u64().unwrap_or_else(|| {
            e.push("seed", format!("expected a nonnegative integer, got {v}"));
            0
        }),
    };
    let output_dir = match root.get("output_dir") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(v) => {
            e.push("output_dir", format!("expected a string path, got {v}"));
            None
        }
    };
    let params = match command {
        Some(Command::Sample) => sample(&mut e, &mut root),
        Some(Command::Walk) => walk(&mut e, &mut root),
        Some(Command::Solve) => solve(&mut e, &mut root),
        Some(Command::Rheology) => rheology(&mut e, &mut root),
        Some(Command::Verify) => verify(&mut e, &mut root),
        None => {
            // without a command the remaining keys cannot be judged
            root.used.extend(map.keys().map(String::as_str));
            Params::Sample(SampleParams { stable: NAN_STABLE, n_samples: 0, grid: None })
        }
    };
    root.finish(&mut e);
    match command {
        Some(command) if e.0.is_empty() => Ok(ExperimentConfig { command, seed, output_dir, params, canonical: value.clone() }),
        _ => Err(ConfigError::Invalid(e.0)),
    }
}
