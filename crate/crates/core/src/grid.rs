//! Uniform grids and order fields.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Large truncated domain with absorbing edges and an edge-mass monitor.
    FreeSpace,
    Reflecting,
    Absorbing,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
    pub bc: Boundary,
}

impl Grid1D {
    pub fn new(x0: f64, dx: f64, n: usize, bc: Boundary) -> Result<Self> {
        if n < 3 {
            return Err(Error::Grid(format!("grid needs at least 3 nodes, got {n}")));
        }
        if !(dx > 0.0 && dx.is_finite() && x0.is_finite()) {
            return Err(Error::Grid(format!("invalid spacing dx={dx} or origin x0={x0}")));
        }
        Ok(Grid1D { x0, dx, n, bc })
    }

    /// Nodes −m·dx ..= m·dx with m = round(half_width/dx).
    pub fn centered(half_width: f64, dx: f64, bc: Boundary) -> Result<Self> {
        let m = (half_width / dx).round() as usize;
        Self::new(-(m as f64) * dx, dx, 2 * m + 1, bc)
    }

    /// n nodes covering one period [−period/2, period/2).
    pub fn periodic(period: f64, n: usize) -> Result<Self> {
        Self::new(-period / 2.0, period / n as f64, n, Boundary::Periodic)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n - 1)
    }

    /// Index of the node nearest to x (clamped into the grid).
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.x0) / self.dx).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || n_steps == 0 {
            return Err(Error::Grid(format!("invalid time grid dt={dt}, steps={n_steps}")));
        }
        Ok(TimeGrid { dt, n_steps })
    }

    /// Grid reaching `horizon` in steps of `dt` (rounded to the nearest step).
    pub fn to_horizon(dt: f64, horizon: f64) -> Result<Self> {
        if horizon < dt {
            return Err(Error::Grid(format!("horizon {horizon} shorter than dt {dt}")));
        }
        Self::new(dt, (horizon / dt).round() as usize)
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|j| self.t(j)).collect()
    }
}

/// Fractional order as a function of (x, t).
#[derive(Clone)]
pub enum OrderField {
    Constant(f64),
    /// `left` for x < x_step, `right` otherwise.
    StepX { left: f64, right: f64, x_step: f64 },
    /// `before` for t < t_step, `after` otherwise.
    StepT { before: f64, after: f64, t_step: f64 },
    /// start + slope·t
    RampT { start: f64, slope: f64 },
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for OrderField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderField::Constant(a) => write!(f, "Constant({a})"),
            OrderField::StepX { left, right, x_step } => write!(f, "StepX({left}->{right} at x={x_step})"),
            OrderField::StepT { before, after, t_step } => write!(f, "StepT({before}->{after} at t={t_step})"),
            OrderField::RampT { start, slope } => write!(f, "RampT({start} + {slope} t)"),
            OrderField::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl OrderField {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            OrderField::Constant(a) => *a,
            OrderField::StepX { left, right, x_step } => {
                if x < *x_step {
                    *left
                } else {
                    *right
                }
            }
            OrderField::StepT { before, after, t_step } => {
                if t < *t_step {
                    *before
                } else {
                    *after
                }
            }
            OrderField::RampT { start, slope } => start + slope * t,
            OrderField::Custom(f) => f(x, t),
        }
    }

    /// Evaluate and require the value in (lo, hi] (or (lo, hi) if `open_hi`).
    pub fn eval_in(&self, x: f64, t: f64, lo: f64, hi: f64, open_hi: bool) -> Result<f64> {
        let a = self.eval(x, t);
        let ok = a > lo && if open_hi { a < hi } else { a <= hi };
        if !ok {
            let close = if open_hi { ")" } else { "]" };
            return Err(Error::OrderRange(format!("order {a} at (x={x}, t={t}) outside ({lo},{hi}{close}")));
        }
        Ok(a)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            OrderField::Constant(a) => Some(*a),
            _ => None,
        }
    }
}
