//! Gamma function helpers on top of `statrs` (Lanczos approximation).

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Reciprocal gamma, exactly zero at the poles 0, -1, -2, ...
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        // reflection keeps the pole structure exact
        return (PI * x).sin() * gamma(1.0 - x) / PI;
    }
    if x > 171.0 {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma(x)
}
