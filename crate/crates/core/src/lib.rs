//! Numerical toolkit for anomalous diffusion: α-stable laws, Mittag-Leffler
//! functions, particle simulators, fractional difference operators, fractional
//! advection–dispersion solvers and fractional viscoelastic models.

pub mod error;
pub mod fade_solvers;
pub mod frac_operators;
pub mod gamma;
pub mod grid;
pub mod quad;
pub mod random_walks;
pub mod rheology;
pub mod rng;
pub mod special_functions;
pub mod stable_law;
pub mod verification;

pub use error::{Error, Result};
