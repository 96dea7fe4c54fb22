//! Numerical laboratory for radially symmetric blow-up of
//! `u_t - Δu = e^u L(e^u)` with a slowly varying factor `L`.
//!
//! * [`nonlin`]: the nonlinearity families and their slow-variation checks
//! * [`ode_asym`]: the resolvent `G`, `H`, `Q`, inverses and `ψ`
//! * [`pde`]: the radial finite-volume solver and blow-up time estimate
//! * [`similarity`]: similarity-variable frames, weighted norms, energy
//! * [`profiles`]: closed-form profile predictions and comparisons
//! * [`selfsim`]: shooting for the self-similar profile equation
//! * [`pipeline`], [`acceptance`]: config-driven runs and the verdict suite

// `!(x > 0.0)` is the NaN-rejecting form used throughout for argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod error;
pub mod interp;
pub mod io;
pub mod nonlin;
pub mod ode_asym;
pub mod pde;
pub mod pipeline;
pub mod profiles;
pub mod quad;
pub mod selfsim;
pub mod similarity;
pub mod trend;

pub use error::{Error, Result};

/// Tool version stamped into every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
