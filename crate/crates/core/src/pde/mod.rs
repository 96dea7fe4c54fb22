//! Radial solver for `u_t = Δu + f(u)` up to a cap near blow-up.

mod diagnostics;
mod grid;
mod initial;
mod solver;

use std::sync::Arc;

pub use diagnostics::{diagnostics, DecadeMax, DiagnosticsReport};
pub use grid::{Boundary, RadialGrid, MAX_GRADING};
pub use initial::{make_initial_data, InitialData, InitialKind, MonotoneInTime};
pub use solver::{
    estimate_blowup, run_to_cap, BlowupEstimate, RadialState, Snapshot, Solver, SolverOptions, Trajectory,
    TrajectorySample, DT_UNDERFLOW,
};

use crate::error::Result;
use crate::ode_asym::ResolventTable;

/// A finished two-pass run: the second pass lands on the similarity
/// checkpoints `s = -log(T - t)` located with the first pass's estimate.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub first_pass: BlowupEstimate,
    /// Requested checkpoint labels `s_k`, paired with the snapshots.
    pub checkpoint_s: Vec<f64>,
    /// `|T_est - T_first|`: the two passes differ only in where steps land.
    pub t_uncertainty: f64,
}

/// Checkpoints need `T - t` at least this many times the uncertainty of `T_est`.
pub const CHECKPOINT_MARGIN: f64 = 100.0;

impl Simulation {
    pub fn t_est(&self) -> f64 {
        self.trajectory.estimate.t_est
    }
}

/// `u_cap = G⁻¹(10⁻¹⁰ · G(‖u₀‖_∞))`.
pub fn default_u_cap(table: &ResolventTable, u_max0: f64) -> Result<f64> {
    let scale = table.g(u_max0.max(table.floor()))?;
    table.g_inv(1e-10 * scale)
}

pub fn simulate(
    table: Arc<ResolventTable>,
    grid: Arc<RadialGrid>,
    u0: Vec<f64>,
    opts: SolverOptions,
    u_cap: Option<f64>,
    s_first: f64,
) -> Result<Simulation> {
    let state = RadialState::new(grid, u0, 0.0)?;
    let u_cap = match u_cap {
        Some(c) => c,
        None => default_u_cap(&table, state.max_norm())?,
    };
    let mut solver = Solver::new(table, opts)?;
    let first = run_to_cap(&mut solver, state.clone(), u_cap, &[])?;
    let t1 = first.estimate.t_est;
    let t_end = first.final_snapshot.t;
    let mut checkpoint_s = Vec::new();
    let mut times = Vec::new();
    let mut s = s_first.ceil();
    loop {
        let t = t1 - (-s).exp();
        if t >= t_end {
            break;
        }
        if t > state.t {
            checkpoint_s.push(s);
            times.push(t);
        }
        s += 1.0;
    }
    let mut second = run_to_cap(&mut solver, state, u_cap, &times)?;
    let t_uncertainty = (second.estimate.t_est - t1).abs();
    // later checkpoints sit inside the noise of T_est; their s labels mean little
    let keep = checkpoint_s
        .iter()
        .take_while(|&&s| (-s).exp() >= CHECKPOINT_MARGIN * t_uncertainty)
        .count()
        .min(second.snapshots.len());
    checkpoint_s.truncate(keep);
    second.snapshots.truncate(keep);
    Ok(Simulation {
        trajectory: second,
        first_pass: first.estimate,
        checkpoint_s,
        t_uncertainty,
    })
}
