//! The radial solver against exact solutions with one of its two parts off.

use std::sync::Arc;

use blowup_core::nonlin::{self, Params};
use blowup_core::ode_asym::{OdeSolution, ResolventTable};
use blowup_core::pde::{run_to_cap, Boundary, RadialGrid, RadialState, Solver, SolverOptions};

fn pure_exp() -> Arc<ResolventTable> {
    Arc::new(ResolventTable::with_defaults(nonlin::make_builtin("pure_exp", &Params::new()).unwrap()))
}

/// Gaussian data evolved by the heat equation alone, against the exact
/// spreading Gaussian `a (σ/(σ+t))^{n/2} exp(-r²/(4(σ+t)))`.
fn heat_error(n: usize, cells: usize, t_end: f64) -> f64 {
    let (a, sigma) = (1.0, 0.005);
    let grid = Arc::new(RadialGrid::graded(n, 1.0, cells, 8.0, Boundary::Dirichlet).unwrap());
    let u: Vec<f64> = grid.nodes().iter().map(|r| a * (-r * r / (4.0 * sigma)).exp()).collect();
    let opts = SolverOptions {
        reaction: false,
        // backward Euler is first order in time; keep its share below the grid error
        dt_max: 1e-6,
        safety: 1.0,
        ..Default::default()
    };
    let mut solver = Solver::new(pure_exp(), opts).unwrap();
    let mut state = RadialState::new(grid.clone(), u, 0.0).unwrap();
    while state.t < t_end {
        solver.step(&mut state, Some(t_end)).unwrap();
    }
    let s = sigma + t_end;
    grid.nodes()
        .iter()
        .zip(&state.u)
        .map(|(r, v)| (v - a * (sigma / s).powf(n as f64 / 2.0) * (-r * r / (4.0 * s)).exp()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn heat_kernel_in_one_and_three_dimensions() {
    for n in [1, 3] {
        let e = heat_error(n, 400, 0.01);
        assert!(e <= 1e-4, "n = {n}: max error {e:e}");
    }
}

#[test]
fn heat_kernel_error_falls_with_refinement() {
    let coarse = heat_error(2, 400, 0.01);
    let fine = heat_error(2, 800, 0.01);
    assert!(fine < coarse, "{fine:e} vs {coarse:e}");
}

#[test]
fn reaction_alone_follows_the_flat_solution_for_every_family() {
    let grid = Arc::new(RadialGrid::graded(1, 1.0, 16, 0.0, Boundary::Dirichlet).unwrap());
    let opts = SolverOptions {
        diffusion: false,
        ..Default::default()
    };
    for fam in nonlin::builtin_catalog() {
        let label = fam.label();
        let table = Arc::new(ResolventTable::with_defaults(fam));
        let a = table.floor() + 1.0;
        let state = RadialState::new(grid.clone(), vec![a; grid.nodes().len()], 0.0).unwrap();
        let mut solver = Solver::new(table.clone(), opts).unwrap();
        let tr = run_to_cap(&mut solver, state, 20.0, &[]).unwrap();
        let ode = OdeSolution::from_initial(table.clone(), a, 0.0).unwrap();
        for s in &tr.samples {
            let psi = ode.psi(s.t).unwrap();
            assert!(((s.u0 - psi) / psi).abs() <= 1e-6, "{label}: u = {} vs psi = {psi}", s.u0);
        }
        // constant data stays constant without diffusion
        let last = &tr.final_snapshot.u;
        assert!(last.iter().all(|v| v == &last[0]), "{label}");
        assert!((tr.estimate.t_est / table.g(a).unwrap() - 1.0).abs() < 1e-9, "{label}");
    }
}
