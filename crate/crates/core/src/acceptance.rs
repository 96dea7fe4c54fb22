//! The acceptance suite: a registry of named criteria, each with a runtime
//! budget, evaluated against shared run artifacts.

use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, DomainSpec, ExperimentConfig, FamilySpec, SolverSpec};
use crate::error::{Error, Result};
use crate::nonlin::{self, Params};
use crate::ode_asym::{self, ResolventTable};
use crate::pde::{self, Boundary, InitialKind, RadialState, Solver, SolverOptions};
use crate::pipeline::{self, RunArtifacts, SelfsimRequest};
use crate::profiles::ProfileKind;
use crate::trend;

/// Verdict of one criterion before timing is applied.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

pub trait Criterion: Send + Sync {
    fn id(&self) -> usize;
    fn name(&self) -> &'static str;
    fn budget(&self) -> Duration;
    fn evaluate(&self, ctx: &Context) -> Result<Outcome>;
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
    pub budget_s: f64,
}

impl CriterionResult {
    /// One line for the verdict table.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2} s of {:.0} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_s,
            self.budget_s,
            self.detail
        )
    }
}

type Shared = std::result::Result<Arc<RunArtifacts>, String>;

/// Runs shared between criteria, computed once on first use.
#[derive(Default)]
pub struct Context {
    pub parallel: bool,
    run7: OnceLock<Shared>,
    power_log: OnceLock<Shared>,
}

impl Context {
    pub fn new(parallel: bool) -> Self {
        Context {
            parallel,
            ..Default::default()
        }
    }

    fn shared(cell: &OnceLock<Shared>, make: impl FnOnce() -> Result<ExperimentConfig>) -> Result<Arc<RunArtifacts>> {
        cell.get_or_init(|| {
            make()
                .and_then(|c| pipeline::analyse_run(&c))
                .map(Arc::new)
                .map_err(|e| e.to_string())
        })
        .clone()
        .map_err(Error::invalid)
    }

    /// The reference blow-up run of the pure exponential.
    pub fn run7(&self) -> Result<Arc<RunArtifacts>> {
        Self::shared(&self.run7, || Ok(run7_config()))
    }

    pub fn power_log_run(&self) -> Result<Arc<RunArtifacts>> {
        Self::shared(&self.power_log, power_log_config)
    }
}

/// Pure exponential on the unit interval, bump of height 4, 800 cells.
pub fn run7_config() -> ExperimentConfig {
    reference_config("pure_exp", Params::new(), 4.0)
}

/// `power_log` with `q = 1`, started so that its ODE blow-up time from the
/// initial maximum equals the reference run's, `G(a) = e^{-4}`.
pub fn power_log_config() -> Result<ExperimentConfig> {
    let params = Params::new().with("q", 1.0).with("K", 0.0);
    let table = ResolventTable::with_defaults(nonlin::make_builtin("power_log", &params)?);
    let a = table.g_inv((-4f64).exp())?;
    Ok(reference_config("power_log", params, a))
}

fn reference_config(family: &str, params: Params, amplitude: f64) -> ExperimentConfig {
    ExperimentConfig {
        family: FamilySpec {
            name: family.into(),
            params,
        },
        domain: Some(DomainSpec {
            n: 1,
            radius: 1.0,
            boundary: Boundary::Dirichlet,
        }),
        initial: Some(InitialKind::Bump { amplitude, power: 1.0 }),
        solver: SolverSpec::default(),
        checks: config::default_checks(),
        output_dir: None,
        seed: 0,
    }
}

fn table_of(name: &str, params: Params) -> Result<Arc<ResolventTable>> {
    Ok(Arc::new(ResolventTable::with_defaults(nonlin::make_builtin(name, &params)?)))
}

fn power_log(q: f64) -> Result<Arc<ResolventTable>> {
    table_of("power_log", Params::new().with("q", q).with("K", 0.0))
}

fn fmt_seq(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Values of a per-checkpoint series at the given labels, matched by `s`.
fn at_labels(points: &[(f64, f64)], labels: &[f64]) -> Result<Vec<f64>> {
    labels
        .iter()
        .map(|l| {
            points
                .iter()
                .find(|(s, _)| (s - l).abs() < 0.05)
                .map(|p| p.1)
                .ok_or_else(|| Error::invalid(format!("no checkpoint at s = {l}")))
        })
        .collect()
}

// ---------------------------------------------------------------- criteria

struct ClosedForm;

impl Criterion for ClosedForm {
    fn id(&self) -> usize {
        1
    }
    fn name(&self) -> &'static str {
        "closed-form oracle for the pure exponential"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(1)
    }
    fn evaluate(&self, _: &Context) -> Result<Outcome> {
        let r = pipeline::closed_form_oracles(&table_of("pure_exp", Params::new())?)?;
        Ok(Outcome::new(
            r.pass,
            format!(
                "max rel err G {:.1e}, G_inv {:.1e}, H {:.1e}, psi {:.1e} (tol {:.0e})",
                r.g, r.g_inv, r.h, r.psi, r.tolerance
            ),
        ))
    }
}

struct RoundTrips;

pub const ROUND_TRIP_TOL: f64 = 1e-9;

impl Criterion for RoundTrips {
    fn id(&self) -> usize {
        2
    }
    fn name(&self) -> &'static str {
        "round trips of G and H for every builtin"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(10)
    }
    fn evaluate(&self, _: &Context) -> Result<Outcome> {
        let mut worst = (0.0_f64, String::new());
        for fam in nonlin::builtin_catalog() {
            let label = fam.label();
            let t = ResolventTable::with_defaults(fam);
            let lo = t.floor() + 0.5;
            for k in 0..32 {
                let x = lo + (100.0 - lo) * k as f64 / 31.0;
                let eg = (t.g_inv(t.g(x)?)? - x).abs() / x.max(1.0);
                let eh = (t.h_inv(t.h(x)?)? - x).abs() / x.max(1.0);
                if eg.max(eh) > worst.0 {
                    worst = (eg.max(eh), format!("{label} at X = {x:.3}"));
                }
            }
        }
        Ok(Outcome::new(
            worst.0 <= ROUND_TRIP_TOL,
            format!("worst relative error {:.2e} ({})", worst.0, worst.1),
        ))
    }
}

struct ResolventAsymptotics;

impl Criterion for ResolventAsymptotics {
    fn id(&self) -> usize {
        3
    }
    fn name(&self) -> &'static str {
        "G f -> 1 for power_log q = 1, 2"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(5)
    }
    fn evaluate(&self, _: &Context) -> Result<Outcome> {
        let mut pass = true;
        let mut detail = Vec::new();
        for q in [1.0, 2.0] {
            let t = power_log(q)?;
            let gaps: Vec<f64> = [20.0, 40.0]
                .iter()
                .map(|&x| Ok((t.g(x)? * t.family().f(x) - 1.0).abs()))
                .collect::<Result<_>>()?;
            let bounded = gaps[0] <= 2.0 * q / 20.0 && gaps[1] <= 2.0 * q / 40.0;
            pass &= bounded && trend::decreasing(&gaps);
            detail.push(format!("q={q}: |Gf-1| = {}", fmt_seq(&gaps)));
        }
        Ok(Outcome::new(pass, detail.join("; ")))
    }
}

struct QuotientAsymptotics;

impl Criterion for QuotientAsymptotics {
    fn id(&self) -> usize {
        4
    }
    fn name(&self) -> &'static str {
        "Q (X L + X^2 L') = 1 + o(1/log X) for power_log q = 1"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(5)
    }
    fn evaluate(&self, _: &Context) -> Result<Outcome> {
        let t = power_log(1.0)?;
        let v: Vec<f64> = [10.0, 30.0, 100.0]
            .iter()
            .map(|&x| Ok(t.jo_residual_log(x)?.abs() * x))
            .collect::<Result<_>>()?;
        Ok(Outcome::new(
            trend::decreasing(&v),
            format!("|Q(XL+X^2L')-1| log X at log X = 10, 30, 100: {}", fmt_seq(&v)),
        ))
    }
}

struct DamGap;

impl Criterion for DamGap {
    fn id(&self) -> usize {
        5
    }
    fn name(&self) -> &'static str {
        "H_inv(Y) - G_inv(Y/|log Y|) -> 0"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(5)
    }
    fn evaluate(&self, _: &Context) -> Result<Outcome> {
        let mut pass = true;
        let mut detail = Vec::new();
        for (label, t) in [("pure_exp", table_of("pure_exp", Params::new())?), ("power_log q=1", power_log(1.0)?)] {
            let gaps: Vec<f64> = [4.0, 8.0, 12.0]
                .iter()
                .map(|k: &f64| ode_asym::dam_gap_log(&t, k * std::f64::consts::LN_10))
                .collect::<Result<_>>()?;
            pass &= trend::decreasing(&gaps) && gaps[2] < 0.05;
            detail.push(format!("{label}: {}", fmt_seq(&gaps)));
        }
        Ok(Outcome::new(pass, detail.join("; ")))
    }
}

struct OdeMode;

pub const ODE_MODE_TOL: f64 = 1e-6;

impl Criterion for OdeMode {
    fn id(&self) -> usize {
        6
    }
    fn name(&self) -> &'static str {
        "diffusion-off run follows psi for every builtin"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(10)
    }
    fn evaluate(&self, _: &Context) -> Result<Outcome> {
        let grid = Arc::new(pde::RadialGrid::graded(1, 1.0, 16, 0.0, Boundary::Dirichlet)?);
        let opts = SolverOptions {
            diffusion: false,
            ..Default::default()
        };
        let mut worst = (0.0_f64, String::new());
        for fam in nonlin::builtin_catalog() {
            let label = fam.label();
            let table = Arc::new(ResolventTable::with_defaults(fam));
            let a = table.floor() + 1.0;
            let cap = 20.0_f64.max(a + 10.0);
            let state = RadialState::new(grid.clone(), vec![a; grid.nodes().len()], 0.0)?;
            let mut solver = Solver::new(table.clone(), opts)?;
            let tr = pde::run_to_cap(&mut solver, state, cap, &[])?;
            let ode = ode_asym::OdeSolution::from_initial(table, a, 0.0)?;
            for s in &tr.samples {
                let psi = ode.psi(s.t)?;
                let e = ((s.u0 - psi) / psi).abs();
                if e > worst.0 {
                    worst = (e, format!("{label} at u = {:.3}", s.u0));
                }
            }
        }
        Ok(Outcome::new(
            worst.0 <= ODE_MODE_TOL,
            format!("worst relative error {:.2e} {}", worst.0, worst.1),
        ))
    }
}

struct BlowupRun;

/// Cell counts of the grid-halving study; the middle one is the reference run.
pub const HALVING_CELLS: [usize; 3] = [400, 800, 1600];
pub const HALVING_RATIO: f64 = 0.6;

fn blowup_time(cfg: &ExperimentConfig) -> Result<f64> {
    let table = pipeline::build_table(cfg)?;
    let grid = pipeline::build_grid(cfg)?;
    let init = pde::make_initial_data(cfg.initial.as_ref().expect("reference configs carry data"), &grid, table.family(), false)?;
    let sim = pde::simulate(table, grid, init.u, cfg.solver.options(), cfg.solver.u_cap, cfg.solver.s_first)?;
    Ok(sim.t_est())
}

impl Criterion for BlowupRun {
    fn id(&self) -> usize {
        7
    }
    fn name(&self) -> &'static str {
        "blow-up run: time, type-I residual, grid halving"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(120)
    }
    fn evaluate(&self, ctx: &Context) -> Result<Outcome> {
        let run = ctx.run7()?;
        let t = run.t_est();
        let lower = (-4f64).exp();
        let bounded = run.diagnostics.type_one_bounded;
        let others = [HALVING_CELLS[0], HALVING_CELLS[2]];
        let time_for = |cells: &usize| {
            let mut c = run7_config();
            c.solver.cells = *cells;
            blowup_time(&c)
        };
        let ts: Vec<f64> = if ctx.parallel {
            others.par_iter().map(time_for).collect::<Result<_>>()?
        } else {
            others.iter().map(time_for).collect::<Result<_>>()?
        };
        let (coarse, fine) = (ts[0], ts[1]);
        let ratio = (fine - t).abs() / (t - coarse).abs();
        let pass = t >= lower && bounded && ratio <= HALVING_RATIO;
        Ok(Outcome::new(
            pass,
            format!(
                "T_est = {t:.10} (>= e^-4: {}), M_hat = {:.3e}, bounded: {bounded}, T(J=400,800,1600) = {coarse:.10}, {t:.10}, {fine:.10}, change ratio {ratio:.3}",
                t >= lower, run.diagnostics.m_hat
            ),
        ))
    }
}

struct SecondOrderTrend;

pub const SECOND_ORDER_S: [f64; 4] = [5.0, 6.0, 7.0, 8.0];

fn second_order_values(run: &RunArtifacts) -> Result<Vec<f64>> {
    let c = run.comparison.as_ref().ok_or_else(|| Error::invalid("no profile comparison"))?;
    let pts: Vec<(f64, f64)> = c
        .rows_of(ProfileKind::SecondOrder, "y=0")
        .iter()
        .map(|r| (r.s, r.rescaled_gap))
        .collect();
    at_labels(&pts, &SECOND_ORDER_S)
}

impl Criterion for SecondOrderTrend {
    fn id(&self) -> usize {
        8
    }
    fn name(&self) -> &'static str {
        "center correction (u(0,t) - psi) 4|log(T-t)| -> 2n"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(180)
    }
    fn evaluate(&self, ctx: &Context) -> Result<Outcome> {
        let mut pass = true;
        let mut detail = Vec::new();
        for (label, run) in [("pure_exp", ctx.run7()?), ("power_log q=1", ctx.power_log_run()?)] {
            let target = 2.0 * run.grid.dim() as f64;
            let v = second_order_values(&run)?;
            let toward = trend::approaching(&v, target);
            let last = v[v.len() - 1];
            let banded = last >= 0.5 * target && last <= 2.0 * target;
            pass &= toward && banded;
            detail.push(format!(
                "{label}: s=5..8 {} (toward {target}: {toward}, in band at s=8: {banded})",
                fmt_seq(&v)
            ));
        }
        Ok(Outcome::new(pass, detail.join("; ")))
    }
}

struct ProfileTrends;

impl Criterion for ProfileTrends {
    fn id(&self) -> usize {
        9
    }
    fn name(&self) -> &'static str {
        "refined and final profile gaps shrink"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(60)
    }
    fn evaluate(&self, ctx: &Context) -> Result<Outcome> {
        let run = ctx.run7()?;
        let c = run.comparison.as_ref().ok_or_else(|| Error::invalid("no profile comparison"))?;
        let pts: Vec<(f64, f64)> = c
            .rows_of(ProfileKind::Refined, "xi<=K")
            .iter()
            .map(|r| (r.s, r.sup_gap))
            .collect();
        let refined = at_labels(&pts, &SECOND_ORDER_S)?;
        let refined_ok = trend::decreasing(&refined);
        let fin = c
            .trend(ProfileKind::Final, "decade")
            .ok_or_else(|| Error::invalid("no final-profile trend"))?;
        let gaps: Vec<f64> = c.final_gaps.iter().map(|p| p.1).collect();
        Ok(Outcome::new(
            refined_ok && fin.pass,
            format!(
                "refined sup gap s=5..8 {} (decreasing: {refined_ok}); final relative gap on [{:.2e}, {:.2e}] from large to small |x| {} (decreasing: {})",
                fmt_seq(&refined),
                c.x_resolved,
                10.0 * c.x_resolved,
                fmt_seq(&gaps),
                fin.pass
            ),
        ))
    }
}

struct EnergyDecay;

impl Criterion for EnergyDecay {
    fn id(&self) -> usize {
        10
    }
    fn name(&self) -> &'static str {
        "Lyapunov energy nonincreasing and bounded below"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(30)
    }
    fn evaluate(&self, ctx: &Context) -> Result<Outcome> {
        let run = ctx.run7()?;
        let e = run.energy.as_ref().ok_or_else(|| Error::invalid("fewer than two frames"))?;
        Ok(Outcome::new(
            e.nonincreasing && e.bounded_below,
            format!(
                "{} frames, C1 = {}, curly E = {}, nonincreasing: {}, bounded below: {}",
                e.s_values.len(),
                e.c1,
                fmt_seq(&e.curly_e_values),
                e.nonincreasing,
                e.bounded_below
            ),
        ))
    }
}

struct SelfSimilar;

pub const RESIDUAL_TOL: f64 = 1e-4;

impl Criterion for SelfSimilar {
    fn id(&self) -> usize {
        11
    }
    fn name(&self) -> &'static str {
        "self-similar profiles exist only from n = 3"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(60)
    }
    fn evaluate(&self, ctx: &Context) -> Result<Outcome> {
        let reports: Vec<_> = [1usize, 2, 3]
            .iter()
            .map(|&n| pipeline::run_selfsim(&SelfsimRequest::new(n, true), ctx.parallel))
            .collect::<Result<_>>()?;
        let none_low = reports[0].members.is_empty() && reports[1].members.is_empty();
        let m3 = &reports[2].members;
        let negative = m3.iter().find(|m| m.sign.changes_sign);
        let residual = negative.and_then(|m| m.residual);
        let pass = none_low && residual.is_some_and(|r| r.abs() <= RESIDUAL_TOL);
        let detail = match negative {
            Some(m) => format!(
                "members n=1: {}, n=2: {}, n=3: {}; a* = {:.12}, min g = {:.4} at r = {:.2}, horizon {:.2}, PDE residual {:.2e}",
                reports[0].members.len(),
                reports[1].members.len(),
                m3.len(),
                m.a,
                m.sign.g_min,
                m.sign.r_at_min,
                m.horizon.unwrap_or(f64::NAN),
                residual.unwrap_or(f64::NAN)
            ),
            None => format!(
                "members n=1: {}, n=2: {}, n=3: {} (none with negative g)",
                reports[0].members.len(),
                reports[1].members.len(),
                m3.len()
            ),
        };
        Ok(Outcome::new(pass, detail))
    }
}

struct DefectDecay;

pub const DEFECT_S: [f64; 4] = [6.0, 7.0, 8.0, 9.0];

impl Criterion for DefectDecay {
    fn id(&self) -> usize {
        12
    }
    fn name(&self) -> &'static str {
        "defect of the rescaled equation decays"
    }
    fn budget(&self) -> Duration {
        Duration::from_secs(30)
    }
    fn evaluate(&self, ctx: &Context) -> Result<Outcome> {
        let pl = ctx.power_log_run()?;
        let d = pl.defect.as_ref().ok_or_else(|| Error::invalid("power_log run has fewer than four frames"))?;
        let pts: Vec<(f64, f64)> = pl.frames.iter().zip(&d.frames).map(|((l, _), f)| (*l, f.max_abs)).collect();
        let v = at_labels(&pts, &DEFECT_S)?;
        let non_growing = trend::non_growing(&v, 1e-3, 1e-14);
        let pe = ctx.run7()?;
        let d0 = pe.defect.as_ref().ok_or_else(|| Error::invalid("pure_exp run has fewer than four frames"))?;
        let zero = d0.frames.iter().all(|f| f.max_abs == 0.0);
        Ok(Outcome::new(
            non_growing && zero,
            format!(
                "power_log q=1 max|H| at s=6..9 {} (non-growing: {non_growing}); pure_exp identically zero over {} frames: {zero}",
                fmt_seq(&v),
                d0.frames.len()
            ),
        ))
    }
}

// ---------------------------------------------------------------- registry

pub struct Registry {
    criteria: Vec<Box<dyn Criterion>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { criteria: Vec::new() }
    }

    pub fn register(&mut self, c: Box<dyn Criterion>) {
        self.criteria.push(c);
    }

    /// All twelve criteria in order.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ClosedForm));
        r.register(Box::new(RoundTrips));
        r.register(Box::new(ResolventAsymptotics));
        r.register(Box::new(QuotientAsymptotics));
        r.register(Box::new(DamGap));
        r.register(Box::new(OdeMode));
        r.register(Box::new(BlowupRun));
        r.register(Box::new(SecondOrderTrend));
        r.register(Box::new(ProfileTrends));
        r.register(Box::new(EnergyDecay));
        r.register(Box::new(SelfSimilar));
        r.register(Box::new(DefectDecay));
        r
    }

    pub fn ids(&self) -> Vec<usize> {
        self.criteria.iter().map(|c| c.id()).collect()
    }

    /// Evaluates one criterion; errors and overruns count as failures.
    pub fn run_one(&self, id: usize, ctx: &Context) -> Option<CriterionResult> {
        let c = self.criteria.iter().find(|c| c.id() == id)?;
        let start = Instant::now();
        let out = c.evaluate(ctx);
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match out {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if elapsed > c.budget() {
            passed = false;
            detail.push_str("; over the runtime budget");
        }
        Some(CriterionResult {
            id,
            name: c.name().into(),
            passed,
            detail,
            elapsed_s: elapsed.as_secs_f64(),
            budget_s: c.budget().as_secs_f64(),
        })
    }

    pub fn run_all(&self, ctx: &Context) -> Vec<CriterionResult> {
        self.ids().into_iter().filter_map(|id| self.run_one(id, ctx)).collect()
    }
}
