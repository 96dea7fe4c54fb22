//! Config-driven runs: certification, simulation with its analyses, profile
//! comparison from a run directory, and self-similar scans.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Check, ExperimentConfig};
use crate::error::{Error, Result};
use crate::io::{self, Cell};
use crate::nonlin::{self, DerivativeCheck, NonlinearityFamily, SlowVariationReport, UniformRatioReport};
use crate::ode_asym::{self, LemmaReport, OdeSolution, ResolventTable};
use crate::pde::{self, DiagnosticsReport, MonotoneInTime, RadialGrid, Simulation, Snapshot};
use crate::profiles::{self, ComparisonReport, ProfileKind, ProfilePrediction, RunFrames};
use crate::selfsim::{self, Counterexample, ProfileShot, ScanReport, SignConstraint};
use crate::similarity::{self, DefectReport, EnergyTrace, SimilarityFrame};

/// One check of a run and its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckVerdict {
    pub check: Check,
    pub pass: bool,
    pub detail: String,
}

// ---------------------------------------------------------------- certify

/// Relative error of the resolvent against the exponential's closed forms.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormReport {
    pub g: f64,
    pub g_inv: f64,
    pub h: f64,
    pub psi: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const CLOSED_FORM_TOL: f64 = 1e-10;

/// Compares `G`, `G⁻¹`, `H`, `ψ` with `e^{-X}`, `-log Y`, `(A₀+X+1)e^{-X}`,
/// `-log(T-t)` on `X ∈ [1, 30]` and `Y ∈ [e^{-30}, e^{-1}]`.
pub fn closed_form_oracles(table: &Arc<ResolventTable>) -> Result<ClosedFormReport> {
    if !table.family().is_unit() {
        return Err(Error::invalid("closed forms are known only for the pure exponential"));
    }
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let a0 = table.a0();
    let (mut eg, mut egi, mut eh, mut epsi) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let ode = OdeSolution::new(table.clone(), 1.0)?;
    for k in 0..=58 {
        let x = 1.0 + 0.5 * k as f64;
        eg = eg.max(rel(table.g(x)?, (-x).exp()));
        eh = eh.max(rel(table.h(x)?, (a0 + x + 1.0) * (-x).exp()));
        // Y = e^{-x} spans [e^{-30}, e^{-1}]
        let y = (-x).exp();
        egi = egi.max(rel(table.g_inv(y)?, -y.ln()));
        let t = 1.0 - y;
        epsi = epsi.max(rel(ode.psi(t)?, -(1.0 - t).ln()));
    }
    let worst = eg.max(egi).max(eh).max(epsi);
    Ok(ClosedFormReport {
        g: eg,
        g_inv: egi,
        h: eh,
        psi: epsi,
        tolerance: CLOSED_FORM_TOL,
        pass: worst <= CLOSED_FORM_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub family: String,
    pub alpha: f64,
    pub slow_variation: SlowVariationReport,
    pub uniform_ratio: UniformRatioReport,
    pub derivatives: DerivativeCheck,
    pub lemmas: LemmaReport,
    pub closed_form: Option<ClosedFormReport>,
    pub pass: bool,
}

/// Largest tolerated mismatch between coded and differenced derivatives of `L`.
pub const DERIVATIVE_TOL: f64 = 1e-5;

pub fn certify(table: &Arc<ResolventTable>) -> Result<CertifyReport> {
    let fam = table.family();
    let alpha = fam.default_alpha();
    let lo = fam.s_floor().max(0.0) + 1.0;
    let slow = nonlin::certify_slow_variation(fam, alpha, &nonlin::log_grid(lo, lo + 300.0, 64))?;
    let lo_u = fam.s_floor().max(5.0);
    let uniform = nonlin::certify_uniform_ratio(fam, alpha, &nonlin::log_grid(lo_u, lo_u + 195.0, 40))?;
    let derivatives = nonlin::check_derivatives(fam, &nonlin::log_grid(lo, lo + 100.0, 41));
    let lemmas = ode_asym::certify_asymptotic_lemmas(table)?;
    let closed_form = if fam.is_unit() {
        Some(closed_form_oracles(table)?)
    } else {
        None
    };
    let deriv_ok = derivatives.max_rel_err_l1 <= DERIVATIVE_TOL && derivatives.max_rel_err_l2 <= DERIVATIVE_TOL;
    let pass = slow.pass && uniform.pass && deriv_ok && lemmas.pass && closed_form.as_ref().is_none_or(|c| c.pass);
    Ok(CertifyReport {
        family: fam.label(),
        alpha,
        slow_variation: slow,
        uniform_ratio: uniform,
        derivatives,
        lemmas,
        closed_form,
        pass,
    })
}

// ---------------------------------------------------------------- simulate

/// A simulation and everything derived from it.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: ExperimentConfig,
    pub hash: String,
    pub table: Arc<ResolventTable>,
    pub grid: Arc<RadialGrid>,
    pub monotone_in_time: Option<MonotoneInTime>,
    pub simulation: Simulation,
    pub ode: OdeSolution,
    /// Frames paired with their checkpoint labels.
    pub frames: Vec<(f64, SimilarityFrame)>,
    /// Checkpoints whose frame could not be formed, with the reason.
    pub skipped: Vec<(f64, String)>,
    pub diagnostics: DiagnosticsReport,
    pub energy: Option<EnergyTrace>,
    pub defect: Option<DefectReport>,
    pub comparison: Option<ComparisonReport>,
}

impl RunArtifacts {
    pub fn t_est(&self) -> f64 {
        self.simulation.t_est()
    }

    pub fn frame_at(&self, label: f64) -> Option<&SimilarityFrame> {
        self.frames.iter().find(|(s, _)| *s == label).map(|(_, f)| f)
    }
}

pub fn build_table(cfg: &ExperimentConfig) -> Result<Arc<ResolventTable>> {
    let fam = cfg.family.build()?;
    Ok(Arc::new(ResolventTable::new(fam, cfg.solver.tol, cfg.solver.a0)?))
}

pub fn build_grid(cfg: &ExperimentConfig) -> Result<Arc<RadialGrid>> {
    let d = cfg
        .domain
        .as_ref()
        .ok_or_else(|| Error::config("domain", "missing"))?;
    RadialGrid::graded(d.n, d.radius, cfg.solver.cells, cfg.solver.grading, d.boundary)
        .map(Arc::new)
        .map_err(|e| Error::config("solver", e.to_string()))
}

/// Simulates and analyses one configuration.
pub fn analyse_run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let hash = io::config_hash(cfg)?;
    let table = build_table(cfg)?;
    let grid = build_grid(cfg)?;
    let kind = cfg.initial.as_ref().ok_or_else(|| Error::config("initial", "missing"))?;
    let check_mit = cfg.checks.contains(&Check::MonotoneInTime);
    let init = pde::make_initial_data(kind, &grid, table.family(), check_mit).map_err(|e| e.in_stage("initial data"))?;
    let simulation = pde::simulate(
        table.clone(),
        grid.clone(),
        init.u,
        cfg.solver.options(),
        cfg.solver.u_cap,
        cfg.solver.s_first,
    )
    .map_err(|e| e.in_stage("simulate"))?;
    let t_est = simulation.t_est();
    let ode = OdeSolution::new(table.clone(), t_est)?;
    let diagnostics = pde::diagnostics(&simulation.trajectory, &table, t_est).map_err(|e| e.in_stage("diagnostics"))?;

    let mut frames = Vec::new();
    let mut skipped = Vec::new();
    for (label, snap) in simulation.checkpoint_s.iter().zip(&simulation.trajectory.snapshots) {
        match similarity::to_frame(snap, &grid, &ode) {
            Ok(f) => frames.push((*label, f)),
            Err(e @ Error::UnderResolved { .. }) => skipped.push((*label, e.to_string())),
            Err(e) => return Err(e.in_stage("similarity frames")),
        }
    }
    let only: Vec<SimilarityFrame> = frames.iter().map(|(_, f)| f.clone()).collect();
    let alpha = table.family().default_alpha();
    let energy = if only.len() >= 2 {
        Some(similarity::energy_trace(&only, alpha).map_err(|e| e.in_stage("energy"))?)
    } else {
        None
    };
    let defect = if only.len() >= 4 {
        Some(similarity::defect_decay(&only, &ode, alpha).map_err(|e| e.in_stage("defect"))?)
    } else {
        None
    };
    let comparison = if cfg.checks.contains(&Check::Profiles) {
        let n = grid.dim();
        let pred = ProfilePrediction::new(table.clone(), t_est, n)?;
        let run = RunFrames {
            grid: &grid,
            t_est,
            snapshots: &simulation.trajectory.snapshots,
            final_snapshot: &simulation.trajectory.final_snapshot,
        };
        Some(profiles::compare(&pred, &run).map_err(|e| e.in_stage("profiles"))?)
    } else {
        None
    };
    Ok(RunArtifacts {
        config: cfg.clone(),
        hash,
        table,
        grid,
        monotone_in_time: init.monotone_in_time,
        simulation,
        ode,
        frames,
        skipped,
        diagnostics,
        energy,
        defect,
        comparison,
    })
}

/// Trends that decide the profile check; the global annulus gap is reported only.
pub const PROFILE_TRENDS: [(ProfileKind, &str); 3] = [
    (ProfileKind::SecondOrder, "y=0"),
    (ProfileKind::Refined, "xi<=K"),
    (ProfileKind::Final, "decade"),
];

pub fn evaluate_checks(art: &RunArtifacts, certify_report: Option<&CertifyReport>) -> Vec<CheckVerdict> {
    let mut out = Vec::new();
    for &check in &art.config.checks {
        let (pass, detail) = match check {
            Check::Certify => match certify_report {
                Some(c) => (c.pass, format!("certification of {}", c.family)),
                None => (false, "certification did not run".into()),
            },
            Check::MonotoneInTime => match &art.monotone_in_time {
                Some(m) => (
                    m.pass,
                    format!("min Δu₀ + f(u₀) = {:.4e} at node {}", m.worst_value, m.worst_node),
                ),
                None => (false, "not evaluated".into()),
            },
            Check::Blowup => {
                let e = &art.simulation.trajectory.estimate;
                let d = &art.diagnostics;
                (
                    e.comparison_ok && !e.low_confidence && d.type_one_bounded,
                    format!(
                        "T_est = {:.12e} (ODE bound {:.12e}), M̂ = {:.4e}, type-I bounded: {}",
                        e.t_est, e.lower_bound, d.m_hat, d.type_one_bounded
                    ),
                )
            }
            Check::Frames => frame_check(art),
            Check::Energy => match &art.energy {
                Some(e) => (
                    e.nonincreasing && e.bounded_below,
                    format!("C1 = {}, nonincreasing: {}, bounded below: {}", e.c1, e.nonincreasing, e.bounded_below),
                ),
                None => (false, "fewer than two frames".into()),
            },
            Check::Defect => match &art.defect {
                Some(d) => (d.pass, format!("non-growing: {}, bounded: {}", d.non_growing, d.bounded)),
                None => (false, "fewer than four frames".into()),
            },
            Check::Profiles => match &art.comparison {
                Some(c) => {
                    let verdicts: Vec<(String, bool)> = PROFILE_TRENDS
                        .iter()
                        .filter_map(|(k, r)| c.trend(*k, r).map(|t| (format!("{}[{}]", k.as_str(), r), t.pass)))
                        .collect();
                    let pass = verdicts.len() == PROFILE_TRENDS.len() && verdicts.iter().all(|v| v.1);
                    let detail = verdicts
                        .iter()
                        .map(|(n, p)| format!("{n}: {}", if *p { "pass" } else { "fail" }))
                        .collect::<Vec<_>>()
                        .join(", ");
                    (pass, detail)
                }
                None => (false, "comparison did not run".into()),
            },
        };
        out.push(CheckVerdict { check, pass, detail });
    }
    out
}

fn frame_check(art: &RunArtifacts) -> (bool, String) {
    if art.frames.is_empty() {
        return (false, "no resolved frames".into());
    }
    let m_hat = art.diagnostics.m_hat;
    let s_start = -(art.t_est() - art.simulation.trajectory.t_start).ln();
    let mut worst_center = f64::INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    for (_, f) in &art.frames {
        worst_center = worst_center.min(f.center());
        if f.s >= s_start + 1.0 {
            let top = f.w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            worst_excess = worst_excess.max(top - m_hat);
        }
    }
    let pass = worst_center >= -similarity::CENTER_TOL && worst_excess <= similarity::CENTER_TOL;
    (
        pass,
        format!(
            "{} frames ({} skipped), min w(0) = {worst_center:.4e}, max w - M̂ = {worst_excess:.4e}",
            art.frames.len(),
            art.skipped.len()
        ),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub family: String,
    pub seed: u64,
    pub t_est: f64,
    pub t_first_pass: f64,
    pub t_uncertainty: f64,
    pub ode_lower_bound: f64,
    pub low_confidence: bool,
    pub steps: u64,
    pub u_cap_reached: f64,
    /// Time of the last state, where the final profile is compared.
    pub t_final: f64,
    pub checkpoint_s: Vec<f64>,
    pub skipped_frames: Vec<(f64, String)>,
    pub m_hat: f64,
    pub monotone_in_time: Option<MonotoneInTime>,
    pub energy_c1: Option<f64>,
    pub defect: Option<DefectReport>,
    pub profile_trends: Vec<profiles::TrendVerdict>,
    pub certify: Option<CertifyReport>,
    pub checks: Vec<CheckVerdict>,
    pub pass: bool,
}

pub struct RunOutcome {
    pub artifacts: Option<RunArtifacts>,
    pub summary: RunSummary,
}

/// Runs every enabled check of `cfg` and, with `out`, writes all artifacts.
pub fn run_config(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate()?;
    let hash = io::config_hash(cfg)?;
    let certify_report = if cfg.checks.contains(&Check::Certify) {
        Some(certify(&build_table(cfg)?).map_err(|e| e.in_stage("certify"))?)
    } else {
        None
    };
    if !cfg.needs_simulation() {
        let c = certify_report.expect("certify-only config");
        let checks = vec![CheckVerdict {
            check: Check::Certify,
            pass: c.pass,
            detail: format!("certification of {}", c.family),
        }];
        let summary = RunSummary {
            family: c.family.clone(),
            seed: cfg.seed,
            t_est: f64::NAN,
            t_first_pass: f64::NAN,
            t_uncertainty: f64::NAN,
            ode_lower_bound: f64::NAN,
            low_confidence: false,
            steps: 0,
            u_cap_reached: f64::NAN,
            t_final: f64::NAN,
            checkpoint_s: vec![],
            skipped_frames: vec![],
            m_hat: f64::NAN,
            monotone_in_time: None,
            energy_c1: None,
            defect: None,
            profile_trends: vec![],
            pass: c.pass,
            certify: Some(c),
            checks,
        };
        if let Some(dir) = out {
            io::write_text(&dir.join("config.toml"), &cfg.to_toml())?;
            io::write_json(&dir.join("summary.json"), &hash, &summary)?;
        }
        return Ok(RunOutcome {
            artifacts: None,
            summary,
        });
    }
    let art = analyse_run(cfg)?;
    let checks = evaluate_checks(&art, certify_report.as_ref());
    let tr = &art.simulation.trajectory;
    let summary = RunSummary {
        family: art.table.family().label(),
        seed: cfg.seed,
        t_est: art.t_est(),
        t_first_pass: art.simulation.first_pass.t_est,
        t_uncertainty: art.simulation.t_uncertainty,
        ode_lower_bound: tr.estimate.lower_bound,
        low_confidence: tr.estimate.low_confidence,
        steps: tr.steps,
        u_cap_reached: tr.final_snapshot.u[0],
        t_final: tr.final_snapshot.t,
        checkpoint_s: art.simulation.checkpoint_s.clone(),
        skipped_frames: art.skipped.clone(),
        m_hat: art.diagnostics.m_hat,
        monotone_in_time: art.monotone_in_time.clone(),
        energy_c1: art.energy.as_ref().map(|e| e.c1),
        defect: art.defect.clone(),
        profile_trends: art.comparison.as_ref().map(|c| c.trends.clone()).unwrap_or_default(),
        certify: certify_report,
        pass: checks.iter().all(|c| c.pass),
        checks,
    };
    if let Some(dir) = out {
        write_run(dir, &art, &summary)?;
    }
    Ok(RunOutcome {
        artifacts: Some(art),
        summary,
    })
}

fn label(s: f64) -> String {
    format!("{s:.0}")
}

fn write_snapshot(path: &Path, hash: &str, grid: &RadialGrid, snap: &Snapshot) -> Result<()> {
    io::write_csv(
        path,
        hash,
        &["r", "u"],
        grid.nodes().iter().zip(&snap.u).map(|(r, u)| vec![Cell::from(*r), Cell::from(*u)]),
    )
}

/// Writes the artifact tree of a run under `dir`.
pub fn write_run(dir: &Path, art: &RunArtifacts, summary: &RunSummary) -> Result<()> {
    let h = &art.hash;
    io::write_text(&dir.join("config.toml"), &art.config.to_toml())?;
    let tr = &art.simulation.trajectory;
    io::write_csv(
        &dir.join("trajectory.csv"),
        h,
        &["t", "u0", "dt", "Test_running"],
        tr.samples.iter().map(|s| vec![s.t.into(), s.u0.into(), s.dt.into(), s.t_running.into()]),
    )?;
    for (s, snap) in art.simulation.checkpoint_s.iter().zip(&tr.snapshots) {
        write_snapshot(&dir.join("snapshots").join(format!("snapshot_s{}.csv", label(*s))), h, &art.grid, snap)?;
    }
    write_snapshot(&dir.join("snapshots").join("final.csv"), h, &art.grid, &tr.final_snapshot)?;
    for (s, f) in &art.frames {
        io::write_csv(
            &dir.join("frames").join(format!("frame_s{}.csv", label(*s))),
            h,
            &["y", "w", "w_y"],
            (0..f.y.len()).map(|i| vec![f.y[i].into(), f.w[i].into(), f.w_y[i].into()]),
        )?;
    }
    if let Some(e) = &art.energy {
        io::write_csv(
            &dir.join("energy.csv"),
            h,
            &["s", "E", "curlyE", "L2rho", "H1rho"],
            (0..e.s_values.len()).map(|i| {
                vec![
                    e.s_values[i].into(),
                    e.e_values[i].into(),
                    e.curly_e_values[i].into(),
                    e.l2rho[i].into(),
                    e.h1rho[i].into(),
                ]
            }),
        )?;
    }
    if let Some(c) = &art.comparison {
        write_comparison(&dir.join("comparison.csv"), h, c)?;
    }
    io::write_json(&dir.join("summary.json"), h, summary)
}

pub fn write_comparison(path: &Path, hash: &str, c: &ComparisonReport) -> Result<()> {
    io::write_csv(
        path,
        hash,
        &["s", "kind", "region", "sup_gap", "rescaled_gap", "verdict"],
        c.rows.iter().map(|r| {
            vec![
                r.s.into(),
                r.kind.as_str().into(),
                r.region.as_str().into(),
                r.sup_gap.into(),
                r.rescaled_gap.into(),
                r.verdict.as_str().into(),
            ]
        }),
    )
}

// ---------------------------------------------------------------- profiles

/// Recomputes the profile comparison from a directory written by [`write_run`].
pub fn profiles_from_rundir(dir: &Path) -> Result<(ComparisonReport, String)> {
    let cfg = ExperimentConfig::load(&dir.join("config.toml"))?;
    let hash = io::config_hash(&cfg)?;
    let summary_path = dir.join("summary.json");
    let text = std::fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let t_est = v["t_est"]
        .as_f64()
        .ok_or_else(|| Error::invalid(format!("{} has no numeric t_est", summary_path.display())))?;
    let labels: Vec<f64> = v["checkpoint_s"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
        .unwrap_or_default();
    let grid = build_grid(&cfg)?;
    let read = |name: String| -> Result<Snapshot> {
        let path = dir.join("snapshots").join(name);
        let t = io::read_csv(&path)?;
        let r = t.column("r")?;
        if r.len() != grid.nodes().len() || r.iter().zip(grid.nodes()).any(|(a, b)| a != b) {
            return Err(Error::invalid(format!("{} does not match the configured grid", path.display())));
        }
        Ok(Snapshot { t: f64::NAN, u: t.column("u")? })
    };
    let num = |key: &str| {
        v[key]
            .as_f64()
            .ok_or_else(|| Error::invalid(format!("{} has no numeric {key}", summary_path.display())))
    };
    // checkpoints were placed with the first-pass estimate
    let t_first = num("t_first_pass")?;
    let mut snaps = Vec::new();
    for s in &labels {
        let mut snap = read(format!("snapshot_s{}.csv", label(*s)))?;
        snap.t = t_first - (-s).exp();
        snaps.push(snap);
    }
    let mut last = read("final.csv".into())?;
    last.t = num("t_final")?;
    let table = build_table(&cfg)?;
    let n = grid.dim();
    let pred = ProfilePrediction::new(table, t_est, n)?;
    let run = RunFrames {
        grid: &grid,
        t_est,
        snapshots: &snaps,
        final_snapshot: &last,
    };
    Ok((profiles::compare(&pred, &run)?, hash))
}

// ---------------------------------------------------------------- selfsim

#[derive(Debug, Clone, Serialize)]
pub struct MemberReport {
    pub a: f64,
    pub horizon: Option<f64>,
    pub sign: SignConstraint,
    /// `u_t - Δu - e^u` of the backward self-similar solution at `(|x|, t) = (0.3, 0.5)`, `T = 1`.
    pub residual: Option<f64>,
    pub tail_constant: Option<f64>,
    /// `(|x|, counterexample final profile - predicted final profile)`.
    pub final_contrast: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfsimReport {
    pub n: usize,
    pub scan: Option<ScanReport>,
    pub shot: Option<ProfileShot>,
    pub members: Vec<MemberReport>,
    /// No members for `n <= 2`; at least one with a sign change of `g` for `3 <= n <= 9`.
    pub pass: bool,
    pub expectation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfsimRequest {
    pub n: usize,
    pub scan: bool,
    pub a: f64,
    pub a_max: f64,
    pub points: usize,
    pub r_max: f64,
}

impl SelfsimRequest {
    pub fn new(n: usize, scan: bool) -> Self {
        SelfsimRequest {
            n,
            scan,
            a: 1.0,
            a_max: 10.0,
            points: 100,
            r_max: selfsim::DEFAULT_R_MAX,
        }
    }
}

pub const RESIDUAL_POINT: (f64, f64) = (0.3, 0.5);
/// Finite-difference steps relative to `|x|` and `T - t`.
pub const RESIDUAL_STEP: f64 = 1e-3;

pub fn member_report(shot: &ProfileShot) -> Result<MemberReport> {
    let sign = selfsim::check_sign_constraint(shot)?;
    let ce = Counterexample::new(shot.clone(), 1.0).ok();
    let (x, t) = RESIDUAL_POINT;
    let residual = match &ce {
        Some(c) => {
            // steps relative to the point; the h and h/2 stencils cancel the h² term
            let (hx, ht) = (RESIDUAL_STEP * x, RESIDUAL_STEP * (1.0 - t));
            let coarse = c.residual(x, t, hx, ht)?;
            let fine = c.residual(x, t, 0.5 * hx, 0.5 * ht)?;
            Some((4.0 * fine - coarse) / 3.0)
        }
        None => None,
    };
    let xs: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
    Ok(MemberReport {
        a: shot.a,
        horizon: shot.horizon,
        sign,
        residual,
        tail_constant: ce.as_ref().map(|c| c.tail_constant()),
        final_contrast: ce.map(|c| c.final_profile_contrast(&xs)).unwrap_or_default(),
    })
}

pub fn run_selfsim(req: &SelfsimRequest, parallel: bool) -> Result<SelfsimReport> {
    let n = req.n;
    let (expectation, expect_members) = match n {
        1 | 2 => ("no nontrivial member of S".to_string(), Some(false)),
        3..=9 => ("at least one nontrivial member with min g < 0".to_string(), Some(true)),
        _ => ("none stated".to_string(), None),
    };
    if !req.scan {
        let shot = selfsim::shoot(n, req.a, req.r_max)?;
        let members = if shot.is_nontrivial_member() {
            vec![member_report(&shot)?]
        } else {
            vec![]
        };
        return Ok(SelfsimReport {
            n,
            scan: None,
            pass: true,
            shot: Some(shot),
            members,
            expectation: "single shot: classification only".into(),
        });
    }
    let scan = selfsim::scan(n, req.a_max, req.points, req.r_max, parallel)?;
    let members: Vec<MemberReport> = if parallel {
        scan.members.par_iter().map(member_report).collect::<Result<_>>()?
    } else {
        scan.members.iter().map(member_report).collect::<Result<_>>()?
    };
    let pass = match expect_members {
        Some(false) => members.is_empty(),
        Some(true) => !members.is_empty() && members.iter().all(|m| m.sign.changes_sign),
        None => true,
    };
    Ok(SelfsimReport {
        n,
        scan: Some(scan),
        shot: None,
        members,
        pass,
        expectation,
    })
}

pub fn write_shot(path: &Path, hash: &str, shot: &ProfileShot) -> Result<()> {
    let g = shot.g();
    io::write_csv(
        path,
        hash,
        &["r", "z", "z_r", "g"],
        (0..shot.r.len()).map(|i| vec![shot.r[i].into(), shot.z[i].into(), shot.z_r[i].into(), g[i].into()]),
    )
}

pub fn write_selfsim(dir: &Path, hash: &str, rep: &SelfsimReport) -> Result<()> {
    if let Some(shot) = &rep.shot {
        write_shot(&dir.join(format!("shot_n{}.csv", rep.n)), hash, shot)?;
    }
    if let Some(scan) = &rep.scan {
        io::write_csv(
            &dir.join(format!("scan_n{}.csv", rep.n)),
            hash,
            &["a", "class"],
            scan.grid.iter().map(|(a, c)| vec![Cell::from(*a), Cell::from(c.as_str())]),
        )?;
        for (k, m) in scan.members.iter().enumerate() {
            write_shot(&dir.join(format!("shot_n{}_member{}.csv", rep.n, k)), hash, m)?;
        }
    }
    io::write_json(&dir.join(format!("selfsim_n{}.json", rep.n)), hash, rep)
}

/// Family for the CLI `certify` command: `name` plus `key=value` pairs.
pub fn family_from_args(name: &str, params: &[String]) -> Result<NonlinearityFamily> {
    let p = nonlin::Params::parse_pairs(params)?;
    nonlin::make_builtin(name, &p)
}
