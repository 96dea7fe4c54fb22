//! Config-driven runs end to end: artifacts, headers, determinism, errors.

use std::fs;
use std::path::Path;

use blowup_core::acceptance::run7_config;
use blowup_core::config::{Check, ExperimentConfig};
use blowup_core::pipeline::{self, SelfsimRequest};
use blowup_core::profiles::ProfileKind;
use blowup_core::{io, Error, VERSION};

fn files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn reference_run_writes_every_artifact_with_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = run7_config();
    let outcome = pipeline::run_config(&cfg, Some(dir.path())).unwrap();
    let hash = io::config_hash(&cfg).unwrap();
    let header = format!("# blowup {VERSION} config={hash}");
    for name in ["trajectory.csv", "energy.csv", "comparison.csv", "snapshots/final.csv", "snapshots/snapshot_s5.csv", "frames/frame_s5.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "{name}");
    }
    let columns = [
        ("trajectory.csv", "t,u0,dt,Test_running"),
        ("energy.csv", "s,E,curlyE,L2rho,H1rho"),
        ("comparison.csv", "s,kind,region,sup_gap,rescaled_gap,verdict"),
        ("snapshots/final.csv", "r,u"),
        ("frames/frame_s6.csv", "y,w,w_y"),
    ];
    for (name, cols) in columns {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), cols, "{name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["header"], header.as_str());
    let t = summary["t_est"].as_f64().unwrap();
    assert!(t >= (-4f64).exp() && t == outcome.summary.t_est);
    assert_eq!(summary["checks"].as_array().unwrap().len(), cfg.checks.len());
    // the pure exponential has no defect at all
    assert!(outcome.artifacts.unwrap().defect.unwrap().frames.iter().all(|f| f.max_abs == 0.0));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = run7_config();
    cfg.checks = vec![Check::Blowup, Check::Frames, Check::Energy];
    pipeline::run_config(&cfg, Some(a.path())).unwrap();
    pipeline::run_config(&cfg, Some(b.path())).unwrap();
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), fb.len());
    assert!(fa.len() > 10);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.strip_prefix(a.path()).unwrap(), y.strip_prefix(b.path()).unwrap());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn profiles_recomputed_from_a_run_directory_match() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = pipeline::run_config(&run7_config(), Some(dir.path())).unwrap();
    let live = outcome.artifacts.unwrap().comparison.unwrap();
    let (again, _) = pipeline::profiles_from_rundir(dir.path()).unwrap();
    assert_eq!(live.rows.len(), again.rows.len());
    for (x, y) in live.rows.iter().zip(&again.rows) {
        assert_eq!((x.s, x.sup_gap.to_bits(), x.kind), (y.s, y.sup_gap.to_bits(), y.kind));
    }
    assert_eq!(
        live.trend(ProfileKind::Refined, "xi<=K").unwrap().pass,
        again.trend(ProfileKind::Refined, "xi<=K").unwrap().pass
    );
}

#[test]
fn certify_only_config_runs_no_simulation() {
    let cfg = ExperimentConfig::from_toml("checks = [\"certify\"]\n[family]\nname = \"pure_exp\"\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = pipeline::run_config(&cfg, Some(dir.path())).unwrap();
    assert!(outcome.artifacts.is_none());
    let c = outcome.summary.certify.unwrap();
    assert!(c.closed_form.unwrap().pass);
    assert!(c.slow_variation.pass && c.uniform_ratio.pass);
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn config_errors_name_the_field() {
    let bad = "[family]\nname = \"not_a_family\"\n[domain]\nn = 1\n";
    match ExperimentConfig::from_toml(bad) {
        Err(e @ Error::Config { .. }) => {
            assert!(e.to_string().contains("family.name"), "{e}");
            assert_eq!(e.exit_code(), 2);
        }
        other => panic!("{other:?}"),
    }
    let typo = "[family]\nname = \"pure_exp\"\n\n[solver]\ncels = 800\n";
    let e = ExperimentConfig::from_toml(typo).unwrap_err();
    assert!(e.to_string().contains("line 5"), "{e}");
    let e = ExperimentConfig::from_toml("[family]\nname = \"pure_exp\"\n").unwrap_err();
    assert!(e.to_string().contains("`domain`") && e.exit_code() == 2, "{e}");
}

#[test]
fn selfsim_scan_in_three_dimensions_finds_a_member() {
    let rep = pipeline::run_selfsim(&SelfsimRequest::new(3, true), false).unwrap();
    assert!(rep.pass);
    let m = &rep.members[0];
    assert!(m.sign.changes_sign && m.residual.unwrap().abs() < 1e-4);
    let dir = tempfile::tempdir().unwrap();
    pipeline::write_selfsim(dir.path(), "abc", &rep).unwrap();
    let scan = fs::read_to_string(dir.path().join("scan_n3.csv")).unwrap();
    assert!(scan.lines().nth(1).unwrap() == "a,class");
    let shot = fs::read_to_string(dir.path().join("shot_n3_member0.csv")).unwrap();
    assert_eq!(shot.lines().nth(1).unwrap(), "r,z,z_r,g");
}

#[test]
fn shipped_configs_parse_and_match_the_reference() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for f in files(&root) {
        ExperimentConfig::load(&f).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        seen += 1;
    }
    assert!(seen >= 3);
    let run7 = ExperimentConfig::load(&root.join("run7_pure_exp.toml")).unwrap();
    assert_eq!(io::config_hash(&run7).unwrap(), io::config_hash(&run7_config()).unwrap());
    let pl = ExperimentConfig::load(&root.join("power_log_q1.toml")).unwrap();
    let reference = blowup_core::acceptance::power_log_config().unwrap();
    let amp = |c: &ExperimentConfig| c.initial.as_ref().unwrap().amplitude();
    assert_eq!(amp(&pl), amp(&reference));
}
