//! Acceptance suite: one test per criterion, each printing its verdict line.
//!
//! Shared runs are computed once per process.

use std::sync::OnceLock;

use blowup_core::acceptance::{Context, Registry};

fn ctx() -> &'static Context {
    static CTX: OnceLock<Context> = OnceLock::new();
    CTX.get_or_init(|| Context::new(false))
}

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(Registry::standard)
}

fn check(id: usize) {
    let r = registry().run_one(id, ctx()).expect("criterion is registered");
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn registry_holds_twelve_criteria() {
    assert_eq!(registry().ids(), (1..=12).collect::<Vec<_>>());
}

#[test]
fn criterion_01_closed_form_oracle() {
    check(1);
}

#[test]
fn criterion_02_round_trips() {
    check(2);
}

#[test]
fn criterion_03_resolvent_against_flat_solution() {
    check(3);
}

#[test]
fn criterion_04_quotient_correction() {
    check(4);
}

#[test]
fn criterion_05_inverse_gap() {
    check(5);
}

#[test]
fn criterion_06_ode_mode() {
    check(6);
}

#[test]
fn criterion_07_blowup_run() {
    check(7);
}

#[test]
fn criterion_08_center_correction() {
    check(8);
}

#[test]
fn criterion_09_profile_trends() {
    check(9);
}

#[test]
fn criterion_10_energy() {
    check(10);
}

#[test]
fn criterion_11_self_similar_profiles() {
    check(11);
}

#[test]
fn criterion_12_defect_decay() {
    check(12);
}
