//! The resolvent against independently computed special functions.
//!
//! For `f(u) = u^q e^u`, `G(X) = ∫_X^∞ e^{-u} u^{-q} du` is an incomplete
//! gamma function: `E1(X)` for `q = 1` and `e^{-X}/X - E1(X)` for `q = 2`.

use std::sync::Arc;

use blowup_core::nonlin::{self, Params};
use blowup_core::ode_asym::{OdeSolution, ResolventTable};

/// `E1(x)` by its power series for `x <= 1`, otherwise by the continued
/// fraction evaluated with the modified Lentz algorithm.
fn e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return -EULER - x.ln() + sum;
    }
    // E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

fn power_log(q: f64) -> Arc<ResolventTable> {
    let fam = nonlin::make_builtin("power_log", &Params::new().with("q", q).with("K", 0.0)).unwrap();
    Arc::new(ResolventTable::with_defaults(fam))
}

#[test]
fn exponential_integral_reference_values() {
    // tabulated E1(1) and E1(10)
    assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-15);
    assert!((e1(10.0) / 4.156_968_929_685_324e-6 - 1.0).abs() < 1e-13);
    assert!((e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-15);
}

#[test]
fn power_log_q1_is_the_exponential_integral() {
    let t = power_log(1.0);
    for k in 0..40 {
        let x = 1.5 + 1.5 * k as f64;
        let g = t.g(x).unwrap();
        let rel = (g / e1(x) - 1.0).abs();
        assert!(rel < 1e-10, "X = {x}: G = {g:e}, E1 = {:e}, rel {rel:e}", e1(x));
    }
}

#[test]
fn power_log_q2_is_the_second_incomplete_gamma() {
    let t = power_log(2.0);
    for x in [2.0_f64, 5.0, 11.0, 25.0, 48.0] {
        let oracle = (-x).exp() / x - e1(x);
        let rel = (t.g(x).unwrap() / oracle - 1.0).abs();
        assert!(rel < 1e-10, "X = {x}: rel {rel:e}");
    }
}

#[test]
fn flat_solution_inverts_the_oracle() {
    let t = power_log(1.0);
    for a in [3.0, 8.0, 17.0, 30.0] {
        // psi(0) = a when the blow-up time is E1(a)
        let ode = OdeSolution::new(t.clone(), e1(a)).unwrap();
        assert!((ode.psi(0.0).unwrap() - a).abs() < 1e-9 * a, "a = {a}");
    }
}

#[test]
fn first_order_asymptotics_of_the_oracle() {
    // G f - 1 = -q/X + O(1/X²) for power_log
    let t = power_log(1.0);
    for x in [40.0_f64, 80.0, 160.0] {
        let gf = t.g(x).unwrap() * x * x.exp();
        assert!(((gf - 1.0) * x + 1.0).abs() < 3.0 / x, "X = {x}");
    }
}
