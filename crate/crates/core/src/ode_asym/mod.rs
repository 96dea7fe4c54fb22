//! The resolvent `G(X) = ∫_X^∞ ds/f(s)`, the auxiliary integrals `H` and
//! `Q`, their inverses, and the flat ODE solution `ψ(t) = G⁻¹(T - t)`.
//!
//! Everything is computed in scaled form. Writing `g(s) = L(e^s)`,
//!
//! ```text
//! G(X) = e^{-X} J(X),    J(X)   = ∫_0^∞ e^{-t} / g(X+t) dt
//! H(X) = e^{-X} J_H(X),  J_H(X) = ∫_0^∞ e^{-t} (A0 + X + t + log g(X+t)) / g(X+t) dt
//! ```
//!
//! so `J` is slowly varying and `-log G(X) = X - log J(X)` never over- or
//! underflows. Inverses solve `X - log J(X) = -log Y`, whose derivative is
//! `1/(J g)`, close to 1.

mod cheb;

use std::sync::Arc;

use serde::Serialize;

pub use cheb::{ChebSeries, PanelCache};

use crate::error::{Error, Result};
use crate::nonlin::NonlinearityFamily;
use crate::quad::{self, GaussLegendre};
use crate::trend;

/// Default `A0` in `H`.
pub const DEFAULT_A0: f64 = 3.0;
/// Default relative quadrature tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

// Integration panels in t; beyond the last one the tail is below e^{-64}.
const PANELS: [(f64, f64); 7] = [
    (0.0, 1.0),
    (1.0, 2.0),
    (2.0, 4.0),
    (4.0, 8.0),
    (8.0, 16.0),
    (16.0, 32.0),
    (32.0, 64.0),
];
const T_CUT: f64 = 64.0;
const CACHE_SPAN: f64 = 4096.0;

/// A value from the exact quadrature path, with its error budget.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaledIntegral {
    pub value: f64,
    /// Quadrature error estimate plus the truncated-tail bound.
    pub error: f64,
    pub evals: usize,
}

/// Quadrature-backed evaluator for `G`, `H`, `Q` and their inverses.
#[derive(Debug)]
pub struct ResolventTable {
    fam: NonlinearityFamily,
    tol: f64,
    a0: f64,
    floor: f64,
    cache: Option<PanelCache>,
}

impl ResolventTable {
    pub fn new(fam: NonlinearityFamily, tol: f64, a0: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1e-3) {
            return Err(Error::invalid(format!("quadrature tolerance {tol} must lie in (0, 1e-3)")));
        }
        if !a0.is_finite() || a0 < 0.0 {
            return Err(Error::invalid(format!("A0 = {a0} must be a nonnegative number")));
        }
        let floor = fam.s_floor().max(0.0);
        let cache = (!fam.is_unit()).then(|| PanelCache::new(floor, tol));
        Ok(ResolventTable {
            fam,
            tol,
            a0,
            floor,
            cache,
        })
    }

    pub fn with_defaults(fam: NonlinearityFamily) -> Self {
        Self::new(fam, DEFAULT_TOL, DEFAULT_A0).expect("default table parameters are valid")
    }

    pub fn family(&self) -> &NonlinearityFamily {
        &self.fam
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Smallest argument at which `G` is evaluated: `log s_pos`, at least 0.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    fn check_domain(&self, what: &'static str, x: f64) -> Result<()> {
        if x.is_nan() || x < self.floor {
            return Err(Error::Domain {
                what,
                value: x,
                detail: format!("f is certified positive only for X >= {}", self.floor),
            });
        }
        Ok(())
    }

    fn scaled<W: Fn(f64, f64) -> f64>(&self, x: f64, weight: W) -> ScaledIntegral {
        let mut integrand = |t: f64| {
            let g = self.fam.l_log(x + t);
            (-t).exp() * weight(t, g) / g
        };
        let rule = GaussLegendre::g16();
        let rough: f64 = PANELS
            .iter()
            .map(|&(a, b)| rule.integrate(&mut integrand, a, b))
            .sum();
        let budget = 0.02 * self.tol * rough.abs().max(f64::MIN_POSITIVE) / PANELS.len() as f64;
        let mut out = ScaledIntegral {
            value: 0.0,
            error: 0.0,
            evals: 16 * PANELS.len(),
        };
        for &(a, b) in &PANELS {
            let r = quad::adaptive(&mut integrand, a, b, budget);
            out.value += r.value;
            out.error += r.error;
            out.evals += r.evals;
        }
        // the remaining tail, bounded with the integrand's value at the cut
        out.error += 2.0 * integrand(T_CUT).abs();
        out
    }

    /// `J(X) = e^X G(X)` by adaptive quadrature, bypassing the cache.
    pub fn j_exact(&self, x: f64) -> Result<ScaledIntegral> {
        self.check_domain("G", x)?;
        if self.fam.is_unit() {
            return Ok(ScaledIntegral {
                value: 1.0,
                error: 0.0,
                evals: 0,
            });
        }
        Ok(self.scaled(x, |_, _| 1.0))
    }

    /// `J(X)`, through the verified Chebyshev cache where possible.
    pub fn j(&self, x: f64) -> Result<f64> {
        self.check_domain("G", x)?;
        if self.fam.is_unit() {
            return Ok(1.0);
        }
        let exact = |x: f64| self.scaled(x, |_, _| 1.0).value.ln();
        if let Some(c) = &self.cache {
            if x < self.floor + CACHE_SPAN {
                if let Some(l) = c.get(x, exact) {
                    return Ok(l.exp());
                }
            }
        }
        Ok(exact(x).exp())
    }

    /// `G(X)`.
    pub fn g(&self, x: f64) -> Result<f64> {
        Ok((-x).exp() * self.j(x)?)
    }

    /// `-log G(X)`, representable far beyond the range of `G` itself.
    pub fn neg_log_g(&self, x: f64) -> Result<f64> {
        Ok(x - self.j(x)?.ln())
    }

    /// `G'(X) = -1/f(X)`.
    pub fn g_prime(&self, x: f64) -> f64 {
        -1.0 / self.fam.f(x)
    }

    /// `G⁻¹(Y)`.
    pub fn g_inv(&self, y_val: f64) -> Result<f64> {
        if !(y_val > 0.0) || !y_val.is_finite() {
            return Err(Error::Domain {
                what: "G_inv",
                value: y_val,
                detail: "argument must be positive".into(),
            });
        }
        self.g_inv_log(-y_val.ln())
    }

    /// `G⁻¹(e^{-y})`.
    pub fn g_inv_log(&self, y: f64) -> Result<f64> {
        if self.fam.is_unit() {
            if y < self.floor {
                return Err(self.range_error("G_inv", y));
            }
            return Ok(y);
        }
        let guess = if y > self.floor + 1.0 {
            y - self.fam.log_l(y)
        } else {
            y
        };
        self.invert("G_inv", y, guess, |x| {
            let j = self.j(x)?;
            Ok((x - j.ln() - y, 1.0 / (j * self.fam.l_log(x))))
        })
    }

    /// First-order approximation `-log(Y L(1/Y))` of `G⁻¹(Y)`, for `Y = e^{-y}`.
    pub fn g_inv_first_order_log(&self, y: f64) -> f64 {
        y - self.fam.log_l(y)
    }

    fn range_error(&self, what: &'static str, y: f64) -> Error {
        Error::Domain {
            what,
            value: (-y).exp(),
            detail: format!("argument exceeds the value at the domain floor X = {}", self.floor),
        }
    }

    // Solves F(x) = 0 for an increasing F given with its derivative:
    // bracket, bisect to width 1e-3, then Newton with a bisection fallback.
    fn invert<F>(&self, what: &'static str, y: f64, guess: f64, eval: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<(f64, f64)>,
    {
        let (f_floor, _) = eval(self.floor)?;
        if f_floor > 0.0 {
            return Err(self.range_error(what, y));
        }
        if f_floor == 0.0 {
            return Ok(self.floor);
        }
        let x0 = guess.max(self.floor);
        let (f0, _) = eval(x0)?;
        let (mut lo, mut hi);
        if f0 <= 0.0 {
            lo = x0;
            let mut step = 1.0;
            hi = x0 + step;
            while eval(hi)?.0 < 0.0 {
                lo = hi;
                step *= 2.0;
                hi += step;
                if !hi.is_finite() || step > 1e300 {
                    return Err(Error::Bracket { what, target: (-y).exp() });
                }
            }
        } else {
            hi = x0;
            let mut step = 1.0;
            lo = (x0 - step).max(self.floor);
            while eval(lo)?.0 > 0.0 {
                hi = lo;
                step *= 2.0;
                lo = (lo - step).max(self.floor);
            }
        }
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if eval(mid)?.0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..80 {
            let (fx, dfx) = eval(x)?;
            if fx == 0.0 {
                return Ok(x);
            }
            if fx < 0.0 {
                lo = lo.max(x);
            } else {
                hi = hi.min(x);
            }
            let mut next = x - fx / dfx;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    fn h_weight(&self) -> impl Fn(f64, f64) -> f64 + '_ {
        let a0 = self.a0;
        move |t, g| a0 + t + g.ln()
    }

    fn check_h_domain(&self, x: f64) -> Result<()> {
        self.check_domain("H", x)?;
        let w = self.a0 + x + self.fam.log_l(x);
        if !(w >= 0.0) {
            return Err(Error::Domain {
                what: "H",
                value: x,
                detail: format!("A0 + log f = {w} is negative"),
            });
        }
        Ok(())
    }

    /// `J_H(X) = e^X H(X)` by adaptive quadrature.
    pub fn jh_exact(&self, x: f64) -> Result<ScaledIntegral> {
        self.check_h_domain(x)?;
        let w = self.h_weight();
        Ok(self.scaled(x, move |t, g| x + w(t, g)))
    }

    /// `H(X) = ∫_X^∞ (A0 + log f(s))/f(s) ds`.
    pub fn h(&self, x: f64) -> Result<f64> {
        Ok((-x).exp() * self.jh_exact(x)?.value)
    }

    pub fn neg_log_h(&self, x: f64) -> Result<f64> {
        Ok(x - self.jh_exact(x)?.value.ln())
    }

    /// `H⁻¹(Y)`.
    pub fn h_inv(&self, y_val: f64) -> Result<f64> {
        if !(y_val > 0.0) || !y_val.is_finite() {
            return Err(Error::Domain {
                what: "H_inv",
                value: y_val,
                detail: "argument must be positive".into(),
            });
        }
        self.h_inv_log(-y_val.ln())
    }

    /// `H⁻¹(e^{-y})`.
    pub fn h_inv_log(&self, y: f64) -> Result<f64> {
        self.check_h_domain(self.floor)?;
        // H ~ X e^{-X}/L, so X ≈ y + log y - log L(y)
        let guess = if y > self.floor + 2.0 {
            y + y.ln() - self.fam.log_l(y)
        } else {
            y
        };
        self.invert("H_inv", y, guess, |x| {
            let jh = self.jh_exact(x)?.value;
            let g = self.fam.l_log(x);
            let w = self.a0 + x + g.ln();
            Ok((x - jh.ln() - y, w / (g * jh)))
        })
    }

    /// `Q(X) = ∫_X^∞ dη/(η² L(η))`.
    pub fn q(&self, big_x: f64) -> Result<f64> {
        if !(big_x >= self.fam.s_pos()) {
            return Err(Error::Domain {
                what: "Q",
                value: big_x,
                detail: format!("requires X >= s_pos = {}", self.fam.s_pos()),
            });
        }
        self.q_at_log(big_x.ln())
    }

    /// `Q(e^x)`; the substitution `η = e^s` turns it into `G(x)`.
    pub fn q_at_log(&self, x: f64) -> Result<f64> {
        self.g(x)
    }

    /// `Q(X)(X L(X) + X² L'(X)) - 1` at `X = e^x`, computed as `J(x)(g + g') - 1`.
    pub fn jo_residual_log(&self, x: f64) -> Result<f64> {
        let j = self.j_exact(x)?.value;
        let v = self.fam.factor(x);
        Ok(j * (v.g + v.gu) - 1.0)
    }
}

/// The flat blow-up solution `ψ(t) = G⁻¹(T - t)`.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    t_blow: f64,
    table: Arc<ResolventTable>,
}

impl OdeSolution {
    pub fn new(table: Arc<ResolventTable>, t_blow: f64) -> Result<Self> {
        if !(t_blow > 0.0) || !t_blow.is_finite() {
            return Err(Error::invalid(format!("blow-up time {t_blow} must be positive")));
        }
        Ok(OdeSolution { t_blow, table })
    }

    /// The solution with `ψ(t_start) = a`, i.e. `T = t_start + G(a)`.
    pub fn from_initial(table: Arc<ResolventTable>, a: f64, t_start: f64) -> Result<Self> {
        let t = t_start + table.g(a)?;
        Self::new(table, t)
    }

    pub fn blowup_time(&self) -> f64 {
        self.t_blow
    }

    pub fn table(&self) -> &Arc<ResolventTable> {
        &self.table
    }

    pub fn psi(&self, t: f64) -> Result<f64> {
        if !(t < self.t_blow) {
            return Err(Error::Domain {
                what: "psi",
                value: t,
                detail: format!("requires t < T = {}", self.t_blow),
            });
        }
        self.table.g_inv(self.t_blow - t)
    }

    /// `ψ₁(s) = ψ(T - e^{-s})`.
    pub fn psi1(&self, s: f64) -> Result<f64> {
        if !(s > -self.t_blow.ln()) {
            return Err(Error::Domain {
                what: "psi1",
                value: s,
                detail: format!("requires s > -log T = {}", -self.t_blow.ln()),
            });
        }
        self.table.g_inv_log(s)
    }

    /// `h(s) = e^{-s} f(ψ₁(s))`, formed in log space.
    pub fn h(&self, s: f64) -> Result<f64> {
        let p = self.psi1(s)?;
        Ok((p - s).exp() * self.table.family().l_log(p))
    }
}

/// One asymptotic statement sampled on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub statement: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub decreasing: bool,
    pub threshold: Option<f64>,
    pub last: f64,
    /// Reported only; does not enter the overall verdict.
    pub informational: bool,
    pub pass: bool,
}

impl LemmaCheck {
    fn trend(name: &str, statement: &str, grid: Vec<f64>, values: Vec<f64>, threshold: Option<f64>) -> Self {
        let decreasing = trend::decreasing(&values) || trend::vanished(&values, 1e-14);
        let last = *values.last().unwrap_or(&f64::NAN);
        let pass = decreasing && threshold.is_none_or(|t| last < t);
        LemmaCheck {
            name: name.into(),
            statement: statement.into(),
            grid,
            values,
            decreasing,
            threshold,
            last,
            informational: false,
            pass,
        }
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

/// Pointwise inequality with an empirical constant.
#[derive(Debug, Clone, Serialize)]
pub struct ControlCheck {
    pub name: String,
    pub statement: String,
    /// `(X, ε, lhs ratio, bound)` per sample.
    pub samples: Vec<(f64, f64, f64, f64)>,
    /// Smallest constant for which the inequality would hold on the samples.
    pub empirical_constant: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub family: String,
    pub a0: f64,
    pub tol: f64,
    pub trends: Vec<LemmaCheck>,
    pub controls: Vec<ControlCheck>,
    pub pass: bool,
}

/// Grids used by [`certify_asymptotic_lemmas`].
pub const LEMMA_X_GRID: [f64; 6] = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0];
pub const LEMMA_Y_EXPONENTS: [f64; 3] = [4.0, 8.0, 12.0];
pub const CONTROL_EPS: [f64; 3] = [0.5, 0.1, 0.01];
pub const CONTROL_X: [f64; 2] = [20.0, 50.0];
pub const CONTROL_C1: f64 = 3.0;

/// Gap `|H⁻¹(Y) - G⁻¹(Y/|log Y|)|` at `Y = e^{-y}`.
pub fn dam_gap_log(table: &ResolventTable, y: f64) -> Result<f64> {
    let hi = table.h_inv_log(y)?;
    let gi = table.g_inv_log(y + y.ln())?;
    Ok((hi - gi).abs())
}

/// Samples each asymptotic relation between `G`, `H`, `f` and `Q`.
pub fn certify_asymptotic_lemmas(table: &ResolventTable) -> Result<LemmaReport> {
    let fam = table.family();
    let xs: Vec<f64> = LEMMA_X_GRID.to_vec();
    let mut gf = Vec::new();
    let mut hf = Vec::new();
    let mut hg = Vec::new();
    for &x in &xs {
        let j = table.j_exact(x)?.value;
        let jh = table.jh_exact(x)?.value;
        let g = fam.l_log(x);
        gf.push((j * g - 1.0).abs());
        hf.push((jh * g / x - 1.0).abs());
        // |log G| = x - log J
        hg.push((jh / (j * (x - j.ln())) - 1.0).abs());
    }
    let ln10 = std::f64::consts::LN_10;
    let ys: Vec<f64> = LEMMA_Y_EXPONENTS.iter().map(|k| k * ln10).collect();
    let dam = ys
        .iter()
        .map(|&y| dam_gap_log(table, y))
        .collect::<Result<Vec<_>>>()?;
    let y_first: Vec<f64> = [4.0, 8.0, 12.0, 16.0].iter().map(|k| k * ln10).collect();
    let ch0 = y_first
        .iter()
        .map(|&y| Ok((table.g_inv_log(y)? - table.g_inv_first_order_log(y)).abs()))
        .collect::<Result<Vec<_>>>()?;
    let jo_x = vec![10.0, 30.0, 100.0];
    let jo = jo_x
        .iter()
        .map(|&x| Ok(table.jo_residual_log(x)?.abs() * x))
        .collect::<Result<Vec<_>>>()?;
    let y_labels: Vec<f64> = LEMMA_Y_EXPONENTS.iter().map(|k| 10f64.powf(-k)).collect();

    let trends = vec![
        LemmaCheck::trend("ch", "|G(X) f(X) - 1|", xs.clone(), gf, Some(0.1)),
        LemmaCheck::trend("ch1", "|H(X) f(X) / X - 1|", xs.clone(), hf, Some(0.1)),
        LemmaCheck::trend("ch2", "|H / (G |log G|) - 1|", xs.clone(), hg, Some(0.1)),
        LemmaCheck::trend("dam", "|H_inv(Y) - G_inv(Y/|log Y|)|", y_labels, dam, Some(0.05)),
        LemmaCheck::trend(
            "ch0",
            "|G_inv(Y) + log(Y L(1/Y))|",
            [4.0, 8.0, 12.0, 16.0].iter().map(|k: &f64| 10f64.powf(-k)).collect(),
            ch0,
            None,
        )
        .informational(),
        LemmaCheck::trend("jo", "|Q(X)(X L + X^2 L') - 1| log X", jo_x, jo, None).informational(),
    ];

    let mut fe = Vec::new();
    let mut ge = Vec::new();
    let (mut cf, mut cg): (f64, f64) = (0.0, 0.0);
    for &x in &CONTROL_X {
        let gx = table.g(x)?;
        for &eps in &CONTROL_EPS {
            let rf = (fam.log_f(x - eps) - fam.log_f(x)).exp();
            let rg = table.g(x - eps)? / gx;
            fe.push((x, eps, rf, (1.0 - eps).powi(2)));
            ge.push((x, eps, rg, 1.0 + CONTROL_C1 * eps));
            // smallest c with rf >= (1 - c eps)^2
            cf = cf.max((1.0 - rf.sqrt()) / eps);
            cg = cg.max((rg - 1.0) / eps);
        }
    }
    let controls = vec![
        ControlCheck {
            name: "controfeps".into(),
            statement: "f(X - eps) >= (1 - eps)^2 f(X)".into(),
            pass: fe.iter().all(|s| s.2 >= s.3),
            samples: fe,
            empirical_constant: cf,
        },
        ControlCheck {
            name: "controGeps".into(),
            statement: "G(X - eps) <= (1 + C1 eps) G(X), C1 = 3".into(),
            pass: ge.iter().all(|s| s.2 <= s.3),
            samples: ge,
            empirical_constant: cg,
        },
    ];
    let pass = trends.iter().filter(|c| !c.informational).all(|c| c.pass)
        && controls.iter().all(|c| c.pass);
    Ok(LemmaReport {
        family: fam.label(),
        a0: table.a0(),
        tol: table.tol(),
        trends,
        controls,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::{make_builtin, Params};

    fn table(name: &str, p: Params) -> ResolventTable {
        ResolventTable::with_defaults(make_builtin(name, &p).unwrap())
    }

    #[test]
    fn pure_exp_closed_forms() {
        let t = table("pure_exp", Params::new());
        assert!((t.g(5.0).unwrap() - 6.737947e-3).abs() < 1e-9);
        assert!((t.g_inv(1e-3).unwrap() - 6.907755).abs() < 1e-6);
        assert!((t.g_inv(t.g(12.5).unwrap()).unwrap() - 12.5).abs() < 1e-9);
        assert!((t.q(4.0).unwrap() - 0.25).abs() < 1e-15);
        let h = t.h(5.0).unwrap();
        assert!((h - 9.0 * (-5f64).exp()).abs() < 1e-12 * h);
        let t0 = ResolventTable::new(make_builtin("pure_exp", &Params::new()).unwrap(), 1e-12, 0.0).unwrap();
        let h0 = t0.h(5.0).unwrap();
        assert!((h0 - 4.042768e-2).abs() < 1e-8);
    }

    #[test]
    fn cache_agrees_with_quadrature() {
        let t = table("power_log", Params::new().with("q", 1.0));
        for x in [1.0, 1.3, 2.7, 9.99, 25.5] {
            let fast = t.j(x).unwrap();
            let slow = t.j_exact(x).unwrap().value;
            assert!((fast - slow).abs() <= 1e-12 * slow, "{x}: {fast} vs {slow}");
        }
    }

    #[test]
    fn domain_errors() {
        let t = table("log_power", Params::new().with("q", 2.0).with("K", 1.0));
        assert!(matches!(t.g(0.5), Err(Error::Domain { .. })));
        assert!(t.g_inv(10.0).is_err());
        let ode = OdeSolution::new(Arc::new(t), 0.1).unwrap();
        assert!(ode.psi(0.1).is_err());
    }

    #[test]
    fn inverse_is_decreasing() {
        let t = table("exp_shift", Params::new().with("nu", 0.25).with("sign", -1.0));
        let xs: Vec<f64> = (1..30).map(|k| t.g_inv(10f64.powi(-k)).unwrap()).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pure_exp_psi_and_h() {
        let t = Arc::new(table("pure_exp", Params::new()));
        let ode = OdeSolution::new(t, 1.0).unwrap();
        assert!((ode.psi(0.9).unwrap() - std::f64::consts::LN_10).abs() < 1e-12);
        for s in [1.0, 7.5, 40.0] {
            assert_eq!(ode.h(s).unwrap(), 1.0);
        }
    }

    #[test]
    fn lemma_report_for_pure_exp_controls() {
        let r = certify_asymptotic_lemmas(&table("pure_exp", Params::new())).unwrap();
        let ch2 = r.trends.iter().find(|c| c.name == "ch2").unwrap();
        for (x, v) in ch2.grid.iter().zip(&ch2.values) {
            assert!((v - 4.0 / x).abs() < 1e-10);
        }
        assert!(r.controls.iter().all(|c| c.pass));
        let fe = &r.controls[0].samples;
        let s = fe.iter().find(|s| s.0 == 20.0 && s.1 == 0.1).unwrap();
        assert!((s.2 - (-0.1f64).exp()).abs() < 1e-14);
    }
}
