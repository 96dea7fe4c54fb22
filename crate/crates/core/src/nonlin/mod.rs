//! Nonlinearities `f(s) = e^s L(e^s)` with a slowly varying factor `L`.
//!
//! Each factor is a strategy behind [`SlowFactor`], registered by name in
//! [`FamilyRegistry`]. A [`NonlinearityFamily`] wraps one strategy with its
//! parameters and exposes `L`, `f`, `θ(X) = X L'(X)/L(X)` and their
//! derivatives, always through the log argument `x = log X` so that values
//! like `X = e^300` never have to be formed.

mod builtins;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

pub use builtins::{
    AmplitudeSin, ExpShift, LogPower, OscillatingCosPower, OscillatingSinLog, PowerLog, PureExp,
};

use crate::error::{Error, Result};
use crate::trend;

/// `g(u) = L(e^u)` and its first two derivatives in `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub g: f64,
    pub gu: f64,
    pub guu: f64,
}

/// A slowly varying factor, coded in the log argument.
pub trait SlowFactor: Send + Sync + fmt::Debug {
    /// Value and `u`-derivatives of `L(e^u)`.
    fn eval_log(&self, u: f64) -> Factor;
    /// Threshold `X` above which `L > 0` is certified.
    fn s_pos(&self) -> f64;
    /// An exponent `α ∈ (1/2, 1)` for which the slow-variation bounds hold.
    fn default_alpha(&self) -> f64;
    /// True only for `L ≡ 1`.
    fn is_unit(&self) -> bool {
        false
    }
}

/// Named real parameters of a family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Params(pub BTreeMap<String, f64>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn get_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            Some(v) if v.is_finite() => Ok(*v),
            Some(v) => Err(Error::invalid(format!("parameter {key} = {v} is not finite"))),
            None => Ok(default),
        }
    }

    /// Parses `k=v` pairs as given on the command line.
    pub fn parse_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Self> {
        let mut out = Params::new();
        for p in pairs {
            let p = p.as_ref();
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value, got `{p}`")))?;
            let v: f64 = match v.trim() {
                "+" => 1.0,
                "-" => -1.0,
                other => other
                    .parse()
                    .map_err(|_| Error::invalid(format!("parameter `{k}`: `{other}` is not a number")))?,
            };
            out.0.insert(k.trim().to_string(), v);
        }
        Ok(out)
    }
}

/// Scaled values of `L` at `X = e^x`: `L`, `X L'(X)` and `X^2 L''(X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LValues {
    pub l: f64,
    pub x_l1: f64,
    pub x2_l2: f64,
}

/// An immutable nonlinearity `f(s) = e^s L(e^s)`.
#[derive(Clone)]
pub struct NonlinearityFamily {
    name: String,
    params: Params,
    factor: Arc<dyn SlowFactor>,
}

impl fmt::Debug for NonlinearityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearityFamily")
            .field("name", &self.name)
            .field("params", &self.params.0)
            .finish()
    }
}

impl NonlinearityFamily {
    pub fn new(name: impl Into<String>, params: Params, factor: Arc<dyn SlowFactor>) -> Self {
        NonlinearityFamily {
            name: name.into(),
            params,
            factor,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Short label such as `power_log(K=0,q=2)`.
    pub fn label(&self) -> String {
        if self.params.0.is_empty() {
            return self.name.clone();
        }
        let ps: Vec<String> = self.params.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.name, ps.join(","))
    }

    pub fn s_pos(&self) -> f64 {
        self.factor.s_pos()
    }

    /// `log s_pos`: the smallest `s` at which `f` is certified positive.
    pub fn s_floor(&self) -> f64 {
        self.s_pos().ln()
    }

    pub fn default_alpha(&self) -> f64 {
        self.factor.default_alpha()
    }

    pub fn is_unit(&self) -> bool {
        self.factor.is_unit()
    }

    pub fn factor(&self, u: f64) -> Factor {
        self.factor.eval_log(u)
    }

    pub fn eval_at_log(&self, x: f64) -> LValues {
        let Factor { g, gu, guu } = self.factor.eval_log(x);
        LValues {
            l: g,
            x_l1: gu,
            x2_l2: guu - gu,
        }
    }

    /// `(L(X), L'(X), L''(X))`; only usable while `X` is representable.
    pub fn eval_at(&self, big_x: f64) -> (f64, f64, f64) {
        let v = self.eval_at_log(big_x.ln());
        (v.l, v.x_l1 / big_x, v.x2_l2 / (big_x * big_x))
    }

    /// `L(e^x)`.
    pub fn l_log(&self, x: f64) -> f64 {
        self.factor.eval_log(x).g
    }

    /// `log L(e^x)`.
    pub fn log_l(&self, x: f64) -> f64 {
        self.factor.eval_log(x).g.ln()
    }

    /// `θ(e^x) = X L'(X)/L(X)`.
    pub fn theta_log(&self, x: f64) -> f64 {
        let v = self.factor.eval_log(x);
        v.gu / v.g
    }

    /// `X θ'(X)` at `X = e^x`.
    pub fn x_theta_prime_log(&self, x: f64) -> f64 {
        let v = self.factor.eval_log(x);
        let t = v.gu / v.g;
        v.guu / v.g - t * t
    }

    pub fn f(&self, s: f64) -> f64 {
        s.exp() * self.factor.eval_log(s).g
    }

    pub fn log_f(&self, s: f64) -> f64 {
        s + self.log_l(s)
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        let v = self.factor.eval_log(s);
        s.exp() * (v.g + v.gu)
    }

    pub fn f_second(&self, s: f64) -> f64 {
        let v = self.factor.eval_log(s);
        s.exp() * (v.g + 2.0 * v.gu + v.guu)
    }

    /// Smallest grid point from which `f'` stays positive, if any.
    pub fn increasing_from(&self, grid: &[f64]) -> Option<f64> {
        let mut start = None;
        for &s in grid {
            if self.f_prime(s) > 0.0 {
                start.get_or_insert(s);
            } else {
                start = None;
            }
        }
        start
    }
}

type Ctor = fn(&Params) -> Result<Arc<dyn SlowFactor>>;

struct Entry {
    name: &'static str,
    params: &'static [&'static str],
    ctor: Ctor,
}

/// Name-addressable registry of factors.
pub struct FamilyRegistry {
    entries: Vec<Entry>,
}

impl FamilyRegistry {
    fn builtin() -> Self {
        let mut r = FamilyRegistry { entries: Vec::new() };
        r.register("pure_exp", &[], |_| Ok(Arc::new(PureExp)));
        r.register("power_log", &["q", "K"], |p| Ok(Arc::new(PowerLog::new(p)?)));
        r.register("log_power", &["q", "K"], |p| Ok(Arc::new(LogPower::new(p)?)));
        r.register("exp_shift", &["nu", "sign"], |p| Ok(Arc::new(ExpShift::new(p)?)));
        r.register("oscillating_sin_log", &[], |_| Ok(Arc::new(OscillatingSinLog)));
        r.register("oscillating_cos_power", &["nu", "gamma"], |p| {
            Ok(Arc::new(OscillatingCosPower::new(p)?))
        });
        r.register("amplitude_sin", &["nu", "a"], |p| Ok(Arc::new(AmplitudeSin::new(p)?)));
        r
    }

    fn register(&mut self, name: &'static str, params: &'static [&'static str], ctor: Ctor) {
        self.entries.push(Entry { name, params, ctor });
    }

    /// The process-wide registry of builtin factors.
    pub fn global() -> &'static FamilyRegistry {
        static REG: OnceLock<FamilyRegistry> = OnceLock::new();
        REG.get_or_init(FamilyRegistry::builtin)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    pub fn make(&self, name: &str, params: &Params) -> Result<NonlinearityFamily> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownFamily(name.to_string(), self.names().join(", ")))?;
        if let Some(k) = params.0.keys().find(|k| !entry.params.contains(&k.as_str())) {
            return Err(Error::InvalidParams {
                family: name.to_string(),
                constraint: format!(
                    "unknown parameter `{k}` (accepted: {})",
                    if entry.params.is_empty() { "none".into() } else { entry.params.join(", ") }
                ),
            });
        }
        let factor = (entry.ctor)(params)?;
        Ok(NonlinearityFamily::new(name, params.clone(), factor))
    }
}

/// Builds a registered family by name.
pub fn make_builtin(name: &str, params: &Params) -> Result<NonlinearityFamily> {
    FamilyRegistry::global().make(name, params)
}

/// One instance of every builtin with representative in-range parameters.
pub fn builtin_catalog() -> Vec<NonlinearityFamily> {
    let specs: [(&str, Params); 9] = [
        ("pure_exp", Params::new()),
        ("power_log", Params::new().with("q", 1.0).with("K", 0.0)),
        ("power_log", Params::new().with("q", 2.0).with("K", 0.0)),
        ("log_power", Params::new().with("q", 2.0).with("K", 1.0)),
        ("exp_shift", Params::new().with("nu", 0.25).with("sign", 1.0)),
        ("exp_shift", Params::new().with("nu", 0.25).with("sign", -1.0)),
        ("oscillating_sin_log", Params::new()),
        ("oscillating_cos_power", Params::new().with("nu", 0.2).with("gamma", 0.2)),
        ("amplitude_sin", Params::new().with("nu", 0.45).with("a", 0.5)),
    ];
    specs
        .iter()
        .map(|(n, p)| make_builtin(n, p).expect("catalog parameters are admissible"))
        .collect()
}

/// Outcome of the slow-variation certification on a log grid.
#[derive(Debug, Clone, Serialize)]
pub struct SlowVariationReport {
    pub family: String,
    pub alpha: f64,
    /// Grid in log form, `log X`.
    pub log_grid: Vec<f64>,
    /// `|θ(X)| log^α X`.
    pub ratio1: Vec<f64>,
    /// `|θ'(X)| X log X`.
    pub ratio2: Vec<f64>,
    pub pass1: bool,
    pub pass2: bool,
    pub pass: bool,
}

/// Relative slack of the envelope test used for the slow-variation ratios.
pub const ENVELOPE_SLACK: f64 = 0.05;

/// Evaluates both slow-variation ratios on `log_grid` (values of `log X`).
///
/// A ratio sequence passes when, over the last half of the grid, it never
/// exceeds its running maximum by more than [`ENVELOPE_SLACK`]: monotone
/// decay passes, and so does an oscillation under a decaying envelope.
pub fn certify_slow_variation(
    fam: &NonlinearityFamily,
    alpha: f64,
    log_grid: &[f64],
) -> Result<SlowVariationReport> {
    if log_grid.len() < 8 {
        return Err(Error::invalid(format!(
            "slow-variation grid has {} points; need at least 8",
            log_grid.len()
        )));
    }
    if log_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("slow-variation grid must be strictly increasing"));
    }
    let (lo, hi) = (log_grid[0], log_grid[log_grid.len() - 1]);
    if lo < fam.s_floor() {
        return Err(Error::invalid(format!(
            "grid starts at log X = {lo} below log s_pos = {}",
            fam.s_floor()
        )));
    }
    if hi - lo < 6.0 * std::f64::consts::LN_10 {
        return Err(Error::invalid("slow-variation grid must span at least 6 decades of X"));
    }
    let ratio1: Vec<f64> = log_grid
        .iter()
        .map(|&x| fam.theta_log(x).abs() * x.powf(alpha))
        .collect();
    let ratio2: Vec<f64> = log_grid
        .iter()
        .map(|&x| fam.x_theta_prime_log(x).abs() * x)
        .collect();
    let from = log_grid.len() / 2;
    let pass1 = trend::envelope_nonincreasing(&ratio1, from, ENVELOPE_SLACK);
    let pass2 = trend::envelope_nonincreasing(&ratio2, from, ENVELOPE_SLACK);
    Ok(SlowVariationReport {
        family: fam.label(),
        alpha,
        log_grid: log_grid.to_vec(),
        ratio1,
        ratio2,
        pass1,
        pass2,
        pass: pass1 && pass2,
    })
}

/// Outcome of the uniform ratio bound `|L(λs)/L(s) - 1| <= 4|log λ|/log^α s`.
#[derive(Debug, Clone, Serialize)]
pub struct UniformRatioReport {
    pub family: String,
    pub alpha: f64,
    pub log_grid: Vec<f64>,
    /// Per grid point: max over sampled λ of the normalized ratio.
    pub worst: Vec<f64>,
    /// Index from which every grid point satisfies the bound (with slack).
    pub threshold_index: Option<usize>,
    pub threshold_log_s: Option<f64>,
    pub pass: bool,
}

/// Normalized ratio `|L(λs)/L(s) - 1| log^α s / (4|log λ| + ε)` at `log s = x`.
pub fn uniform_ratio_at(fam: &NonlinearityFamily, alpha: f64, x: f64, log_lambda: f64) -> f64 {
    let r = fam.l_log(x + log_lambda) / fam.l_log(x) - 1.0;
    r.abs() * x.powf(alpha) / (4.0 * log_lambda.abs() + f64::EPSILON)
}

/// Sweeps λ over `I_s = [exp(-log^α s / 8), exp(log^α s / 8)]` for each `s`
/// of the log grid. Passes when the bound (with 5% slack) holds from some
/// threshold on, and that threshold lies in the first half of the grid.
pub fn certify_uniform_ratio(
    fam: &NonlinearityFamily,
    alpha: f64,
    log_grid: &[f64],
) -> Result<UniformRatioReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if log_grid.is_empty() || log_grid.iter().any(|&x| x < fam.s_floor() || x <= 0.0) {
        return Err(Error::invalid("uniform-ratio grid must lie above log s_pos and 0"));
    }
    const SAMPLES: usize = 64;
    let worst: Vec<f64> = log_grid
        .iter()
        .map(|&x| {
            let half = x.powf(alpha) / 8.0;
            (1..=SAMPLES)
                .flat_map(|k| {
                    let l = half * k as f64 / SAMPLES as f64;
                    [l, -l]
                })
                .map(|l| uniform_ratio_at(fam, alpha, x, l))
                .fold(0.0, f64::max)
        })
        .collect();
    let ok: Vec<bool> = worst.iter().map(|&w| w <= 1.05).collect();
    let threshold_index = (0..ok.len()).find(|&i| ok[i..].iter().all(|&b| b));
    let pass = matches!(threshold_index, Some(i) if i <= ok.len() / 2);
    Ok(UniformRatioReport {
        family: fam.label(),
        alpha,
        log_grid: log_grid.to_vec(),
        threshold_log_s: threshold_index.map(|i| log_grid[i]),
        worst,
        threshold_index,
        pass,
    })
}

/// Worst mismatch between the coded derivatives and centered differences.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeCheck {
    pub family: String,
    pub max_rel_err_l1: f64,
    pub max_rel_err_l2: f64,
}

/// Compares `X L'` and `X^2 L''` with centered differences of `L` and `L'`
/// taken in `X`. Errors are relative to
/// `max(|exact|, 1e-4 L)` so that zeros of oscillating derivatives do not
/// divide by zero.
pub fn check_derivatives(fam: &NonlinearityFamily, log_grid: &[f64]) -> DerivativeCheck {
    // centered differences in X, Richardson-extrapolated over steps η and η/2
    let centered = |x: f64, eta: f64| {
        let (up, dn) = ((1.0 + eta).ln(), (1.0 - eta).ln());
        let d1 = (fam.l_log(x + up) - fam.l_log(x + dn)) / (2.0 * eta);
        let l1p = fam.eval_at_log(x + up).x_l1 / (1.0 + eta);
        let l1m = fam.eval_at_log(x + dn).x_l1 / (1.0 - eta);
        (d1, (l1p - l1m) / (2.0 * eta))
    };
    let eta = 1e-4;
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    for &x in log_grid {
        let v = fam.eval_at_log(x);
        let (a1, a2) = centered(x, eta);
        let (b1, b2) = centered(x, 0.5 * eta);
        let fd1 = (4.0 * b1 - a1) / 3.0;
        let fd2 = (4.0 * b2 - a2) / 3.0;
        let scale1 = v.x_l1.abs().max(1e-4 * v.l.abs());
        e1 = e1.max((fd1 - v.x_l1).abs() / scale1);
        let scale2 = v.x2_l2.abs().max(1e-4 * v.l.abs());
        e2 = e2.max((fd2 - v.x2_l2).abs() / scale2);
    }
    DerivativeCheck {
        family: fam.label(),
        max_rel_err_l1: e1,
        max_rel_err_l2: e2,
    }
}

/// `n` points evenly spaced in `log X` (i.e. log-spaced in X).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(name: &str, p: Params) -> NonlinearityFamily {
        make_builtin(name, &p).unwrap()
    }

    #[test]
    fn pure_exp_has_unit_factor() {
        let f = fam("pure_exp", Params::new());
        for x in [0.0, 3.0, 50.0, 300.0] {
            assert_eq!(f.theta_log(x), 0.0);
            assert_eq!(f.l_log(x), 1.0);
        }
        assert!((f.f(2.0) - 2f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn power_log_theta() {
        let f = fam("power_log", Params::new().with("q", 2.0).with("K", 0.0));
        assert!((f.theta_log(10.0) - 0.2).abs() < 1e-15);
        // f(s) = s^2 e^s
        assert!((f.f(3.0) - 9.0 * 3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn exp_shift_theta_matches_finite_difference() {
        let f = fam("exp_shift", Params::new().with("nu", 0.25).with("sign", 1.0));
        let x = 20.0;
        // θ(X) = X L'(X)/L(X) = d log L / d log X; oracle: centered difference of log L
        let h = 1e-4;
        let fd = (f.log_l(x + h) - f.log_l(x - h)) / (2.0 * h);
        let th = f.theta_log(x);
        assert!((fd - th).abs() / th < 1e-6, "{fd} vs {th}");
        assert!((th - 0.25 * 21f64.powf(-0.75)).abs() < 1e-15);
    }

    #[test]
    fn registry_rejects_bad_input() {
        let e = make_builtin("nope", &Params::new()).unwrap_err();
        assert!(matches!(e, Error::UnknownFamily(..)));
        let e = make_builtin(
            "oscillating_cos_power",
            &Params::new().with("nu", 0.3).with("gamma", 0.2),
        )
        .unwrap_err();
        assert!(e.to_string().contains("nu + gamma"), "{e}");
        let e = make_builtin("power_log", &Params::new().with("q", 0.5).with("K", 0.0)).unwrap_err();
        assert!(e.to_string().contains("q >= 1"));
        let e = make_builtin("amplitude_sin", &Params::new().with("a", 1.0)).unwrap_err();
        assert!(e.to_string().contains("|a|"));
        let e = make_builtin("pure_exp", &Params::new().with("q", 1.0)).unwrap_err();
        assert!(e.to_string().contains("unknown parameter"));
    }

    #[test]
    fn s_pos_per_family() {
        assert_eq!(fam("pure_exp", Params::new()).s_pos(), 1.0);
        let lp = fam("log_power", Params::new().with("q", 2.0).with("K", 1.0));
        assert_eq!(lp.s_pos(), std::f64::consts::E);
        let pl = fam("power_log", Params::new().with("q", 1.0).with("K", 2.0));
        assert_eq!(pl.s_pos(), 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences_for_all_builtins() {
        let grid = log_grid(1.0, 300.0, 64);
        for f in builtin_catalog() {
            let c = check_derivatives(&f, &grid);
            assert!(c.max_rel_err_l1 <= 1e-6, "{}: L1 err {}", c.family, c.max_rel_err_l1);
            assert!(c.max_rel_err_l2 <= 1e-6, "{}: L2 err {}", c.family, c.max_rel_err_l2);
        }
    }

    #[test]
    fn theta_vanishes_along_increasing_grid() {
        for f in builtin_catalog() {
            let far = f.theta_log(1e8).abs();
            let near = f.theta_log(10.0).abs();
            assert!(far < 1e-2, "{}: θ(e^1e8) = {far}", f.label());
            assert!(far <= near.max(1e-300) || near == 0.0, "{}", f.label());
        }
    }

    #[test]
    fn f_increasing_from_small_threshold() {
        let grid = log_grid(0.0, 60.0, 241);
        for f in builtin_catalog() {
            let s0 = f.increasing_from(&grid).expect("f eventually increasing");
            assert!(s0 <= 2.0, "{}: increasing only from {s0}", f.label());
        }
    }

    #[test]
    fn slow_variation_trivial_and_power_log() {
        let grid = log_grid(10.0, 40.0, 31);
        let r = certify_slow_variation(&fam("pure_exp", Params::new()), 0.9, &grid).unwrap();
        assert!(r.pass && r.ratio1.iter().all(|&v| v == 0.0) && r.ratio2.iter().all(|&v| v == 0.0));

        let pl = fam("power_log", Params::new().with("q", 1.0));
        let r = certify_slow_variation(&pl, 0.9, &grid).unwrap();
        assert!(r.pass);
        for (x, v) in r.log_grid.iter().zip(&r.ratio1) {
            assert!((v - x.powf(-0.1)).abs() < 1e-14);
        }
    }

    #[test]
    fn slow_variation_input_validation() {
        let f = fam("pure_exp", Params::new());
        assert!(certify_slow_variation(&f, 0.9, &log_grid(10.0, 40.0, 7)).is_err());
        assert!(certify_slow_variation(&f, 0.9, &log_grid(10.0, 12.0, 20)).is_err());
    }

    #[test]
    fn uniform_ratio_closed_form_for_power_log() {
        let f = fam("power_log", Params::new().with("q", 1.0));
        let x = 100.0;
        let ll = 100f64.powf(0.75) / 8.0;
        // L(λs)/L(s) - 1 = log λ / log s exactly
        let r = f.l_log(x + ll) / f.l_log(x) - 1.0;
        assert!((r - ll / x).abs() < 1e-15);
        let norm = uniform_ratio_at(&f, 0.75, x, ll);
        assert!(norm <= 1.0 / 4.0 + 1e-12);
    }

    #[test]
    fn uniform_ratio_sweeps() {
        let r = certify_uniform_ratio(&fam("pure_exp", Params::new()), 0.75, &log_grid(5.0, 50.0, 10))
            .unwrap();
        assert!(r.pass && r.worst.iter().all(|&w| w == 0.0));
        let lp = fam("log_power", Params::new().with("q", 2.0).with("K", 1.0));
        let r = certify_uniform_ratio(&lp, 0.75, &log_grid(20.0, 200.0, 19)).unwrap();
        assert!(r.pass, "{:?}", r.worst);
    }
}
