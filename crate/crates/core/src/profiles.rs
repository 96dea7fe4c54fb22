//! Closed-form blow-up profile predictions and their comparison with a run.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::ode_asym::ResolventTable;
use crate::pde::{RadialGrid, Snapshot};
use crate::trend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Global,
    Final,
    Refined,
    SecondOrder,
}

impl ProfileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileKind::Global => "global",
            ProfileKind::Final => "final",
            ProfileKind::Refined => "refined",
            ProfileKind::SecondOrder => "second_order",
        }
    }
}

/// `|x|²/(4|log|x|²|)`, the spatial part of the global profile argument.
pub fn spatial_shift(x_abs: f64) -> f64 {
    let x2 = x_abs * x_abs;
    x2 / (4.0 * x2.ln().abs())
}

#[derive(Debug, Clone)]
pub struct ProfilePrediction {
    table: Arc<ResolventTable>,
    t_blow: f64,
    n: usize,
    /// Radius of validity for the global and final profiles.
    pub validity: f64,
    /// Bound `K` on `|ξ|` for the refined profile.
    pub xi_max: f64,
    /// Bound on `|y|` for the second-order expansion.
    pub y_max: f64,
    /// Largest share of `T - t_cap` in the final-profile argument where the
    /// last state is compared with the final profile.
    pub final_time_share: f64,
}

impl ProfilePrediction {
    pub fn new(table: Arc<ResolventTable>, t_blow: f64, n: usize) -> Result<Self> {
        if !(t_blow > 0.0) || !t_blow.is_finite() {
            return Err(Error::invalid(format!("blow-up time {t_blow} must be positive")));
        }
        if n == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        Ok(ProfilePrediction {
            table,
            t_blow,
            n,
            validity: 0.3,
            xi_max: 2.0,
            y_max: 3.0,
            final_time_share: FINAL_TIME_SHARE,
        })
    }

    pub fn blowup_time(&self) -> f64 {
        self.t_blow
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn tau(&self, t: f64) -> Result<f64> {
        let tau = self.t_blow - t;
        if tau > 0.0 {
            Ok(tau)
        } else {
            Err(Error::Domain {
                what: "profile",
                value: t,
                detail: format!("requires t < T = {}", self.t_blow),
            })
        }
    }

    // G⁻¹ of a small positive argument, through its logarithm
    fn g_inv(&self, arg: f64) -> Result<f64> {
        self.table.g_inv_log(-arg.ln())
    }

    fn check_x(x_abs: f64) -> Result<()> {
        if x_abs.abs() >= 1.0 || !x_abs.is_finite() {
            return Err(Error::Domain {
                what: "profile",
                value: x_abs,
                detail: "|x| must be below 1 so that log|x|² != 0".into(),
            });
        }
        Ok(())
    }

    pub fn psi(&self, t: f64) -> Result<f64> {
        self.g_inv(self.tau(t)?)
    }

    /// `G⁻¹(T - t + |x|²/(4|log|x|²|))`.
    pub fn global(&self, x_abs: f64, t: f64) -> Result<f64> {
        let tau = self.tau(t)?;
        if x_abs == 0.0 {
            return self.g_inv(tau);
        }
        Self::check_x(x_abs)?;
        self.g_inv(tau + spatial_shift(x_abs))
    }

    /// `G⁻¹(|x|²/(4|log|x|²|))`.
    pub fn final_profile(&self, x_abs: f64) -> Result<f64> {
        if x_abs == 0.0 {
            return Err(Error::Domain {
                what: "final_profile",
                value: 0.0,
                detail: "the final profile is singular at the origin".into(),
            });
        }
        Self::check_x(x_abs)?;
        self.g_inv(spatial_shift(x_abs))
    }

    /// `G⁻¹((T-t)(1 + |ξ|²/4))`.
    pub fn refined(&self, xi_abs: f64, t: f64) -> Result<f64> {
        let tau = self.tau(t)?;
        self.g_inv(tau * (1.0 + 0.25 * xi_abs * xi_abs))
    }

    /// Where the refined profile is sampled: `x = ξ √((T-t)|log(T-t)|)`.
    pub fn refined_x(&self, xi_abs: f64, t: f64) -> Result<f64> {
        let tau = self.tau(t)?;
        Ok(xi_abs * (tau * tau.ln().abs()).sqrt())
    }

    /// `ψ(t) + (2n - |y|²)/(4|log(T-t)|)`.
    pub fn second_order(&self, y_abs: f64, t: f64) -> Result<f64> {
        let tau = self.tau(t)?;
        Ok(self.g_inv(tau)? + (2.0 * self.n as f64 - y_abs * y_abs) / (4.0 * tau.ln().abs()))
    }
}

/// One line of the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub s: f64,
    pub kind: ProfileKind,
    pub region: String,
    pub sup_gap: f64,
    /// Gap in the normalisation of the statement (NaN where none applies).
    pub rescaled_gap: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendVerdict {
    pub kind: ProfileKind,
    pub region: String,
    pub values: Vec<f64>,
    pub pass: bool,
    pub rule: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub t_est: f64,
    pub rows: Vec<ComparisonRow>,
    pub trends: Vec<TrendVerdict>,
    /// `(|x|, |u(x,t_cap)/final(x) - 1|)` on the decade ending at `x_resolved`.
    pub final_gaps: Vec<(f64, f64)>,
    pub x_resolved: f64,
}

impl ComparisonReport {
    pub fn trend(&self, kind: ProfileKind, region: &str) -> Option<&TrendVerdict> {
        self.trends.iter().find(|v| v.kind == kind && v.region == region)
    }

    pub fn rows_of(&self, kind: ProfileKind, region: &str) -> Vec<&ComparisonRow> {
        self.rows.iter().filter(|r| r.kind == kind && r.region == region).collect()
    }
}

/// Snapshots taken at known similarity times, against a run's `T_est`.
#[derive(Debug, Clone)]
pub struct RunFrames<'a> {
    pub grid: &'a RadialGrid,
    pub t_est: f64,
    pub snapshots: &'a [Snapshot],
    /// Last state before the cap, for the final profile.
    pub final_snapshot: &'a Snapshot,
}

/// The time-dependent part of the final-profile argument may be at most
/// this fraction of the spatial part where the final profile is compared.
pub const FINAL_TIME_SHARE: f64 = 0.01;
const FINAL_POINTS: usize = 11;

pub fn compare(pred: &ProfilePrediction, run: &RunFrames) -> Result<ComparisonReport> {
    let rel = (pred.t_blow - run.t_est).abs() / run.t_est;
    if rel > 1e-12 {
        return Err(Error::invalid(format!(
            "prediction uses T = {} but the frames were built with T_est = {}",
            pred.t_blow, run.t_est
        )));
    }
    let r = run.grid.nodes();
    let two_n = 2.0 * pred.n as f64;
    let mut rows = Vec::new();
    for snap in run.snapshots {
        let tau = pred.tau(snap.t)?;
        let s = -tau.ln();
        let interp = Pchip::new(r, &snap.u)?;
        let psi = pred.psi(snap.t)?;

        // global profile on the annulus 2(T-t) <= |x|² <= ρ²
        let lo = (2.0 * tau).sqrt();
        let mut gap = 0.0_f64;
        for (x, u) in r.iter().zip(&snap.u) {
            if *x >= lo && *x <= pred.validity {
                gap = gap.max((u - pred.global(*x, snap.t)?).abs());
            }
        }
        rows.push(row(s, ProfileKind::Global, "annulus", gap, f64::NAN));

        // refined profile on |ξ| <= K
        let mut gap = 0.0_f64;
        for k in 0..=40 {
            let xi = pred.xi_max * k as f64 / 40.0;
            let x = pred.refined_x(xi, snap.t)?;
            if x > run.grid.radius() {
                break;
            }
            gap = gap.max((interp.eval(x) - pred.refined(xi, snap.t)?).abs());
        }
        rows.push(row(s, ProfileKind::Refined, "xi<=K", gap, f64::NAN));

        // second order: (u - ψ) 4|log(T-t)| against 2n - |y|²
        let scale = 4.0 * tau.ln().abs();
        let center = (snap.u[0] - psi) * scale;
        rows.push(row(s, ProfileKind::SecondOrder, "y=0", (center - two_n).abs(), center));
        let mut gap = 0.0_f64;
        for k in 0..=60 {
            let y = pred.y_max * k as f64 / 60.0;
            let x = y * tau.sqrt();
            if x > run.grid.radius() {
                break;
            }
            let v = (interp.eval(x) - psi) * scale;
            gap = gap.max((v - (two_n - y * y)).abs());
        }
        rows.push(row(s, ProfileKind::SecondOrder, "y<=3", gap / scale, gap));
    }

    let mut trends = Vec::new();
    let by = |kind: ProfileKind, region: &str, rescaled: bool| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.kind == kind && r.region == region)
            .map(|r| if rescaled { r.rescaled_gap } else { r.sup_gap })
            .collect()
    };
    for (kind, region) in [(ProfileKind::Global, "annulus"), (ProfileKind::Refined, "xi<=K")] {
        let values = by(kind, region, false);
        trends.push(TrendVerdict {
            kind,
            region: region.into(),
            pass: trend::decreasing(&values),
            values,
            rule: "sup gap strictly decreasing in s".into(),
        });
    }
    let centers = by(ProfileKind::SecondOrder, "y=0", true);
    trends.push(TrendVerdict {
        kind: ProfileKind::SecondOrder,
        region: "y=0".into(),
        pass: trend::approaching(&centers, two_n),
        values: centers,
        rule: format!("(u(0,t) - ψ(t)) 4|log(T-t)| moving monotonically toward {two_n}"),
    });
    let bands = by(ProfileKind::SecondOrder, "y<=3", true);
    trends.push(TrendVerdict {
        kind: ProfileKind::SecondOrder,
        region: "y<=3".into(),
        pass: trend::decreasing(&bands),
        values: bands,
        rule: "rescaled sup gap strictly decreasing in s".into(),
    });

    // mark each row against its predecessor of the same kind and region
    let mut prev: Vec<(ProfileKind, String, f64)> = Vec::new();
    for row in rows.iter_mut() {
        let key = |p: &(ProfileKind, String, f64)| p.0 == row.kind && p.1 == row.region;
        let metric = if row.kind == ProfileKind::SecondOrder && row.region == "y=0" {
            (row.rescaled_gap - two_n).abs()
        } else {
            row.sup_gap
        };
        row.verdict = match prev.iter().position(key) {
            None => "first".into(),
            Some(i) if metric < prev[i].2 => "improving".into(),
            Some(_) => "not_improving".into(),
        };
        prev.retain(|p| !key(p));
        prev.push((row.kind, row.region.clone(), metric));
    }

    let (final_gaps, x_resolved) = final_profile_gaps(pred, run)?;
    let finals: Vec<f64> = final_gaps.iter().map(|p| p.1).collect();
    trends.push(TrendVerdict {
        kind: ProfileKind::Final,
        region: "decade".into(),
        pass: trend::decreasing(&finals),
        values: finals,
        rule: "relative gap decreasing as |x| falls to the smallest resolved radius".into(),
    });
    Ok(ComparisonReport {
        t_est: run.t_est,
        rows,
        trends,
        final_gaps,
        x_resolved,
    })
}

fn row(s: f64, kind: ProfileKind, region: &str, sup_gap: f64, rescaled_gap: f64) -> ComparisonRow {
    ComparisonRow {
        s,
        kind,
        region: region.into(),
        sup_gap,
        rescaled_gap,
        verdict: String::new(),
    }
}

// The smallest radius where the last state still stands in for u(·,T):
// (T - t_cap) at most FINAL_TIME_SHARE of |x|²/(4|log|x|²|).
fn final_profile_gaps(pred: &ProfilePrediction, run: &RunFrames) -> Result<(Vec<(f64, f64)>, f64)> {
    let snap = run.final_snapshot;
    let tau = pred.tau(snap.t)?;
    let target = tau / pred.final_time_share;
    // spatial_shift is increasing on (0, e^{-1}); bisect in log |x|
    let (mut lo, mut hi) = (1e-300_f64.ln(), (-1.0_f64).exp().ln());
    if spatial_shift(hi.exp()) < target {
        return Err(Error::invalid("final state is too far from T_est to compare final profiles"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spatial_shift(mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_res = hi.exp();
    if 10.0 * x_res > pred.validity.min(run.grid.radius()) {
        return Err(Error::invalid(format!(
            "resolved radius {x_res:e} leaves no decade inside the validity radius"
        )));
    }
    let interp = Pchip::new(run.grid.nodes(), &snap.u)?;
    let mut out = Vec::with_capacity(FINAL_POINTS);
    for k in 0..FINAL_POINTS {
        // from 10 x_res down to x_res
        let x = x_res * 10f64.powf(1.0 - k as f64 / (FINAL_POINTS - 1) as f64);
        let pf = pred.final_profile(x)?;
        out.push((x, (interp.eval(x) / pf - 1.0).abs()));
    }
    Ok((out, x_res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::{make_builtin, Params};

    fn pure(t: f64, n: usize) -> ProfilePrediction {
        let fam = make_builtin("pure_exp", &Params::new()).unwrap();
        ProfilePrediction::new(Arc::new(ResolventTable::with_defaults(fam)), t, n).unwrap()
    }

    #[test]
    fn closed_forms_for_the_exponential() {
        let p = pure(1.0, 1);
        let t = 1.0 - 1e-4;
        assert!((p.global(0.0, t).unwrap() - 1e4f64.ln()).abs() < 1e-12);
        // -log(1e-6 / (4 · 13.8155...)) = 13.81551 + 4.01209
        let expected = 1e6f64.ln() + (4.0 * 1e6f64.ln()).ln();
        assert!((p.final_profile(1e-3).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 17.82760).abs() < 1e-5);
        let t6 = 1.0 - 1e-6;
        assert!((p.refined(2.0, t6).unwrap() - 13.1224).abs() < 1e-4);
        for xi in [0.0, 0.5, 1.0, 3.0] {
            let d = p.refined(xi, t6).unwrap() + (1.0 - t6).ln();
            assert!((d + (1.0 + xi * xi / 4.0).ln()).abs() < 1e-12);
        }
        let tau = 1.0 - t;
        let d0 = p.second_order(0.0, t).unwrap() - p.psi(t).unwrap();
        assert!((d0 - 2.0 / (4.0 * tau.ln().abs())).abs() < 1e-14);
        assert!((d0 - 0.0542871).abs() < 1e-6);
        assert!((p.second_order(2f64.sqrt(), t).unwrap() - p.psi(t).unwrap()).abs() < 1e-14);
        let p3 = pure(1.0, 3);
        assert!((p3.second_order(1.0, t6).unwrap() - p3.psi(t6).unwrap() - 0.0904773).abs() < 1e-6);
    }

    #[test]
    fn final_is_global_at_t() {
        // T - t = 1e-20 is invisible next to the spatial shift
        let p = pure(1e-20, 2);
        for x in [1e-4, 1e-3, 0.01, 0.2] {
            let g = p.global(x, 0.0).unwrap();
            assert!((g - p.final_profile(x).unwrap()).abs() < 1e-9);
        }
        assert!(p.global(1.0, -0.1).is_err());
        assert!(p.final_profile(0.0).is_err());
    }

    #[test]
    fn final_profile_decade_slope() {
        let p = pure(1.0, 1);
        let a = p.final_profile(1e-4).unwrap() - p.final_profile(1e-3).unwrap();
        // 2 log 10 to leading order, less the log log correction
        assert!((a - 2.0 * 10f64.ln()).abs() < 0.3, "{a}");
    }
}
