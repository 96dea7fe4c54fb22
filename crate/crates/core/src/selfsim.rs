//! Shooting for radial profiles of `z'' + ((n-1)/r - r/2) z' + e^z - 1 = 0`
//! with `z'(0) = 0`, and the backward self-similar solutions they generate.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Series start radius.
pub const R_START: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 40.0;
/// `z_r` above this counts as increasing.
pub const INCREASE_TOL: f64 = 1e-8;
/// `|z_r|` above this counts as unbounded.
pub const SLOPE_BOUND: f64 = 1e3;
pub const DEFAULT_RTOL: f64 = 1e-12;
/// Output spacing of sampled shots.
pub const SAMPLE_DR: f64 = 0.05;
/// Bracketing shots closer than this in `z` are treated as one solution.
pub const SEPARATION_TOL: f64 = 1e-6;
/// Smallest agreement radius accepted for a bisected profile.
pub const MIN_HORIZON: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotClass {
    MemberOfS,
    DerivativeUnbounded,
    IncreasingSomewhere,
    Escaped,
}

impl ShotClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShotClass::MemberOfS => "member_of_S",
            ShotClass::DerivativeUnbounded => "derivative_unbounded",
            ShotClass::IncreasingSomewhere => "increasing_somewhere",
            ShotClass::Escaped => "escaped",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileShot {
    pub n: usize,
    pub a: f64,
    pub r_max: f64,
    /// Radius where the integration stopped.
    pub r_end: f64,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub z_r: Vec<f64>,
    pub class: ShotClass,
    /// For bisected profiles: the radius up to which the two bracketing
    /// shots agree, beyond which rounding decides the branch.
    pub horizon: Option<f64>,
    pub detail: String,
}

impl ProfileShot {
    /// `g(r) = 1 + r z_r / 2` on the samples.
    pub fn g(&self) -> Vec<f64> {
        self.r.iter().zip(&self.z_r).map(|(r, p)| 1.0 + 0.5 * r * p).collect()
    }

    pub fn is_nontrivial_member(&self) -> bool {
        self.class == ShotClass::MemberOfS && self.a > 0.0
    }

    /// Last radius where the sampled profile is trusted.
    pub fn trusted_to(&self) -> f64 {
        self.horizon.unwrap_or(self.r_end)
    }
}

fn rhs(n: usize, r: f64, y: [f64; 2]) -> [f64; 2] {
    let (z, p) = (y[0], y[1]);
    [p, -((n as f64 - 1.0) / r - 0.5 * r) * p - z.exp_m1()]
}

/// Regular expansion at the origin, `z'' (0) = -(e^a - 1)/n`.
pub fn series_start(n: usize, a: f64, r: f64) -> [f64; 2] {
    let c = a.exp_m1() / n as f64;
    [a - 0.5 * c * r * r, -c * r]
}

// Dormand–Prince 5(4)
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One attempted step; returns the 5th-order value and the error estimate.
fn dp5_step(n: usize, r: f64, y: [f64; 2], h: f64) -> ([f64; 2], f64) {
    let mut k = [[0.0; 2]; 7];
    for i in 0..7 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += h * A[i][j] * kj[0];
            yi[1] += h * A[i][j] * kj[1];
        }
        k[i] = rhs(n, r + C[i] * h, yi);
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for i in 0..7 {
        for d in 0..2 {
            y5[d] += h * B5[i] * k[i][d];
            err[d] += h * (B5[i] - B4[i]) * k[i][d];
        }
    }
    let e = (0..2)
        .map(|d| err[d].abs() / (1e-14 + 1e-14 * y[d].abs().max(y5[d].abs())))
        .fold(0.0, f64::max);
    (y5, e)
}

/// Adaptive integration from `(r0, y0)` to `r1`; `visit` sees every
/// accepted state and may stop the run by returning false.
fn integrate<F: FnMut(f64, [f64; 2]) -> bool>(
    n: usize,
    r0: f64,
    y0: [f64; 2],
    r1: f64,
    rtol: f64,
    mut visit: F,
) -> std::result::Result<(f64, [f64; 2]), String> {
    let scale = rtol / 1e-14;
    let (mut r, mut y) = (r0, y0);
    let mut h = (r1 - r0).clamp(1e-12, 1e-3);
    let mut rejects = 0usize;
    while r < r1 {
        h = h.min(r1 - r);
        let (y5, e) = dp5_step(n, r, y, h);
        let e = e / scale;
        if !(y5[0].is_finite() && y5[1].is_finite()) || e > 1.0 {
            rejects += 1;
            if rejects > 200 || h < 1e-14 * r.max(1.0) {
                return Err(format!("step failure at r = {r:.6} (h = {h:e})"));
            }
            let shrink = if e.is_finite() { (0.9 * e.powf(-0.2)).max(0.1) } else { 0.1 };
            h *= shrink;
            continue;
        }
        rejects = 0;
        // land exactly on the end point
        r = if r + h >= r1 { r1 } else { r + h };
        y = y5;
        if !visit(r, y) {
            return Ok((r, y));
        }
        let grow = if e > 0.0 { (0.9 * e.powf(-0.2)).min(5.0) } else { 5.0 };
        h *= grow;
    }
    Ok((r, y))
}

/// Integrates the profile equation from `z(0) = a` and classifies the result.
pub fn shoot(n: usize, a: f64, r_max: f64) -> Result<ProfileShot> {
    shoot_with(n, a, r_max, DEFAULT_RTOL)
}

pub fn shoot_with(n: usize, a: f64, r_max: f64, rtol: f64) -> Result<ProfileShot> {
    if n == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::invalid(format!("z(0) = {a} must be >= 0")));
    }
    if !(r_max >= 20.0) {
        return Err(Error::invalid(format!("r_max = {r_max} must be >= 20")));
    }
    let mut shot = ProfileShot {
        n,
        a,
        r_max,
        r_end: r_max,
        r: vec![0.0],
        z: vec![a],
        z_r: vec![0.0],
        class: ShotClass::MemberOfS,
        horizon: None,
        detail: String::new(),
    };
    if a == 0.0 {
        // the zero equilibrium, exactly
        let m = (r_max / SAMPLE_DR).round() as usize;
        shot.r = (0..=m).map(|k| k as f64 * SAMPLE_DR).collect();
        shot.z = vec![0.0; m + 1];
        shot.z_r = vec![0.0; m + 1];
        return Ok(shot);
    }
    let mut y = series_start(n, a, R_START);
    let mut r = R_START;
    let mut class = ShotClass::MemberOfS;
    let mut detail = String::new();
    let mut k = 1usize;
    let mut stop_r = r_max;
    'outer: while k as f64 * SAMPLE_DR <= r_max + 1e-12 {
        let target = k as f64 * SAMPLE_DR;
        let mut verdict: Option<(ShotClass, f64, f64)> = None;
        let res = integrate(n, r, y, target, rtol, |rr, yy| {
            if yy[1] > INCREASE_TOL {
                verdict = Some((ShotClass::IncreasingSomewhere, rr, yy[1]));
                return false;
            }
            if yy[1].abs() > SLOPE_BOUND {
                verdict = Some((ShotClass::DerivativeUnbounded, rr, yy[1]));
                return false;
            }
            true
        });
        match res {
            Err(msg) => {
                class = ShotClass::Escaped;
                detail = msg;
                stop_r = r;
                break 'outer;
            }
            Ok((rr, yy)) => {
                r = rr;
                y = yy;
                if let Some((c, at, p)) = verdict {
                    class = c;
                    detail = format!("z_r = {p:e} at r = {at:.4}");
                    stop_r = at;
                    shot.r.push(r);
                    shot.z.push(y[0]);
                    shot.z_r.push(y[1]);
                    break 'outer;
                }
            }
        }
        shot.r.push(target);
        shot.z.push(y[0]);
        shot.z_r.push(y[1]);
        k += 1;
    }
    shot.class = class;
    shot.r_end = stop_r;
    shot.detail = detail;
    Ok(shot)
}

/// A classification change between neighbouring grid values of `a`,
/// narrowed by bisection.
#[derive(Debug, Clone, Serialize)]
pub struct Transition {
    pub a_lo: f64,
    pub a_hi: f64,
    pub class_lo: ShotClass,
    pub class_hi: ShotClass,
    /// Where the two bracketing shots stop agreeing to `SEPARATION_TOL`.
    pub horizon: f64,
    /// The lower shot, reclassified on `[0, horizon]`.
    pub profile: ProfileShot,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub grid: Vec<(f64, ShotClass)>,
    pub transitions: Vec<Transition>,
    /// Nontrivial profiles certified up to their horizon.
    pub members: Vec<ProfileShot>,
}

impl ScanReport {
    pub fn member_count(&self) -> usize {
        self.members.len()
    }
}

/// Coarse grid `a_k = a_max k / points`, then bisection on every change of class.
pub fn scan(n: usize, a_max: f64, points: usize, r_max: f64, parallel: bool) -> Result<ScanReport> {
    if points < 2 || !(a_max > 0.0) {
        return Err(Error::invalid("scan needs a_max > 0 and at least 2 points"));
    }
    let grid: Vec<f64> = (1..=points).map(|k| a_max * k as f64 / points as f64).collect();
    let classify = |a: &f64| shoot(n, *a, r_max).map(|s| (*a, s.class));
    let classes: Vec<(f64, ShotClass)> = if parallel {
        grid.par_iter().map(classify).collect::<Result<_>>()?
    } else {
        grid.iter().map(classify).collect::<Result<_>>()?
    };
    let mut transitions = Vec::new();
    for w in classes.windows(2) {
        if w[0].1 != w[1].1 {
            transitions.push(bisect(n, w[0], w[1], r_max)?);
        }
    }
    let members = transitions
        .iter()
        .filter(|t| t.profile.class == ShotClass::MemberOfS)
        .map(|t| t.profile.clone())
        .collect();
    Ok(ScanReport {
        n,
        grid: classes,
        transitions,
        members,
    })
}

fn bisect(n: usize, lo: (f64, ShotClass), hi: (f64, ShotClass), r_max: f64) -> Result<Transition> {
    let (mut a_lo, mut a_hi) = (lo.0, hi.0);
    let (c_lo, c_hi) = (lo.1, hi.1);
    for _ in 0..200 {
        let mid = 0.5 * (a_lo + a_hi);
        if mid <= a_lo || mid >= a_hi {
            break;
        }
        let c = shoot(n, mid, r_max)?.class;
        if c == c_lo {
            a_lo = mid;
        } else if c == c_hi {
            a_hi = mid;
        } else {
            // a third class inside the bracket: keep the side matching the lower end
            a_hi = mid;
        }
    }
    let s_lo = shoot(n, a_lo, r_max)?;
    let s_hi = shoot(n, a_hi, r_max)?;
    let m = s_lo.r.len().min(s_hi.r.len());
    let mut horizon = 0.0;
    for i in 0..m {
        if (s_lo.z[i] - s_hi.z[i]).abs() > SEPARATION_TOL {
            break;
        }
        horizon = s_lo.r[i];
    }
    let profile = certify_to_horizon(s_lo, horizon);
    Ok(Transition {
        a_lo,
        a_hi,
        class_lo: c_lo,
        class_hi: c_hi,
        horizon,
        profile,
    })
}

// A shot on one side of a class change is the profile up to where the two
// sides separate; the tolerance bands are checked on that range only.
fn certify_to_horizon(mut shot: ProfileShot, horizon: f64) -> ProfileShot {
    let keep = shot.r.partition_point(|&r| r <= horizon);
    shot.r.truncate(keep);
    shot.z.truncate(keep);
    shot.z_r.truncate(keep);
    shot.horizon = Some(horizon);
    let worst_up = shot.z_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let worst_abs = shot.z_r.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
    if horizon < MIN_HORIZON {
        shot.class = ShotClass::Escaped;
        shot.detail = format!("bracketing shots separate at r = {horizon:.2} < {MIN_HORIZON}");
    } else if worst_up > INCREASE_TOL {
        shot.class = ShotClass::IncreasingSomewhere;
        shot.detail = format!("z_r reaches {worst_up:e} before r = {horizon:.2}");
    } else if worst_abs > SLOPE_BOUND {
        shot.class = ShotClass::DerivativeUnbounded;
        shot.detail = format!("|z_r| reaches {worst_abs:e} before r = {horizon:.2}");
    } else {
        shot.class = ShotClass::MemberOfS;
        shot.detail = format!("bands hold on [0, {horizon:.2}]; beyond it the branches separate");
    }
    shot
}

#[derive(Debug, Clone, Serialize)]
pub struct SignConstraint {
    pub g_min: f64,
    pub r_at_min: f64,
    pub g_at_zero: f64,
    /// `g` takes negative values somewhere.
    pub changes_sign: bool,
}

pub fn check_sign_constraint(shot: &ProfileShot) -> Result<SignConstraint> {
    if shot.class != ShotClass::MemberOfS {
        return Err(Error::invalid(format!(
            "sign constraint applies to members of S, this shot is {}",
            shot.class.as_str()
        )));
    }
    let g = shot.g();
    let (i, g_min) = g
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    Ok(SignConstraint {
        g_min,
        r_at_min: shot.r[i],
        g_at_zero: g[0],
        changes_sign: g_min < 0.0,
    })
}

/// `u(x,t) = φ(|x|/√(T-t)) - log(T-t)` from a nontrivial profile `φ`.
#[derive(Debug, Clone)]
pub struct Counterexample {
    shot: ProfileShot,
    t_blow: f64,
}

impl Counterexample {
    pub fn new(shot: ProfileShot, t_blow: f64) -> Result<Self> {
        if !shot.is_nontrivial_member() {
            return Err(Error::invalid(format!(
                "shot with a = {} ({}) is not a nontrivial member of S",
                shot.a,
                shot.class.as_str()
            )));
        }
        if !(3..=9).contains(&shot.n) {
            return Err(Error::invalid(format!("dimension {} outside 3..=9", shot.n)));
        }
        if !(t_blow > 0.0) {
            return Err(Error::invalid("blow-up time must be positive"));
        }
        Ok(Counterexample { shot, t_blow })
    }

    pub fn shot(&self) -> &ProfileShot {
        &self.shot
    }

    /// `φ(ρ)` by re-integrating from the nearest stored sample.
    pub fn phi(&self, rho: f64) -> Result<f64> {
        let s = &self.shot;
        if !(rho >= 0.0) || rho > s.trusted_to() {
            return Err(Error::Domain {
                what: "phi",
                value: rho,
                detail: format!("profile trusted on [0, {:.2}]", s.trusted_to()),
            });
        }
        if rho <= R_START {
            return Ok(series_start(s.n, s.a, rho)[0]);
        }
        let i = s.r.partition_point(|&r| r <= rho).saturating_sub(1);
        let (r0, y0) = if i == 0 {
            (R_START, series_start(s.n, s.a, R_START))
        } else {
            (s.r[i], [s.z[i], s.z_r[i]])
        };
        if rho == r0 {
            return Ok(y0[0]);
        }
        let (_, y) = integrate(s.n, r0, y0, rho, 1e-13, |_, _| true).map_err(Error::invalid)?;
        Ok(y[0])
    }

    pub fn u(&self, x_abs: f64, t: f64) -> Result<f64> {
        let tau = self.t_blow - t;
        if !(tau > 0.0) {
            return Err(Error::invalid(format!("t = {t} must precede T = {}", self.t_blow)));
        }
        Ok(self.phi(x_abs / tau.sqrt())? - tau.ln())
    }

    /// `u_t - Δu - e^u` by central differences with steps `hx`, `ht`.
    pub fn residual(&self, x_abs: f64, t: f64, hx: f64, ht: f64) -> Result<f64> {
        let n = self.shot.n as f64;
        let u = |x: f64, t: f64| self.u(x, t);
        let c = u(x_abs, t)?;
        let ut = (u(x_abs, t + ht)? - u(x_abs, t - ht)?) / (2.0 * ht);
        let (up, um) = (u(x_abs + hx, t)?, u(x_abs - hx, t)?);
        let lap = (up - 2.0 * c + um) / (hx * hx) + (n - 1.0) / x_abs * (up - um) / (2.0 * hx);
        Ok(ut - lap - c.exp())
    }

    /// `lim_{ρ→∞} φ(ρ) + 2 log ρ`, read off at the trusted edge.
    pub fn tail_constant(&self) -> f64 {
        let s = &self.shot;
        let i = s.r.len() - 1;
        s.z[i] + 2.0 * s.r[i].ln()
    }

    /// `(|x|, u(x,T) - G⁻¹(|x|²/(4|log|x|²|)))` for `u_t - Δu = e^u`, with
    /// `u(x,T) = -2 log|x| + tail constant`.
    pub fn final_profile_contrast(&self, xs: &[f64]) -> Vec<(f64, f64)> {
        let c = self.tail_constant();
        xs.iter()
            .map(|&x| {
                let x2 = x * x;
                let ours = -x2.ln() + c;
                let predicted = -(x2 / (4.0 * x2.ln().abs())).ln();
                (x, ours - predicted)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_a_fixed_point() {
        for n in 1..=4 {
            let s = shoot(n, 0.0, 40.0).unwrap();
            assert_eq!(s.class, ShotClass::MemberOfS);
            assert!(s.z.iter().all(|&z| z == 0.0));
            assert!(s.g().iter().all(|&g| g == 1.0));
        }
    }

    #[test]
    fn one_dimensional_shot_fails() {
        let s = shoot(1, 1.0, 40.0).unwrap();
        assert_ne!(s.class, ShotClass::MemberOfS, "{s:?}");
        assert_eq!(s.g()[0], 1.0);
    }

    #[test]
    fn series_matches_integration() {
        // the series start must agree with a tight integration from closer in
        let y = series_start(3, 2.0, 1e-3);
        let (_, yi) = integrate(3, 1e-7, series_start(3, 2.0, 1e-7), 1e-3, 1e-13, |_, _| true).unwrap();
        assert!((y[0] - yi[0]).abs() < 1e-10);
        assert!((y[1] - yi[1]).abs() < 1e-7);
    }

    #[test]
    fn classification_is_stable_under_tolerance() {
        for (n, a) in [(1, 2.0), (2, 0.5), (3, 1.0), (3, 7.0)] {
            let c1 = shoot_with(n, a, 40.0, 1e-10).unwrap().class;
            let c2 = shoot_with(n, a, 40.0, 5e-11).unwrap().class;
            assert_eq!(c1, c2, "n={n} a={a}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(shoot(3, -1.0, 40.0).is_err());
        assert!(shoot(3, 1.0, 10.0).is_err());
        let trivial = shoot(3, 0.0, 40.0).unwrap();
        assert!(Counterexample::new(trivial, 1.0).is_err());
    }
}
