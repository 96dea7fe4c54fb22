//! Similarity variables `y = r/√(T-t)`, `s = -log(T-t)` and the quantities
//! measured in them: weighted norms, the perturbed energy, the defect `H`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::ode_asym::OdeSolution;
use crate::pde::{RadialGrid, Snapshot};
use crate::quad;
use crate::trend;

/// Weighted integrals stop here; `e^{-36}` is below double precision.
pub const Y_TRUNC: f64 = 12.0;
/// Uniform spacing of the frame grid.
pub const FRAME_STEP: f64 = 0.01;
/// Nodes required inside `y <= 1`.
pub const MIN_CORE_NODES: usize = 8;
/// Slack on `w(0) >= 0`; the center is a grid node so only rounding enters.
pub const CENTER_TOL: f64 = 1e-6;

/// Surface measure of the unit sphere in `ℝⁿ`, `2π^{n/2}/Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(n/2) by the half-integer recursion
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut k = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while k < n as f64 / 2.0 {
        gamma *= k;
        k += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma
}

pub fn rho(y: f64) -> f64 {
    (-y * y / 4.0).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct SimilarityFrame {
    pub s: f64,
    pub t: f64,
    pub n: usize,
    /// `ψ₁(s)`, subtracted from `u` to form `w`.
    pub psi1: f64,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub w_y: Vec<f64>,
    pub y_max: f64,
    /// Grid nodes inside `y <= 1`.
    pub core_nodes: usize,
}

impl SimilarityFrame {
    /// Builds a frame directly from samples on a uniform `y` grid starting at 0.
    pub fn from_samples(s: f64, n: usize, psi1: f64, y: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if y.len() < 3 || y.len() != w.len() || y[0] != 0.0 {
            return Err(Error::invalid("frame samples need >= 3 points on a grid starting at y = 0"));
        }
        let h = y[1] - y[0];
        let w_y = derivative(&w, h);
        Ok(SimilarityFrame {
            s,
            t: f64::NAN,
            n,
            psi1,
            y_max: *y.last().unwrap_or(&0.0),
            y,
            w,
            w_y,
            core_nodes: usize::MAX,
        })
    }

    pub fn step(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    pub fn center(&self) -> f64 {
        self.w[0]
    }

    pub fn sup_within(&self, y_lim: f64) -> f64 {
        self.y
            .iter()
            .zip(&self.w)
            .filter(|(y, _)| **y <= y_lim)
            .fold(0.0, |m, (_, w)| m.max(w.abs()))
    }

    /// `∫ F(y, w, w_y) ρ dy` over `ℝⁿ` up to `y_max`.
    pub fn integrate<F: Fn(f64, f64, f64) -> f64>(&self, f: F) -> f64 {
        let omega = sphere_area(self.n);
        let vals: Vec<f64> = (0..self.y.len())
            .map(|i| {
                let y = self.y[i];
                f(y, self.w[i], self.w_y[i]) * rho(y) * y.powi(self.n as i32 - 1)
            })
            .collect();
        omega * quad::simpson(&vals, self.step())
    }
}

// centered in the interior; w_y(0) = 0 by symmetry
fn derivative(w: &[f64], h: f64) -> Vec<f64> {
    let m = w.len();
    (0..m)
        .map(|i| match i {
            0 => 0.0,
            i if i == m - 1 => (3.0 * w[i] - 4.0 * w[i - 1] + w[i - 2]) / (2.0 * h),
            i => (w[i + 1] - w[i - 1]) / (2.0 * h),
        })
        .collect()
}

/// Samples `u(y√(T-t), t) - ψ₁(s)` on a uniform `y` grid.
pub fn to_frame(snap: &Snapshot, grid: &RadialGrid, ode: &OdeSolution) -> Result<SimilarityFrame> {
    let t_blow = ode.blowup_time();
    let tau = t_blow - snap.t;
    if !(tau > 0.0) {
        return Err(Error::invalid(format!(
            "snapshot at t = {} is not before T_est = {t_blow}",
            snap.t
        )));
    }
    let s = -tau.ln();
    let scale = tau.sqrt();
    let core_nodes = grid.count_within(scale);
    if core_nodes < MIN_CORE_NODES {
        // node count near the origin scales like J with the grading fixed
        let need = (grid.cells() as f64 * MIN_CORE_NODES as f64 / core_nodes.max(1) as f64).ceil();
        return Err(Error::UnderResolved {
            s,
            nodes: core_nodes,
            hint: format!("raise J to about {need} or stop earlier"),
        });
    }
    let psi1 = ode.psi1(s)?;
    let interp = Pchip::new(grid.nodes(), &snap.u)?;
    let y_max = (grid.radius() / scale).min(Y_TRUNC);
    let count = (y_max / FRAME_STEP).ceil().max(2.0) as usize;
    let h = y_max / count as f64;
    let y: Vec<f64> = (0..=count).map(|i| i as f64 * h).collect();
    let w: Vec<f64> = y.iter().map(|&yy| interp.eval(yy * scale) - psi1).collect();
    let w_y = derivative(&w, h);
    Ok(SimilarityFrame {
        s,
        t: snap.t,
        n: grid.dim(),
        psi1,
        y,
        w,
        w_y,
        y_max,
        core_nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L2rho,
    H1rho,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightedNorm {
    /// Squared norm.
    pub value: f64,
    /// Bound on the part beyond `y_max`, assuming `|w|, |w_y|` stay at their edge size.
    pub tail_bound: f64,
}

pub fn weighted_norm(frame: &SimilarityFrame, which: NormKind) -> WeightedNorm {
    let value = match which {
        NormKind::L2rho => frame.integrate(|_, w, _| w * w),
        NormKind::H1rho => frame.integrate(|_, w, wy| w * w + wy * wy),
    };
    let edge = frame.w.last().map(|w| w * w).unwrap_or(0.0)
        + match which {
            NormKind::L2rho => 0.0,
            NormKind::H1rho => frame.w_y.last().map(|w| w * w).unwrap_or(0.0),
        };
    let ym = frame.y_max;
    // ∫_{Y}^∞ y^{n-1} e^{-y²/4} <= e^{-Y²/8} ∫ y^{n-1} e^{-y²/8}
    let poly = sphere_area(frame.n) * 0.5 * 8f64.powf(frame.n as f64 / 2.0) * gamma_half(frame.n);
    WeightedNorm {
        value,
        tail_bound: (-ym * ym / 8.0).exp() * poly * edge.max(1.0),
    }
}

fn gamma_half(n: usize) -> f64 {
    // Γ(n/2) = 2π^{n/2} / |S^{n-1}|
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / sphere_area(n)
}

/// `E[w] = ∫ (½|w_y|² + w - e^w) ρ`.
pub fn energy_e(frame: &SimilarityFrame) -> f64 {
    frame.integrate(|_, w, wy| 0.5 * wy * wy + w - w.exp())
}

/// `(E, E + C1 s^{-γ})`.
pub fn energy(frame: &SimilarityFrame, c1: f64, gamma: f64) -> (f64, f64) {
    let e = energy_e(frame);
    (e, e + c1 * frame.s.powf(-gamma))
}

/// C1 candidates tried in order.
pub const C1_LADDER: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
/// Allowed increase of `𝓔` between frames, relative to `|𝓔|`.
pub const ENERGY_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrace {
    pub s_values: Vec<f64>,
    pub e_values: Vec<f64>,
    pub curly_e_values: Vec<f64>,
    pub l2rho: Vec<f64>,
    pub h1rho: Vec<f64>,
    pub gamma: f64,
    /// Smallest passing constant, or the last one tried.
    pub c1: f64,
    pub nonincreasing: bool,
    pub bounded_below: bool,
    /// `s ‖w‖_{L²ρ}`, expected to stay away from 0 late on.
    pub lower_decay: Vec<f64>,
}

fn curly(e: &[f64], s: &[f64], c1: f64, gamma: f64) -> Vec<f64> {
    e.iter().zip(s).map(|(e, s)| e + c1 * s.powf(-gamma)).collect()
}

fn dissipates(ce: &[f64]) -> bool {
    ce.windows(2).all(|p| p[1] <= p[0] + ENERGY_SLACK * p[0].abs())
}

pub fn energy_trace(frames: &[SimilarityFrame], alpha: f64) -> Result<EnergyTrace> {
    if frames.len() < 2 {
        return Err(Error::invalid("energy trace needs at least two frames"));
    }
    if frames.windows(2).any(|p| !(p[1].s > p[0].s)) {
        return Err(Error::invalid("frames must have increasing s"));
    }
    let gamma = alpha - 0.5;
    let s: Vec<f64> = frames.iter().map(|f| f.s).collect();
    let e: Vec<f64> = frames.iter().map(energy_e).collect();
    let l2: Vec<f64> = frames.iter().map(|f| weighted_norm(f, NormKind::L2rho).value).collect();
    let h1: Vec<f64> = frames.iter().map(|f| weighted_norm(f, NormKind::H1rho).value).collect();
    let mut c1 = C1_LADDER[C1_LADDER.len() - 1];
    let mut nonincreasing = false;
    for &c in &C1_LADDER {
        if dissipates(&curly(&e, &s, c, gamma)) {
            c1 = c;
            nonincreasing = true;
            break;
        }
    }
    let ce = curly(&e, &s, c1, gamma);
    Ok(EnergyTrace {
        bounded_below: bounded_below(&s, &ce),
        lower_decay: s.iter().zip(&l2).map(|(s, n)| s * n.sqrt()).collect(),
        s_values: s,
        e_values: e,
        curly_e_values: ce,
        l2rho: l2,
        h1rho: h1,
        gamma,
        c1,
        nonincreasing,
    })
}

// finite, and the fall over the later half of the s-range no larger than
// over the earlier half (no drift toward -∞)
fn bounded_below(s: &[f64], ce: &[f64]) -> bool {
    if ce.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let mid = 0.5 * (s[0] + s[s.len() - 1]);
    let k = s.partition_point(|&v| v <= mid).clamp(1, s.len() - 1);
    let early = ce[0] - ce[k - 1].min(ce[k]);
    let late = ce[k] - ce[ce.len() - 1];
    late <= early.max(0.0) + ENERGY_SLACK * ce[k].abs()
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectFrame {
    pub s: f64,
    pub max_abs: f64,
    /// `max|H| s^α / log s`.
    pub scaled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub alpha: f64,
    pub frames: Vec<DefectFrame>,
    pub non_growing: bool,
    pub bounded: bool,
    pub pass: bool,
}

/// Region of `y` where the defect is sampled.
pub const DEFECT_Y: f64 = 4.0;

/// `H(s,y) = (h-1)(e^w-1) + h e^w (L(e^{ψ₁+w})/L(e^{ψ₁}) - 1)`.
pub fn defect_at(ode: &OdeSolution, s: f64, psi1: f64, w: f64) -> Result<f64> {
    let fam = ode.table().family();
    let h = ode.h(s)?;
    let ratio = (fam.log_l(psi1 + w) - fam.log_l(psi1)).exp_m1();
    Ok((h - 1.0) * w.exp_m1() + h * w.exp() * ratio)
}

pub fn defect_decay(frames: &[SimilarityFrame], ode: &OdeSolution, alpha: f64) -> Result<DefectReport> {
    if frames.len() < 4 {
        return Err(Error::invalid(format!("defect decay needs >= 4 frames, got {}", frames.len())));
    }
    let mut out = Vec::with_capacity(frames.len());
    for fr in frames {
        let mut m = 0.0_f64;
        for (y, w) in fr.y.iter().zip(&fr.w) {
            if *y > DEFECT_Y {
                break;
            }
            m = m.max(defect_at(ode, fr.s, fr.psi1, *w)?.abs());
        }
        out.push(DefectFrame {
            s: fr.s,
            max_abs: m,
            scaled: m * fr.s.powf(alpha) / fr.s.ln(),
        });
    }
    let maxes: Vec<f64> = out.iter().map(|d| d.max_abs).collect();
    let non_growing = trend::non_growing(&maxes, 1e-3, 1e-14);
    let bounded = out.iter().all(|d| d.scaled.is_finite());
    Ok(DefectReport {
        alpha,
        pass: non_growing && bounded,
        frames: out,
        non_growing,
        bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat(n: usize, f: impl Fn(f64) -> f64) -> SimilarityFrame {
        let y: Vec<f64> = (0..=1200).map(|i| i as f64 * 0.01).collect();
        let w = y.iter().map(|&v| f(v)).collect();
        SimilarityFrame::from_samples(4.0, n, 0.0, y, w).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn gaussian_moments() {
        let one = weighted_norm(&flat(1, |_| 1.0), NormKind::L2rho).value;
        assert!((one - 2.0 * PI.sqrt()).abs() < 1e-10, "{one}");
        let sq = weighted_norm(&flat(1, |y| y * y), NormKind::L2rho).value;
        assert!((sq - 24.0 * PI.sqrt()).abs() < 1e-8, "{sq}");
        assert_eq!(weighted_norm(&flat(2, |_| 0.0), NormKind::H1rho).value, 0.0);
        // n = 3: ∫ e^{-y²/4} d³y = (4π)^{3/2}
        let three = weighted_norm(&flat(3, |_| 1.0), NormKind::L2rho).value;
        assert!((three - (4.0 * PI).powf(1.5)).abs() < 1e-8);
    }

    #[test]
    fn h1_splits_into_parts() {
        let fr = flat(2, |y| (-y).exp() * (1.0 + y));
        let l2 = weighted_norm(&fr, NormKind::L2rho).value;
        let h1 = weighted_norm(&fr, NormKind::H1rho).value;
        let grad = fr.integrate(|_, _, wy| wy * wy);
        assert!((h1 - l2 - grad).abs() <= 1e-14 * h1);
    }

    #[test]
    fn energy_of_zero() {
        let (e, ce) = energy(&flat(1, |_| 0.0), 1.0, 0.4);
        assert!((e + 2.0 * PI.sqrt()).abs() < 1e-10);
        assert!((ce - e - 4f64.powf(-0.4)).abs() < 1e-14);
        assert!((4f64.powf(-0.4) - 0.5743).abs() < 1e-4);
    }

    #[test]
    fn energy_ladder_escalates() {
        // w relaxing to 0 raises E; C1 = 1 cannot absorb the first step
        let frames: Vec<SimilarityFrame> = (0..5)
            .map(|k| {
                let mut f = flat(1, |_| 0.0);
                f.s = 4.0 + k as f64;
                f.w.iter_mut().for_each(|w| *w = -0.3 + 0.075 * k as f64);
                f
            })
            .collect();
        let tr = energy_trace(&frames, 0.9).unwrap();
        assert!(tr.nonincreasing && tr.c1 > 1.0, "{tr:?}");
        assert!(tr.bounded_below);
    }
}
