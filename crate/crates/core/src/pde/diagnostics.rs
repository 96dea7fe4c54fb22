//! Late-time diagnostics of a blow-up trajectory.

use serde::Serialize;

use super::solver::{Snapshot, Trajectory};
use crate::error::Result;
use crate::ode_asym::ResolventTable;

#[derive(Debug, Clone, Serialize)]
pub struct DecadeMax {
    /// Decade `[10^-(k+1), 10^-k]` of `T_est - t`, labelled by `k`.
    pub decade: i32,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    /// `(s, u(0,t) - G⁻¹(T_est - t))` per recorded step.
    pub type_one: Vec<(f64, f64)>,
    /// Empirical type-I constant: the largest residual after the first checkpoint.
    pub m_hat: f64,
    pub type_one_decades: Vec<DecadeMax>,
    /// No growth of the residual over the last two decades of `T_est - t`.
    pub type_one_bounded: bool,
    /// `(s, ‖u_r‖_∞ √(T_est - t))` per snapshot.
    pub gradient: Vec<(f64, f64)>,
    /// `(s, min -u_r 2(A + log f(u))/(r f(u)))` over `u >= u(0,t) - 1`.
    pub gradient_lower: Vec<(f64, f64)>,
    pub a_hat: f64,
}

pub fn diagnostics(traj: &Trajectory, table: &ResolventTable, t_est: f64) -> Result<DiagnosticsReport> {
    let mut type_one = Vec::new();
    for s in &traj.samples {
        let tau = t_est - s.t;
        if tau > 0.0 {
            type_one.push((-tau.ln(), s.u0 - table.g_inv(tau)?));
        }
    }
    let s_first = -(t_est - traj.t_start).ln();
    let m_hat = type_one
        .iter()
        .filter(|p| p.0 >= s_first + 1.0)
        .fold(0.0_f64, |m, p| m.max(p.1.abs()));
    let ln10 = std::f64::consts::LN_10;
    let mut type_one_decades: Vec<DecadeMax> = Vec::new();
    for &(s, r) in &type_one {
        let k = (s / ln10).floor() as i32;
        match type_one_decades.last_mut() {
            Some(d) if d.decade == k => d.max_abs = d.max_abs.max(r.abs()),
            _ => type_one_decades.push(DecadeMax { decade: k, max_abs: r.abs() }),
        }
    }
    // the last decade is usually partial; compare the last two that exist
    let type_one_bounded = match type_one_decades.len() {
        0 | 1 => true,
        n => {
            let (a, b) = (&type_one_decades[n - 2], &type_one_decades[n - 1]);
            b.max_abs <= a.max_abs * 1.05 + 1e-9
        }
    };
    let grid = &traj.grid;
    let r = grid.nodes();
    let fam = table.family();
    let a_hat = table.a0();
    let mut gradient = Vec::new();
    let mut gradient_lower = Vec::new();
    let snaps: Vec<&Snapshot> = traj.snapshots.iter().chain(std::iter::once(&traj.final_snapshot)).collect();
    for snap in snaps {
        let tau = t_est - snap.t;
        if tau <= 0.0 {
            continue;
        }
        let s = -tau.ln();
        let u = &snap.u;
        let grad = r
            .windows(2)
            .zip(u.windows(2))
            .map(|(rw, uw)| ((uw[1] - uw[0]) / (rw[1] - rw[0])).abs())
            .fold(0.0, f64::max);
        gradient.push((s, grad * tau.sqrt()));
        let level = u[0] - 1.0;
        let mut worst = f64::INFINITY;
        for j in 1..r.len() - 1 {
            if u[j] < level {
                break;
            }
            let ur = (u[j + 1] - u[j - 1]) / (r[j + 1] - r[j - 1]);
            let v = u[j].max(0.0);
            let ratio = -ur * 2.0 * (a_hat + fam.log_f(v)) / (r[j] * fam.f(v));
            worst = worst.min(ratio);
        }
        if worst.is_finite() {
            gradient_lower.push((s, worst));
        }
    }
    Ok(DiagnosticsReport {
        type_one,
        m_hat,
        type_one_decades,
        type_one_bounded,
        gradient,
        gradient_lower,
        a_hat,
    })
}
