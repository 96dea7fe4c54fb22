//! Radially nonincreasing initial data.

use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use crate::nonlin::NonlinearityFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialKind {
    /// `a (1 - (r/R)^2)_+^m`.
    Bump {
        amplitude: f64,
        #[serde(default = "one")]
        power: f64,
    },
    /// `a` on `r <= w R`, then a bump profile down to 0 at `R`.
    Plateau {
        amplitude: f64,
        width: f64,
        #[serde(default = "one")]
        power: f64,
    },
    /// `a` everywhere.
    Constant { amplitude: f64 },
    /// `a exp(-r^2 / (4 σ))`, the heat kernel shape at time `σ`.
    Gaussian { amplitude: f64, sigma: f64 },
}

fn one() -> f64 {
    1.0
}

impl InitialKind {
    pub fn amplitude(&self) -> f64 {
        match *self {
            InitialKind::Bump { amplitude, .. }
            | InitialKind::Plateau { amplitude, .. }
            | InitialKind::Constant { amplitude }
            | InitialKind::Gaussian { amplitude, .. } => amplitude,
        }
    }

    fn validate(&self) -> Result<()> {
        let a = self.amplitude();
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::invalid(format!("initial amplitude {a} must be >= 0")));
        }
        match *self {
            InitialKind::Bump { power, .. } if !(power >= 1.0) => {
                Err(Error::invalid(format!("bump power m = {power} must be >= 1")))
            }
            InitialKind::Plateau { width, power, .. } if !(width > 0.0 && width < 1.0 && power >= 1.0) => Err(
                Error::invalid(format!("plateau needs 0 < width < 1 and power >= 1 (got {width}, {power})")),
            ),
            InitialKind::Gaussian { sigma, .. } if !(sigma > 0.0) => {
                Err(Error::invalid(format!("gaussian sigma = {sigma} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, r: f64, radius: f64) -> f64 {
        match *self {
            InitialKind::Bump { amplitude, power } => {
                let z = 1.0 - (r / radius).powi(2);
                amplitude * z.max(0.0).powf(power)
            }
            InitialKind::Plateau { amplitude, width, power } => {
                let r0 = width * radius;
                if r <= r0 {
                    amplitude
                } else {
                    let z = 1.0 - ((r - r0) / (radius - r0)).powi(2);
                    amplitude * z.max(0.0).powf(power)
                }
            }
            InitialKind::Constant { amplitude } => amplitude,
            InitialKind::Gaussian { amplitude, sigma } => amplitude * (-r * r / (4.0 * sigma)).exp(),
        }
    }
}

/// Result of the sufficient test `Δu₀ + f(u₀) >= 0` for `u_t >= 0`.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneInTime {
    pub pass: bool,
    pub worst_node: usize,
    pub worst_value: f64,
    /// `Δu₀ + f(u₀)` at the origin.
    pub at_center: f64,
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub u: Vec<f64>,
    pub monotone_in_time: Option<MonotoneInTime>,
}

pub fn make_initial_data(
    kind: &InitialKind,
    grid: &RadialGrid,
    fam: &NonlinearityFamily,
    check_monotone_in_time: bool,
) -> Result<InitialData> {
    kind.validate()?;
    let u: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| kind.value(r, grid.radius()))
        .collect();
    let monotone_in_time = check_monotone_in_time.then(|| {
        let lap = grid.laplacian(&u);
        let interior = u.len() - 1;
        let vals: Vec<f64> = (0..interior).map(|j| lap[j] + fam.f(u[j].max(0.0))).collect();
        let (worst_node, worst_value) = vals
            .iter()
            .cloned()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
        MonotoneInTime {
            pass: worst_value >= 0.0,
            worst_node,
            worst_value,
            at_center: vals[0],
        }
    });
    Ok(InitialData { u, monotone_in_time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::{make_builtin, Params};
    use crate::pde::grid::Boundary;

    fn grid() -> RadialGrid {
        RadialGrid::graded(1, 1.0, 400, 6.0, Boundary::Dirichlet).unwrap()
    }

    #[test]
    fn bump_center_balance() {
        let fam = make_builtin("pure_exp", &Params::new()).unwrap();
        let d = make_initial_data(&InitialKind::Bump { amplitude: 4.0, power: 1.0 }, &grid(), &fam, true).unwrap();
        let m = d.monotone_in_time.unwrap();
        assert!((m.at_center - (-8.0 + 4f64.exp())).abs() < 1e-6);
        // near r = R the balance is -8 + e^{u} < 0: reported, not fatal
        assert!(m.at_center > 0.0 && !m.pass);
        assert!(d.u.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn small_bump_passes_everywhere() {
        let fam = make_builtin("pure_exp", &Params::new()).unwrap();
        let d = make_initial_data(&InitialKind::Bump { amplitude: 0.1, power: 1.0 }, &grid(), &fam, true).unwrap();
        let m = d.monotone_in_time.unwrap();
        // Δu₀ = -2a for n = 1
        assert!((m.at_center - (-0.2 + 0.1f64.exp())).abs() < 1e-6);
        assert!(m.pass && m.worst_value > 0.79);
    }

    #[test]
    fn constant_and_rejections() {
        let fam = make_builtin("pure_exp", &Params::new()).unwrap();
        let d = make_initial_data(&InitialKind::Constant { amplitude: 2.0 }, &grid(), &fam, false).unwrap();
        assert!(d.u.iter().all(|&v| v == 2.0));
        assert!(make_initial_data(&InitialKind::Bump { amplitude: -1.0, power: 1.0 }, &grid(), &fam, false).is_err());
    }
}
