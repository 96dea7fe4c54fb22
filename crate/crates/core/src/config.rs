//! Experiment configuration: one TOML file fully determines a run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlin::{FamilyRegistry, NonlinearityFamily, Params};
use crate::pde::{Boundary, InitialKind, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: Params,
}

impl FamilySpec {
    pub fn build(&self) -> Result<NonlinearityFamily> {
        FamilyRegistry::global()
            .make(&self.name, &self.params)
            .map_err(|e| match e {
                Error::UnknownFamily(..) => Error::config("family.name", e.to_string()),
                other => Error::config("family.params", other.to_string()),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub n: usize,
    #[serde(default = "unit")]
    pub radius: f64,
    #[serde(default = "dirichlet")]
    pub boundary: Boundary,
}

fn unit() -> f64 {
    1.0
}

fn dirichlet() -> Boundary {
    Boundary::Dirichlet
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    /// Number of radial cells `J`.
    pub cells: usize,
    /// Grading parameter `β` of the sinh map.
    pub grading: f64,
    pub safety: f64,
    pub dt_max: f64,
    /// Cap on `u(0,t)`; by default `G⁻¹(10⁻¹⁰ G(‖u₀‖_∞))`.
    pub u_cap: Option<f64>,
    pub diffusion: bool,
    pub reaction: bool,
    /// First similarity checkpoint.
    pub s_first: f64,
    /// Quadrature tolerance of the resolvent.
    pub tol: f64,
    /// Constant `A₀` in `H`.
    pub a0: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverSpec {
            cells: 800,
            grading: 8.0,
            safety: o.safety,
            dt_max: o.dt_max,
            u_cap: None,
            diffusion: true,
            reaction: true,
            s_first: 4.0,
            tol: crate::ode_asym::DEFAULT_TOL,
            a0: crate::ode_asym::DEFAULT_A0,
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            safety: self.safety,
            dt_max: self.dt_max,
            diffusion: self.diffusion,
            reaction: self.reaction,
            ..SolverOptions::default()
        }
    }
}

/// Verifications a run may carry out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Slow variation and resolvent asymptotics of the family.
    Certify,
    /// The sufficient condition for `u_t >= 0` on the initial data.
    MonotoneInTime,
    /// `T_est` above the ODE bound and bounded type-I residual.
    Blowup,
    /// Frame invariants `w(0) >= 0`, `w <= M̂`.
    Frames,
    Energy,
    Defect,
    Profiles,
}

impl Check {
    pub fn needs_simulation(&self) -> bool {
        !matches!(self, Check::Certify)
    }
}

/// Checks run when a config lists none.
pub fn default_checks() -> Vec<Check> {
    vec![
        Check::Blowup,
        Check::Frames,
        Check::Energy,
        Check::Defect,
        Check::Profiles,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub domain: Option<DomainSpec>,
    pub initial: Option<InitialKind>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Recorded with every artifact; no stage currently draws random numbers.
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = match e.span() {
                Some(span) => {
                    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}")
                }
                None => "<document>".to_string(),
            };
            Error::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn needs_simulation(&self) -> bool {
        self.checks.iter().any(|c| c.needs_simulation())
    }

    pub fn validate(&self) -> Result<()> {
        self.family.build()?;
        let s = &self.solver;
        if !(400..=4000).contains(&s.cells) && s.diffusion {
            return Err(Error::config("solver.cells", format!("{} outside [400, 4000]", s.cells)));
        }
        if s.cells < 8 {
            return Err(Error::config("solver.cells", format!("{} is below 8", s.cells)));
        }
        if !(s.grading >= 0.0 && s.grading <= 20.0) {
            return Err(Error::config("solver.grading", format!("{} outside [0, 20]", s.grading)));
        }
        if !(s.tol > 0.0 && s.tol < 1e-3) {
            return Err(Error::config("solver.tol", format!("{} outside (0, 1e-3)", s.tol)));
        }
        if !(s.s_first > 0.0 && s.s_first.is_finite()) {
            return Err(Error::config("solver.s_first", "must be positive"));
        }
        if let Some(c) = s.u_cap {
            if !c.is_finite() {
                return Err(Error::config("solver.u_cap", "must be finite"));
            }
        }
        s.options().validate()?;
        if self.needs_simulation() {
            let d = self
                .domain
                .as_ref()
                .ok_or_else(|| Error::config("domain", "required when simulation checks are enabled"))?;
            if !(1..=9).contains(&d.n) {
                return Err(Error::config("domain.n", format!("{} outside [1, 9]", d.n)));
            }
            if !(d.radius > 0.0 && d.radius.is_finite()) {
                return Err(Error::config("domain.radius", "must be positive"));
            }
            if self.initial.is_none() {
                return Err(Error::config("initial", "required when simulation checks are enabled"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUN: &str = r#"
        seed = 7
        checks = ["blowup", "energy"]
        [family]
        name = "power_log"
        params = { q = 1.0 }
        [domain]
        n = 1
        [initial]
        kind = "bump"
        amplitude = 3.0
        [solver]
        cells = 400
    "#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml(RUN).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.solver.cells, 400);
        assert_eq!(c.solver.grading, 8.0);
        assert_eq!(c.domain.as_ref().unwrap().boundary, Boundary::Dirichlet);
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = RUN.replace("power_log", "powr_log");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "family.name"), "{e}");
        assert_eq!(e.exit_code(), 2);

        let bad = RUN.replace("cells = 400", "cells = 10");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(e.to_string().contains("solver.cells"));

        let bad = RUN.replace("cells = 400", "cels = 400");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");

        let certify_only = "checks = [\"certify\"]\n[family]\nname = \"pure_exp\"\n";
        assert!(ExperimentConfig::from_toml(certify_only).is_ok());
        let missing = "checks = [\"energy\"]\n[family]\nname = \"pure_exp\"\n";
        assert!(ExperimentConfig::from_toml(missing).unwrap_err().to_string().contains("domain"));
    }
}
