//! The builtin slowly varying factors.
//!
//! Every factor is coded as a function of `u = log X`, which is how all of
//! them depend on their argument. Writing `g(u) = L(e^u)`:
//! `X L'(X) = g'(u)` and `X^2 L''(X) = g''(u) - g'(u)`.

use super::{Factor, Params, SlowFactor};
use crate::error::{Error, Result};

fn reject(family: &str, constraint: impl Into<String>) -> Error {
    Error::InvalidParams {
        family: family.to_string(),
        constraint: constraint.into(),
    }
}

/// `L ≡ 1`, i.e. `f(s) = e^s`.
#[derive(Debug, Clone, Copy)]
pub struct PureExp;

impl SlowFactor for PureExp {
    fn eval_log(&self, _u: f64) -> Factor {
        Factor {
            g: 1.0,
            gu: 0.0,
            guu: 0.0,
        }
    }
    fn s_pos(&self) -> f64 {
        1.0
    }
    fn default_alpha(&self) -> f64 {
        0.9
    }
    fn is_unit(&self) -> bool {
        true
    }
}

/// `L(X) = (log X + K)^q`, i.e. `f(s) = (s + K)^q e^s`.
#[derive(Debug, Clone, Copy)]
pub struct PowerLog {
    pub q: f64,
    pub k: f64,
}

impl PowerLog {
    pub fn new(p: &Params) -> Result<Self> {
        let q = p.get_or("q", 1.0)?;
        let k = p.get_or("K", 0.0)?;
        if k < 0.0 {
            return Err(reject("power_log", format!("K = {k} must be >= 0")));
        }
        if k == 0.0 && q < 1.0 {
            return Err(reject("power_log", format!("K = 0 requires q >= 1 (got q = {q})")));
        }
        Ok(PowerLog { q, k })
    }
}

impl SlowFactor for PowerLog {
    fn eval_log(&self, u: f64) -> Factor {
        let b = u + self.k;
        if b <= 0.0 {
            return Factor {
                g: 0.0,
                gu: 0.0,
                guu: 0.0,
            };
        }
        let q = self.q;
        let g = b.powf(q);
        Factor {
            g,
            gu: q * g / b,
            guu: q * (q - 1.0) * g / (b * b),
        }
    }
    fn s_pos(&self) -> f64 {
        if self.k == 0.0 {
            std::f64::consts::E
        } else {
            1.0
        }
    }
    fn default_alpha(&self) -> f64 {
        0.9
    }
}

/// `L(X) = log^q(log X + K)`, i.e. `f(s) = [log^q(s + K)] e^s`.
#[derive(Debug, Clone, Copy)]
pub struct LogPower {
    pub q: f64,
    pub k: f64,
}

impl LogPower {
    pub fn new(p: &Params) -> Result<Self> {
        let q = p.get_or("q", 1.0)?;
        let k = p.get_or("K", 1.0)?;
        if k < 1.0 {
            return Err(reject("log_power", format!("K = {k} must be >= 1")));
        }
        if k == 1.0 && q < 1.0 {
            return Err(reject("log_power", format!("K = 1 requires q >= 1 (got q = {q})")));
        }
        Ok(LogPower { q, k })
    }
}

impl SlowFactor for LogPower {
    fn eval_log(&self, u: f64) -> Factor {
        let b = u + self.k;
        let l = if b > 0.0 { b.ln() } else { 0.0 };
        if l <= 0.0 {
            return Factor {
                g: 0.0,
                gu: 0.0,
                guu: 0.0,
            };
        }
        let q = self.q;
        let g = l.powf(q);
        let gu = q * g / (l * b);
        let guu = (q * (q - 1.0) * g / (l * l) - q * g / l) / (b * b);
        Factor { g, gu, guu }
    }
    fn s_pos(&self) -> f64 {
        if self.k == 1.0 {
            std::f64::consts::E
        } else {
            1.0
        }
    }
    fn default_alpha(&self) -> f64 {
        0.9
    }
}

/// `L(X) = exp(±(log X + 1)^ν)`, i.e. `f(s) = exp(s ± (s + 1)^ν)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpShift {
    pub nu: f64,
    pub sign: f64,
}

impl ExpShift {
    pub fn new(p: &Params) -> Result<Self> {
        let nu = p.get_or("nu", 0.25)?;
        let sign = p.get_or("sign", 1.0)?;
        if !(nu > 0.0 && nu < 0.5) {
            return Err(reject("exp_shift", format!("nu = {nu} must lie in (0, 1/2)")));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(reject("exp_shift", format!("sign = {sign} must be +1 or -1")));
        }
        Ok(ExpShift { nu, sign })
    }
}

impl SlowFactor for ExpShift {
    fn eval_log(&self, u: f64) -> Factor {
        let p = (u + 1.0).max(0.0);
        let nu = self.nu;
        let g = (self.sign * p.powf(nu)).exp();
        let l1 = self.sign * nu * p.powf(nu - 1.0);
        let l2 = self.sign * nu * (nu - 1.0) * p.powf(nu - 2.0);
        Factor {
            g,
            gu: g * l1,
            guu: g * (l1 * l1 + l2),
        }
    }
    fn s_pos(&self) -> f64 {
        1.0
    }
    fn default_alpha(&self) -> f64 {
        // |θ| ~ ν log^{ν-1} X, so the admissible exponents are α < 1 - ν.
        0.5 * (0.5 + 1.0 - self.nu)
    }
}

/// `L(X) = (log X + 1)^{sin(log(log X + 1))}`.
#[derive(Debug, Clone, Copy)]
pub struct OscillatingSinLog;

impl SlowFactor for OscillatingSinLog {
    fn eval_log(&self, u: f64) -> Factor {
        let p = (u + 1.0).max(f64::MIN_POSITIVE);
        let v = p.ln();
        let (s, c) = v.sin_cos();
        let ell = v * s;
        let l1 = (s + v * c) / p;
        let l2 = (2.0 * c - v * s - s - v * c) / (p * p);
        let g = ell.exp();
        Factor {
            g,
            gu: g * l1,
            guu: g * (l1 * l1 + l2),
        }
    }
    fn s_pos(&self) -> f64 {
        1.0
    }
    fn default_alpha(&self) -> f64 {
        0.9
    }
}

/// `L(X) = exp[(log X + 1)^ν cos((log X + 1)^γ)]`.
#[derive(Debug, Clone, Copy)]
pub struct OscillatingCosPower {
    pub nu: f64,
    pub gamma: f64,
}

impl OscillatingCosPower {
    pub fn new(p: &Params) -> Result<Self> {
        let nu = p.get_or("nu", 0.2)?;
        let gamma = p.get_or("gamma", 0.2)?;
        if !(nu > 0.0 && gamma > 0.0) {
            return Err(reject(
                "oscillating_cos_power",
                format!("nu = {nu} and gamma = {gamma} must be positive"),
            ));
        }
        if nu + gamma >= 0.5 {
            return Err(reject(
                "oscillating_cos_power",
                format!("nu + gamma = {} must be < 1/2", nu + gamma),
            ));
        }
        Ok(OscillatingCosPower { nu, gamma })
    }
}

impl SlowFactor for OscillatingCosPower {
    fn eval_log(&self, u: f64) -> Factor {
        let p = (u + 1.0).max(f64::MIN_POSITIVE);
        let (nu, ga) = (self.nu, self.gamma);
        let pg = p.powf(ga);
        let (s, c) = pg.sin_cos();
        let pn = p.powf(nu);
        let ell = pn * c;
        let l1 = nu * pn / p * c - ga * pn * pg / p * s;
        let l2 = nu * (nu - 1.0) * pn / (p * p) * c
            - nu * ga * pn * pg / (p * p) * s
            - ga * (nu + ga - 1.0) * pn * pg / (p * p) * s
            - ga * ga * pn * pg * pg / (p * p) * c;
        let g = ell.exp();
        Factor {
            g,
            gu: g * l1,
            guu: g * (l1 * l1 + l2),
        }
    }
    fn s_pos(&self) -> f64 {
        1.0
    }
    fn default_alpha(&self) -> f64 {
        0.5 * (0.5 + 1.0 - self.nu - self.gamma)
    }
}

/// `L(X) = 1 + a sin((log X + 1)^ν)`.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeSin {
    pub nu: f64,
    pub a: f64,
}

impl AmplitudeSin {
    pub fn new(p: &Params) -> Result<Self> {
        let nu = p.get_or("nu", 0.45)?;
        let a = p.get_or("a", 0.5)?;
        if !(nu > 0.0 && nu < 0.5) {
            return Err(reject("amplitude_sin", format!("nu = {nu} must lie in (0, 1/2)")));
        }
        if a.abs() >= 1.0 {
            return Err(reject("amplitude_sin", format!("|a| = {} must be < 1", a.abs())));
        }
        Ok(AmplitudeSin { nu, a })
    }
}

impl SlowFactor for AmplitudeSin {
    fn eval_log(&self, u: f64) -> Factor {
        let p = (u + 1.0).max(f64::MIN_POSITIVE);
        let nu = self.nu;
        let pn = p.powf(nu);
        let (s, c) = pn.sin_cos();
        let g = 1.0 + self.a * s;
        let gu = self.a * nu * pn / p * c;
        let guu = self.a * (nu * (nu - 1.0) * pn / (p * p) * c - nu * nu * pn * pn / (p * p) * s);
        Factor { g, gu, guu }
    }
    fn s_pos(&self) -> f64 {
        1.0
    }
    fn default_alpha(&self) -> f64 {
        0.5 * (0.5 + 1.0 - self.nu)
    }
}
