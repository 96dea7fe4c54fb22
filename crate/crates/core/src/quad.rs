//! Quadrature primitives: Gauss-Legendre rules, adaptive bisection, and
//! composite Simpson sums over sampled data.

use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence; exact to a few ulp for n <= 64.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn g16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(c + h * x);
        }
        sum * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Adaptive Gauss-Legendre on [a, b]: a panel is accepted when the 16-point
/// value agrees with the sum over its two halves to `abs_tol` (scaled by the
/// panel's share of the interval).
pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, abs_tol: f64) -> Integral {
    const MAX_DEPTH: u32 = 40;
    let rule = GaussLegendre::g16();
    let whole = rule.integrate(&mut *f, a, b);
    let mut out = Integral {
        value: 0.0,
        error: 0.0,
        evals: 16,
    };
    let mut stack = vec![(a, b, whole, 0u32)];
    let width = (b - a).abs().max(f64::MIN_POSITIVE);
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&mut *f, lo, mid);
        let right = rule.integrate(&mut *f, mid, hi);
        out.evals += 32;
        let refined = left + right;
        let err = (refined - est).abs();
        let budget = abs_tol * ((hi - lo).abs() / width).max(1e-3);
        if err <= budget || depth >= MAX_DEPTH || !refined.is_finite() {
            out.value += refined;
            out.error += err;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    out
}

/// Composite Simpson over equally spaced samples (odd sample count; an even
/// count closes the last panel with the trapezoid rule).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let panels = if n % 2 == 1 { n - 1 } else { n - 2 };
    let mut s = 0.0;
    let mut i = 0;
    while i + 2 <= panels {
        s += values[i] + 4.0 * values[i + 1] + values[i + 2];
        i += 2;
    }
    let mut total = s * h / 3.0;
    if n.is_multiple_of(2) {
        total += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    total
}

/// Trapezoid sum over arbitrary abscissae.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let g = GaussLegendre::new(16);
        let wsum: f64 = g.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // degree 30 is within the exactness range 2n - 1
        let v = g.integrate(|x| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let mut f = |x: f64| 1.0 / (1e-4 + x * x);
        let r = adaptive(&mut f, -1.0, 1.0, 1e-12);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((r.value - exact).abs() / exact < 1e-12, "{} vs {exact}", r.value);
    }

    #[test]
    fn simpson_odd_and_even_counts() {
        let h = 0.01;
        let odd: Vec<f64> = (0..=100).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&odd, h) - 0.25).abs() < 1e-14);
        let even: Vec<f64> = (0..=101).map(|i| (i as f64 * h).cos()).collect();
        let exact = (1.01f64).sin();
        assert!((simpson(&even, h) - exact).abs() < 1e-5);
    }
}
