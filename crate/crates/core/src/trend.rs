//! Trend verdicts on short sequences and a small least-squares helper.
//!
//! The asymptotic statements being checked are limits, so they are judged
//! on finite samples as trends plus a threshold at the last point.

use serde::Serialize;

/// Strictly decreasing.
pub fn decreasing(seq: &[f64]) -> bool {
    seq.windows(2).all(|w| w[1] < w[0])
}

/// Every value within `abs` of zero: a limit of zero already attained.
pub fn vanished(seq: &[f64], abs: f64) -> bool {
    !seq.is_empty() && seq.iter().all(|v| v.abs() <= abs)
}

/// Nonincreasing up to `rel` of the previous value (plus `abs`).
pub fn non_growing(seq: &[f64], rel: f64, abs: f64) -> bool {
    seq.windows(2)
        .all(|w| w[1] <= w[0] + rel * w[0].abs() + abs)
}

/// `|seq - target|` strictly decreasing.
pub fn approaching(seq: &[f64], target: f64) -> bool {
    let d: Vec<f64> = seq.iter().map(|v| (v - target).abs()).collect();
    decreasing(&d)
}

/// Block-envelope test for sequences that may oscillate under a decaying
/// envelope. The tail `seq[from..]` is cut into two blocks; the maximum of
/// each block may exceed the maximum of the block before it (the first
/// reference block being `seq[..from]`) by at most `slack` relatively.
pub fn envelope_nonincreasing(seq: &[f64], from: usize, slack: f64) -> bool {
    let n = seq.len();
    if from == 0 || from >= n {
        return false;
    }
    let bmax = |s: &[f64]| s.iter().cloned().fold(0.0_f64, f64::max);
    let mid = from + (n - from) / 2;
    let blocks = if mid == from {
        vec![bmax(&seq[..from]), bmax(&seq[from..])]
    } else {
        vec![bmax(&seq[..from]), bmax(&seq[from..mid]), bmax(&seq[mid..])]
    };
    blocks.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0])
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual.
    pub max_residual: f64,
    /// Standard error of the intercept.
    pub intercept_se: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut max_residual: f64 = 0.0;
    let mut ss = 0.0;
    for (a, b) in x.iter().zip(y) {
        let r = b - (intercept + slope * a);
        max_residual = max_residual.max(r.abs());
        ss += r * r;
    }
    let sigma2 = if n > 2 { ss / (nf - 2.0) } else { 0.0 };
    let intercept_se = (sigma2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    Some(LineFit {
        slope,
        intercept,
        max_residual,
        intercept_se,
    })
}

/// Kahan-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new(start: f64) -> Self {
        KahanSum { sum: start, carry: 0.0 }
    }

    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_accepts_decay_and_rejects_growth() {
        let decay: Vec<f64> = (1..=40).map(|k| 1.0 / k as f64).collect();
        assert!(envelope_nonincreasing(&decay, 20, 0.05));
        let osc: Vec<f64> = (1..=200)
            .map(|k| (k as f64).sqrt().recip() * (k as f64 * 0.7).sin().abs())
            .collect();
        assert!(envelope_nonincreasing(&osc, 100, 0.05));
        let grow: Vec<f64> = (1..=40).map(|k| (k as f64).powf(0.35)).collect();
        assert!(!envelope_nonincreasing(&grow, 20, 0.05));
        assert!(envelope_nonincreasing(&[0.0; 10], 5, 0.05));
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-14 && (f.intercept - 0.5).abs() < 1e-14);
    }

    #[test]
    fn kahan_beats_naive_sum() {
        let mut k = KahanSum::new(1.0);
        let mut naive = 1.0;
        for _ in 0..1_000_000 {
            k.add(1e-16);
            naive += 1e-16;
        }
        assert!((k.value() - (1.0 + 1e-10)).abs() < 1e-15);
        assert_eq!(naive, 1.0);
    }

    #[test]
    fn trend_helpers() {
        assert!(decreasing(&[3.0, 2.0, 1.0]));
        assert!(!decreasing(&[3.0, 3.0]));
        assert!(vanished(&[0.0, 1e-16], 1e-14) && !vanished(&[0.0, 1e-3], 1e-14) && !vanished(&[], 1.0));
        assert!(approaching(&[0.5, 1.2, 1.9], 2.0));
        assert!(non_growing(&[1.0, 1.0005, 0.9], 1e-3, 0.0));
    }
}
