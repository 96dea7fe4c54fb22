//! Piecewise Chebyshev interpolants built lazily on unit panels.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

/// Chebyshev series on `[a, b]`, sampled at first-kind points.
#[derive(Debug, Clone)]
pub struct ChebSeries {
    a: f64,
    b: f64,
    coef: Vec<f64>,
}

impl ChebSeries {
    pub fn fit<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> Self {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let vals: Vec<f64> = (0..n)
            .map(|k| f(mid + half * (PI * (k as f64 + 0.5) / n as f64).cos()))
            .collect();
        let mut coef = vec![0.0; n];
        for (j, c) in coef.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, v) in vals.iter().enumerate() {
                s += v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
            *c = 2.0 * s / n as f64;
        }
        coef[0] *= 0.5;
        ChebSeries { a, b, coef }
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coef.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coef[0]
    }

    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }
}

#[derive(Debug)]
enum Slot {
    Series(ChebSeries),
    /// No degree passed verification; callers fall back to the exact path.
    Direct,
}

/// Lazily populated panels `[origin + k, origin + k + 1)`, each verified
/// against the exact function at off-node points before it is used.
#[derive(Debug)]
pub struct PanelCache {
    origin: f64,
    tol: f64,
    panels: RwLock<HashMap<i64, Arc<Slot>>>,
}

const DEGREES: [usize; 3] = [17, 33, 65];

impl PanelCache {
    pub fn new(origin: f64, tol: f64) -> Self {
        PanelCache {
            origin,
            tol,
            panels: RwLock::new(HashMap::new()),
        }
    }

    /// Cached value at `x`, or `None` when the panel could not be certified.
    pub fn get<F: Fn(f64) -> f64>(&self, x: f64, exact: F) -> Option<f64> {
        let k = (x - self.origin).floor() as i64;
        let slot = {
            let read = self.panels.read().unwrap_or_else(|e| e.into_inner());
            read.get(&k).cloned()
        };
        let slot = match slot {
            Some(s) => s,
            None => {
                let built = Arc::new(self.build(k, &exact));
                let mut w = self.panels.write().unwrap_or_else(|e| e.into_inner());
                w.entry(k).or_insert(built).clone()
            }
        };
        match &*slot {
            Slot::Series(c) => Some(c.eval(x)),
            Slot::Direct => None,
        }
    }

    pub fn len(&self) -> usize {
        self.panels.read().map(|p| p.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn build<F: Fn(f64) -> f64>(&self, k: i64, exact: &F) -> Slot {
        let a = self.origin + k as f64;
        let b = a + 1.0;
        for n in DEGREES {
            let c = ChebSeries::fit(exact, a, b, n);
            let ok = (0..7).all(|i| {
                let x = a + (i as f64 + 0.37) / 7.0;
                let e = exact(x);
                (c.eval(x) - e).abs() <= self.tol * e.abs().max(1.0)
            });
            if ok {
                return Slot::Series(c);
            }
        }
        Slot::Direct
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_reproduces_log() {
        let c = ChebSeries::fit(f64::ln, 1.0, 2.0, 17);
        for i in 0..50 {
            let x = 1.0 + i as f64 / 49.0;
            assert!((c.eval(x) - x.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn cache_falls_back_when_uncertifiable() {
        let cache = PanelCache::new(0.0, 1e-13);
        // a kink cannot be certified at any degree
        assert!(cache.get(0.5, |x: f64| (x - 0.51).abs()).is_none());
        let cache = PanelCache::new(0.0, 1e-13);
        let v = cache.get(3.3, |x: f64| x.sin()).unwrap();
        assert!((v - 3.3f64.sin()).abs() < 1e-13);
        assert_eq!(cache.len(), 1);
    }
}
