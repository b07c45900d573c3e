use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Natural cubic spline through equally spaced samples.
#[derive(Debug, Clone)]
pub(crate) struct UniformSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl UniformSpline {
    pub(crate) fn new(x0: f64, h: f64, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if n < 3 || !(h > 0.0) {
            return Err(Error::InvalidInput("spline needs ≥ 3 samples and h > 0".into()));
        }
        // second derivatives: tridiagonal (1, 4, 1) system, Thomas algorithm
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
            let denom = 4.0 - c[i - 1];
            c[i] = 1.0 / denom;
            d[i] = (rhs - d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self { x0, h, y, m })
    }

    pub(crate) fn eval(&self, x: f64) -> Result<f64> {
        let n = self.y.len();
        let u = (x - self.x0) / self.h;
        if !(u >= -1e-9 && u <= (n - 1) as f64 + 1e-9) {
            return Err(Error::Domain("spline evaluated outside its table".into()));
        }
        let i = (u.max(0.0) as usize).min(n - 2);
        let t = u - i as f64;
        let s = 1.0 - t;
        let h2 = self.h * self.h / 6.0;
        Ok(s * self.y[i]
            + t * self.y[i + 1]
            + h2 * ((s * s * s - s) * self.m[i] + (t * t * t - t) * self.m[i + 1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_nodes_and_smooth_functions() {
        let h = 0.05;
        let y: Vec<f64> = (0..201).map(|k| (k as f64 * h).sin()).collect();
        let s = UniformSpline::new(0.0, h, y.clone()).unwrap();
        for k in 0..201 {
            assert!((s.eval(k as f64 * h).unwrap() - y[k]).abs() < 1e-14);
        }
        for k in 20..1800 {
            let x = k as f64 * 0.00537;
            assert!((s.eval(x).unwrap() - x.sin()).abs() < 1e-6);
        }
        assert!(s.eval(-1.0).is_err());
    }
}
