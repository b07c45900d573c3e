use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, pow, sqrt};
use crate::{Error, Result};

const PI: f64 = core::f64::consts::PI;

/// Nodes and weights of `n`-point Gauss–Hermite quadrature for the weight
/// `e^(−x²)`, nodes ascending.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 100 {
        return Err(Error::InvalidInput("quadrature order must be in 1..=100".into()));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        // standard asymptotic starting guesses, largest root first
        z = match i {
            0 => sqrt(2.0 * nf + 1.0) - 1.85575 * pow(2.0 * nf + 1.0, -0.16667),
            1 => z - 1.14 * pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // orthonormal recurrence
            let mut p1 = pow(PI, -0.25);
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * sqrt(2.0 / jf) * p2 - sqrt((jf - 1.0) / jf) * p3;
            }
            pp = sqrt(2.0 * nf) * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if abs(z - z1) <= 1e-15 * abs(z).max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    x.reverse();
    w.reverse();
    Ok((x, w))
}

/// Offsets `x_k` and weights `w_k` with `Σ w_k f(x_k) ≈ E[f(X)]`,
/// `X ~ N(0, σ²)`. For `σ = 0` this is the single node `(0, 1)`.
pub fn normal_nodes(sigma: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput("σ must be finite and ≥ 0".into()));
    }
    if sigma == 0.0 {
        return Ok(vec![(0.0, 1.0)]);
    }
    let (x, w) = gauss_hermite(n)?;
    let s = sqrt(PI);
    Ok(x
        .iter()
        .zip(&w)
        .map(|(x, w)| (sqrt(2.0) * sigma * x, w / s))
        .collect())
}
