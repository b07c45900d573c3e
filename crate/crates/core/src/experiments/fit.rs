//! Levenberg–Marquardt least squares for the two line shapes used by the
//! pipelines.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, exp, log, sqrt};
use crate::{Error, Result};

const MAX_ITER: usize = 500;

/// `A·e^(−t/τ) + B` with one-sigma standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub amplitude: f64,
    pub tau: f64,
    pub offset: f64,
    pub amplitude_stderr: f64,
    pub tau_stderr: f64,
    pub offset_stderr: f64,
    pub rss: f64,
}

/// `a / (1 + ((x − c)/δ)²) + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzFit {
    pub center: f64,
    pub hwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub center_stderr: f64,
    pub hwhm_stderr: f64,
    pub rss: f64,
}

struct Solution {
    p: Vec<f64>,
    cov_diag: Vec<f64>,
    rss: f64,
}

/// Solves `A x = b` for a small dense SPD-ish system by Gaussian elimination.
fn solve_small(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| abs(m[i * n + k]).total_cmp(&abs(m[j * n + k])))?;
        if m[piv * n + k] == 0.0 || !m[piv * n + k].is_finite() {
            return None;
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            for c in k..n {
                m[i * n + c] -= f * m[k * n + c];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for c in k + 1..n {
            s -= m[k * n + c] * x[c];
        }
        x[k] = s / m[k * n + k];
    }
    Some(x)
}

/// `model(x, p, grad)` returns the model value and fills `grad` with ∂/∂p.
fn levenberg_marquardt<M>(xs: &[f64], ys: &[f64], p0: Vec<f64>, model: M) -> Result<Solution>
where
    M: Fn(f64, &[f64], &mut [f64]) -> f64,
{
    let n = p0.len();
    let m = xs.len();
    let mut grad = vec![0.0; n];
    let eval = |p: &[f64], grad: &mut [f64], jtj: &mut [f64], jtr: &mut [f64]| -> f64 {
        jtj.iter_mut().for_each(|v| *v = 0.0);
        jtr.iter_mut().for_each(|v| *v = 0.0);
        let mut rss = 0.0;
        for k in 0..m {
            let f = model(xs[k], p, grad);
            let r = ys[k] - f;
            rss += r * r;
            for i in 0..n {
                jtr[i] += grad[i] * r;
                for j in 0..n {
                    jtj[i * n + j] += grad[i] * grad[j];
                }
            }
        }
        rss
    };
    let rss_only = |p: &[f64], grad: &mut [f64]| -> f64 {
        (0..m)
            .map(|k| {
                let r = ys[k] - model(xs[k], p, grad);
                r * r
            })
            .sum()
    };

    let mut p = p0;
    let mut jtj = vec![0.0; n * n];
    let mut jtr = vec![0.0; n];
    let mut rss = eval(&p, &mut grad, &mut jtj, &mut jtr);
    if !rss.is_finite() {
        return Err(Error::Fit("non-finite residual at the initial guess".into()));
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut a = jtj.clone();
        for i in 0..n {
            a[i * n + i] += lambda * jtj[i * n + i].max(1e-300);
        }
        let step = match solve_small(&a, &jtr, n) {
            Some(s) => s,
            None => {
                lambda *= 10.0;
                if lambda > 1e16 {
                    break;
                }
                continue;
            }
        };
        let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
        let new_rss = rss_only(&trial, &mut grad);
        if new_rss.is_finite() && new_rss <= rss {
            let small_step = step
                .iter()
                .zip(&p)
                .all(|(s, v)| abs(*s) <= 1e-12 * (abs(*v) + 1e-12));
            let small_gain = rss - new_rss <= 1e-15 * rss.max(1e-300);
            p = trial;
            rss = eval(&p, &mut grad, &mut jtj, &mut jtr);
            lambda = (lambda * 0.3).max(1e-12);
            if small_step || small_gain || rss == 0.0 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                // no descent direction left: a minimum to working precision
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Fit("Levenberg–Marquardt did not converge".into()));
    }
    let dof = m.saturating_sub(n).max(1) as f64;
    let s2 = rss / dof;
    let mut cov_diag = vec![f64::NAN; n];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        if let Some(col) = solve_small(&jtj, &e, n) {
            cov_diag[i] = col[i] * s2;
        }
    }
    Ok(Solution { p, cov_diag, rss })
}

fn check_inputs(xs: &[f64], ys: &[f64], min_points: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < min_points {
        return Err(Error::Fit(alloc::format!("need at least {min_points} points")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite input".into()));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Fit("abscissae must be strictly increasing".into()));
    }
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !(hi - lo > 1e-14 * abs(hi).max(abs(lo)).max(f64::MIN_POSITIVE)) {
        return Err(Error::Fit("input is constant".into()));
    }
    Ok(())
}

/// `(A, B, τ)` starting values; `τ` is `None` when the head does not decay.
fn exp_guess(ts: &[f64], ys: &[f64]) -> (f64, f64, Option<f64>) {
    let m = ts.len();
    let tail = (m / 10).max(1);
    let b0 = ys[m - tail..].iter().sum::<f64>() / tail as f64;
    let a0 = ys[0] - b0;
    let third = (m / 3).max(3).min(m);
    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..third {
        let d = if a0 >= 0.0 { ys[k] - b0 } else { b0 - ys[k] };
        if d > 0.0 {
            let l = log(d);
            sx += ts[k];
            sy += l;
            sxx += ts[k] * ts[k];
            sxy += ts[k] * l;
            cnt += 1.0;
        }
    }
    let slope = if cnt >= 2.0 {
        (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx)
    } else {
        f64::NAN
    };
    let tau = if slope.is_finite() && slope < 0.0 {
        Some(-1.0 / slope)
    } else {
        None
    };
    (a0, b0, tau)
}

/// Log-slope time constant of the first third of a decaying trace, with the
/// offset taken from the tail.
pub(crate) fn initial_tau_estimate(times: &[f64], values: &[f64]) -> Option<f64> {
    if times.len() < 8 || times.len() != values.len() {
        return None;
    }
    exp_guess(times, values).2.filter(|t| t.is_finite() && *t > 0.0)
}

/// Least-squares fit of `A·e^(−t/τ) + B`.
///
/// Initialization: `B` is the mean of the last tenth of the samples, `A` the
/// first sample minus `B`, and `τ` the log-slope of `|y − B|` over the first
/// third of the window.
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<ExpFit> {
    check_inputs(times, values, 8)?;
    let m = times.len();
    let t0 = times[0];
    let span = times[m - 1] - t0;
    let ymax = values.iter().fold(0.0f64, |a, &y| a.max(abs(y)));
    let ts: Vec<f64> = times.iter().map(|t| (t - t0) / span).collect();
    let ys: Vec<f64> = values.iter().map(|y| y / ymax).collect();

    let (a0, b0, tau0) = exp_guess(&ts, &ys);
    let tau0 = tau0.unwrap_or(0.3).clamp(1e-3, 1e3);

    let sol = levenberg_marquardt(&ts, &ys, vec![a0, log(tau0), b0], |t, p, g| {
        let tau = exp(p[1]);
        let e = exp(-t / tau);
        g[0] = e;
        g[1] = p[0] * e * t / tau;
        g[2] = 1.0;
        p[0] * e + p[2]
    })?;
    let tau = exp(sol.p[1]);
    if !tau.is_finite() || tau > 1e6 || sol.p[0] == 0.0 {
        return Err(Error::Fit("signal does not decay within the window".into()));
    }
    Ok(ExpFit {
        amplitude: sol.p[0] * ymax,
        tau: tau * span,
        offset: sol.p[2] * ymax,
        amplitude_stderr: sqrt(sol.cov_diag[0]) * ymax,
        tau_stderr: tau * span * sqrt(sol.cov_diag[1]),
        offset_stderr: sqrt(sol.cov_diag[2]) * ymax,
        rss: sol.rss * ymax * ymax,
    })
}

/// Least-squares fit of `a / (1 + ((x − c)/δ)²) + b`; works for peaks and
/// dips.
pub fn fit_lorentzian(xs: &[f64], values: &[f64]) -> Result<LorentzFit> {
    check_inputs(xs, values, 5)?;
    let m = xs.len();
    let nondecreasing = values.windows(2).all(|w| w[1] >= w[0]);
    let nonincreasing = values.windows(2).all(|w| w[1] <= w[0]);
    if nondecreasing || nonincreasing {
        return Err(Error::Fit("monotone data has no Lorentzian extremum".into()));
    }
    let x0 = 0.5 * (xs[0] + xs[m - 1]);
    let span = xs[m - 1] - xs[0];
    let ymax = values.iter().fold(0.0f64, |a, &y| a.max(abs(y)));
    let us: Vec<f64> = xs.iter().map(|x| (x - x0) / span).collect();
    let ys: Vec<f64> = values.iter().map(|y| y / ymax).collect();

    let mut sorted = ys.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[m / 2];
    let (imax, imin) = (0..m).fold((0, 0), |(a, b), k| {
        (
            if ys[k] > ys[a] { k } else { a },
            if ys[k] < ys[b] { k } else { b },
        )
    });
    let peak = ys[imax] - median >= median - ys[imin];
    let (ic, b0) = if peak {
        (imax, ys[0].min(ys[m - 1]))
    } else {
        (imin, ys[0].max(ys[m - 1]))
    };
    let a0 = ys[ic] - b0;
    let half = b0 + 0.5 * a0;
    let beyond = |k: usize| if peak { ys[k] <= half } else { ys[k] >= half };
    let left = (0..ic).rev().find(|&k| beyond(k)).unwrap_or(0);
    let right = (ic + 1..m).find(|&k| beyond(k)).unwrap_or(m - 1);
    let hw0 = (0.5 * (us[right] - us[left])).max(1e-3);

    let sol = levenberg_marquardt(&us, &ys, vec![us[ic], log(hw0), a0, b0], |u, p, g| {
        let h = exp(p[1]);
        let z = (u - p[0]) / h;
        let den = 1.0 + z * z;
        let l = 1.0 / den;
        g[0] = p[2] * 2.0 * z / (h * den * den);
        g[1] = p[2] * 2.0 * z * z / (den * den);
        g[2] = l;
        g[3] = 1.0;
        p[2] * l + p[3]
    })?;
    let hwhm = exp(sol.p[1]) * span;
    if !hwhm.is_finite() || sol.p[2] == 0.0 {
        return Err(Error::Fit("Lorentzian fit degenerated".into()));
    }
    Ok(LorentzFit {
        center: x0 + sol.p[0] * span,
        hwhm,
        amplitude: sol.p[2] * ymax,
        offset: sol.p[3] * ymax,
        center_stderr: sqrt(sol.cov_diag[0]) * span,
        hwhm_stderr: hwhm * sqrt(sol.cov_diag[1]),
        rss: sol.rss * ymax * ymax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn noiseless_exponential() {
        let tau0 = 300e-9;
        let t: Vec<f64> = (0..120).map(|k| k as f64 * 15e-9).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5e6 * (-t / tau0).exp() + 4e5).collect();
        let f = fit_exponential(&t, &y).unwrap();
        assert!((f.tau / tau0 - 1.0).abs() < 1e-6);
        assert!((f.offset / 4e5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noisy_exponential() {
        let tau0 = 300e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.01).unwrap();
        for _ in 0..20 {
            let t: Vec<f64> = (0..150).map(|k| k as f64 * 10e-9).collect();
            let y: Vec<f64> = t
                .iter()
                .map(|t| (-t / tau0).exp() + 0.2 + noise.sample(&mut rng))
                .collect();
            let f = fit_exponential(&t, &y).unwrap();
            assert!((f.tau / tau0 - 1.0).abs() < 0.03, "{}", f.tau);
            assert!(f.tau_stderr > 0.0 && f.tau_stderr < 0.03 * tau0);
        }
    }

    #[test]
    fn exponential_rejects_degenerate_input() {
        let t: Vec<f64> = (0..20).map(|k| k as f64).collect();
        assert!(fit_exponential(&t, &[3.0; 20]).is_err());
        assert!(fit_exponential(&t[..5], &[1.0, 0.5, 0.3, 0.2, 0.1]).is_err());
    }

    fn lorentz(x: f64, c: f64, h: f64, a: f64, b: f64) -> f64 {
        a / (1.0 + ((x - c) / h).powi(2)) + b
    }

    #[test]
    fn noiseless_lorentzian() {
        let w = 2.0 * core::f64::consts::PI * 1e6;
        let x: Vec<f64> = (0..41).map(|k| (-40.0 + 2.0 * k as f64) * w).collect();
        let y: Vec<f64> = x.iter().map(|&x| lorentz(x, -1.3 * w, 10.3 * w, 5e4, 200.0)).collect();
        let f = fit_lorentzian(&x, &y).unwrap();
        assert!((f.hwhm / (10.3 * w) - 1.0).abs() < 1e-6);
        assert!((f.center - (-1.3 * w)).abs() < 1e-6 * w);
        // dips work too
        let d: Vec<f64> = x.iter().map(|&x| lorentz(x, 2.0 * w, 8.0 * w, -0.4, 1.0)).collect();
        let f = fit_lorentzian(&x, &d).unwrap();
        assert!((f.hwhm / (8.0 * w) - 1.0).abs() < 1e-6);
        assert!((f.amplitude + 0.4).abs() < 1e-6);
    }

    #[test]
    fn noisy_lorentzian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let x: Vec<f64> = (0..61).map(|k| -45.0 + 1.5 * k as f64).collect();
        for _ in 0..20 {
            let y: Vec<f64> = x
                .iter()
                .map(|&x| lorentz(x, 0.5, 10.3, 1.0, 0.05) + noise.sample(&mut rng))
                .collect();
            let f = fit_lorentzian(&x, &y).unwrap();
            assert!((f.hwhm / 10.3 - 1.0).abs() < 0.03, "{}", f.hwhm);
        }
    }

    #[test]
    fn lorentzian_rejects_monotone_input() {
        let x: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| x * x).collect();
        assert!(fit_lorentzian(&x, &y).is_err());
    }
}
