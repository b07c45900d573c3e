use alloc::vec;
use alloc::vec::Vec;

use super::liouvillian::{component_labels, sector_of};
use super::{expect, DensityMatrix, Liouvillian};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::math::{pow, sqrt};
use crate::qops::QOperator;
use crate::{Error, Result, C64};

/// Tolerances for the adaptive Dormand–Prince integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Linear system `ẏ = A y` restricted to the blocks reached from `ρ₀`.
struct Restricted {
    dim: usize,
    sector: Vec<usize>,
    a: CsrMatrix,
}

impl Restricted {
    fn new(rho0: &DensityMatrix, l: &Liouvillian) -> Result<(Self, Vec<C64>)> {
        let d = rho0.dim();
        if l.hilbert_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: l.hilbert_dim(),
                found: d,
            });
        }
        let v = rho0.matrix().column_stacked();
        let labels = component_labels(l.matrix());
        let seeds = (0..v.len()).filter(|&i| v[i] != C64::new(0.0, 0.0));
        let sector = sector_of(&labels, seeds);
        let a = l.matrix().principal_submatrix(&sector);
        let y = sector.iter().map(|&g| v[g]).collect();
        Ok((Self { dim: d, sector, a }, y))
    }

    fn expand(&self, y: &[C64]) -> DensityMatrix {
        let mut full = vec![C64::new(0.0, 0.0); self.dim * self.dim];
        for (k, &g) in self.sector.iter().enumerate() {
            full[g] = y[k];
        }
        DensityMatrix::new_unchecked(
            DenseMatrix::from_column_stacked(self.dim, self.dim, &full).expect("square"),
        )
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidInput("output times must be finite and ≥ 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("output times must be non-decreasing".into()));
    }
    Ok(())
}

fn axpy(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for &(c, k) in terms {
            acc += k[i] * c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Zeroes components far below any tolerance so decaying coherences never
/// reach subnormal arithmetic.
fn flush_tiny(y: &mut [C64]) {
    for z in y {
        if z.re.abs() < 1e-150 {
            z.re = 0.0;
        }
        if z.im.abs() < 1e-150 {
            z.im = 0.0;
        }
    }
}

/// Integrates from `t = 0` and calls `visit` with the state at each time.
fn integrate(
    sys: &Restricted,
    mut y: Vec<C64>,
    times: &[f64],
    opts: &EvolveOptions,
    mut visit: impl FnMut(&[C64]) -> Result<()>,
) -> Result<()> {
    check_times(times)?;
    if !(opts.rtol > 0.0) || !(opts.atol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    let n = y.len();
    let a = &sys.a;
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut tmp = k1.clone();
    let mut ynew = k1.clone();
    a.matvec_into(&y, &mut k1);

    let t_end = times.last().copied().unwrap_or(0.0);
    let ynorm = sqrt(y.iter().map(|z| z.norm_sqr()).sum::<f64>());
    let fnorm = sqrt(k1.iter().map(|z| z.norm_sqr()).sum::<f64>());
    let mut h = if fnorm > 0.0 { 0.01 * ynorm / fnorm } else { t_end };
    if !(h > 0.0) {
        h = t_end.max(1e-12);
    }
    let (beta, alpha) = (0.04, 0.17);
    let mut err_old = 1e-4f64;
    let mut t = 0.0;
    let mut steps = 0usize;

    for &tout in times {
        while t < tout {
            if steps >= opts.max_steps {
                return Err(Error::Stiffness { time: t, step: h });
            }
            let hh = h.min(tout - t);
            if hh <= 1e-15 * tout.max(1e-30) {
                if tout - t <= 1e-15 * tout {
                    t = tout;
                    break;
                }
                return Err(Error::Stiffness { time: t, step: hh });
            }
            axpy(&mut tmp, &y, hh, &[(A21, &k1)]);
            a.matvec_into(&tmp, &mut k2);
            axpy(&mut tmp, &y, hh, &[(A31, &k1), (A32, &k2)]);
            a.matvec_into(&tmp, &mut k3);
            axpy(&mut tmp, &y, hh, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            a.matvec_into(&tmp, &mut k4);
            axpy(&mut tmp, &y, hh, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            a.matvec_into(&tmp, &mut k5);
            axpy(
                &mut tmp,
                &y,
                hh,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            a.matvec_into(&tmp, &mut k6);
            axpy(
                &mut ynew,
                &y,
                hh,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            a.matvec_into(&ynew, &mut k7);

            let mut acc = 0.0;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hh;
                let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
                acc += e.norm_sqr() / (sc * sc);
            }
            let err = sqrt(acc / n.max(1) as f64);
            steps += 1;
            if !err.is_finite() {
                h = hh * 0.2;
                continue;
            }
            if err <= 1.0 {
                t += hh;
                if tout - t <= 1e-14 * tout {
                    t = tout;
                }
                core::mem::swap(&mut y, &mut ynew);
                core::mem::swap(&mut k1, &mut k7);
                flush_tiny(&mut y);
                let fac = if err == 0.0 {
                    10.0
                } else {
                    0.9 * pow(err, -alpha) * pow(err_old, beta)
                };
                err_old = err.max(1e-4);
                // a clipped step says nothing about the natural step size
                if hh == h {
                    h = hh * fac.clamp(0.2, 10.0);
                }
            } else {
                h = hh * (0.9 * pow(err, -alpha)).clamp(0.2, 1.0);
            }
        }
        visit(&y)?;
    }
    Ok(())
}

/// `ρ(t)` for each `t` in `times` (non-decreasing, from `t = 0`).
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    evolve_with(rho0, l, times, &EvolveOptions::default())
}

pub fn evolve_with(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    let (sys, y0) = Restricted::new(rho0, l)?;
    let mut out = Vec::with_capacity(times.len());
    integrate(&sys, y0, times, opts, |y| {
        out.push(sys.expand(y));
        Ok(())
    })?;
    Ok(out)
}

/// Real parts of `⟨O_k⟩(t)`, one row per time, without storing the states.
pub fn evolve_observables(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    times: &[f64],
    ops: &[QOperator],
    opts: &EvolveOptions,
) -> Result<Vec<Vec<f64>>> {
    let (sys, y0) = Restricted::new(rho0, l)?;
    for o in ops {
        if o.dim() != sys.dim {
            return Err(Error::DimensionMismatch {
                expected: sys.dim,
                found: o.dim(),
            });
        }
    }
    let mut out = Vec::with_capacity(times.len());
    integrate(&sys, y0, times, opts, |y| {
        let rho = sys.expand(y);
        let row = ops
            .iter()
            .map(|o| expect(o, &rho).map(|z| z.re))
            .collect::<Result<Vec<f64>>>()?;
        out.push(row);
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn decay(gamma: f64) -> Liouvillian {
        let mut lower = DenseMatrix::zeros(2, 2);
        lower[(0, 1)] = c(gamma.sqrt(), 0.0);
        Liouvillian::assemble(&QOperator::zeros(2), &[QOperator::from_dense(lower).unwrap()]).unwrap()
    }

    #[test]
    fn exponential_decay() {
        let gamma = 1.3e8;
        let l = decay(gamma);
        let rho0 = DensityMatrix::basis_state(2, 1).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 2e-9).collect();
        let out = evolve(&rho0, &l, &times).unwrap();
        for (t, r) in times.iter().zip(&out) {
            assert!((r.populations()[1] - (-gamma * t).exp()).abs() < 1e-8);
            assert!((r.trace() - c(1.0, 0.0)).norm() < 1e-10);
        }
    }

    fn expm(a: &DenseMatrix) -> DenseMatrix {
        // scaling and squaring with a Taylor series
        let norm = a.max_abs() * a.rows() as f64;
        let mut s = 0;
        while norm / (1u64 << s) as f64 > 0.1 {
            s += 1;
        }
        let b = a.scale(c(1.0 / (1u64 << s) as f64, 0.0));
        let mut term = DenseMatrix::identity(a.rows());
        let mut sum = term.clone();
        for k in 1..30 {
            term = term.matmul(&b).unwrap().scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term).unwrap();
        }
        for _ in 0..s {
            sum = sum.matmul(&sum).unwrap();
        }
        sum
    }

    #[test]
    fn matches_matrix_exponential() {
        // driven, damped two-level system (superoperator dimension 4)
        let h = DenseMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(0.8, 0.0), c(0.8, 0.0), c(0.3, 0.0)]).unwrap();
        let mut lower = DenseMatrix::zeros(2, 2);
        lower[(0, 1)] = c(0.5, 0.0);
        let l = Liouvillian::assemble(
            &QOperator::from_dense(h).unwrap(),
            &[QOperator::from_dense(lower).unwrap()],
        )
        .unwrap();
        let rho0 = DensityMatrix::basis_state(2, 0).unwrap();
        let times = [0.0, 0.5, 1.7, 4.0];
        let out = evolve(&rho0, &l, &times).unwrap();
        let ld = l.matrix().to_dense();
        let v0 = rho0.matrix().column_stacked();
        for (t, r) in times.iter().zip(&out) {
            let want = expm(&ld.scale(c(*t, 0.0))).matvec(&v0).unwrap();
            let got = r.matrix().column_stacked();
            let diff = want.iter().zip(&got).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(diff < 1e-9, "t = {t}: {diff}");
        }
    }

    #[test]
    fn observables_follow_states() {
        let l = decay(1.0);
        let rho0 = DensityMatrix::basis_state(2, 1).unwrap();
        let mut pe = DenseMatrix::zeros(2, 2);
        pe[(1, 1)] = c(1.0, 0.0);
        let ops = [QOperator::from_dense(pe).unwrap()];
        let rows = evolve_observables(&rho0, &l, &[0.0, 1.0, 2.0], &ops, &EvolveOptions::default()).unwrap();
        assert!((rows[0][0] - 1.0).abs() < 1e-12);
        assert!((rows[2][0] - (-2.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_times() {
        let l = decay(1.0);
        let rho0 = DensityMatrix::basis_state(2, 1).unwrap();
        assert!(evolve(&rho0, &l, &[1.0, 0.5]).is_err());
        assert!(evolve(&rho0, &l, &[-1.0]).is_err());
    }

    #[test]
    fn step_budget_exhaustion_is_stiffness() {
        let l = decay(1e12);
        let rho0 = DensityMatrix::basis_state(2, 1).unwrap();
        let opts = EvolveOptions {
            max_steps: 5,
            ..EvolveOptions::default()
        };
        assert!(matches!(
            evolve_with(&rho0, &l, &[1.0], &opts),
            Err(Error::Stiffness { .. })
        ));
    }
}
