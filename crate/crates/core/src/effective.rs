//! Effective three-level rate model (S₁/₂, P₁/₂, D₃/₂) with an incoherent
//! pump `V`, decays `Γ₁` (P→S) and `Γ₂`/`Γ₂′` (P→D, without/with cavity),
//! and a direct repump `Γ₃` (D→S).

use alloc::vec::Vec;

use crate::atom::{manifold_projector, SystemParams, Term};
use crate::experiments::{fit_exponential, initial_tau_estimate, switched_off, TransientOptions};
use crate::lindblad::{evolve_observables, evolve_with, expect, DensityMatrix, EvolveOptions, Liouvillian};
use crate::math::nextafter;
use crate::{atom, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma2_prime: f64,
    pub gamma3: f64,
    pub pump: f64,
}

impl RateParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.gamma1, self.gamma2, self.gamma2_prime, self.gamma3, self.pump];
        if all.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidInput("rates must be finite and ≥ 0".into()));
        }
        Ok(())
    }

    /// `v = Γ₂/Γ₂′`.
    pub fn v(&self) -> f64 {
        self.gamma2 / self.gamma2_prime
    }

    /// `w = Γ₃/Γ₂′`.
    pub fn w(&self) -> f64 {
        self.gamma3 / self.gamma2_prime
    }
}

/// Equilibrium `(N_S, N_P, N_D)`, using `Γ₂′` when `use_prime` is set.
pub fn steady_populations(r: &RateParams, use_prime: bool) -> Result<[f64; 3]> {
    r.validate()?;
    let g2 = if use_prime { r.gamma2_prime } else { r.gamma2 };
    let (g1, g3, v) = (r.gamma1, r.gamma3, r.pump);
    // kernel of the rate matrix
    let x = [(g1 + g2 + v) * g3, v * g3, v * g2];
    let total: f64 = x.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Degenerate(
            "rate equations have no unique equilibrium".into(),
        ));
    }
    let mut n = x.map(|v| v / total);
    // put the rounding residual on one component so the sum is exactly 1
    let big = (0..3).fold(0, |b, k| if n[k] > n[b] { k } else { b });
    n[big] = 1.0 - (0..3).filter(|&k| k != big).map(|k| n[k]).sum::<f64>();
    let sum = |n: &[f64; 3]| n[0] + n[1] + n[2];
    'outer: for k in (0..3).filter(|&k| n[k] > 0.0) {
        for dir in [0.0, 2.0] {
            let mut m = n;
            for _ in 0..8 {
                if sum(&m) == 1.0 {
                    n = m;
                    break 'outer;
                }
                m[k] = nextafter(m[k], dir);
            }
        }
    }
    Ok(n)
}

/// `N′_P/N_P ≈ 1 − (1 − v)/(1 + w·(Γ₁ + 2V)/V)`.
pub fn normalized_fluorescence_eq1(v: f64, w: f64, gamma1: f64, pump: f64) -> Result<f64> {
    if !(pump > 0.0) || !pump.is_finite() {
        return Err(Error::Domain("pump rate must be > 0".into()));
    }
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::Domain("v must lie in (0, 1]".into()));
    }
    if !(w >= 0.0) || !w.is_finite() || !(gamma1 >= 0.0) {
        return Err(Error::Domain("w and Γ₁ must be ≥ 0".into()));
    }
    Ok(1.0 - (1.0 - v) / (1.0 + w * (gamma1 + 2.0 * pump) / pump))
}

/// Table of Eq. (1) values: one row `(v, w, value)` per grid pair.
pub fn eq1_table(vs: &[f64], ws: &[f64], gamma1: f64, pump: f64) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::with_capacity(vs.len() * ws.len());
    for &v in vs {
        for &w in ws {
            out.push((v, w, normalized_fluorescence_eq1(v, w, gamma1, pump)?));
        }
    }
    Ok(out)
}

fn populations_sp(p: &SystemParams, rho: &DensityMatrix) -> Result<(f64, f64)> {
    let s = expect(&manifold_projector(p, Term::S12)?, rho)?.re;
    let pp = expect(&manifold_projector(p, Term::P12)?, rho)?.re;
    Ok((s, pp))
}

/// Maps the full model onto [`RateParams`].
///
/// * `Γ₁`, `Γ₂`: configured P₁/₂ decay rates.
/// * `V`: from the closed S₁/₂ ↔ P₁/₂ cycle (ḡ₀ = 0, no P→D decay) relaxed
///   to equilibrium, `V·N_S = (Γ₁ + V)·N_P`.
/// * `Γ₃`: inverse time constant of the D₃/₂ population after seeding the
///   ion in D₃/₂ with the 397 nm laser and the cavity off.
/// * `Γ₂′`: inverse time constant of the UV decay with the cavity on and the
///   repumpers off, starting from the closed-cycle equilibrium, divided by
///   its P₁/₂ fraction `N_P/(N_S + N_P)`. No detuning average is applied.
pub fn effective_rates_from_full(p: &SystemParams) -> Result<RateParams> {
    p.validate()?;
    let gamma1 = p.decay.p12_s12;
    let gamma2 = p.decay.p12_d32;

    let mut closed = p.clone();
    closed.g_bar = 0.0;
    closed.decay.p12_d32 = 0.0;
    let rho_sp = relax_closed_cycle(&closed)?;
    let (ns, np) = populations_sp(&closed, &rho_sp)?;
    if !(ns > np) || !(np > 0.0) {
        return Err(Error::Analysis(
            "pump balance outside the rate-equation regime (N_P ≥ N_S or N_P = 0)".into(),
        ));
    }
    let pump = gamma1 * np / (ns - np);

    let mut q0 = p.clone();
    q0.g_bar = 0.0;
    let gamma3 = depletion_rate(&q0)?;

    let tau = shelving_time(p, &rho_sp)?;
    let gamma2_prime = (ns + np) / (tau * np);
    Ok(RateParams {
        gamma1,
        gamma2,
        gamma2_prime,
        gamma3,
        pump,
    })
}

fn linspace(end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| end * k as f64 / (n - 1) as f64).collect()
}

fn seeded(q: &SystemParams, term: Term) -> Result<DensityMatrix> {
    let space = atom::composite_space(q)?;
    let f = space.field_dim();
    let seeds: Vec<usize> = atom::AtomicBasis::calcium40().manifold(term).map(|a| a * f).collect();
    DensityMatrix::mixture(space.dim(), &seeds)
}

fn relax_closed_cycle(closed: &SystemParams) -> Result<DensityMatrix> {
    let l = Liouvillian::assemble(&atom::build_hamiltonian(closed)?, &atom::build_collapse_ops(closed)?)?;
    let rho0 = seeded(closed, Term::S12)?;
    // many P₁/₂ lifetimes; the cycle has no slow channel
    let t_end = 400.0 / closed.decay.p12_s12;
    let mut out = evolve_with(&rho0, &l, &[0.0, t_end], &EvolveOptions::default())?;
    Ok(out.pop().expect("two samples"))
}

fn shelving_time(p: &SystemParams, rho0: &DensityMatrix) -> Result<f64> {
    let after = switched_off(p, true);
    let l = Liouvillian::assemble(&atom::build_hamiltonian(&after)?, &atom::build_collapse_ops(&after)?)?;
    let uv = atom::uv_fluorescence_observable(&after, true)?;
    let opts = TransientOptions::default();
    let run = |times: &[f64]| -> Result<Vec<f64>> {
        let rows = evolve_observables(rho0, &l, times, &[uv.clone()], &opts.evolve)?;
        Ok(rows.into_iter().map(|r| r[0]).collect())
    };
    let probe_t = linspace(opts.probe_window, opts.points);
    let tau0 = initial_tau_estimate(&probe_t, &run(&probe_t)?)
        .ok_or_else(|| Error::Analysis("fluorescence does not decay with the repumpers off".into()))?;
    let times = linspace(opts.window_factor * tau0, opts.points);
    let fit = fit_exponential(&times, &run(&times)?)?;
    if !(fit.tau > 0.0) {
        return Err(Error::Analysis("fluorescence does not decay with the repumpers off".into()));
    }
    Ok(fit.tau)
}

fn depletion_rate(q0: &SystemParams) -> Result<f64> {
    // D₃/₂ is only emptied through the 850 nm repumper
    if q0.laser_850.rabi == 0.0 {
        return Ok(0.0);
    }
    let mut q = q0.clone();
    q.laser_397.rabi = 0.0;
    let l = Liouvillian::assemble(&atom::build_hamiltonian(&q)?, &atom::build_collapse_ops(&q)?)?;
    let rho = seeded(&q, Term::D32)?;
    let proj = manifold_projector(&q, Term::D32)?;

    // window from the saturated repump rate Ω₈₅₀²/Γ(P₃/₂)
    let rate = q.laser_850.rabi * q.laser_850.rabi / q.decay.p32_total();
    let t_end = (10.0 / rate).clamp(1e-7, 1e-3);
    let n = 160;
    let times: Vec<f64> = (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect();
    let rows = evolve_observables(&rho, &l, &times, &[proj], &EvolveOptions::default())?;
    let nd: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let fit = fit_exponential(&times, &nd)?;
    if !(fit.tau > 0.0) {
        return Err(Error::Analysis("D₃/₂ population does not relax".into()));
    }
    Ok(1.0 / fit.tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(g1: f64, g2: f64, g2p: f64, g3: f64, v: f64) -> RateParams {
        RateParams {
            gamma1: g1,
            gamma2: g2,
            gamma2_prime: g2p,
            gamma3: g3,
            pump: v,
        }
    }

    #[test]
    fn no_pump_leaves_ground_state() {
        let n = steady_populations(&rates(1.0, 0.1, 0.5, 0.2, 0.0), false).unwrap();
        assert_eq!(n, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn no_leak_is_two_level_balance() {
        let n = steady_populations(&rates(2.0, 0.0, 0.0, 0.3, 0.7), true).unwrap();
        assert_eq!(n[2], 0.0);
        assert!((n[1] / n[0] - 0.7 / 2.7).abs() < 1e-15);
    }

    #[test]
    fn all_zero_rates_are_degenerate() {
        assert!(matches!(
            steady_populations(&rates(0.0, 0.0, 0.0, 0.0, 0.0), false),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn matches_long_time_integration() {
        let r = rates(1.3, 0.09, 0.4, 0.05, 0.8);
        for use_prime in [false, true] {
            let g2 = if use_prime { r.gamma2_prime } else { r.gamma2 };
            let mut n = [1.0f64, 0.0, 0.0];
            let f = |n: [f64; 3]| {
                [
                    -r.pump * n[0] + (r.gamma1 + r.pump) * n[1] + r.gamma3 * n[2],
                    r.pump * n[0] - (r.gamma1 + g2 + r.pump) * n[1],
                    g2 * n[1] - r.gamma3 * n[2],
                ]
            };
            let h = 0.01;
            for _ in 0..100_000 {
                let k1 = f(n);
                let k2 = f([0, 1, 2].map(|i| n[i] + 0.5 * h * k1[i]));
                let k3 = f([0, 1, 2].map(|i| n[i] + 0.5 * h * k2[i]));
                let k4 = f([0, 1, 2].map(|i| n[i] + h * k3[i]));
                n = [0, 1, 2].map(|i| n[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
            }
            let eq = steady_populations(&r, use_prime).unwrap();
            for i in 0..3 {
                assert!((eq[i] - n[i]).abs() < 1e-10, "{eq:?} vs {n:?}");
            }
        }
    }

    #[test]
    fn eq1_limits() {
        for w in [0.0, 0.3, 5.0] {
            assert_eq!(normalized_fluorescence_eq1(1.0, w, 1e8, 1e7).unwrap(), 1.0);
        }
        assert!(normalized_fluorescence_eq1(1e-12, 1e-12, 1e8, 1e7).unwrap() < 1e-9);
        assert!(matches!(
            normalized_fluorescence_eq1(0.5, 0.1, 1e8, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eq1_is_monotone() {
        let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let ws: Vec<f64> = (0..10).map(|k| k as f64 * 0.4).collect();
        for &v in &grid {
            for pair in ws.windows(2) {
                let a = normalized_fluorescence_eq1(v, pair[0], 1.35e8, 5e7).unwrap();
                let b = normalized_fluorescence_eq1(v, pair[1], 1.35e8, 5e7).unwrap();
                assert!(b >= a);
            }
        }
        for &w in &ws {
            for pair in grid.windows(2) {
                let a = normalized_fluorescence_eq1(pair[0], w, 1.35e8, 5e7).unwrap();
                let b = normalized_fluorescence_eq1(pair[1], w, 1.35e8, 5e7).unwrap();
                assert!(b >= a);
            }
        }
    }
}
