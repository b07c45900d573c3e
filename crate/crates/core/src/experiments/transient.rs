use alloc::vec;
use alloc::vec::Vec;

use super::fit::{fit_exponential, initial_tau_estimate};
use super::quadrature::normal_nodes;
use super::CavityModel;
use crate::atom::{uv_fluorescence_observable, SystemParams};
use crate::exec::{Executor, Sequential};
use crate::lindblad::{evolve_observables, EvolveOptions};
use crate::math::{abs, log};
use crate::units::mhz_2pi;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TransientOptions {
    /// Samples in the fit window.
    pub points: usize,
    /// Length of the unbroadened probe run used to pick the fit window (s).
    pub probe_window: f64,
    /// Fit window as a multiple of the probe's log-slope time constant.
    pub window_factor: f64,
    /// Average cavity-on transients over the Gaussian cavity-detuning spread.
    pub broaden: bool,
    pub quadrature_nodes: usize,
    /// Count 393 nm photons (P₃/₂ → S₁/₂) as UV fluorescence.
    pub include_393: bool,
    pub evolve: EvolveOptions,
}

impl Default for TransientOptions {
    fn default() -> Self {
        Self {
            points: 200,
            probe_window: 10e-6,
            window_factor: 5.0,
            broaden: true,
            quadrature_nodes: 15,
            include_393: true,
            evolve: EvolveOptions {
                rtol: 1e-8,
                atol: 1e-10,
                ..EvolveOptions::default()
            },
        }
    }
}

/// UV fluorescence after the repumpers are switched off, with its fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Transient {
    /// Seconds after switch-off.
    pub times: Vec<f64>,
    /// Photons per second.
    pub rate: Vec<f64>,
    pub tau_fit: f64,
    pub tau_stderr: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub cavity_on: bool,
    /// Standard deviation of the cavity-detuning spread averaged over (rad/s).
    pub sigma_applied: f64,
}

fn linspace(end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| end * k as f64 / (n - 1) as f64).collect()
}

/// Parameters after the switch-off: repumpers dark and, with the cavity
/// off, no ion–cavity coupling.
pub fn switched_off(p: &SystemParams, cavity_on: bool) -> SystemParams {
    let mut q = p.clone();
    q.laser_850.rabi = 0.0;
    q.laser_854.rabi = 0.0;
    if !cavity_on {
        q.g_bar = 0.0;
    }
    q
}

/// Prepared before/after models for repeated transient runs.
#[derive(Debug, Clone)]
pub struct ShelvingModel {
    before: CavityModel,
    after: CavityModel,
    cavity_on: bool,
}

impl ShelvingModel {
    pub fn new(p: &SystemParams, cavity_on: bool) -> Result<Self> {
        Ok(Self {
            before: CavityModel::new(p)?,
            after: CavityModel::new(&switched_off(p, cavity_on))?,
            cavity_on,
        })
    }

    /// UV rate at `times` for the ion starting in the steady state at
    /// cavity detuning `delta_cav`.
    pub fn rate(&self, delta_cav: f64, times: &[f64], opts: &TransientOptions) -> Result<Vec<f64>> {
        let rho0 = self.before.steady_state(delta_cav)?;
        let l = self.after.liouvillian(delta_cav)?;
        let uv = uv_fluorescence_observable(self.after.params(), opts.include_393)?;
        let rows = evolve_observables(&rho0, &l, times, &[uv], &opts.evolve)?;
        Ok(rows.into_iter().map(|r| r[0]).collect())
    }

    /// Fit window: `window_factor` times the log-slope time constant of an
    /// unbroadened probe run at the configured cavity detuning.
    pub fn window(&self, opts: &TransientOptions) -> Result<Vec<f64>> {
        if opts.points < 8 || !(opts.probe_window > 0.0) || !(opts.window_factor > 0.0) {
            return Err(Error::InvalidInput("invalid transient options".into()));
        }
        let probe_t = linspace(opts.probe_window, opts.points);
        let probe = self.rate(self.before.params().delta_cav, &probe_t, opts)?;
        let tau0 = initial_tau_estimate(&probe_t, &probe).ok_or_else(|| {
            Error::Analysis("fluorescence does not decay after switch-off".into())
        })?;
        Ok(linspace(opts.window_factor * tau0, opts.points))
    }

    /// Rate averaged over the cavity-detuning spread `sigma` (rad/s).
    /// `centre`, when given, is the already computed unshifted curve.
    pub fn averaged_rate<E: Executor>(
        &self,
        sigma: f64,
        times: &[f64],
        centre: Option<&[f64]>,
        opts: &TransientOptions,
        exec: &E,
    ) -> Result<Vec<f64>> {
        let dc = self.before.params().delta_cav;
        let nodes = if self.broadens(sigma, opts) {
            normal_nodes(sigma, opts.quadrature_nodes)?
        } else {
            vec![(0.0, 1.0)]
        };
        let curves = exec.map(&nodes, |&(x, _)| match centre {
            Some(c) if x == 0.0 => Ok(c.to_vec()),
            _ => self.rate(dc + x, times, opts),
        });
        let mut rate = vec![0.0; times.len()];
        for (curve, &(_, w)) in curves.into_iter().zip(&nodes) {
            for (r, c) in rate.iter_mut().zip(curve?) {
                *r += w * c;
            }
        }
        Ok(rate)
    }

    fn broadens(&self, sigma: f64, opts: &TransientOptions) -> bool {
        self.cavity_on && opts.broaden && sigma > 0.0
    }

    /// Fits a rate curve produced by [`Self::averaged_rate`].
    pub fn fit(&self, times: Vec<f64>, mut rate: Vec<f64>, sigma: f64, opts: &TransientOptions) -> Result<Transient> {
        let scale = rate.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
        for r in &mut rate {
            // integrator noise around zero
            if *r < 0.0 && abs(*r) < 1e-9 * scale {
                *r = 0.0;
            }
        }
        if rate.iter().any(|r| *r < 0.0) {
            return Err(Error::Analysis("negative fluorescence rate".into()));
        }
        let fit = fit_exponential(&times, &rate).map_err(|e| Error::Analysis(alloc::format!("{e}")))?;
        if !(fit.amplitude > 0.0) {
            return Err(Error::Analysis("fluorescence does not decay after switch-off".into()));
        }
        Ok(Transient {
            times,
            rate,
            tau_fit: fit.tau,
            tau_stderr: fit.tau_stderr,
            amplitude: fit.amplitude,
            offset: fit.offset,
            cavity_on: self.cavity_on,
            sigma_applied: if self.broadens(sigma, opts) { sigma } else { 0.0 },
        })
    }

    /// Runs the pipeline with an explicit `σ` (rad/s) for the detuning
    /// average.
    pub fn run<E: Executor>(&self, sigma: f64, opts: &TransientOptions, exec: &E) -> Result<Transient> {
        let times = self.window(opts)?;
        let rate = self.averaged_rate(sigma, &times, None, opts, exec)?;
        self.fit(times, rate, sigma, opts)
    }
}

/// Shelving into D₃/₂ after an abrupt switch-off of the 850/854 nm
/// repumpers, starting from the steady state with everything on.
pub fn shelving_transient(p: &SystemParams, cavity_on: bool, opts: &TransientOptions) -> Result<Transient> {
    shelving_transient_with(p, cavity_on, opts, &Sequential)
}

pub fn shelving_transient_with<E: Executor>(
    p: &SystemParams,
    cavity_on: bool,
    opts: &TransientOptions,
    exec: &E,
) -> Result<Transient> {
    ShelvingModel::new(p, cavity_on)?.run(p.sigma_inhom, opts, exec)
}

/// Bracket and stopping rule for [`calibrate_omega397`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    /// Search interval for Ω₃₉₇ (rad/s).
    pub bracket: (f64, f64),
    /// Relative tolerance on τ_off.
    pub rtol: f64,
    pub max_iter: usize,
    pub transient: TransientOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            bracket: (mhz_2pi(5.0), mhz_2pi(60.0)),
            rtol: 1e-3,
            max_iter: 40,
            transient: TransientOptions::default(),
        }
    }
}

/// Ω₃₉₇ that reproduces `tau_off_target` with the cavity off.
///
/// τ_off decreases monotonically with Ω₃₉₇ over the bracket; the root of
/// `ln τ(Ω) − ln τ_target` in `ln Ω` is found by the Illinois method.
pub fn calibrate_omega397(p: &SystemParams, tau_off_target: f64, opts: &CalibrationOptions) -> Result<f64> {
    if !(tau_off_target > 0.0) || !tau_off_target.is_finite() {
        return Err(Error::InvalidInput("target time constant must be > 0".into()));
    }
    let (lo, hi) = opts.bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput("invalid calibration bracket".into()));
    }
    let f = |ln_omega: f64| -> Result<f64> {
        let mut q = p.clone();
        q.laser_397.rabi = crate::math::exp(ln_omega);
        let t = shelving_transient(&q, false, &opts.transient)?;
        Ok(log(t.tau_fit) - log(tau_off_target))
    };
    let (mut a, mut b) = (log(lo), log(hi));
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(lo);
    }
    if fb == 0.0 {
        return Ok(hi);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::Calibration(alloc::format!(
            "target τ_off = {:.4e} s is outside the bracket (τ range {:.4e} … {:.4e} s)",
            tau_off_target,
            tau_off_target * crate::math::exp(fb),
            tau_off_target * crate::math::exp(fa)
        )));
    }
    let tol = log(1.0 + opts.rtol);
    let mut side = 0i32;
    for _ in 0..opts.max_iter {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if abs(fc) < tol {
            return Ok(crate::math::exp(c));
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Calibration("root finder did not converge".into()))
}
