use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::fit::{fit_lorentzian, LorentzFit};
use super::quadrature::normal_nodes;
use super::CavityModel;
use crate::atom::{cavity_emission_observable, uv_fluorescence_observable, SystemParams};
use crate::exec::{Executor, Sequential};
use crate::lindblad::expect;
use crate::math::sqrt;
use crate::qops::QOperator;
use crate::units::mhz_2pi;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Photons per second leaving the cavity.
    CavityEmission,
    /// UV photons per second divided by the far-detuned-cavity rate.
    UvFluorescenceNormalized,
}

impl SpectrumKind {
    pub fn label(self) -> &'static str {
        match self {
            SpectrumKind::CavityEmission => "cavity_emission",
            SpectrumKind::UvFluorescenceNormalized => "uv_fluorescence_normalized",
        }
    }
}

/// An observable sampled against the cavity detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Δ_cav (rad/s).
    pub detunings: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    /// Standard deviation of the cavity-detuning spread (rad/s).
    pub sigma_applied: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub include_393: bool,
    /// The UV baseline is taken at Δ_cav = Δ₃₉₇ + this offset (rad/s).
    pub reference_offset: f64,
    pub broaden: bool,
    pub quadrature_nodes: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            include_393: true,
            reference_offset: mhz_2pi(80.0),
            broaden: true,
            quadrature_nodes: 15,
        }
    }
}

/// Averages `model` over a Gaussian spread of the detuning:
/// `value(Δ) = Σ_k w_k · model(Δ + x_k)`, re-evaluating the model at every
/// shifted point. `σ = 0` returns the spectrum unchanged.
pub fn broaden<F>(s: &Spectrum, sigma: f64, nodes: usize, model: F) -> Result<Spectrum>
where
    F: Fn(f64) -> Result<f64>,
{
    let q = normal_nodes(sigma, nodes)?;
    if sigma == 0.0 {
        return Ok(s.clone());
    }
    let mut values = Vec::with_capacity(s.detunings.len());
    for &d in &s.detunings {
        let mut acc = 0.0;
        for &(x, w) in &q {
            acc += w * model(d + x)?;
        }
        values.push(acc);
    }
    Ok(Spectrum {
        detunings: s.detunings.clone(),
        values,
        kind: s.kind,
        sigma_applied: s.sigma_applied + sigma,
    })
}

/// Steady-state observables of one parameter set over many cavity
/// detunings.
#[derive(Debug, Clone)]
pub struct ScanModel {
    model: CavityModel,
    cavity: QOperator,
    uv: QOperator,
    baseline: f64,
}

impl ScanModel {
    pub fn new(p: &SystemParams, opts: &ScanOptions) -> Result<Self> {
        let model = CavityModel::new(p)?;
        let cavity = cavity_emission_observable(p)?;
        let uv = uv_fluorescence_observable(p, opts.include_393)?;
        let reference = p.laser_397.detuning + opts.reference_offset;
        let rho = model.steady_state(reference)?;
        let baseline = expect(&uv, &rho)?.re;
        if !(baseline > 0.0) {
            return Err(Error::Analysis("no UV fluorescence at the reference detuning".into()));
        }
        Ok(Self {
            model,
            cavity,
            uv,
            baseline,
        })
    }

    /// Far-detuned UV rate used for normalization (photons/s).
    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    /// `(cavity emission rate, normalized UV)` at one cavity detuning.
    pub fn point(&self, delta_cav: f64) -> Result<(f64, f64)> {
        let rho = self.model.steady_state(delta_cav)?;
        Ok((
            expect(&self.cavity, &rho)?.re,
            expect(&self.uv, &rho)?.re / self.baseline,
        ))
    }

    /// Broadened spectra on `detunings` for spread `sigma` (rad/s).
    pub fn spectra<E: Executor>(
        &self,
        detunings: &[f64],
        sigma: f64,
        nodes: usize,
        exec: &E,
    ) -> Result<(Spectrum, Spectrum)> {
        let q = normal_nodes(sigma, nodes)?;
        let jobs: Vec<(usize, f64)> = detunings
            .iter()
            .enumerate()
            .flat_map(|(i, &d)| q.iter().map(move |&(x, _)| (i, d + x)))
            .collect();
        let results = exec.map(&jobs, |&(i, d)| {
            self.point(d).map_err(|e| Error::AtGridPoint {
                index: i,
                detuning: detunings[i],
                source: Box::new(e),
            })
        });
        let mut cav = vec![0.0; detunings.len()];
        let mut uv = vec![0.0; detunings.len()];
        for (k, r) in results.into_iter().enumerate() {
            let (c, u) = r?;
            let (i, w) = (k / q.len(), q[k % q.len()].1);
            cav[i] += w * c;
            uv[i] += w * u;
        }
        let make = |values, kind| Spectrum {
            detunings: detunings.to_vec(),
            values,
            kind,
            sigma_applied: sigma,
        };
        Ok((
            make(cav, SpectrumKind::CavityEmission),
            make(uv, SpectrumKind::UvFluorescenceNormalized),
        ))
    }
}

/// Cavity-emission and normalized-UV spectra over `detunings` (Δ_cav in
/// rad/s), broadened by `p.sigma_inhom` when `opts.broaden` is set.
pub fn cavity_scan(p: &SystemParams, detunings: &[f64], opts: &ScanOptions) -> Result<(Spectrum, Spectrum)> {
    cavity_scan_with(p, detunings, opts, &Sequential)
}

pub fn cavity_scan_with<E: Executor>(
    p: &SystemParams,
    detunings: &[f64],
    opts: &ScanOptions,
    exec: &E,
) -> Result<(Spectrum, Spectrum)> {
    check_grid(p, detunings)?;
    let sigma = if opts.broaden { p.sigma_inhom } else { 0.0 };
    ScanModel::new(p, opts)?.spectra(detunings, sigma, opts.quadrature_nodes, exec)
}

fn check_grid(p: &SystemParams, detunings: &[f64]) -> Result<()> {
    if detunings.len() < 3 || detunings.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "scan grid needs ≥ 3 strictly increasing detunings".into(),
        ));
    }
    let raman = p.laser_397.detuning;
    if !(detunings[0] < raman && raman < detunings[detunings.len() - 1]) {
        return Err(Error::InvalidInput("scan grid does not span the Raman resonance".into()));
    }
    Ok(())
}

/// `n` equally spaced detunings centred on the Raman resonance Δ_cav = Δ₃₉₇.
pub fn raman_grid(p: &SystemParams, half_span: f64, n: usize) -> Vec<f64> {
    let c = p.laser_397.detuning;
    (0..n)
        .map(|k| c - half_span + 2.0 * half_span * k as f64 / (n - 1) as f64)
        .collect()
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidInput("need two equally long series".into()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Degenerate("constant series has no correlation".into()));
    }
    Ok(sab / sqrt(saa * sbb))
}

/// Summary of a cavity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanAnalysis {
    /// Lorentzian fit of the cavity emission; `fit.hwhm` is δ (rad/s).
    pub fit: LorentzFit,
    /// Grid detuning of the largest cavity emission.
    pub cavity_peak: f64,
    /// Grid detuning of the smallest normalized UV value.
    pub uv_dip: f64,
    pub uv_min: f64,
    /// Pearson correlation of the two spectra.
    pub correlation: f64,
    /// Largest spacing of the scan grid.
    pub grid_step: f64,
}

impl ScanAnalysis {
    /// `1 − min(normalized UV)`.
    pub fn suppression(&self) -> f64 {
        1.0 - self.uv_min
    }

    /// Distance between the UV minimum and the emission maximum in grid steps.
    pub fn extremum_offset_steps(&self) -> f64 {
        crate::math::abs(self.uv_dip - self.cavity_peak) / self.grid_step
    }
}

fn argext(v: &[f64], max: bool) -> usize {
    (0..v.len())
        .fold(0, |b, k| if (max && v[k] > v[b]) || (!max && v[k] < v[b]) { k } else { b })
}

pub fn analyze_scan(cavity: &Spectrum, uv: &Spectrum) -> Result<ScanAnalysis> {
    if cavity.detunings != uv.detunings {
        return Err(Error::InvalidInput("spectra use different grids".into()));
    }
    let fit = fit_lorentzian(&cavity.detunings, &cavity.values)
        .map_err(|e| Error::Analysis(alloc::format!("cavity emission: {e}")))?;
    let ic = argext(&cavity.values, true);
    let iu = argext(&uv.values, false);
    let grid_step = cavity
        .detunings
        .windows(2)
        .fold(0.0f64, |m, w| m.max(w[1] - w[0]));
    Ok(ScanAnalysis {
        fit,
        cavity_peak: cavity.detunings[ic],
        uv_dip: uv.detunings[iu],
        uv_min: uv.values[iu],
        correlation: pearson(&cavity.values, &uv.values)?,
        grid_step,
    })
}

/// `1 − min(normalized UV)` of a spectrum.
pub fn max_suppression(uv: &Spectrum) -> f64 {
    1.0 - uv.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_broadening_is_identity() {
        let s = Spectrum {
            detunings: vec![-1.0, 0.0, 1.0],
            values: vec![0.2, 1.0, 0.2],
            kind: SpectrumKind::CavityEmission,
            sigma_applied: 0.0,
        };
        let b = broaden(&s, 0.0, 15, |_| panic!("model must not be called")).unwrap();
        assert_eq!(b, s);
    }

    #[test]
    fn quadrature_matches_dense_trapezoid() {
        // Lorentzian of HWHM 10 broadened by σ = 3
        let (h, sigma) = (10.0, 3.0);
        let f = |x: f64| 1.0 / (1.0 + (x / h).powi(2));
        let grid: Vec<f64> = (-20..=20).map(|k| k as f64 * 2.0).collect();
        let s = Spectrum {
            detunings: grid.clone(),
            values: grid.iter().map(|&x| f(x)).collect(),
            kind: SpectrumKind::CavityEmission,
            sigma_applied: 0.0,
        };
        let b = broaden(&s, sigma, 15, |x| Ok(f(x))).unwrap();
        let norm = 1.0 / (sigma * (2.0 * core::f64::consts::PI).sqrt());
        for (d, v) in grid.iter().zip(&b.values) {
            let n = 2001;
            let (a, z) = (-5.0 * sigma, 5.0 * sigma);
            let dx = (z - a) / (n - 1) as f64;
            let mut acc = 0.0;
            for k in 0..n {
                let x = a + k as f64 * dx;
                let g = norm * (-0.5 * (x / sigma).powi(2)).exp() * f(d + x);
                acc += if k == 0 || k == n - 1 { 0.5 * g } else { g };
            }
            assert!((v - acc * dx).abs() < 1e-4);
        }
    }

    #[test]
    fn broadened_peak_is_at_least_gaussian_width() {
        let sigma = 2.0;
        let w = 1.0;
        let f = |x: f64| w / core::f64::consts::PI / (x * x + w * w);
        let grid: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let s = Spectrum {
            detunings: grid.clone(),
            values: vec![0.0; grid.len()],
            kind: SpectrumKind::CavityEmission,
            sigma_applied: 0.0,
        };
        let b = broaden(&s, sigma, 15, |x| Ok(f(x))).unwrap();
        let peak = b.values[0];
        let half = grid.iter().zip(&b.values).find(|(_, v)| **v < 0.5 * peak).unwrap().0;
        assert!(*half >= (2.0 * 2f64.ln()).sqrt() * sigma);
    }

    #[test]
    fn pearson_limits() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[-1.0, -2.0, -3.0, -4.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&a, &[1.0; 4]).is_err());
    }
}
