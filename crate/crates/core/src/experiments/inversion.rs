use alloc::vec;
use alloc::vec::Vec;

use super::contour::{contour_lines, intersections, GridView};
use super::fit::fit_lorentzian;
use super::quadrature::normal_nodes;
use super::scan::{raman_grid, ScanModel, ScanOptions};
use super::spline::UniformSpline;
use super::transient::{ShelvingModel, TransientOptions};
use crate::atom::SystemParams;
use crate::error::Polyline;
use crate::exec::{Executor, Sequential};
use crate::lindblad::EvolveOptions;
use crate::math::{ceil, sqrt};
use crate::units::mhz_2pi;
use crate::{Error, Result};

/// Rectangular (ḡ₀, σ) grid, both axes in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionGrid {
    pub g_bar: (f64, f64),
    pub sigma: (f64, f64),
    pub n_g: usize,
    pub n_sigma: usize,
}

impl Default for InversionGrid {
    fn default() -> Self {
        Self {
            g_bar: (mhz_2pi(3.0), mhz_2pi(8.0)),
            sigma: (0.0, mhz_2pi(6.0)),
            n_g: 21,
            n_sigma: 21,
        }
    }
}

impl InversionGrid {
    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn g_axis(&self) -> Vec<f64> {
        Self::axis(self.g_bar.0, self.g_bar.1, self.n_g)
    }

    pub fn sigma_axis(&self) -> Vec<f64> {
        Self::axis(self.sigma.0, self.sigma.1, self.n_sigma)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.n_g >= 2
            && self.n_sigma >= 2
            && self.g_bar.0 >= 0.0
            && self.g_bar.1 > self.g_bar.0
            && self.sigma.0 >= 0.0
            && self.sigma.1 > self.sigma.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("invalid inversion grid".into()))
        }
    }
}

/// How the broadened cavity spectra behind δ(ḡ₀, σ) are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSurface {
    /// Re-solve the model at every quadrature-shifted detuning.
    Exact,
    /// Solve once per ḡ₀ on a uniform detuning table with this spacing
    /// (rad/s) and evaluate shifted points from a cubic spline.
    Tabulated { step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionOptions {
    pub grid: InversionGrid,
    /// Points per axis of the second pass around the first crossing
    /// (`None` disables it).
    pub refine: Option<(usize, usize)>,
    /// Half-width of the second pass in coarse grid cells.
    pub refine_cells: f64,
    /// Scan used for δ: `scan_points` detunings within ±`scan_half_span`
    /// of the Raman resonance.
    pub scan_half_span: f64,
    pub scan_points: usize,
    pub scan: ScanOptions,
    pub transient: TransientOptions,
    pub delta_surface: DeltaSurface,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            grid: InversionGrid::default(),
            refine: Some((11, 11)),
            refine_cells: 1.5,
            scan_half_span: mhz_2pi(50.0),
            scan_points: 41,
            scan: ScanOptions::default(),
            transient: TransientOptions {
                evolve: EvolveOptions {
                    rtol: 1e-6,
                    atol: 1e-8,
                    ..EvolveOptions::default()
                },
                ..TransientOptions::default()
            },
            delta_surface: DeltaSurface::Tabulated {
                step: mhz_2pi(0.25),
            },
        }
    }
}

/// τ_on and δ sampled on one (ḡ₀, σ) grid; `[i * n_sigma + j]` is
/// `(g_axis[i], sigma_axis[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surfaces {
    pub g_axis: Vec<f64>,
    pub sigma_axis: Vec<f64>,
    /// Seconds.
    pub tau_on: Vec<f64>,
    /// HWHM in rad/s.
    pub delta: Vec<f64>,
}

impl Surfaces {
    fn tau_view(&self) -> GridView<'_> {
        GridView {
            x: &self.g_axis,
            y: &self.sigma_axis,
            z: &self.tau_on,
        }
    }

    fn delta_view(&self) -> GridView<'_> {
        GridView {
            x: &self.g_axis,
            y: &self.sigma_axis,
            z: &self.delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionResult {
    /// rad/s.
    pub g_bar: f64,
    /// rad/s.
    pub sigma: f64,
    pub tau_contour: Vec<Polyline>,
    pub delta_contour: Vec<Polyline>,
    /// Relative mismatch of the interpolated surfaces at the reported
    /// point, `√((Δτ/τ)² + (Δδ/δ)²)`.
    pub residual: f64,
    /// Coarse grid first, then the refined grid if one was computed.
    pub surfaces: Vec<Surfaces>,
}

/// Model evaluations at one ḡ₀ shared by every σ of a grid column.
struct Column {
    shelving: ShelvingModel,
    times: Vec<f64>,
    centre: Vec<f64>,
    scan: ScanModel,
    detunings: Vec<f64>,
    table: Option<UniformSpline>,
}

impl Column {
    fn new(p: &SystemParams, g: f64, sigma_max: f64, opts: &InversionOptions) -> Result<Self> {
        let mut q = p.clone();
        q.g_bar = g;
        let shelving = ShelvingModel::new(&q, true)?;
        let times = shelving.window(&opts.transient)?;
        let centre = shelving.rate(q.delta_cav, &times, &opts.transient)?;
        let scan = ScanModel::new(&q, &opts.scan)?;
        let detunings = raman_grid(&q, opts.scan_half_span, opts.scan_points);
        let table = match opts.delta_surface {
            DeltaSurface::Exact => None,
            DeltaSurface::Tabulated { step } => {
                if !(step > 0.0) {
                    return Err(Error::InvalidInput("table step must be > 0".into()));
                }
                let reach = normal_nodes(sigma_max, opts.scan.quadrature_nodes)?
                    .iter()
                    .fold(0.0f64, |m, (x, _)| m.max(x.abs()));
                let lo_cells = ceil((opts.scan_half_span + reach) / step) as i64 + 2;
                let x0 = q.laser_397.detuning - lo_cells as f64 * step;
                let n = (2 * lo_cells + 1) as usize;
                let mut y = Vec::with_capacity(n);
                for k in 0..n {
                    y.push(scan.point(x0 + k as f64 * step)?.0);
                }
                Some(UniformSpline::new(x0, step, y)?)
            }
        };
        Ok(Self {
            shelving,
            times,
            centre,
            scan,
            detunings,
            table,
        })
    }

    fn tau(&self, sigma: f64, opts: &InversionOptions) -> Result<f64> {
        let rate = self.shelving.averaged_rate(
            sigma,
            &self.times,
            Some(&self.centre),
            &opts.transient,
            &Sequential,
        )?;
        Ok(self.shelving.fit(self.times.clone(), rate, sigma, &opts.transient)?.tau_fit)
    }

    fn delta(&self, sigma: f64, opts: &InversionOptions) -> Result<f64> {
        let sigma = if opts.scan.broaden { sigma } else { 0.0 };
        let values = match &self.table {
            None => {
                self.scan
                    .spectra(&self.detunings, sigma, opts.scan.quadrature_nodes, &Sequential)?
                    .0
                    .values
            }
            Some(s) => {
                let nodes = normal_nodes(sigma, opts.scan.quadrature_nodes)?;
                let mut v = Vec::with_capacity(self.detunings.len());
                for &d in &self.detunings {
                    let mut acc = 0.0;
                    for &(x, w) in &nodes {
                        acc += w * s.eval(d + x)?;
                    }
                    v.push(acc);
                }
                v
            }
        };
        Ok(fit_lorentzian(&self.detunings, &values)?.hwhm)
    }
}

/// `(τ_on, δ)` at one parameter point, evaluated exactly as the inversion
/// surfaces are.
pub fn forward_observables(p: &SystemParams, g_bar: f64, sigma: f64, opts: &InversionOptions) -> Result<(f64, f64)> {
    let col = Column::new(p, g_bar, sigma, opts)?;
    Ok((col.tau(sigma, opts)?, col.delta(sigma, opts)?))
}

fn surfaces<E: Executor>(p: &SystemParams, grid: &InversionGrid, opts: &InversionOptions, exec: &E) -> Result<Surfaces> {
    grid.validate()?;
    let g_axis = grid.g_axis();
    let sigma_axis = grid.sigma_axis();
    let sigma_max = grid.sigma.1;
    let columns = exec.map(&g_axis, |&g| -> Result<(Vec<f64>, Vec<f64>)> {
        let col = Column::new(p, g, sigma_max, opts)?;
        let mut taus = Vec::with_capacity(sigma_axis.len());
        let mut deltas = Vec::with_capacity(sigma_axis.len());
        for &s in &sigma_axis {
            taus.push(col.tau(s, opts)?);
            deltas.push(col.delta(s, opts)?);
        }
        Ok((taus, deltas))
    });
    let mut tau_on = Vec::with_capacity(g_axis.len() * sigma_axis.len());
    let mut delta = Vec::with_capacity(tau_on.capacity());
    for c in columns {
        let (t, d) = c?;
        tau_on.extend(t);
        delta.extend(d);
    }
    Ok(Surfaces {
        g_axis,
        sigma_axis,
        tau_on,
        delta,
    })
}

struct Crossing {
    g: f64,
    sigma: f64,
    residual: f64,
    tau_contour: Vec<Polyline>,
    delta_contour: Vec<Polyline>,
}

fn crossing(s: &Surfaces, tau_meas: f64, delta_meas: f64) -> Result<Crossing> {
    let tv = s.tau_view();
    let dv = s.delta_view();
    let tau_contour = contour_lines(&tv, tau_meas);
    let delta_contour = contour_lines(&dv, delta_meas);
    let sx = s.g_axis[1] - s.g_axis[0];
    let sy = s.sigma_axis[1] - s.sigma_axis[0];
    let mut hits = intersections(&tau_contour, &delta_contour, sx, sy);
    if hits.is_empty() {
        return Err(Error::Inversion {
            tau_contour: alloc::boxed::Box::new(tau_contour),
            delta_contour: alloc::boxed::Box::new(delta_contour),
        });
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (g, sigma) = hits[0];
    let rt = tv.interpolate(g, sigma).map_or(f64::NAN, |v| v / tau_meas - 1.0);
    let rd = dv.interpolate(g, sigma).map_or(f64::NAN, |v| v / delta_meas - 1.0);
    Ok(Crossing {
        g,
        sigma,
        residual: sqrt(rt * rt + rd * rd),
        tau_contour,
        delta_contour,
    })
}

/// (ḡ₀, σ) where the τ_on and δ surfaces pass through the measured values.
pub fn invert_parameters(
    tau_on_meas: f64,
    delta_meas: f64,
    p: &SystemParams,
    opts: &InversionOptions,
) -> Result<InversionResult> {
    invert_parameters_with(tau_on_meas, delta_meas, p, opts, &Sequential)
}

pub fn invert_parameters_with<E: Executor>(
    tau_on_meas: f64,
    delta_meas: f64,
    p: &SystemParams,
    opts: &InversionOptions,
    exec: &E,
) -> Result<InversionResult> {
    if !(tau_on_meas > 0.0) || !(delta_meas > 0.0) {
        return Err(Error::InvalidInput("measured τ_on and δ must be > 0".into()));
    }
    p.validate()?;
    let coarse = surfaces(p, &opts.grid, opts, exec)?;
    let first = crossing(&coarse, tau_on_meas, delta_meas)?;
    let mut all = vec![coarse];
    let mut best = first;
    if let Some((ng, ns)) = opts.refine {
        let dg = (opts.grid.g_bar.1 - opts.grid.g_bar.0) / (opts.grid.n_g - 1) as f64;
        let ds = (opts.grid.sigma.1 - opts.grid.sigma.0) / (opts.grid.n_sigma - 1) as f64;
        let r = opts.refine_cells;
        let fine = InversionGrid {
            g_bar: ((best.g - r * dg).max(0.0), best.g + r * dg),
            sigma: ((best.sigma - r * ds).max(0.0), best.sigma + r * ds),
            n_g: ng,
            n_sigma: ns,
        };
        let s = surfaces(p, &fine, opts, exec)?;
        // the coarse crossing stands if the refined box misses it
        if let Ok(c) = crossing(&s, tau_on_meas, delta_meas) {
            best = c;
        }
        all.push(s);
    }
    Ok(InversionResult {
        g_bar: best.g,
        sigma: best.sigma,
        tau_contour: best.tau_contour,
        delta_contour: best.delta_contour,
        residual: best.residual,
        surfaces: all,
    })
}
