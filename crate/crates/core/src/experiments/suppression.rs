use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::quadrature::normal_nodes;
use super::scan::ScanOptions;
use super::CavityModel;
use crate::atom::{uv_fluorescence_observable, SystemParams};
use crate::exec::{Executor, Sequential};
use crate::lindblad::expect;
use crate::{Error, Result};

/// Maximum suppression `1 − min(normalized UV)` at one 850 nm detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuppressionPoint {
    /// rad/s.
    pub delta_850: f64,
    /// 397 nm and 393 nm photons counted.
    pub combined: f64,
    /// 397 nm photons only.
    pub uv397_only: f64,
}

/// Runs the cavity scan over `detunings` for every Δ₈₅₀ in `delta850_list`
/// and records the deepest normalized-UV dip, with and without 393 nm.
pub fn suppression_sweep(
    p: &SystemParams,
    delta850_list: &[f64],
    detunings: &[f64],
    opts: &ScanOptions,
) -> Result<Vec<SuppressionPoint>> {
    suppression_sweep_with(p, delta850_list, detunings, opts, &Sequential)
}

pub fn suppression_sweep_with<E: Executor>(
    p: &SystemParams,
    delta850_list: &[f64],
    detunings: &[f64],
    opts: &ScanOptions,
    exec: &E,
) -> Result<Vec<SuppressionPoint>> {
    if detunings.is_empty() {
        return Err(Error::InvalidInput("empty scan grid".into()));
    }
    let sigma = if opts.broaden { p.sigma_inhom } else { 0.0 };
    let nodes = normal_nodes(sigma, opts.quadrature_nodes)?;
    let mut out = Vec::with_capacity(delta850_list.len());
    for &d850 in delta850_list {
        let mut q = p.clone();
        q.laser_850.detuning = d850;
        let model = CavityModel::new(&q)?;
        let both = uv_fluorescence_observable(&q, true)?;
        let only = uv_fluorescence_observable(&q, false)?;
        let rho_ref = model.steady_state(q.laser_397.detuning + opts.reference_offset)?;
        let base_both = expect(&both, &rho_ref)?.re;
        let base_only = expect(&only, &rho_ref)?.re;
        if !(base_both > 0.0 && base_only > 0.0) {
            return Err(Error::Analysis("no UV fluorescence at the reference detuning".into()));
        }
        let jobs: Vec<(usize, f64)> = detunings
            .iter()
            .enumerate()
            .flat_map(|(i, &d)| nodes.iter().map(move |&(x, _)| (i, d + x)))
            .collect();
        let values = exec.map(&jobs, |&(i, d)| -> Result<(f64, f64)> {
            let rho = model.steady_state(d).map_err(|e| Error::AtGridPoint {
                index: i,
                detuning: detunings[i],
                source: Box::new(e),
            })?;
            Ok((
                expect(&both, &rho)?.re / base_both,
                expect(&only, &rho)?.re / base_only,
            ))
        });
        let mut sb = vec![0.0; detunings.len()];
        let mut so = vec![0.0; detunings.len()];
        for (k, v) in values.into_iter().enumerate() {
            let (b, o) = v?;
            let (i, w) = (k / nodes.len(), nodes[k % nodes.len()].1);
            sb[i] += w * b;
            so[i] += w * o;
        }
        let min = |v: &[f64]| v.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        out.push(SuppressionPoint {
            delta_850: d850,
            combined: 1.0 - min(&sb),
            uv397_only: 1.0 - min(&so),
        });
    }
    Ok(out)
}
