//! Invariant checks behind the `validate` subcommand.

use purcell_core::atom::{self, SystemParams};
use purcell_core::effective::{normalized_fluorescence_eq1, steady_populations, RateParams};
use purcell_core::exec::Sequential;
use purcell_core::experiments::{CavityModel, ScanModel, ScanOptions};
use purcell_core::lindblad::{expect, steady_state, DensityMatrix, Liouvillian};
use purcell_core::linalg::DenseMatrix;
use purcell_core::qops::{clebsch_gordan_f64, QOperator};
use purcell_core::units::mhz_2pi;
use purcell_core::C64;

use crate::csv::spectrum_table;
use crate::exec::RayonExecutor;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64, what: &str) -> Check {
    Check {
        name,
        passed: value.is_finite() && value <= limit,
        detail: format!("{what} = {value:.3e} (limit {limit:.1e})"),
    }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> Check {
    Check {
        name,
        passed: false,
        detail: e.to_string(),
    }
}

/// Largest deviation of Σ_{m₁m₂} ⟨j₁m₁;1m₂|JM⟩⟨j₁m₁;1m₂|J′M′⟩ from δ_{JJ′}δ_{MM′}.
pub fn cg_orthonormality_defect() -> purcell_core::Result<f64> {
    let mut worst = 0.0f64;
    for tj1 in [1, 3, 5] {
        let j1 = tj1 as f64 / 2.0;
        let js: Vec<f64> = (0..=2).map(|k| j1 - 1.0 + k as f64).filter(|j| *j >= 0.0).collect();
        let states: Vec<(f64, f64)> = js
            .iter()
            .flat_map(|&j| (0..(2.0 * j) as usize + 1).map(move |k| (j, -j + k as f64)))
            .collect();
        for &(ja, ma) in &states {
            for &(jb, mb) in &states {
                let mut s = 0.0;
                for k1 in 0..tj1 + 1 {
                    let m1 = -j1 + k1 as f64;
                    for m2 in [-1.0, 0.0, 1.0] {
                        s += clebsch_gordan_f64(j1, m1, 1.0, m2, ja, ma)?
                            * clebsch_gordan_f64(j1, m1, 1.0, m2, jb, mb)?;
                    }
                }
                let want = if ja == jb && ma == mb { 1.0 } else { 0.0 };
                worst = worst.max((s - want).abs());
            }
        }
    }
    Ok(worst)
}

/// Relative difference between `L·vec(ρ)` and `−i[H, ρ] + Σ D[C](ρ)` for a
/// fixed Hermitian test matrix.
pub fn liouvillian_direct_form_defect(p: &SystemParams) -> purcell_core::Result<f64> {
    let h = atom::build_hamiltonian(p)?;
    let cs = atom::build_collapse_ops(p)?;
    let l = Liouvillian::assemble(&h, &cs)?;
    let n = h.dim();
    let a = DenseMatrix::from_fn(n, n, |i, j| {
        let x = (i * 7 + j * 13) as f64;
        C64::new((0.37 * x).sin(), (0.11 * x + 0.5).cos())
    });
    let rho = a.add(&a.adjoint())?;
    let got = l.apply(&rho)?;

    let hd = h.to_dense();
    let mi = C64::new(0.0, -1.0);
    let mut want = hd.matmul(&rho)?.sub(&rho.matmul(&hd)?)?.scale(mi);
    for c in &cs {
        let cd = c.to_dense();
        let cdag = cd.adjoint();
        let k = cdag.matmul(&cd)?;
        let jump = cd.matmul(&rho)?.matmul(&cdag)?;
        let anti = k.matmul(&rho)?.add(&rho.matmul(&k)?)?.scale(C64::new(0.5, 0.0));
        want = want.add(&jump.sub(&anti)?)?;
    }
    Ok(got.max_abs_diff(&want) / want.max_abs().max(1.0))
}

/// `|ρ_ee − ρ_ee^analytic|` for a driven, decaying two-level atom.
pub fn two_level_defect() -> purcell_core::Result<f64> {
    let (omega, delta, gamma) = (mhz_2pi(7.0), mhz_2pi(-3.0), mhz_2pi(5.0));
    let z = C64::new(0.0, 0.0);
    let half = C64::new(omega / 2.0, 0.0);
    let h = QOperator::from_dense(DenseMatrix::from_row_major(2, 2, vec![z, half, half, C64::new(-delta, 0.0)])?)?;
    let c = QOperator::from_dense(DenseMatrix::from_row_major(
        2,
        2,
        vec![z, C64::new(gamma.sqrt(), 0.0), z, z],
    )?)?;
    let rho = steady_state(&Liouvillian::assemble(&h, &[c])?)?;
    let analytic = (omega * omega / 4.0) / (delta * delta + gamma * gamma / 4.0 + omega * omega / 2.0);
    Ok((rho.matrix().as_slice()[3].re - analytic).abs())
}

/// Largest trace, Hermiticity and negative-eigenvalue defects of the full
/// steady state over a few cavity detunings.
pub fn steady_state_defects(p: &SystemParams) -> purcell_core::Result<(f64, f64, f64)> {
    let model = CavityModel::new(p)?;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for k in -2..=2 {
        let rho: DensityMatrix = model.steady_state(p.laser_397.detuning + mhz_2pi(10.0 * k as f64))?;
        worst.0 = worst.0.max((rho.trace() - 1.0).norm());
        worst.1 = worst.1.max(rho.hermitian_defect());
        worst.2 = worst.2.max((-rho.min_eigenvalue()?).max(0.0));
    }
    Ok(worst)
}

/// Largest relative error of the closed-form normalized fluorescence against
/// the exact three-level equilibrium where Γ₁ + V > 50·max(Γ₂, Γ₂′).
pub fn eq1_defect() -> purcell_core::Result<f64> {
    let gamma1 = 1.355e8;
    let gamma2: f64 = 9.3e6;
    let mut worst = 0.0f64;
    for pump in [1e7, 1e8, 1e9, 1e10] {
        for v in [0.05, 0.1, 0.25, 0.5, 0.75, 1.0] {
            for w in [0.0, 0.01, 0.1, 0.5, 1.0, 5.0] {
                let g2p = gamma2 / v;
                if gamma1 + pump <= 50.0 * gamma2.max(g2p) {
                    continue;
                }
                let r = RateParams {
                    gamma1,
                    gamma2,
                    gamma2_prime: g2p,
                    gamma3: w * g2p,
                    pump,
                };
                let exact = steady_populations(&r, true)?[1] / steady_populations(&r, false)?[1];
                let approx = normalized_fluorescence_eq1(v, w, gamma1, pump)?;
                worst = worst.max((approx / exact - 1.0).abs());
            }
        }
    }
    Ok(worst)
}

/// Relative change of the unbroadened cavity emission at the Raman
/// resonance when the Fock cutoff goes from 1 to 2.
pub fn cutoff_convergence(p: &SystemParams) -> purcell_core::Result<f64> {
    let emission = |cutoff: usize| -> purcell_core::Result<f64> {
        let mut q = p.clone();
        q.fock_cutoff = cutoff;
        q.delta_cav = q.laser_397.detuning;
        let l = Liouvillian::assemble(&atom::build_hamiltonian(&q)?, &atom::build_collapse_ops(&q)?)?;
        Ok(expect(&atom::cavity_emission_observable(&q)?, &steady_state(&l)?)?.re)
    };
    let (a, b) = (emission(1)?, emission(2)?);
    Ok((a / b - 1.0).abs())
}

/// Renders a short unbroadened scan sequentially and on `threads` workers;
/// true if the CSV text is identical.
pub fn csv_deterministic(p: &SystemParams, threads: usize) -> purcell_core::Result<bool> {
    let opts = ScanOptions {
        broaden: false,
        ..ScanOptions::default()
    };
    let model = ScanModel::new(p, &opts)?;
    let grid: Vec<f64> = (0..9).map(|k| p.laser_397.detuning + mhz_2pi(5.0 * (k as f64 - 4.0))).collect();
    let pool = RayonExecutor::new(threads).map_err(|e| purcell_core::Error::InvalidInput(e.to_string()))?;
    let a = model.spectra(&grid, 0.0, 1, &Sequential)?;
    let b = model.spectra(&grid, 0.0, 1, &pool)?;
    Ok(spectrum_table(&a.0).render() == spectrum_table(&b.0).render()
        && spectrum_table(&a.1).render() == spectrum_table(&b.1).render())
}

/// Runs every check at the given parameters.
pub fn run_all(p: &SystemParams) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(match cg_orthonormality_defect() {
        Ok(d) => check("cg_orthonormality", d, 1e-12, "max defect"),
        Err(e) => failed("cg_orthonormality", e),
    });
    out.push(match liouvillian_direct_form_defect(p) {
        Ok(d) => check("liouvillian_direct_form", d, 1e-12, "relative difference"),
        Err(e) => failed("liouvillian_direct_form", e),
    });
    out.push(match two_level_defect() {
        Ok(d) => check("two_level_steady_state", d, 1e-9, "|Δρ_ee|"),
        Err(e) => failed("two_level_steady_state", e),
    });
    match steady_state_defects(p) {
        Ok((t, h, n)) => {
            out.push(check("steady_state_trace", t, 1e-10, "|tr ρ − 1|"));
            out.push(check("steady_state_hermitian", h, 1e-10, "max |ρ − ρ†|"));
            out.push(check("steady_state_positive", n, 1e-8, "−λ_min"));
        }
        Err(e) => out.push(failed("steady_state_invariants", e)),
    }
    out.push(match eq1_defect() {
        Ok(d) => check("eq1_vs_rate_equations", d, 0.02, "max relative error"),
        Err(e) => failed("eq1_vs_rate_equations", e),
    });
    out.push(match cutoff_convergence(p) {
        Ok(d) => check("fock_cutoff_convergence", d, 0.02, "relative change 1 → 2"),
        Err(e) => failed("fock_cutoff_convergence", e),
    });
    out.push(match csv_deterministic(p, 3) {
        Ok(same) => Check {
            name: "csv_thread_determinism",
            passed: same,
            detail: format!("sequential vs 3 threads identical: {same}"),
        },
        Err(e) => failed("csv_thread_determinism", e),
    });
    out
}
