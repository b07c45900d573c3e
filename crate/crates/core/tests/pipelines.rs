use purcell_core::atom::{self, SystemParams};
use purcell_core::exec::Sequential;
use purcell_core::experiments::*;
use purcell_core::lindblad::{expect, steady_state, Liouvillian};
use purcell_core::units::mhz_2pi;

fn unbroadened() -> TransientOptions {
    TransientOptions {
        broaden: false,
        ..TransientOptions::default()
    }
}

#[test]
fn uncoupled_cavity_on_matches_cavity_off() {
    let mut p = SystemParams::measured_defaults();
    p.g_bar = 0.0;
    let on = shelving_transient(&p, true, &TransientOptions::default()).unwrap();
    let off = shelving_transient(&p, false, &TransientOptions::default()).unwrap();
    assert!((on.tau_fit / off.tau_fit - 1.0).abs() < 0.01);
}

#[test]
fn shelving_speeds_up_with_coupling() {
    let mut last = f64::INFINITY;
    for g in [2.0, 4.0, 6.0, 8.0] {
        let mut p = SystemParams::measured_defaults();
        p.g_bar = mhz_2pi(g);
        let tau = shelving_transient(&p, true, &unbroadened()).unwrap().tau_fit;
        assert!(tau < last, "ḡ₀/2π = {g}: τ = {tau}");
        last = tau;
    }
}

#[test]
fn transient_fit_describes_the_curve() {
    let p = SystemParams::measured_defaults();
    let t = shelving_transient(&p, false, &TransientOptions::default()).unwrap();
    assert_eq!(t.times.len(), 200);
    assert_eq!(t.sigma_applied, 0.0);
    let worst = t
        .times
        .iter()
        .zip(&t.rate)
        .filter(|(x, _)| **x > 0.1 * t.tau_fit)
        .map(|(x, y)| (t.amplitude * (-x / t.tau_fit).exp() + t.offset - y).abs())
        .fold(0.0f64, f64::max);
    assert!(worst < 0.02 * t.rate[0], "{worst} of {}", t.rate[0]);
}

#[test]
fn calibration_recovers_planted_rabi_frequency() {
    let mut p = SystemParams::measured_defaults();
    p.laser_397.rabi = mhz_2pi(14.0);
    let opts = CalibrationOptions::default();
    let target = shelving_transient(&p, false, &opts.transient).unwrap().tau_fit;
    p.laser_397.rabi = mhz_2pi(30.0);
    let omega = calibrate_omega397(&p, target, &opts).unwrap();
    assert!((omega / mhz_2pi(14.0) - 1.0).abs() < 0.01, "{}", omega / mhz_2pi(1.0));
}

#[test]
fn calibration_reports_unbracketed_target() {
    let p = SystemParams::measured_defaults();
    let e = calibrate_omega397(&p, 1e-3, &CalibrationOptions::default()).unwrap_err();
    assert!(matches!(e, purcell_core::Error::Calibration(_)));
}

#[test]
fn broadening_widens_the_emission_line() {
    let p = SystemParams::measured_defaults();
    let model = ScanModel::new(&p, &ScanOptions::default()).unwrap();
    let grid = raman_grid(&p, mhz_2pi(50.0), 41);
    let mut last = 0.0;
    for s in [0.0, 2.0, 4.0] {
        let (cav, _) = model.spectra(&grid, mhz_2pi(s), 15, &Sequential).unwrap();
        let w = fit_lorentzian(&cav.detunings, &cav.values).unwrap().hwhm;
        assert!(w > last, "σ = {s}: {w}");
        last = w;
    }
}

#[test]
fn far_detuned_baseline_matches_uncoupled_ion() {
    let p = SystemParams::measured_defaults();
    let model = ScanModel::new(&p, &ScanOptions::default()).unwrap();
    let mut q = p.clone();
    q.g_bar = 0.0;
    let l = Liouvillian::assemble(&atom::build_hamiltonian(&q).unwrap(), &atom::build_collapse_ops(&q).unwrap()).unwrap();
    let free = expect(&atom::uv_fluorescence_observable(&q, true).unwrap(), &steady_state(&l).unwrap())
        .unwrap()
        .re;
    assert!((model.baseline() / free - 1.0).abs() < 0.01);
}

#[test]
fn uncoupled_scan_is_flat() {
    let mut p = SystemParams::measured_defaults();
    p.g_bar = 0.0;
    let grid = raman_grid(&p, mhz_2pi(20.0), 9);
    let (cav, uv) = cavity_scan(&p, &grid, &ScanOptions::default()).unwrap();
    assert!(cav.values.iter().all(|v| v.abs() < 1e-12));
    assert!(uv.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
}

#[test]
fn scan_rejects_grid_missing_resonance() {
    let p = SystemParams::measured_defaults();
    let grid: Vec<f64> = (0..9).map(|k| mhz_2pi(10.0 + k as f64)).collect();
    assert!(cavity_scan(&p, &grid, &ScanOptions::default()).is_err());
}

#[test]
fn tabulated_width_matches_exact_solves() {
    let p = SystemParams::measured_defaults();
    let tab = InversionOptions::default();
    let exact = InversionOptions {
        delta_surface: DeltaSurface::Exact,
        ..tab.clone()
    };
    for (g, s) in [(4.0, 1.0), (6.5, 4.5)] {
        let (ta, da) = forward_observables(&p, mhz_2pi(g), mhz_2pi(s), &tab).unwrap();
        let (tb, db) = forward_observables(&p, mhz_2pi(g), mhz_2pi(s), &exact).unwrap();
        assert_eq!(ta, tb);
        assert!((da / db - 1.0).abs() < 1e-3, "{da} vs {db}");
    }
}

#[test]
fn inversion_without_crossing_returns_both_contours() {
    let p = SystemParams::measured_defaults();
    let opts = InversionOptions {
        grid: InversionGrid {
            g_bar: (mhz_2pi(4.0), mhz_2pi(6.0)),
            sigma: (mhz_2pi(2.0), mhz_2pi(4.0)),
            n_g: 2,
            n_sigma: 2,
        },
        refine: None,
        ..InversionOptions::default()
    };
    match invert_parameters(5e-6, mhz_2pi(10.3), &p, &opts) {
        Err(purcell_core::Error::Inversion { tau_contour, delta_contour }) => {
            assert!(tau_contour.is_empty());
            assert!(!delta_contour.is_empty());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn suppression_sweep_orders_photon_counts() {
    let p = SystemParams::measured_defaults();
    let grid = raman_grid(&p, mhz_2pi(20.0), 9);
    let opts = ScanOptions {
        broaden: false,
        ..ScanOptions::default()
    };
    let pts = suppression_sweep(&p, &[mhz_2pi(-10.0), mhz_2pi(0.0)], &grid, &opts).unwrap();
    assert_eq!(pts.len(), 2);
    for pt in &pts {
        assert!(pt.uv397_only >= pt.combined);
        assert!(pt.combined > 0.0 && pt.uv397_only < 1.0);
    }
}
