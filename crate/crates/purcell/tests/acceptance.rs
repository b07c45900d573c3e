//! Acceptance criteria at their stated tolerances. One PASS/FAIL line per
//! criterion; exits nonzero if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use purcell::config::{load_config, RunConfig};
use purcell::exec::RayonExecutor;
use purcell::validate;
use purcell_core::experiments::{
    analyze_scan, cavity_scan_with, forward_observables, invert_parameters_with, raman_grid,
    shelving_transient_with, suppression_sweep_with, InversionGrid, InversionOptions,
};
use purcell_core::units::{mhz_2pi, to_mhz_2pi, to_ns};

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn default_config() -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.cfg");
    load_config(&path).expect("shipped default config")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

fn failure(name: &'static str, e: impl std::fmt::Display) -> Outcome {
    Outcome {
        name,
        passed: false,
        detail: format!("error: {e}"),
    }
}

fn tau_off(cfg: &RunConfig, exec: &RayonExecutor) -> (Outcome, Option<f64>) {
    let name = "1 purcell transient, cavity off";
    let (r, dt) = timed(|| shelving_transient_with(&cfg.params, false, &cfg.transient, exec));
    match r {
        Ok(t) => {
            let ns = to_ns(t.tau_fit);
            let passed = within(ns, 1246.0, 0.15) && dt < Duration::from_secs(60);
            let detail = format!("tau_off = {ns:.1} ns (target 1246 ± 15%), runtime {:.1} s (< 60 s)", dt.as_secs_f64());
            (Outcome { name, passed, detail }, Some(t.tau_fit))
        }
        Err(e) => (failure(name, e), None),
    }
}

fn tau_on(cfg: &RunConfig, exec: &RayonExecutor, off: Option<f64>) -> Outcome {
    let name = "2 purcell transient, cavity on";
    let mut p = cfg.params.clone();
    p.g_bar = mhz_2pi(5.3);
    p.sigma_inhom = mhz_2pi(3.1);
    p.laser_397.detuning = mhz_2pi(-11.4);
    p.delta_cav = mhz_2pi(-11.4);
    match shelving_transient_with(&p, true, &cfg.transient, exec) {
        Ok(t) => {
            let ns = to_ns(t.tau_fit);
            let ratio = off.map_or(f64::NAN, |o| o / t.tau_fit);
            Outcome {
                name,
                passed: within(ns, 292.0, 0.15) && ratio > 4.0,
                detail: format!("tau_on = {ns:.1} ns (target 292 ± 15%), tau_off/tau_on = {ratio:.3} (> 4)"),
            }
        }
        Err(e) => failure(name, e),
    }
}

fn spectrum_width(cfg: &RunConfig, exec: &RayonExecutor) -> Outcome {
    let name = "3 spectrum widths";
    let grid = raman_grid(&cfg.params, cfg.scan_half_span, cfg.scan_points);
    let r = cavity_scan_with(&cfg.params, &grid, &cfg.scan, exec).and_then(|(c, u)| analyze_scan(&c, &u));
    match r {
        Ok(a) => {
            let delta = to_mhz_2pi(a.fit.hwhm);
            let steps = a.extremum_offset_steps();
            Outcome {
                name,
                passed: within(delta, 10.3, 0.10) && steps <= 1.0 + 1e-9,
                detail: format!(
                    "delta = {delta:.3} MHz (target 10.3 ± 10%), UV minimum vs emission maximum {steps:.2} grid steps (≤ 1)"
                ),
            }
        }
        Err(e) => failure(name, e),
    }
}

fn inversion(cfg: &RunConfig, exec: &RayonExecutor) -> Outcome {
    let name = "4a inversion of (292 ns, 10.3 MHz)";
    let (r, dt) = timed(|| invert_parameters_with(292e-9, mhz_2pi(10.3), &cfg.params, &cfg.inversion, exec));
    match r {
        Ok(r) => {
            let (g, s) = (to_mhz_2pi(r.g_bar), to_mhz_2pi(r.sigma));
            Outcome {
                name,
                passed: (5.0..=5.6).contains(&g) && (2.7..=3.5).contains(&s) && dt < Duration::from_secs(1800),
                detail: format!(
                    "g_bar = {g:.3} MHz ∈ [5.0, 5.6], sigma = {s:.3} MHz ∈ [2.7, 3.5], runtime {:.0} s (< 1800 s, {} threads)",
                    dt.as_secs_f64(),
                    exec.threads()
                ),
            }
        }
        Err(e) => failure(name, e),
    }
}

fn round_trip(cfg: &RunConfig, exec: &RayonExecutor) -> Outcome {
    let name = "4b synthetic round-trip inversion";
    let opts = InversionOptions {
        grid: InversionGrid {
            g_bar: (mhz_2pi(3.0), mhz_2pi(5.0)),
            sigma: (mhz_2pi(1.0), mhz_2pi(3.0)),
            n_g: 5,
            n_sigma: 5,
        },
        refine: None,
        ..cfg.inversion.clone()
    };
    let (g0, s0) = (mhz_2pi(4.0), mhz_2pi(2.0));
    let cell_g = (opts.grid.g_bar.1 - opts.grid.g_bar.0) / (opts.grid.n_g - 1) as f64;
    let cell_s = (opts.grid.sigma.1 - opts.grid.sigma.0) / (opts.grid.n_sigma - 1) as f64;
    let r = forward_observables(&cfg.params, g0, s0, &opts)
        .and_then(|(tau, delta)| invert_parameters_with(tau, delta, &cfg.params, &opts, exec));
    match r {
        Ok(r) => {
            let (eg, es) = ((r.g_bar - g0).abs() / cell_g, (r.sigma - s0).abs() / cell_s);
            Outcome {
                name,
                passed: eg <= 1.0 && es <= 1.0,
                detail: format!(
                    "planted (4.000, 2.000) MHz, recovered ({:.3}, {:.3}) MHz, error ({eg:.3}, {es:.3}) cells (≤ 1)",
                    to_mhz_2pi(r.g_bar),
                    to_mhz_2pi(r.sigma)
                ),
            }
        }
        Err(e) => failure(name, e),
    }
}

fn suppression(cfg: &RunConfig, exec: &RayonExecutor) -> Outcome {
    let name = "5 suppression against delta_850";
    let grid = raman_grid(&cfg.params, cfg.scan_half_span, cfg.scan_points);
    match suppression_sweep_with(&cfg.params, &cfg.delta_850_list, &grid, &cfg.scan, exec) {
        Ok(pts) => {
            let best = pts.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.combined));
            let ordered = pts.iter().all(|p| p.uv397_only >= p.combined);
            Outcome {
                name,
                passed: best >= 0.60 && (best - 0.66).abs() <= 0.05 && ordered,
                detail: format!(
                    "max suppression = {best:.3} (≥ 0.60, within 0.05 of 0.66), 397-only ≥ combined at all {} points: {ordered}",
                    pts.len()
                ),
            }
        }
        Err(e) => failure(name, e),
    }
}

fn cooperativity(cfg: &RunConfig) -> Outcome {
    let mut p = cfg.params.clone();
    p.g_bar = mhz_2pi(5.3);
    p.kappa = mhz_2pi(4.2);
    let c = p.cooperativity();
    Outcome {
        name: "6 cooperativity",
        passed: (c - 0.30).abs() <= 0.03,
        detail: format!("C = {c:.4} (target 0.30 ± 0.03)"),
    }
}

fn property_suite(cfg: &RunConfig) -> Vec<Outcome> {
    validate::run_all(&cfg.params)
        .into_iter()
        .map(|c| Outcome {
            name: c.name,
            passed: c.passed,
            detail: c.detail,
        })
        .collect()
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let cfg = default_config();
    let exec = RayonExecutor::new(0).expect("thread pool");
    let mut all = Vec::new();
    let mut report = |o: Outcome| {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        all.push(o.passed);
    };

    let (off, tau) = tau_off(&cfg, &exec);
    report(off);
    report(tau_on(&cfg, &exec, tau));
    report(spectrum_width(&cfg, &exec));
    report(inversion(&cfg, &exec));
    report(round_trip(&cfg, &exec));
    report(suppression(&cfg, &exec));
    report(cooperativity(&cfg));
    for o in property_suite(&cfg) {
        report(Outcome {
            name: "7 property suite",
            detail: format!("{}: {}", o.name, o.detail),
            ..o
        });
    }

    let failed = all.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", all.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
