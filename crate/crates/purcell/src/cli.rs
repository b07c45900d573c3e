use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use purcell_core::effective::{effective_rates_from_full, eq1_table};
use purcell_core::experiments::{
    analyze_scan, cavity_scan_with, invert_parameters_with, raman_grid, shelving_transient_with,
    suppression_sweep_with,
};
use purcell_core::units::{to_mhz_2pi, to_ns};

use crate::config::{load_config, RunConfig, CONFIG_ENV};
use crate::csv::{self, Table};
use crate::CliError;
use crate::exec::RayonExecutor;
use crate::validate;

#[derive(Debug, Parser)]
#[command(name = "purcell", version, about = "Cavity-modified emission of a trapped 40Ca+ ion")]
pub struct Cli {
    /// Configuration file (falls back to $PURCELL_CONFIG, then built-in defaults).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks the number of CPUs.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shelving transient after the repumpers switch off; fits τ.
    Shelve {
        #[arg(long, value_enum)]
        cavity: Option<OnOff>,
        #[arg(long = "include-393", value_name = "BOOL")]
        include_393: Option<bool>,
    },
    /// Cavity-detuning scan of cavity emission and normalized UV fluorescence.
    Scan {
        #[arg(long = "include-393", value_name = "BOOL")]
        include_393: Option<bool>,
    },
    /// Infers (ḡ₀, σ) from the measured τ_on and δ.
    Invert,
    /// Maximum UV suppression against the 850 nm detuning.
    Suppress,
    /// Closed-form normalized fluorescence over a (v, w) grid.
    Eq1,
    /// Runs the invariant checks.
    Validate,
    /// Prints the resolved configuration.
    Config,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let cfg = match path {
        Some(p) => load_config(&p)?,
        None => RunConfig::default(),
    };
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io {
        path: dir.clone(),
        source: e,
    })?;
    Ok(dir)
}

fn emit(table: Table, command: &str, cfg: &RunConfig, path: &Path) -> Result<(), CliError> {
    table.with_run(command, cfg).write(path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = resolve_config(cli)?;
    let exec = RayonExecutor::new(cli.threads).map_err(|e| CliError::Usage(e.to_string()))?;
    match &cli.command {
        Command::Config => {
            print!("{}", cfg.echo());
        }
        Command::Shelve { cavity, include_393 } => {
            if let Some(c) = cavity {
                set_resolved(&mut cfg, "shelve.cavity", if *c == OnOff::On { "on" } else { "off" });
                cfg.shelve_cavity_on = *c == OnOff::On;
            }
            if let Some(b) = include_393 {
                set_resolved(&mut cfg, "shelve.include_393", if *b { "true" } else { "false" });
                cfg.transient.include_393 = *b;
            }
            let dir = out_dir(cli, &cfg)?;
            let tr = shelving_transient_with(&cfg.params, cfg.shelve_cavity_on, &cfg.transient, &exec)?;
            let tag = if tr.cavity_on { "on" } else { "off" };
            println!(
                "tau_{tag} = {:.1} ns (± {:.1} ns fit), sigma applied = {:.3} MHz",
                to_ns(tr.tau_fit),
                to_ns(tr.tau_stderr),
                to_mhz_2pi(tr.sigma_applied)
            );
            emit(csv::transient_table(&tr), "shelve", &cfg, &dir.join(format!("shelve_cavity_{tag}.csv")))?;
        }
        Command::Scan { include_393 } => {
            if let Some(b) = include_393 {
                set_resolved(&mut cfg, "scan.include_393", if *b { "true" } else { "false" });
                cfg.scan.include_393 = *b;
            }
            let dir = out_dir(cli, &cfg)?;
            let grid = raman_grid(&cfg.params, cfg.scan_half_span, cfg.scan_points);
            let (cav, uv) = cavity_scan_with(&cfg.params, &grid, &cfg.scan, &exec)?;
            let a = analyze_scan(&cav, &uv)?;
            println!(
                "delta = {:.3} MHz (± {:.3}), centre = {:.3} MHz, cavity peak = {:.3} MHz, UV dip = {:.3} MHz, \
                 suppression = {:.3}, correlation = {:.3}",
                to_mhz_2pi(a.fit.hwhm),
                to_mhz_2pi(a.fit.hwhm_stderr),
                to_mhz_2pi(a.fit.center),
                to_mhz_2pi(a.cavity_peak),
                to_mhz_2pi(a.uv_dip),
                a.suppression(),
                a.correlation
            );
            let mut t = csv::spectrum_table(&cav);
            t.meta_num("fit.hwhm_over_2pi_MHz", to_mhz_2pi(a.fit.hwhm))
                .meta_num("fit.hwhm_stderr_over_2pi_MHz", to_mhz_2pi(a.fit.hwhm_stderr))
                .meta_num("fit.center_over_2pi_MHz", to_mhz_2pi(a.fit.center));
            emit(t, "scan", &cfg, &dir.join("scan_cavity_emission.csv"))?;
            let mut t = csv::spectrum_table(&uv);
            t.meta_num("suppression", a.suppression())
                .meta_num("correlation", a.correlation);
            emit(t, "scan", &cfg, &dir.join("scan_uv_fluorescence.csv"))?;
        }
        Command::Invert => {
            let dir = out_dir(cli, &cfg)?;
            let r = invert_parameters_with(cfg.tau_on_meas, cfg.delta_meas, &cfg.params, &cfg.inversion, &exec)?;
            println!(
                "g_bar = {:.3} MHz, sigma = {:.3} MHz, residual = {:.2e}",
                to_mhz_2pi(r.g_bar),
                to_mhz_2pi(r.sigma),
                r.residual
            );
            let mut t = csv::surfaces_table(&r.surfaces);
            t.meta_num("result.g_bar_over_2pi_MHz", to_mhz_2pi(r.g_bar))
                .meta_num("result.sigma_over_2pi_MHz", to_mhz_2pi(r.sigma))
                .meta_num("result.residual", r.residual);
            emit(t, "invert", &cfg, &dir.join("invert_surfaces.csv"))?;
            emit(
                csv::contours_table(&r.tau_contour, &r.delta_contour),
                "invert",
                &cfg,
                &dir.join("invert_contours.csv"),
            )?;
        }
        Command::Suppress => {
            let dir = out_dir(cli, &cfg)?;
            let grid = raman_grid(&cfg.params, cfg.scan_half_span, cfg.scan_points);
            let pts = suppression_sweep_with(&cfg.params, &cfg.delta_850_list, &grid, &cfg.scan, &exec)?;
            for p in &pts {
                println!(
                    "delta_850 = {:+.2} MHz: suppression {:.3} (397+393), {:.3} (397 only)",
                    to_mhz_2pi(p.delta_850),
                    p.combined,
                    p.uv397_only
                );
            }
            let best = pts.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.combined));
            println!("maximum suppression = {best:.3}");
            let mut t = csv::suppression_table(&pts);
            t.meta_num("max_suppression_combined", best);
            emit(t, "suppress", &cfg, &dir.join("suppress.csv"))?;
        }
        Command::Eq1 => {
            let dir = out_dir(cli, &cfg)?;
            let (gamma1, pump) = match cfg.eq1_pump {
                Some(v) => (cfg.params.decay.p12_s12, v),
                None => {
                    let r = effective_rates_from_full(&cfg.params)?;
                    (r.gamma1, r.pump)
                }
            };
            let n = cfg.eq1_points;
            let vs: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
            let ws: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
            let rows = eq1_table(&vs, &ws, gamma1, pump)?;
            println!("Gamma1 = {gamma1:.4e} /s, V = {pump:.4e} /s");
            print!("{:>6}", "v\\w");
            for w in &ws {
                print!(" {w:>6.3}");
            }
            println!();
            for (i, v) in vs.iter().enumerate() {
                print!("{v:>6.3}");
                for j in 0..ws.len() {
                    print!(" {:>6.3}", rows[i * ws.len() + j].2);
                }
                println!();
            }
            let mut t = csv::eq1_table(&rows);
            t.meta_num("gamma1_per_s", gamma1).meta_num("pump_per_s", pump);
            emit(t, "eq1", &cfg, &dir.join("eq1.csv"))?;
        }
        Command::Validate => {
            let checks = validate::run_all(&cfg.params);
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Err(CliError::Core(purcell_core::Error::Analysis("invariant checks failed".into())));
            }
        }
    }
    Ok(())
}

fn set_resolved(cfg: &mut RunConfig, key: &str, value: &str) {
    if let Some(r) = cfg.resolved.iter_mut().find(|r| r.name == key) {
        r.value = value.to_string();
        r.defaulted = false;
    }
}
