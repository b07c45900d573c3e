//! Line-oriented `key = value unit` configuration files.
//!
//! ```text
//! schema = purcell/1
//!
//! [lasers]
//! omega_397 = 18.2 MHz_2pi
//! delta_397 = -11.4 MHz_2pi
//! ```
//!
//! Frequencies are written as ν = ω/2π in MHz (`MHz_2pi`, or plain `MHz`
//! which means the same) and converted to rad/s on load. Rates use
//! `per_s`, fields `G` or `T`, times `ns` or `us`. Every dimensioned key
//! must carry its unit. Missing keys take the defaults in [`SCHEMA`] and are
//! listed in [`RunConfig::resolved`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use purcell_core::atom::{AtomicRates, RabiNormalization, SystemParams};
use purcell_core::experiments::{DeltaSurface, InversionGrid, InversionOptions, ScanOptions, TransientOptions};
use purcell_core::lindblad::EvolveOptions;
use purcell_core::units::{mhz_2pi, GAUSS};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "purcell/1";

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "PURCELL_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Frequency,
    FrequencyList,
    Rate,
    RateOrAuto,
    Field,
    Time,
    Real,
    Count,
    Flag,
    Choice(&'static [&'static str]),
    Text,
}

struct Key {
    section: &'static str,
    name: &'static str,
    kind: Kind,
    default: &'static str,
}

const fn key(section: &'static str, name: &'static str, kind: Kind, default: &'static str) -> Key {
    Key {
        section,
        name,
        kind,
        default,
    }
}

use Kind::*;

/// Every accepted key with its default, in echo order.
const SCHEMA: &[Key] = &[
    key("lasers", "omega_397", Frequency, "18.2 MHz_2pi"),
    key("lasers", "delta_397", Frequency, "-11.4 MHz_2pi"),
    key("lasers", "omega_850", Frequency, "6.5 MHz_2pi"),
    key("lasers", "delta_850", Frequency, "-1.1 MHz_2pi"),
    key("lasers", "omega_854", Frequency, "8.9 MHz_2pi"),
    key("lasers", "delta_854", Frequency, "24.8 MHz_2pi"),
    key("cavity", "g_bar", Frequency, "5.3 MHz_2pi"),
    key("cavity", "kappa", Frequency, "4.2 MHz_2pi"),
    key("cavity", "sigma", Frequency, "3.1 MHz"),
    key("cavity", "delta_cav", Frequency, "-11.4 MHz_2pi"),
    key("cavity", "modes", Count, "2"),
    key("cavity", "fock_cutoff", Count, "1"),
    key("atom", "b_field", Field, "0.78 G"),
    key("atom", "gamma_p12_s12", Rate, "1.35523e8 per_s"),
    key("atom", "gamma_p12_d32", Rate, "9.3207e6 per_s"),
    key("atom", "gamma_p32_s12", Rate, "1.40789e8 per_s"),
    key("atom", "gamma_p32_d32", Rate, "9.956e5 per_s"),
    key("atom", "gamma_p32_d52", Rate, "8.8417e6 per_s"),
    key("atom", "normalization", Choice(&["reduced", "strongest"]), "reduced"),
    key("shelve", "cavity", Choice(&["on", "off"]), "off"),
    key("shelve", "points", Count, "200"),
    key("shelve", "probe_window", Time, "10 us"),
    key("shelve", "window_factor", Real, "5"),
    key("shelve", "broaden", Flag, "true"),
    key("shelve", "quadrature_nodes", Count, "15"),
    key("shelve", "include_393", Flag, "true"),
    key("shelve", "rtol", Real, "1e-8"),
    key("shelve", "atol", Real, "1e-10"),
    key("scan", "half_span", Frequency, "50 MHz_2pi"),
    key("scan", "points", Count, "41"),
    key("scan", "reference_offset", Frequency, "80 MHz_2pi"),
    key("scan", "broaden", Flag, "true"),
    key("scan", "quadrature_nodes", Count, "15"),
    key("scan", "include_393", Flag, "true"),
    key("invert", "tau_on", Time, "292 ns"),
    key("invert", "delta", Frequency, "10.3 MHz_2pi"),
    key("invert", "g_min", Frequency, "3 MHz_2pi"),
    key("invert", "g_max", Frequency, "8 MHz_2pi"),
    key("invert", "n_g", Count, "21"),
    key("invert", "sigma_min", Frequency, "0 MHz"),
    key("invert", "sigma_max", Frequency, "6 MHz"),
    key("invert", "n_sigma", Count, "21"),
    key("invert", "refine_points", Count, "11"),
    key("invert", "refine_cells", Real, "1.5"),
    key("invert", "table_step", Frequency, "0.25 MHz_2pi"),
    key("invert", "rtol", Real, "1e-6"),
    key("invert", "atol", Real, "1e-8"),
    key(
        "suppress",
        "delta_850",
        FrequencyList,
        "-25, -20, -15, -10, -5, 0, 5, 10, 15, 20, 25 MHz_2pi",
    ),
    key("eq1", "points", Count, "10"),
    key("eq1", "pump", RateOrAuto, "auto"),
    key("output", "dir", Text, "out"),
];

fn units(kind: Kind) -> &'static [&'static str] {
    match kind {
        Frequency | FrequencyList => &["MHz_2pi", "MHz"],
        Rate | RateOrAuto => &["per_s"],
        Field => &["G", "T"],
        Time => &["ns", "us"],
        _ => &[],
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Parsed {
    Number(f64),
    List(Vec<f64>),
    Auto,
    Word(String),
}

fn parse_value(kind: Kind, raw: &str) -> Result<Parsed, String> {
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("not a number: `{}`", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value `{}`", s.trim()))
        }
    };
    let split_unit = |s: &str| -> Result<(String, &'static str), String> {
        let allowed = units(kind);
        let (body, unit) = s
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| format!("missing unit (expected one of {})", allowed.join(", ")))?;
        let unit = allowed
            .iter()
            .find(|u| **u == unit)
            .ok_or_else(|| format!("unit `{unit}` not allowed here (expected one of {})", allowed.join(", ")))?;
        Ok((body.trim().to_string(), unit))
    };
    let convert = |body: &str, unit: &str| -> Result<f64, String> {
        let v = num(body)?;
        Ok(match unit {
            "MHz_2pi" | "MHz" => mhz_2pi(v),
            "G" => v * GAUSS,
            "ns" => v * 1e-9,
            "us" => v * 1e-6,
            _ => v,
        })
    };
    match kind {
        Frequency | Rate | Field | Time => {
            let (body, unit) = split_unit(raw)?;
            Ok(Parsed::Number(convert(&body, unit)?))
        }
        RateOrAuto if raw == "auto" => Ok(Parsed::Auto),
        RateOrAuto => {
            let (body, unit) = split_unit(raw)?;
            Ok(Parsed::Number(convert(&body, unit)?))
        }
        FrequencyList => {
            let (body, unit) = split_unit(raw)?;
            let v = body
                .split(',')
                .map(|s| convert(s, unit))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Parsed::List(v))
        }
        Real => {
            if raw.contains(char::is_whitespace) {
                return Err("dimensionless value takes no unit".into());
            }
            Ok(Parsed::Number(num(raw)?))
        }
        Count => raw
            .parse::<usize>()
            .map(|n| Parsed::Number(n as f64))
            .map_err(|_| format!("not a non-negative integer: `{raw}`")),
        Flag => match raw {
            "true" | "false" => Ok(Parsed::Word(raw.into())),
            _ => Err(format!("expected true or false, got `{raw}`")),
        },
        Choice(options) => {
            if options.contains(&raw) {
                Ok(Parsed::Word(raw.into()))
            } else {
                Err(format!("expected one of {}, got `{raw}`", options.join(", ")))
            }
        }
        Text => Ok(Parsed::Word(raw.into())),
    }
}

/// One resolved key for the metadata echo.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedKey {
    pub name: String,
    pub value: String,
    pub defaulted: bool,
}

/// A validated configuration with everything converted to SI angular units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schema: String,
    pub source: Option<PathBuf>,
    pub params: SystemParams,
    pub shelve_cavity_on: bool,
    pub transient: TransientOptions,
    pub scan: ScanOptions,
    pub scan_half_span: f64,
    pub scan_points: usize,
    /// Measured τ_on (s) and δ (rad/s) fed to the inversion.
    pub tau_on_meas: f64,
    pub delta_meas: f64,
    pub inversion: InversionOptions,
    pub delta_850_list: Vec<f64>,
    pub eq1_points: usize,
    /// `None` extracts the pump rate from the full model.
    pub eq1_pump: Option<f64>,
    pub output_dir: PathBuf,
    pub warnings: Vec<String>,
    pub resolved: Vec<ResolvedKey>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut c = parse_config("", None).expect("built-in defaults are valid");
        c.warnings.clear();
        c
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text, Some(path))
}

/// Parses configuration text; `source` only labels diagnostics and metadata.
pub fn parse_config(text: &str, source: Option<&Path>) -> Result<RunConfig, CliError> {
    let label = source.map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
    let err = |line: usize, key: &str, msg: String| CliError::Config {
        location: format!("{label}:{line}"),
        key: key.to_string(),
        message: msg,
    };

    let mut schema: Option<String> = None;
    let mut section = String::new();
    let mut values: BTreeMap<String, (Parsed, String)> = BTreeMap::new();
    let mut lines: BTreeMap<String, usize> = BTreeMap::new();
    let mut warnings = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(n, line, "unterminated section header".into()))?
                .trim();
            if !SCHEMA.iter().any(|k| k.section == name) {
                return Err(err(n, name, "unknown section".into()));
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(n, line, "expected `key = value`".into()))?;
        let (k, v) = (k.trim(), v.split_whitespace().collect::<Vec<_>>().join(" "));
        if section.is_empty() {
            if k != "schema" {
                return Err(err(n, k, "only `schema` may appear before the first section".into()));
            }
            if v != SCHEMA_VERSION {
                return Err(err(n, k, format!("unsupported schema `{v}` (expected {SCHEMA_VERSION})")));
            }
            schema = Some(v);
            continue;
        }
        let full = format!("{section}.{k}");
        let spec = SCHEMA
            .iter()
            .find(|s| s.section == section && s.name == k)
            .ok_or_else(|| err(n, &full, "unknown key".into()))?;
        if values.contains_key(&full) {
            return Err(err(n, &full, "duplicate key".into()));
        }
        let parsed = parse_value(spec.kind, &v).map_err(|m| err(n, &full, m))?;
        lines.insert(full.clone(), n);
        values.insert(full, (parsed, v));
    }

    if schema.is_none() {
        warnings.push(format!("no schema line; assuming {SCHEMA_VERSION}"));
    }
    if values.is_empty() {
        warnings.push("no keys set; using built-in defaults throughout".into());
    }

    let mut resolved = Vec::with_capacity(SCHEMA.len());
    let mut table: BTreeMap<String, Parsed> = BTreeMap::new();
    for spec in SCHEMA {
        let full = format!("{}.{}", spec.section, spec.name);
        let (parsed, raw, defaulted) = match values.remove(&full) {
            Some((p, raw)) => (p, raw, false),
            None => (
                parse_value(spec.kind, spec.default).expect("schema default parses"),
                spec.default.to_string(),
                true,
            ),
        };
        resolved.push(ResolvedKey {
            name: full.clone(),
            value: raw,
            defaulted,
        });
        table.insert(full, parsed);
    }

    let num = |k: &str| match &table[k] {
        Parsed::Number(v) => *v,
        other => unreachable!("{k}: {other:?}"),
    };
    let count = |k: &str| num(k) as usize;
    let word = |k: &str| match &table[k] {
        Parsed::Word(w) => w.clone(),
        other => unreachable!("{k}: {other:?}"),
    };
    let flag = |k: &str| word(k) == "true";
    let invalid = |k: &str, m: &str| CliError::Config {
        location: lines.get(k).map_or_else(|| label.clone(), |n| format!("{label}:{n}")),
        key: k.to_string(),
        message: m.to_string(),
    };

    for k in ["cavity.kappa", "atom.gamma_p12_s12", "atom.gamma_p12_d32"] {
        if !(num(k) > 0.0) {
            return Err(invalid(k, "must be > 0"));
        }
    }
    for k in [
        "lasers.omega_397",
        "lasers.omega_850",
        "lasers.omega_854",
        "cavity.g_bar",
        "cavity.sigma",
        "atom.gamma_p32_s12",
        "atom.gamma_p32_d32",
        "atom.gamma_p32_d52",
    ] {
        if !(num(k) >= 0.0) {
            return Err(invalid(k, "must be ≥ 0"));
        }
    }

    let mut params = SystemParams::measured_defaults();
    params.laser_397.rabi = num("lasers.omega_397");
    params.laser_397.detuning = num("lasers.delta_397");
    params.laser_850.rabi = num("lasers.omega_850");
    params.laser_850.detuning = num("lasers.delta_850");
    params.laser_854.rabi = num("lasers.omega_854");
    params.laser_854.detuning = num("lasers.delta_854");
    params.g_bar = num("cavity.g_bar");
    params.kappa = num("cavity.kappa");
    params.sigma_inhom = num("cavity.sigma");
    params.delta_cav = num("cavity.delta_cav");
    params.cavity_modes = count("cavity.modes");
    params.fock_cutoff = count("cavity.fock_cutoff");
    params.b_field = num("atom.b_field");
    params.decay = AtomicRates {
        p12_s12: num("atom.gamma_p12_s12"),
        p12_d32: num("atom.gamma_p12_d32"),
        p32_s12: num("atom.gamma_p32_s12"),
        p32_d32: num("atom.gamma_p32_d32"),
        p32_d52: num("atom.gamma_p32_d52"),
    };
    params.normalization = match word("atom.normalization").as_str() {
        "strongest" => RabiNormalization::StrongestChannel,
        _ => RabiNormalization::ReducedMatrixElement,
    };
    params
        .validate()
        .map_err(|e| CliError::Config {
            location: label.clone(),
            key: "[lasers]/[cavity]/[atom]".into(),
            message: e.to_string(),
        })?;

    let transient = TransientOptions {
        points: count("shelve.points"),
        probe_window: num("shelve.probe_window"),
        window_factor: num("shelve.window_factor"),
        broaden: flag("shelve.broaden"),
        quadrature_nodes: count("shelve.quadrature_nodes"),
        include_393: flag("shelve.include_393"),
        evolve: EvolveOptions {
            rtol: num("shelve.rtol"),
            atol: num("shelve.atol"),
            ..EvolveOptions::default()
        },
    };
    if transient.points < 8 {
        return Err(invalid("shelve.points", "at least 8 samples are needed for the fit"));
    }
    if !(transient.probe_window > 0.0) || !(transient.window_factor > 0.0) {
        return Err(invalid("shelve.probe_window", "window lengths must be > 0"));
    }
    if transient.quadrature_nodes == 0 {
        return Err(invalid("shelve.quadrature_nodes", "must be ≥ 1"));
    }
    if !(transient.evolve.rtol > 0.0) || !(transient.evolve.atol > 0.0) {
        return Err(invalid("shelve.rtol", "tolerances must be > 0"));
    }

    let scan = ScanOptions {
        include_393: flag("scan.include_393"),
        reference_offset: num("scan.reference_offset"),
        broaden: flag("scan.broaden"),
        quadrature_nodes: count("scan.quadrature_nodes"),
    };
    let scan_half_span = num("scan.half_span");
    let scan_points = count("scan.points");
    if !(scan_half_span > 0.0) {
        return Err(invalid("scan.half_span", "must be > 0"));
    }
    if scan_points < 5 {
        return Err(invalid("scan.points", "at least 5 points are needed for the Lorentzian fit"));
    }
    if scan.quadrature_nodes == 0 {
        return Err(invalid("scan.quadrature_nodes", "must be ≥ 1"));
    }

    let refine = count("invert.refine_points");
    let step = num("invert.table_step");
    let inversion = InversionOptions {
        grid: InversionGrid {
            g_bar: (num("invert.g_min"), num("invert.g_max")),
            sigma: (num("invert.sigma_min"), num("invert.sigma_max")),
            n_g: count("invert.n_g"),
            n_sigma: count("invert.n_sigma"),
        },
        refine: (refine > 0).then_some((refine, refine)),
        refine_cells: num("invert.refine_cells"),
        scan_half_span,
        scan_points,
        scan: scan.clone(),
        transient: TransientOptions {
            evolve: EvolveOptions {
                rtol: num("invert.rtol"),
                atol: num("invert.atol"),
                ..EvolveOptions::default()
            },
            ..transient.clone()
        },
        delta_surface: if step == 0.0 {
            DeltaSurface::Exact
        } else {
            DeltaSurface::Tabulated { step }
        },
    };
    let g = &inversion.grid;
    if g.n_g < 2 || g.n_sigma < 2 || !(g.g_bar.1 > g.g_bar.0) || !(g.sigma.1 > g.sigma.0) || g.g_bar.0 < 0.0 || g.sigma.0 < 0.0 {
        return Err(invalid("invert.g_min", "inversion grid needs min < max, values ≥ 0 and ≥ 2 points per axis"));
    }
    if refine == 1 {
        return Err(invalid("invert.refine_points", "use 0 (off) or ≥ 2"));
    }
    if step < 0.0 {
        return Err(invalid("invert.table_step", "must be ≥ 0 (0 solves every point exactly)"));
    }
    let tau_on_meas = num("invert.tau_on");
    let delta_meas = num("invert.delta");
    if !(tau_on_meas > 0.0) || !(delta_meas > 0.0) {
        return Err(invalid("invert.tau_on", "measured τ_on and δ must be > 0"));
    }

    let delta_850_list = match &table["suppress.delta_850"] {
        Parsed::List(v) => v.clone(),
        _ => unreachable!(),
    };
    let eq1_points = count("eq1.points");
    if eq1_points < 2 {
        return Err(invalid("eq1.points", "must be ≥ 2"));
    }
    let eq1_pump = match &table["eq1.pump"] {
        Parsed::Auto => None,
        Parsed::Number(v) if *v > 0.0 => Some(*v),
        _ => return Err(invalid("eq1.pump", "must be > 0 or `auto`")),
    };

    Ok(RunConfig {
        schema: schema.unwrap_or_else(|| SCHEMA_VERSION.to_string()),
        source: source.map(Path::to_path_buf),
        params,
        shelve_cavity_on: word("shelve.cavity") == "on",
        transient,
        scan,
        scan_half_span,
        scan_points,
        tau_on_meas,
        delta_meas,
        inversion,
        delta_850_list,
        eq1_points,
        eq1_pump,
        output_dir: PathBuf::from(word("output.dir")),
        warnings,
        resolved,
    })
}

impl RunConfig {
    /// The resolved configuration as config-file text; keys filled from
    /// defaults are marked.
    pub fn echo(&self) -> String {
        let mut out = format!("schema = {}\n", self.schema);
        let mut section = "";
        for (spec, r) in SCHEMA.iter().zip(&self.resolved) {
            if spec.section != section {
                section = spec.section;
                let _ = write!(out, "\n[{section}]\n");
            }
            let _ = write!(out, "{} = {}", spec.name, r.value);
            if r.defaulted {
                out.push_str("  # default");
            }
            out.push('\n');
        }
        out
    }

    /// The built-in defaults written as a config file.
    pub fn default_text() -> String {
        RunConfig::default()
            .echo()
            .lines()
            .map(|l| l.trim_end_matches("  # default"))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }
}
