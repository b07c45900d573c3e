//! CSV tables with a `#` metadata block.
//!
//! Numbers are written as `{:.8e}` (9 significant digits), so output is a
//! pure function of the values and re-parsing then re-writing a file
//! reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use purcell_core::experiments::{Spectrum, SuppressionPoint, Surfaces, Transient};
use purcell_core::units::{to_mhz_2pi, to_ns};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// `key = value` pairs written as `# key = value`.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub fn format_num(v: f64) -> String {
    format!("{v:.8e}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn meta_num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.meta(key, format_num(value))
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Run metadata plus the fully resolved configuration.
    pub fn with_run(mut self, command: &str, cfg: &RunConfig) -> Self {
        let mut head = vec![
            ("generator".to_string(), format!("purcell {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), command.to_string()),
            ("schema".to_string(), cfg.schema.clone()),
        ];
        for r in &cfg.resolved {
            let mut v = r.value.clone();
            if r.defaulted {
                v.push_str(" (default)");
            }
            head.push((format!("config.{}", r.name), v));
        }
        head.append(&mut self.metadata);
        self.metadata = head;
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_num(*v),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Parses [`Table::render`] output. Cells that parse as numbers become
    /// [`Cell::Num`].
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut t = Table::default();
        let mut header = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if let Some(m) = line.strip_prefix("# ") {
                if header {
                    return Err(CliError::Csv {
                        line: n,
                        message: "metadata after header".into(),
                    });
                }
                let (k, v) = m.split_once(" = ").ok_or_else(|| CliError::Csv {
                    line: n,
                    message: "metadata line without ` = `".into(),
                })?;
                t.metadata.push((k.to_string(), v.to_string()));
            } else if !header {
                t.columns = line.split(',').map(str::to_string).collect();
                header = true;
            } else {
                let row: Vec<Cell> = line
                    .split(',')
                    .map(|c| c.parse::<f64>().map_or_else(|_| Cell::Text(c.to_string()), Cell::Num))
                    .collect();
                if row.len() != t.columns.len() {
                    return Err(CliError::Csv {
                        line: n,
                        message: format!("{} cells for {} columns", row.len(), t.columns.len()),
                    });
                }
                t.rows.push(row);
            }
        }
        if !header {
            return Err(CliError::Csv {
                line: 0,
                message: "no header row".into(),
            });
        }
        Ok(t)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::Num(v) => Some(*v),
                Cell::Text(_) => None,
            })
            .collect()
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn spectrum_table(s: &Spectrum) -> Table {
    let mut t = Table::new(&["detuning_over_2pi_MHz", "value", "kind"]);
    t.meta_num("sigma_applied_over_2pi_MHz", to_mhz_2pi(s.sigma_applied));
    for (d, v) in s.detunings.iter().zip(&s.values) {
        t.push(vec![to_mhz_2pi(*d).into(), (*v).into(), s.kind.label().into()]);
    }
    t
}

pub fn transient_table(tr: &Transient) -> Table {
    let mut t = Table::new(&["time_ns", "rate_per_s"]);
    t.meta("cavity", if tr.cavity_on { "on" } else { "off" })
        .meta_num("sigma_applied_over_2pi_MHz", to_mhz_2pi(tr.sigma_applied))
        .meta_num("fit.tau_ns", to_ns(tr.tau_fit))
        .meta_num("fit.tau_stderr_ns", to_ns(tr.tau_stderr))
        .meta_num("fit.amplitude_per_s", tr.amplitude)
        .meta_num("fit.offset_per_s", tr.offset);
    for (x, y) in tr.times.iter().zip(&tr.rate) {
        t.push(vec![to_ns(*x).into(), (*y).into()]);
    }
    t
}

pub fn surfaces_table(passes: &[Surfaces]) -> Table {
    let mut t = Table::new(&["pass", "g_bar_over_2pi_MHz", "sigma_over_2pi_MHz", "tau_on_ns", "delta_over_2pi_MHz"]);
    for (k, s) in passes.iter().enumerate() {
        let ns = s.sigma_axis.len();
        for (i, g) in s.g_axis.iter().enumerate() {
            for (j, sg) in s.sigma_axis.iter().enumerate() {
                t.push(vec![
                    (k as f64).into(),
                    to_mhz_2pi(*g).into(),
                    to_mhz_2pi(*sg).into(),
                    to_ns(s.tau_on[i * ns + j]).into(),
                    to_mhz_2pi(s.delta[i * ns + j]).into(),
                ]);
            }
        }
    }
    t
}

pub fn contours_table(tau: &[Vec<(f64, f64)>], delta: &[Vec<(f64, f64)>]) -> Table {
    let mut t = Table::new(&["contour", "segment", "g_bar_over_2pi_MHz", "sigma_over_2pi_MHz"]);
    for (name, lines) in [("tau_on", tau), ("delta", delta)] {
        for (k, line) in lines.iter().enumerate() {
            for (g, s) in line {
                t.push(vec![name.into(), (k as f64).into(), to_mhz_2pi(*g).into(), to_mhz_2pi(*s).into()]);
            }
        }
    }
    t
}

pub fn suppression_table(points: &[SuppressionPoint]) -> Table {
    let mut t = Table::new(&["delta_850_over_2pi_MHz", "suppression_combined", "suppression_397_only"]);
    for p in points {
        t.push(vec![to_mhz_2pi(p.delta_850).into(), p.combined.into(), p.uv397_only.into()]);
    }
    t
}

pub fn eq1_table(rows: &[(f64, f64, f64)]) -> Table {
    let mut t = Table::new(&["v", "w", "normalized_fluorescence"]);
    for (v, w, f) in rows {
        t.push(vec![(*v).into(), (*w).into(), (*f).into()]);
    }
    t
}
