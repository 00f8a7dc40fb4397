//! Serializable reports and their json/csv/table renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use shapley_r2::simlab::{BenchmarkRow, CoverageRow};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            other => Err(format!("unknown format '{other}' (json, csv, table)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl From<(f64, f64)> for Interval {
    fn from((lower, upper): (f64, f64)) -> Self {
        Interval { lower, upper }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovariateRow {
    pub name: String,
    pub value: f64,
    pub share: f64,
    pub asymptotic: Option<Interval>,
    pub std_error: Option<f64>,
    pub bootstrap: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub input: String,
    pub response: String,
    pub n: usize,
    pub d: usize,
    pub rejected_rows: usize,
    pub ignored_columns: Vec<String>,
    pub transform: String,
    /// Yeo–Johnson `λ` per column (response first) when transformed.
    pub lambdas: Option<Vec<(String, f64)>>,
    pub alpha: f64,
    pub method: String,
    pub r_squared: f64,
    pub kappa: Option<f64>,
    pub bootstrap_n: Option<usize>,
    pub seed: u64,
    pub covariates: Vec<CovariateRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub input: String,
    pub j: String,
    pub k: String,
    pub n: usize,
    pub value_j: f64,
    pub value_k: f64,
    /// `sqrt(n) (V_j - V_k)`.
    pub delta: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub degenerate: bool,
    pub avar_j: f64,
    pub avar_k: f64,
    pub acov_jk: f64,
    pub kappa: f64,
}

/// Two-decimal display; negative values that round to zero keep their sign.
pub fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn fmt_interval(i: &Interval) -> String {
    format!("({},{})", fmt2(i.lower), fmt2(i.upper))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn pad_table(rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

impl AnalysisReport {
    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => self.to_csv(),
            Format::Table => Ok(self.to_table()),
        }
    }

    fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "covariate", "value", "share", "asy_lower", "asy_upper", "std_error", "boot_lower",
            "boot_upper", "response", "r_squared", "kappa", "n", "d", "alpha", "method",
        ])?;
        for c in &self.covariates {
            let asy = c.asymptotic.as_ref();
            let boot = c.bootstrap.as_ref();
            w.write_record([
                c.name.clone(),
                c.value.to_string(),
                c.share.to_string(),
                opt(asy.map(|i| i.lower)),
                opt(asy.map(|i| i.upper)),
                opt(c.std_error),
                opt(boot.map(|i| i.lower)),
                opt(boot.map(|i| i.upper)),
                self.response.clone(),
                self.r_squared.to_string(),
                opt(self.kappa),
                self.n.to_string(),
                self.d.to_string(),
                self.alpha.to_string(),
                self.method.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn to_table(&self) -> String {
        let mut out = String::new();
        let level = format!("{}%", 100.0 * (1.0 - self.alpha));
        let _ = writeln!(
            out,
            "response {}  n = {}  d = {}  R2 = {}{}",
            self.response,
            self.n,
            self.d,
            fmt2(self.r_squared),
            self.kappa
                .map(|k| format!("  kappa = {}", fmt2(k)))
                .unwrap_or_default()
        );
        if self.rejected_rows > 0 {
            let _ = writeln!(out, "rejected rows: {}", self.rejected_rows);
        }
        if let Some(lambdas) = &self.lambdas {
            let parts: Vec<String> = lambdas
                .iter()
                .map(|(name, l)| format!("{name}={}", fmt2(*l)))
                .collect();
            let _ = writeln!(out, "yeo-johnson lambda: {}", parts.join(" "));
        }
        let mut header = vec!["covariate".to_string(), "share".to_string()];
        let has_asy = self.covariates.iter().any(|c| c.asymptotic.is_some());
        let has_boot = self.covariates.iter().any(|c| c.bootstrap.is_some());
        header.push(if has_asy {
            format!("shapley (asymptotic {level} CI)")
        } else {
            "shapley".to_string()
        });
        if has_boot {
            header.push(format!("bootstrap {level} CI"));
        }
        let mut rows = vec![header];
        for c in &self.covariates {
            let mut row = vec![c.name.clone(), fmt2(c.share)];
            row.push(match &c.asymptotic {
                Some(i) => format!("{} {}", fmt2(c.value), fmt_interval(i)),
                None => fmt2(c.value),
            });
            if has_boot {
                row.push(c.bootstrap.as_ref().map(fmt_interval).unwrap_or_default());
            }
            rows.push(row);
        }
        out.push_str(&pad_table(&rows));
        out
    }
}

impl PairReport {
    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.serialize(self)?;
                let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
            Format::Table => {
                let rows = vec![
                    vec!["pair".into(), format!("{} vs {}", self.j, self.k)],
                    vec!["values".into(), format!("{} vs {}", fmt2(self.value_j), fmt2(self.value_k))],
                    vec!["delta".into(), format!("{:.4}", self.delta)],
                    vec!["z".into(), format!("{:.4}", self.statistic)],
                    vec!["p-value".into(), format!("{:.4}", self.p_value)],
                    vec!["avar_j".into(), format!("{:.6}", self.avar_j)],
                    vec!["avar_k".into(), format!("{:.6}", self.avar_k)],
                    vec!["acov_jk".into(), format!("{:.6}", self.acov_jk)],
                    vec!["kappa".into(), format!("{:.4}", self.kappa)],
                    vec!["n".into(), self.n.to_string()],
                ];
                let mut out = pad_table(&rows);
                if self.degenerate {
                    out.push_str("note: numerator and denominator both vanish; statistic set to 0\n");
                }
                Ok(out)
            }
        }
    }
}

pub fn coverage_csv(rows: &[CoverageRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn coverage_table(rows: &[CoverageRow]) -> String {
    let mut table = vec![[
        "study", "method", "c", "n", "N", "coverage", "CP interval", "mean width",
    ]
    .map(String::from)
    .to_vec()];
    for r in rows {
        table.push(vec![
            r.study.to_string(),
            r.method.to_string(),
            r.c.to_string(),
            r.n.to_string(),
            r.n_effective.to_string(),
            format!("{:.3}", r.coverage),
            format!("({:.3},{:.3})", r.cp_lower, r.cp_upper),
            format!("{:.4}", r.mean_width),
        ]);
    }
    pad_table(&table)
}

pub fn benchmark_csv(rows: &[BenchmarkRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn benchmark_table(rows: &[BenchmarkRow]) -> String {
    let mut table = vec![[
        "n", "d", "N_b", "asymptotic (s)", "bootstrap (s)", "time ratio", "asy peak (B)",
        "boot peak (B)", "memory ratio",
    ]
    .map(String::from)
    .to_vec()];
    for r in rows {
        table.push(vec![
            r.n.to_string(),
            r.d.to_string(),
            r.n_bootstrap.to_string(),
            format!("{:.6}", r.asymptotic_secs),
            format!("{:.6}", r.bootstrap_secs),
            format!("{:.1}", r.time_ratio),
            r.asymptotic_peak_bytes.to_string(),
            r.bootstrap_peak_bytes.to_string(),
            format!("{:.1}", r.memory_ratio),
        ]);
    }
    pad_table(&table)
}
