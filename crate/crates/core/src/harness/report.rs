use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::radial::RadialField;
use crate::spectral::{encode_field, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Skipped,
    Fail,
}

/// Acceptance region of a measured number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Below(f64),
    Within([f64; 2]),
}

impl Bound {
    pub fn admits(self, x: f64) -> bool {
        match self {
            Self::AtMost(t) => x <= t,
            Self::AtLeast(t) => x >= t,
            Self::Below(t) => x < t,
            Self::Within([a, b]) => a <= x && x <= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: Option<f64>,
    pub threshold: Bound,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn measure(name: impl Into<String>, measured: f64, threshold: Bound) -> Self {
        let verdict = if measured.is_finite() && threshold.admits(measured) { Verdict::Pass } else { Verdict::Fail };
        Self { name: name.into(), measured: measured.is_finite().then_some(measured), threshold, verdict, note: None }
    }

    pub fn failed(name: impl Into<String>, threshold: Bound, error: &Error) -> Self {
        Self { name: name.into(), measured: None, threshold, verdict: Verdict::Fail, note: Some(error.to_string()) }
    }

    pub fn skipped(name: impl Into<String>, threshold: Bound, reason: impl Into<String>) -> Self {
        Self { name: name.into(), measured: None, threshold, verdict: Verdict::Skipped, note: Some(reason.into()) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Labeled columns for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn from_columns(names: &[&str], columns: &[&[f64]]) -> Self {
        let len = columns.iter().map(|c| c.len()).min().unwrap_or(0);
        let mut s = Self::new(names);
        s.rows = (0..len).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
        s
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for x in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Checks and named values of one member of a sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub label: String,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, f64>,
}

impl Section {
    pub fn new(label: impl Into<String>) -> Self {
        Self { label: label.into(), ..Self::default() }
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn value(&mut self, name: impl Into<String>, x: f64) {
        self.values.insert(name.into(), x);
    }

    pub fn worst(&self) -> Verdict {
        self.checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub verdict: Verdict,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, f64>,
    pub sub_reports: Vec<Section>,
    /// Attachment file names relative to the report directory.
    pub attachments: BTreeMap<String, String>,
    pub series: BTreeMap<String, Series>,
    #[serde(skip)]
    pub fields: BTreeMap<String, (f64, RadialField)>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment,
            verdict: Verdict::Pass,
            config,
            checks: Vec::new(),
            values: BTreeMap::new(),
            sub_reports: Vec::new(),
            attachments: BTreeMap::new(),
            series: BTreeMap::new(),
            fields: BTreeMap::new(),
        }
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn value(&mut self, name: impl Into<String>, x: f64) {
        self.values.insert(name.into(), x);
    }

    pub fn series(&mut self, name: &str, series: Series) {
        self.attachments.insert(name.to_string(), format!("{name}.csv"));
        self.series.insert(name.to_string(), series);
    }

    pub fn field(&mut self, name: &str, time: f64, u: RadialField) {
        self.attachments.insert(name.to_string(), format!("{name}.bin"));
        self.fields.insert(name.to_string(), (time, u));
    }

    /// Worst verdict over the top-level checks and every sub-report.
    pub fn worst(&self) -> Verdict {
        self.checks
            .iter()
            .map(|c| c.verdict)
            .chain(self.sub_reports.iter().map(Section::worst))
            .max()
            .unwrap_or(Verdict::Pass)
    }

    pub fn all_checks(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.checks
            .iter()
            .map(|c| ("", c))
            .chain(self.sub_reports.iter().flat_map(|s| s.checks.iter().map(move |c| (s.label.as_str(), c))))
    }

    /// Serialized report body, free of timing information.
    pub fn body(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }
}

/// Timing and version metadata kept apart from the report body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub code_version: String,
    pub timestamp_unix: u64,
    pub runtime_seconds: f64,
    pub seed: u64,
}

pub const REPORT_FILE: &str = "report.json";
pub const PROVENANCE_FILE: &str = "provenance.json";

/// Writes `report.json`, `provenance.json` and the attachments into `dir`.
pub fn write_report(report: &ExperimentReport, provenance: &Provenance, dir: &Path) -> Result<PathBuf> {
    for (name, series) in &report.series {
        write_atomic(&dir.join(format!("{name}.csv")), series.to_csv().as_bytes())?;
    }
    for (name, (time, u)) in &report.fields {
        write_atomic(&dir.join(format!("{name}.bin")), &encode_field(u, *time))?;
    }
    let prov = serde_json::to_string_pretty(provenance).map_err(|e| Error::Format(e.to_string()))?;
    write_atomic(&dir.join(PROVENANCE_FILE), prov.as_bytes())?;
    let path = dir.join(REPORT_FILE);
    write_atomic(&path, report.body()?.as_bytes())?;
    Ok(path)
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let path = if path.is_dir() { path.join(REPORT_FILE) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// CSV text of one named series of a report.
pub fn emit_plot_data(report: &ExperimentReport, which: &str) -> Result<String> {
    match report.series.get(which) {
        Some(s) => Ok(s.to_csv()),
        None => Err(Error::UnknownSeries {
            name: which.to_string(),
            available: report.series.keys().cloned().collect::<Vec<_>>().join(", "),
        }),
    }
}
