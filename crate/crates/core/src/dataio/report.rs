//! Versioned JSON analysis reports.
//!
//! A report names its schema and version, records the full run
//! configuration, and carries whichever result sections the producing command
//! filled in. Empty sections are omitted. Non-finite floats are written as
//! the strings `"NaN"`, `"inf"` and `"-inf"`; finite floats use the shortest
//! decimal form that parses back to the same value.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bootstrap::Estimate;
use crate::error::{Error, Result};
use crate::float_repr;
use crate::reconstruction::ReconstructionReport;
use crate::tomography::{BinMeans, Calibration, UniformityTest};
use crate::warning::Warning;

pub const REPORT_SCHEMA: &str = "clickstat-report";
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub schema_version: u32,
    /// Producing subcommand.
    pub command: String,
    /// Run configuration, recorded for provenance.
    #[serde(default)]
    pub config: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub calibrations: Vec<CalibrationSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub q_parameters: Vec<QEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analytic: Vec<AnalyticRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reconstructions: Vec<LabeledReconstruction>,
    #[serde(default)]
    pub warnings: Vec<Warning>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.to_string(),
            config,
            calibrations: Vec::new(),
            q_parameters: Vec::new(),
            analytic: Vec::new(),
            reconstructions: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// First calibration of an `n_bins` detector.
    pub fn calibration_for(&self, n_bins: usize) -> Option<&CalibrationSection> {
        self.calibrations.iter().find(|c| c.n_bins == n_bins)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        match value.get("schema").and_then(Value::as_str) {
            Some(REPORT_SCHEMA) => {}
            Some(other) => return Err(Error::Schema(format!("unknown report schema `{other}`"))),
            None => return Err(Error::Schema("report lacks `schema`".into())),
        }
        match value.get("schema_version").and_then(Value::as_u64) {
            Some(v) if v == u64::from(REPORT_SCHEMA_VERSION) => {}
            Some(v) => return Err(Error::Schema(format!("unsupported report schema version {v}"))),
            None => return Err(Error::Schema("report lacks `schema_version`".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))
    }
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    fs::write(path, report.to_json()?)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<Report> {
    Report::from_json(&fs::read_to_string(path)?)
}

/// Response fit of one detector with the data it was fitted to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSection {
    pub n_bins: usize,
    pub points: Vec<PointSummary>,
    pub calibration: Calibration,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<BinDiagnostics>,
}

/// One calibration measurement reduced to the response value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub nbar: f64,
    pub shots: u64,
    pub click_counts: Vec<u64>,
    pub mean_clicks: f64,
    pub mean_clicks_sigma: f64,
    #[serde(with = "float_repr")]
    pub gamma: f64,
    #[serde(with = "float_repr")]
    pub gamma_sigma: f64,
    /// Input file, when the point was read from disk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// Splitting-uniformity and cross-talk checks of one calibration point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinDiagnostics {
    pub nbar: f64,
    pub bin_means: BinMeans,
    pub uniformity: UniformityTest,
    /// Row-major `N x N` click covariances.
    pub covariance: Vec<Vec<f64>>,
    pub covariance_sigma: Vec<Vec<f64>>,
    /// Largest `|cov| / σ` over distinct bin pairs.
    #[serde(with = "float_repr")]
    pub max_cross_talk_significance: f64,
}

/// Q parameters of one data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    pub n_bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub q_mandel: Estimate,
    pub q_binomial: Estimate,
}

/// Closed-form Q parameters at one mean photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRow {
    pub n_bins: usize,
    pub nbar: f64,
    #[serde(with = "float_repr")]
    pub poisson_q_mandel: f64,
    #[serde(with = "float_repr")]
    pub poisson_q_binomial: f64,
    #[serde(with = "float_repr")]
    pub clicks_q_mandel: f64,
    #[serde(with = "float_repr")]
    pub clicks_q_binomial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledReconstruction {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    pub eta_detector: f64,
    pub result: ReconstructionReport,
}
