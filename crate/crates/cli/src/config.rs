//! Run settings: command-line flags layered over an optional TOML file.
//!
//! The file uses the flag names as keys (`n-bins = 8`, `nbar = [0.1, 0.2]`).
//! Any flag given on the command line replaces the file's value.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use clickstat::bootstrap::DEFAULT_RESAMPLES;
use clickstat::tomography::FitOrder;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError, CliResult};

pub const DEFAULT_SHOTS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderArg {
    Linear,
    Quadratic,
}

impl From<OrderArg> for FitOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Linear => FitOrder::Linear,
            OrderArg::Quadratic => FitOrder::Quadratic,
        }
    }
}

/// What goes to standard output: the JSON report or its CSV tables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct Settings {
    /// Number of detection bins N.
    #[arg(long)]
    pub n_bins: Option<usize>,
    /// Quantum efficiency η.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Dark-count rate ν per bin.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Nonlinear response coefficient γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mean photon number; repeat for a sweep.
    #[arg(long)]
    pub nbar: Vec<f64>,
    /// Shots per mean photon number.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Seed of all random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Photon-number truncation for analytic distributions.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Response model order; by default γ is kept only when significant.
    #[arg(long, value_enum)]
    pub fit_order: Option<OrderArg>,
    /// Bootstrap resamples for uncertainties.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Clip negative deconvolved entries and renormalize.
    #[arg(long)]
    pub clamp: bool,
    /// Target efficiency of loss deconvolution; repeat for a staircase.
    #[arg(long)]
    pub eta_to: Vec<f64>,
    /// Directory for reports, tables and shot files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Standard-output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Tomography report supplying the fitted efficiency.
    #[arg(long)]
    pub fit_report: Option<PathBuf>,
    /// TOML file with default values for the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn pick_vec<T>(flag: Vec<T>, file: Vec<T>) -> Vec<T> {
    if flag.is_empty() {
        file
    } else {
        flag
    }
}

impl Settings {
    /// Merges the config file, if any, under the flags.
    pub fn load(self) -> CliResult<Settings> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).map_err(|e| CliError::from(e).at(&path))?;
        let file: Settings =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Ok(Settings {
            n_bins: pick(self.n_bins, file.n_bins),
            eta: pick(self.eta, file.eta),
            nu: pick(self.nu, file.nu),
            gamma: pick(self.gamma, file.gamma),
            nbar: pick_vec(self.nbar, file.nbar),
            shots: pick(self.shots, file.shots),
            seed: pick(self.seed, file.seed),
            n_max: pick(self.n_max, file.n_max),
            fit_order: pick(self.fit_order, file.fit_order),
            bootstrap: pick(self.bootstrap, file.bootstrap),
            clamp: self.clamp || file.clamp,
            eta_to: pick_vec(self.eta_to, file.eta_to),
            out: pick(self.out, file.out),
            format: pick(self.format, file.format),
            threads: pick(self.threads, file.threads),
            fit_report: pick(self.fit_report, file.fit_report),
            config: Some(path),
        })
    }

    /// Checks ranges shared by all commands.
    pub fn validate(&self) -> CliResult<()> {
        if let Some(n) = self.n_bins {
            if !(1..=clickstat::aggregate::MAX_BINS).contains(&n) {
                return invalid(format!(
                    "--n-bins must be in 1..={}, got {n}",
                    clickstat::aggregate::MAX_BINS
                ));
            }
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta <= 1.0) {
                return invalid(format!("--eta must lie in (0, 1], got {eta}"));
            }
        }
        for (name, v) in [("--nu", self.nu), ("--gamma", self.gamma)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return invalid(format!("{name} must be a finite value >= 0, got {v}"));
                }
            }
        }
        if let Some(&bad) = self.nbar.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return invalid(format!("--nbar must be finite and >= 0, got {bad}"));
        }
        if self.shots == Some(0) {
            return invalid("--shots must be at least 1");
        }
        if let Some(b) = self.bootstrap {
            if b < 2 {
                return invalid(format!("--bootstrap needs at least 2 resamples, got {b}"));
            }
        }
        if let Some(&bad) = self.eta_to.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return invalid(format!("--eta-to must lie in (0, 1], got {bad}"));
        }
        if self.threads == Some(0) {
            return invalid("--threads must be at least 1");
        }
        Ok(())
    }

    pub fn shots(&self) -> u64 {
        self.shots.unwrap_or(DEFAULT_SHOTS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn resamples(&self) -> usize {
        self.bootstrap.unwrap_or(DEFAULT_RESAMPLES)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn require_n_bins(&self) -> CliResult<usize> {
        self.n_bins
            .ok_or_else(|| CliError::Validation("--n-bins is required".into()))
    }

    /// The settings that determine a command's results, for the report.
    /// Output location and thread count are left out so that reports do not
    /// depend on them.
    pub fn provenance(&self, extra: &[(&str, serde_json::Value)]) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("clickstat_version".into(), env!("CARGO_PKG_VERSION").into());
        let mut put = |k: &str, v: serde_json::Value| {
            map.insert(k.into(), v);
        };
        put("n_bins", serde_json::json!(self.n_bins));
        put("eta", serde_json::json!(self.eta));
        put("nu", serde_json::json!(self.nu.unwrap_or(0.0)));
        put("gamma", serde_json::json!(self.gamma.unwrap_or(0.0)));
        put("nbar", serde_json::json!(self.nbar));
        put("shots", serde_json::json!(self.shots()));
        put("seed", serde_json::json!(self.seed()));
        put("n_max", serde_json::json!(self.n_max));
        put("fit_order", serde_json::json!(self.fit_order));
        put("bootstrap", serde_json::json!(self.resamples()));
        put("clamp", serde_json::json!(self.clamp));
        put("eta_to", serde_json::json!(self.eta_to));
        put(
            "fit_report",
            serde_json::json!(self.fit_report.as_deref().map(display_name)),
        );
        for (k, v) in extra {
            put(k, v.clone());
        }
        serde_json::Value::Object(map)
    }
}

/// File name without directories, so reports do not depend on where the
/// inputs were staged.
pub fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "n-bins = 8\neta = 0.6\nnbar = [0.1, 0.2]\nclamp = true\nfit-order = \"linear\"\n",
        )
        .unwrap();
        let flags = Settings {
            eta: Some(0.5),
            config: Some(path),
            ..Default::default()
        };
        let s = flags.load().unwrap();
        assert_eq!(s.n_bins, Some(8));
        assert_eq!(s.eta, Some(0.5));
        assert_eq!(s.nbar, vec![0.1, 0.2]);
        assert!(s.clamp);
        assert_eq!(s.fit_order, Some(OrderArg::Linear));
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "n_bins = 8\n").unwrap();
        let err = Settings {
            config: Some(path),
            ..Default::default()
        }
        .load()
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn validation_ranges() {
        let bad = [
            Settings {
                eta: Some(1.5),
                ..Default::default()
            },
            Settings {
                n_bins: Some(0),
                ..Default::default()
            },
            Settings {
                shots: Some(0),
                ..Default::default()
            },
            Settings {
                bootstrap: Some(1),
                ..Default::default()
            },
            Settings {
                nbar: vec![-1.0],
                ..Default::default()
            },
            Settings {
                eta_to: vec![0.0],
                ..Default::default()
            },
        ];
        for s in bad {
            assert!(s.validate().is_err(), "{s:?}");
        }
        assert!(Settings::default().validate().is_ok());
    }
}
