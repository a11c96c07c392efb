pub mod deconvolve;
pub mod invert;
pub mod pipeline;
pub mod qparams;
pub mod simulate;
pub mod tomography;

use std::path::{Path, PathBuf};

use clickstat::aggregate::ShotStatistics;
use clickstat::dataio::{aggregate_path, ShotHeader};
use clickstat::sweep::{nbar_grid, NBAR_MAX, NBAR_MIN};
use clickstat::tomography::CalibrationPoint;

use crate::config::{display_name, Settings};
use crate::error::{invalid, CliError, CliResult};

/// Default sweep length: 6 points for an 8-bin detector, 16 otherwise.
pub fn default_points(n_bins: usize) -> usize {
    if n_bins == 8 {
        6
    } else {
        16
    }
}

/// `--nbar` values, or the default geometric grid for an `n_bins` detector.
pub fn nbar_list(s: &Settings, n_bins: usize) -> CliResult<Vec<f64>> {
    if s.nbar.is_empty() {
        Ok(nbar_grid(NBAR_MIN, NBAR_MAX, default_points(n_bins))?)
    } else {
        Ok(s.nbar.clone())
    }
}

pub fn read_tallies(path: &Path) -> CliResult<(ShotHeader, ShotStatistics)> {
    aggregate_path(path).map_err(|e| CliError::from(e).at(path))
}

/// Tallies of shot files from one detector, with `n̄` from `--nbar` (one per file) or
/// from each file's header.
pub struct LoadedPoints {
    pub points: Vec<CalibrationPoint>,
    pub sources: Vec<Option<String>>,
}

pub fn load_points(inputs: &[PathBuf], nbar_override: &[f64]) -> CliResult<LoadedPoints> {
    if inputs.is_empty() {
        return invalid("no shot files given");
    }
    if !nbar_override.is_empty() && nbar_override.len() != inputs.len() {
        return invalid(format!(
            "{} --nbar values for {} shot files",
            nbar_override.len(),
            inputs.len()
        ));
    }
    let mut n_bins = None;
    let mut points = Vec::with_capacity(inputs.len());
    for (i, path) in inputs.iter().enumerate() {
        let (header, stats) = read_tallies(path)?;
        if *n_bins.get_or_insert(header.n_bins) != header.n_bins {
            return Err(CliError::Validation(format!(
                "N = {} differs from the first file's N = {}",
                header.n_bins,
                n_bins.unwrap_or_default()
            ))
            .at(path));
        }
        let nbar = match nbar_override.get(i).copied().or(header.nbar) {
            Some(v) => v,
            None => return Err(CliError::Validation("no nbar in header; pass --nbar".into()).at(path)),
        };
        points.push(CalibrationPoint::from_statistics(nbar, stats).map_err(|e| CliError::from(e).at(path))?);
    }
    Ok(LoadedPoints {
        points,
        sources: inputs.iter().map(|p| Some(display_name(p))).collect(),
    })
}

/// File stem used to label per-file results.
pub fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
