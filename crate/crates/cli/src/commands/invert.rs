//! Pseudo-inversion of measured click statistics, optionally followed by
//! loss deconvolution.

use std::path::PathBuf;

use clickstat::bootstrap::BootstrapConfig;
use clickstat::dataio::{read_report, LabeledReconstruction, Report};
use clickstat::reconstruction::{DeconvolutionOptions, PseudoInverter};
use clickstat::rng::derive_seed;
use clickstat::Warning;

use super::{label_of, read_tallies};
use crate::analysis::{reconstruction_tables, select_fit, staircase_table};
use crate::config::{display_name, Settings};
use crate::error::{invalid, CliError, CliResult};
use crate::output::Output;

/// Detector efficiency from `--eta` or from a tomography report, with any
/// warnings about response terms the inversion does not model.
pub fn detector_efficiency(s: &Settings, n_bins: usize) -> CliResult<(f64, Vec<Warning>)> {
    let mut warnings = Vec::new();
    let eta = match (&s.fit_report, s.eta) {
        (Some(_), Some(_)) => return invalid("give either --eta or --fit-report, not both"),
        (None, None) => return invalid("--eta or --fit-report is required"),
        (None, Some(eta)) => eta,
        (Some(path), None) => {
            let report = read_report(path).map_err(|e| CliError::from(e).at(path))?;
            let section = report
                .calibration_for(n_bins)
                .ok_or_else(|| CliError::Validation(format!("no calibration for N = {n_bins}")).at(path))?;
            let fit = select_fit(&section.calibration, s.fit_order.map(Into::into));
            if fit.is_significant(0) {
                warnings.push(Warning::DarkCountsIgnored { nu: fit.nu });
            }
            fit.eta
        }
    };
    if !(eta > 0.0 && eta <= 1.0) {
        return invalid(format!("detector efficiency must lie in (0, 1], got {eta}"));
    }
    if let Some(nu) = s.nu.filter(|&nu| nu > 0.0) {
        warnings.push(Warning::DarkCountsIgnored { nu });
    }
    Ok((eta, warnings))
}

pub fn inverter(s: &Settings, n_bins: usize, eta: f64) -> CliResult<PseudoInverter> {
    Ok(PseudoInverter::new(n_bins, eta)?.with_options(DeconvolutionOptions {
        clamp: s.clamp,
        ..DeconvolutionOptions::default()
    }))
}

pub fn run(s: &Settings, inputs: &[PathBuf]) -> CliResult<()> {
    if inputs.is_empty() {
        return invalid("no shot files given");
    }
    let mut recs = Vec::with_capacity(inputs.len());
    let mut warnings = Vec::new();
    let mut detector: Option<(usize, PseudoInverter)> = None;
    for (i, path) in inputs.iter().enumerate() {
        let (header, stats) = read_tallies(path)?;
        let inv = match &detector {
            Some((n, inv)) if *n == header.n_bins => *inv,
            Some((n, _)) => {
                return Err(CliError::Validation(format!("N = {} differs from N = {n}", header.n_bins)).at(path))
            }
            None => {
                let (eta, w) = detector_efficiency(s, header.n_bins)?;
                warnings = w;
                let inv = inverter(s, header.n_bins, eta)?;
                detector = Some((header.n_bins, inv));
                inv
            }
        };
        let config = BootstrapConfig {
            resamples: s.resamples(),
            seed: derive_seed(s.seed(), i as u64),
        };
        let result = inv
            .analyze_counts(stats.click_counts(), &s.eta_to, config)
            .map_err(|e| CliError::from(e).at(path))?;
        recs.push(LabeledReconstruction {
            label: label_of(path),
            nbar: header.nbar,
            eta_detector: inv.eta_detector(),
            result,
        });
    }
    let names: Vec<String> = inputs.iter().map(|p| display_name(p)).collect();
    let mut report = Report::new("invert", s.provenance(&[("inputs", serde_json::json!(names))]));
    report.warnings = warnings;
    let mut tables = reconstruction_tables(&recs, "")?;
    if !s.eta_to.is_empty() {
        tables.push(("staircase".into(), staircase_table(&recs)?));
    }
    report.reconstructions = recs;
    Output::new(s.out.clone(), s.format()).emit(&report, &tables)
}
