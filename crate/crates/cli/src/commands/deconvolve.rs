//! Loss deconvolution of the reconstructions in an earlier report.

use std::path::Path;

use clickstat::bootstrap::BootstrapConfig;
use clickstat::dataio::{read_report, LabeledReconstruction, Report};
use clickstat::rng::derive_seed;

use super::invert::inverter;
use crate::analysis::{reconstruction_tables, staircase_table};
use crate::config::{display_name, Settings};
use crate::error::{invalid, CliError, CliResult};
use crate::output::Output;

pub fn run(s: &Settings, input: &Path) -> CliResult<()> {
    if s.eta_to.is_empty() {
        return invalid("--eta-to is required");
    }
    let source = read_report(input).map_err(|e| CliError::from(e).at(input))?;
    if source.reconstructions.is_empty() {
        return Err(CliError::Validation("report holds no reconstructions".into()).at(input));
    }
    let mut recs = Vec::with_capacity(source.reconstructions.len());
    for (i, rec) in source.reconstructions.iter().enumerate() {
        let r = &rec.result;
        let inv = inverter(s, r.input.n_bins(), rec.eta_detector)?;
        // With the original histogram the uncertainties can be bootstrapped
        // through the new chain; otherwise only point values are available.
        let result = match &r.counts {
            Some(counts) => inv.analyze_counts(
                counts,
                &s.eta_to,
                BootstrapConfig {
                    resamples: s.resamples(),
                    seed: derive_seed(s.seed(), i as u64),
                },
            ),
            None => inv.invert_and_deconvolve(&r.input, &s.eta_to),
        }
        .map_err(|e| CliError::from(e).at(input))?;
        recs.push(LabeledReconstruction {
            label: rec.label.clone(),
            nbar: rec.nbar,
            eta_detector: rec.eta_detector,
            result,
        });
    }
    let mut report = Report::new(
        "deconvolve",
        s.provenance(&[("input_report", display_name(input).into())]),
    );
    report.warnings = source.warnings;
    let mut tables = reconstruction_tables(&recs, "")?;
    tables.push(("staircase".into(), staircase_table(&recs)?));
    report.reconstructions = recs;
    Output::new(s.out.clone(), s.format()).emit(&report, &tables)
}
