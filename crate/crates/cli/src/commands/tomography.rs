//! Response-function fit and bin diagnostics from a coherent-state sweep.

use std::path::PathBuf;

use clickstat::dataio::Report;

use super::load_points;
use crate::analysis::{calibration_section, calibration_tables, select_fit};
use crate::config::{display_name, Settings};
use crate::error::CliResult;
use crate::output::Output;

pub fn run(s: &Settings, inputs: &[PathBuf]) -> CliResult<()> {
    let loaded = load_points(inputs, &s.nbar)?;
    let section = calibration_section(&loaded.points, &loaded.sources)?;
    let names: Vec<String> = inputs.iter().map(|p| display_name(p)).collect();
    let mut report = Report::new("tomography", s.provenance(&[("inputs", serde_json::json!(names))]));
    let chosen = select_fit(&section.calibration, s.fit_order.map(Into::into));
    report.warnings.extend(chosen.warnings.iter().cloned());
    let tables = calibration_tables(&section, "")?;
    report.calibrations.push(section);
    Output::new(s.out.clone(), s.format()).emit(&report, &tables)
}
