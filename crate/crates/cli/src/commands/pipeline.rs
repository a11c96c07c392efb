//! End-to-end run: simulate a calibration sweep per detector, fit the
//! response, reconstruct every data set with the fitted efficiency, and
//! deconvolve it up to the target efficiencies.

use clickstat::bootstrap::BootstrapConfig;
use clickstat::dataio::{LabeledReconstruction, Report};
use clickstat::forward_model::ResponseParams;
use clickstat::rng::derive_seed;
use clickstat::sweep::{default_setups, simulate_sweep, DetectorSetup};

use super::{default_points, nbar_list};
use crate::analysis::{
    analytic_rows, analytic_table, calibration_section, calibration_tables, reconstruction_tables, select_fit,
    staircase_table,
};
use crate::commands::invert::inverter;
use crate::config::Settings;
use crate::error::{invalid, CliResult};
use crate::output::Output;

/// Deconvolution targets when `--eta-to` is not given.
pub const DEFAULT_TARGETS: [f64; 2] = [0.8, 1.0];

/// Offset separating bootstrap seeds from sweep-point seeds.
const BOOTSTRAP_STREAM: u64 = 1 << 32;

fn setups(s: &Settings) -> CliResult<Vec<DetectorSetup>> {
    let defaults = default_setups();
    let chosen: Vec<DetectorSetup> = match s.n_bins {
        None => defaults.to_vec(),
        Some(n) => match defaults.iter().find(|d| d.params.n_bins == n) {
            Some(d) => vec![*d],
            None if s.eta.is_some() => vec![DetectorSetup {
                params: ResponseParams::ideal(1.0, n)?,
                points: default_points(n),
            }],
            None => return invalid(format!("--eta is required for N = {n}")),
        },
    };
    chosen
        .into_iter()
        .map(|d| {
            let p = d.params;
            Ok(DetectorSetup {
                params: ResponseParams::new(
                    s.nu.unwrap_or(p.nu),
                    s.eta.unwrap_or(p.eta),
                    s.gamma.unwrap_or(p.gamma),
                    p.n_bins,
                )?,
                points: d.points,
            })
        })
        .collect()
}

pub fn run(s: &Settings) -> CliResult<()> {
    let setups = setups(s)?;
    let targets = if s.eta_to.is_empty() {
        DEFAULT_TARGETS.to_vec()
    } else {
        s.eta_to.clone()
    };
    let mut report = Report::new(
        "pipeline",
        s.provenance(&[
            ("setups", serde_json::to_value(&setups).map_err(clickstat::Error::from)?),
            ("deconvolution_targets", serde_json::json!(targets)),
        ]),
    );
    let mut tables = Vec::new();
    for (si, setup) in setups.iter().enumerate() {
        let params = setup.params;
        let n = params.n_bins;
        let suffix = format!("_N{n}");
        let base = derive_seed(s.seed(), si as u64);
        let nbars = if s.nbar.is_empty() {
            setup.nbar_grid()
        } else {
            nbar_list(s, n)?
        };

        let points = simulate_sweep(&params, &nbars, s.shots(), base)?;
        let section = calibration_section(&points, &vec![None; points.len()])?;
        let fit = select_fit(&section.calibration, s.fit_order.map(Into::into));
        report.warnings.extend(fit.warnings.iter().cloned());
        if !(fit.eta > 0.0 && fit.eta <= 1.0) {
            return invalid(format!("fitted efficiency {} for N = {n} is outside (0, 1]", fit.eta));
        }
        let inv = inverter(s, n, fit.eta)?;

        let mut recs = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let config = BootstrapConfig {
                resamples: s.resamples(),
                seed: derive_seed(base, BOOTSTRAP_STREAM + i as u64),
            };
            recs.push(LabeledReconstruction {
                label: format!("N{n}_{i:02}"),
                nbar: Some(p.nbar),
                eta_detector: fit.eta,
                result: inv.analyze_counts(&p.click_counts, &targets, config)?,
            });
        }

        let analytic = analytic_rows(&params, &nbars, s.n_max)?;
        tables.extend(calibration_tables(&section, &suffix)?);
        tables.push((format!("analytic_q{suffix}"), analytic_table(&analytic)?));
        tables.extend(reconstruction_tables(&recs, &suffix)?);
        tables.push((format!("staircase{suffix}"), staircase_table(&recs)?));
        report.calibrations.push(section);
        report.analytic.extend(analytic);
        report.reconstructions.extend(recs);
    }
    Output::new(s.out.clone(), s.format()).emit(&report, &tables)
}
