//! Mandel and binomial parameters: closed-form sweeps, measured click data,
//! and the stages of earlier reconstruction reports.

use std::path::PathBuf;

use clickstat::bootstrap::BootstrapConfig;
use clickstat::dataio::{read_report, QEntry, Report};
use clickstat::forward_model::ResponseParams;
use clickstat::rng::derive_seed;

use super::{label_of, nbar_list, read_tallies};
use crate::analysis::{analytic_rows, analytic_table, click_q_entry, q_table};
use crate::config::{display_name, Settings};
use crate::error::{invalid, CliError, CliResult};
use crate::output::Output;

fn is_report(path: &std::path::Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn report_entries(path: &std::path::Path) -> CliResult<Vec<QEntry>> {
    let report = read_report(path).map_err(|e| CliError::from(e).at(path))?;
    if report.reconstructions.is_empty() {
        return Err(CliError::Validation("report holds no reconstructions".into()).at(path));
    }
    let mut out = Vec::new();
    for rec in &report.reconstructions {
        let r = &rec.result;
        let shots = r.counts.as_ref().map(|c| c.iter().sum());
        let n_bins = r.input.n_bins();
        out.push(QEntry {
            label: format!("{}/clicks", rec.label),
            nbar: rec.nbar,
            n_bins,
            shots,
            q_mandel: r.clicks_q_mandel,
            q_binomial: r.clicks_q_binomial,
        });
        for stage in std::iter::once(&r.pseudo).chain(&r.deconvolved) {
            out.push(QEntry {
                label: format!("{}/eta={:?}", rec.label, stage.distribution.eta_tag()),
                nbar: rec.nbar,
                n_bins,
                shots,
                q_mandel: stage.q_mandel,
                q_binomial: stage.q_binomial,
            });
        }
    }
    Ok(out)
}

pub fn run(s: &Settings, analytic: bool, inputs: &[PathBuf]) -> CliResult<()> {
    if !analytic && inputs.is_empty() {
        return invalid("give shot files or report files, or --analytic");
    }
    let names: Vec<String> = inputs.iter().map(|p| display_name(p)).collect();
    let mut report = Report::new(
        "qparams",
        s.provenance(&[("inputs", serde_json::json!(names)), ("analytic", analytic.into())]),
    );
    let mut tables = Vec::new();
    if analytic {
        let n_bins = s.require_n_bins()?;
        let params = ResponseParams::new(
            s.nu.unwrap_or(0.0),
            s.eta.unwrap_or(1.0),
            s.gamma.unwrap_or(0.0),
            n_bins,
        )?;
        report.analytic = analytic_rows(&params, &nbar_list(s, n_bins)?, s.n_max)?;
        tables.push(("analytic_q".to_string(), analytic_table(&report.analytic)?));
    }
    for (i, path) in inputs.iter().enumerate() {
        if is_report(path) {
            report.q_parameters.extend(report_entries(path)?);
        } else {
            let (header, stats) = read_tallies(path)?;
            let config = BootstrapConfig {
                resamples: s.resamples(),
                seed: derive_seed(s.seed(), i as u64),
            };
            let entry =
                click_q_entry(label_of(path), header.nbar, stats.click_counts(), config).map_err(|e| e.at(path))?;
            report.q_parameters.push(entry);
        }
    }
    if !report.q_parameters.is_empty() {
        tables.push(("q_parameters".to_string(), q_table(&report.q_parameters)?));
    }
    Output::new(s.out.clone(), s.format()).emit(&report, &tables)
}
