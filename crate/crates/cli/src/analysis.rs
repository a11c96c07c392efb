//! Building blocks shared by the subcommands: report sections and their
//! CSV companions.

use clickstat::bootstrap::{q_uncertainty, BootstrapConfig, QKind};
use clickstat::dataio::{
    AnalyticRow, BinDiagnostics, CalibrationSection, LabeledReconstruction, PointSummary, QEntry, Table,
};
use clickstat::forward_model::{coherent_click_distribution, default_n_max, poisson_distribution, ResponseParams};
use clickstat::statistics::{q_binomial_with_bins, q_mandel};
use clickstat::tomography::{
    bin_covariances, bin_means, calibrate, uniformity_test, Calibration, CalibrationPoint, FitOrder, ResponseFit,
    Weighting,
};

use crate::error::CliResult;

pub fn summarize_point(p: &CalibrationPoint, source: Option<String>) -> CliResult<PointSummary> {
    let (mean_clicks, mean_clicks_sigma) = p.mean_clicks()?;
    let obs = p.gamma_observation()?;
    Ok(PointSummary {
        nbar: p.nbar,
        shots: p.shots,
        click_counts: p.click_counts.clone(),
        mean_clicks,
        mean_clicks_sigma,
        gamma: obs.gamma,
        gamma_sigma: obs.sigma,
        source,
    })
}

pub fn diagnose_point(p: &CalibrationPoint) -> CliResult<Option<BinDiagnostics>> {
    let Some(stats) = &p.per_bin else {
        return Ok(None);
    };
    let means = bin_means(stats)?;
    let uniformity = uniformity_test(&means)?;
    let cov = bin_covariances(stats)?;
    let rows = |m: &clickstat::nalgebra::DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(Some(BinDiagnostics {
        nbar: p.nbar,
        bin_means: means,
        uniformity,
        covariance: rows(&cov.cov),
        covariance_sigma: rows(&cov.sigma),
        max_cross_talk_significance: cov.max_off_diagonal_significance(),
    }))
}

/// Fits both model orders and runs the bin diagnostics of every point.
pub fn calibration_section(points: &[CalibrationPoint], sources: &[Option<String>]) -> CliResult<CalibrationSection> {
    let n_bins = points.first().map_or(0, CalibrationPoint::n_bins);
    let summaries = points
        .iter()
        .zip(sources)
        .map(|(p, s)| summarize_point(p, s.clone()))
        .collect::<CliResult<Vec<_>>>()?;
    let calibration = calibrate(points, Weighting::InverseVariance)?;
    let diagnostics = points
        .iter()
        .map(diagnose_point)
        .collect::<CliResult<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(CalibrationSection {
        n_bins,
        points: summaries,
        calibration,
        diagnostics,
    })
}

/// Response values with both fitted curves, per-bin means and pairwise
/// covariances.
pub fn calibration_tables(section: &CalibrationSection, suffix: &str) -> CliResult<Vec<(String, Table)>> {
    let mut response = Table::new(["x", "y", "sigma", "fit_linear", "fit_quadratic"]);
    for s in &section.points {
        let x = s.nbar;
        response.push(vec![
            x,
            s.gamma,
            s.gamma_sigma,
            evaluate(&section.calibration.linear, x),
            evaluate(&section.calibration.quadratic, x),
        ])?;
    }
    let mut means = Table::new(["nbar", "bin", "mean", "sigma"]);
    let mut cross = Table::new(["nbar", "bin_j", "bin_k", "covariance", "sigma"]);
    for d in &section.diagnostics {
        for (j, (m, s)) in d.bin_means.means.iter().zip(&d.bin_means.sigma).enumerate() {
            means.push(vec![d.nbar, (j + 1) as f64, *m, *s])?;
        }
        for (j, row) in d.covariance.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                cross.push(vec![
                    d.nbar,
                    (j + 1) as f64,
                    (k + 1) as f64,
                    *c,
                    d.covariance_sigma[j][k],
                ])?;
            }
        }
    }
    let mut out = vec![(format!("response{suffix}"), response)];
    if !section.diagnostics.is_empty() {
        out.push((format!("bin_means{suffix}"), means));
        out.push((format!("cross_talk{suffix}"), cross));
    }
    Ok(out)
}

/// Fitted `Γ(n̄)`.
pub fn evaluate(fit: &ResponseFit, nbar: f64) -> f64 {
    let x = nbar / fit.n_bins as f64;
    fit.nu + fit.eta * x + fit.gamma * x * x
}

/// The requested model order, or the one the data support.
pub fn select_fit(calibration: &Calibration, order: Option<FitOrder>) -> &ResponseFit {
    match order {
        Some(o) => calibration.fit(o),
        None => calibration.preferred_fit(),
    }
}

/// Closed-form Q parameters of Poisson light and of its click statistics.
pub fn analytic_rows(params: &ResponseParams, nbars: &[f64], n_max: Option<usize>) -> CliResult<Vec<AnalyticRow>> {
    nbars
        .iter()
        .map(|&nbar| {
            let n_max = n_max.unwrap_or_else(|| default_n_max(nbar, params.n_bins));
            let poisson = poisson_distribution(nbar, n_max)?.distribution;
            let clicks = coherent_click_distribution(params, nbar)?;
            Ok(AnalyticRow {
                n_bins: params.n_bins,
                nbar,
                poisson_q_mandel: q_mandel(&poisson).unwrap_or(f64::NAN),
                poisson_q_binomial: q_binomial_with_bins(&poisson, params.n_bins).unwrap_or(f64::NAN),
                clicks_q_mandel: q_mandel(&clicks).unwrap_or(f64::NAN),
                clicks_q_binomial: q_binomial_with_bins(&clicks, params.n_bins).unwrap_or(f64::NAN),
            })
        })
        .collect()
}

pub fn analytic_table(rows: &[AnalyticRow]) -> CliResult<Table> {
    let mut t = Table::new([
        "n_bins",
        "nbar",
        "poisson_q_mandel",
        "poisson_q_binomial",
        "clicks_q_mandel",
        "clicks_q_binomial",
    ]);
    for r in rows {
        t.push(vec![
            r.n_bins as f64,
            r.nbar,
            r.poisson_q_mandel,
            r.poisson_q_binomial,
            r.clicks_q_mandel,
            r.clicks_q_binomial,
        ])?;
    }
    Ok(t)
}

/// Bootstrap Q parameters of a click histogram.
pub fn click_q_entry(label: String, nbar: Option<f64>, counts: &[u64], config: BootstrapConfig) -> CliResult<QEntry> {
    Ok(QEntry {
        label,
        nbar,
        n_bins: counts.len() - 1,
        shots: Some(counts.iter().sum()),
        q_mandel: q_uncertainty(counts, QKind::Mandel, config)?,
        q_binomial: q_uncertainty(counts, QKind::Binomial, config)?,
    })
}

pub fn q_table(entries: &[QEntry]) -> CliResult<Table> {
    let mut t = Table::new(["nbar", "q_mandel", "q_mandel_sigma", "q_binomial", "q_binomial_sigma"]);
    for e in entries {
        t.push(vec![
            e.nbar.unwrap_or(f64::NAN),
            e.q_mandel.value,
            e.q_mandel.sigma,
            e.q_binomial.value,
            e.q_binomial.sigma,
        ])?;
    }
    Ok(t)
}

/// Q parameters of clicks and of the pseudo-distribution per data set, and
/// every reconstructed distribution in long format.
pub fn reconstruction_tables(recs: &[LabeledReconstruction], suffix: &str) -> CliResult<Vec<(String, Table)>> {
    let mut q = Table::new([
        "nbar",
        "clicks_q_mandel",
        "clicks_q_mandel_sigma",
        "clicks_q_binomial",
        "clicks_q_binomial_sigma",
        "pseudo_q_mandel",
        "pseudo_q_mandel_sigma",
        "pseudo_q_binomial",
        "pseudo_q_binomial_sigma",
    ]);
    let mut dist = Table::new(["nbar", "eta", "m", "p", "sigma"]);
    for rec in recs {
        let r = &rec.result;
        let nbar = rec.nbar.unwrap_or(f64::NAN);
        q.push(vec![
            nbar,
            r.clicks_q_mandel.value,
            r.clicks_q_mandel.sigma,
            r.clicks_q_binomial.value,
            r.clicks_q_binomial.sigma,
            r.pseudo.q_mandel.value,
            r.pseudo.q_mandel.sigma,
            r.pseudo.q_binomial.value,
            r.pseudo.q_binomial.sigma,
        ])?;
        for stage in std::iter::once(&r.pseudo).chain(&r.deconvolved) {
            let eta = stage.distribution.eta_tag();
            for (m, (p, s)) in stage.distribution.values().iter().zip(&stage.entry_sigma).enumerate() {
                dist.push(vec![nbar, eta, m as f64, *p, *s])?;
            }
        }
    }
    Ok(vec![
        (format!("q_parameters{suffix}"), q),
        (format!("distributions{suffix}"), dist),
    ])
}

/// Q_M and negativity of every stage of a deconvolution staircase.
pub fn staircase_table(recs: &[LabeledReconstruction]) -> CliResult<Table> {
    let mut t = Table::new([
        "nbar",
        "eta",
        "q_mandel",
        "q_mandel_sigma",
        "neg_mass",
        "neg_significance",
    ]);
    for rec in recs {
        let r = &rec.result;
        for stage in std::iter::once(&r.pseudo).chain(&r.deconvolved) {
            t.push(vec![
                rec.nbar.unwrap_or(f64::NAN),
                stage.distribution.eta_tag(),
                stage.q_mandel.value,
                stage.q_mandel.sigma,
                stage.negativity.neg_mass,
                stage.negativity.total_significance.unwrap_or(f64::NAN),
            ])?;
        }
    }
    Ok(t)
}
