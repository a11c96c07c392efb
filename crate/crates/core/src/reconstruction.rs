//! Pseudo-inversion of click statistics and loss deconvolution.
//!
//! The pseudo-inverse `C⁺` of the photon-to-click map is the exact inverse of
//! `C` on distributions with at most `N` photons; applied to measured click
//! frequencies it yields a pseudo-photon-number distribution `p'(η)` that
//! still contains the detector losses. Those are removed afterwards with the
//! inverse loss map `H(η)^{-1} = H(1/η)`, restricted to the same
//! `(N+1)`-dimensional space.
//!
//! Both steps are linear, so uncertainties are obtained by bootstrapping the
//! shot histogram through the whole chain.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap, estimate_from_spread, BootstrapConfig, Estimate};
use crate::combinatorics::{falling_factorial, tables};
use crate::error::{Error, Result};
use crate::float_repr;
use crate::forward_model::{loss_matrix, ratio_to_f64, ChannelMatrix, ChannelRole};
use crate::statistics::{moments, q_binomial_from_moments, ClickDistribution, DistributionKind, PhotonDistribution};
use crate::warning::Warning;

/// Efficiency ratios below this trigger an ill-conditioning warning.
pub const DEFAULT_ILL_CONDITIONED_RATIO: f64 = 0.25;

/// The `(N+1) x (N+1)` pseudo-inverse, entry `(m, k) = N^m s(k, m) / (binom(N, k) k!)`.
///
/// Each entry is an exact rational rounded once to `f64`.
pub fn pseudo_inverse_matrix(n_bins: usize) -> Result<ChannelMatrix> {
    if n_bins == 0 {
        return Err(Error::Domain("pseudo-inverse needs N >= 1".into()));
    }
    let t = tables(n_bins + 1);
    let base = BigInt::from(n_bins);
    let mut m = DMatrix::zeros(n_bins + 1, n_bins + 1);
    for k in 0..=n_bins {
        let denominator = falling_factorial(n_bins as u64, k as u64);
        let mut power = BigInt::from(1);
        for row in 0..=k {
            if row > 0 {
                power *= &base;
            }
            let numerator = &power * t.first_signed(k, row);
            m[(row, k)] = ratio_to_f64(numerator, denominator.clone());
        }
    }
    Ok(ChannelMatrix::from_parts(
        m,
        ChannelRole::PseudoInverse,
        Some(n_bins),
        None,
    ))
}

/// Shared pseudo-inverse for `n_bins`, built on first use.
pub fn cached_pseudo_inverse(n_bins: usize) -> Result<Arc<ChannelMatrix>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ChannelMatrix>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&n_bins) {
        return Ok(Arc::clone(m));
    }
    let built = Arc::new(pseudo_inverse_matrix(n_bins)?);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    Ok(Arc::clone(guard.entry(n_bins).or_insert(built)))
}

/// Negative quasi-probabilities of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    /// Sum of the negative entries (zero or negative).
    #[serde(with = "float_repr")]
    pub neg_mass: f64,
    /// Index of the most negative entry.
    pub worst_index: Option<usize>,
    /// `|p[worst]| / σ[worst]`, when entry uncertainties are known.
    pub significance: Option<f64>,
    /// `|neg_mass| / σ(neg_mass)`, where the spread is that of the sum over
    /// the same set of indices across bootstrap resamples.
    pub total_significance: Option<f64>,
}

impl NegativityReport {
    /// Whether all negativity is within `k` standard deviations of zero.
    /// Without uncertainties only an exactly nonnegative vector qualifies.
    pub fn insignificant_at(&self, k: f64) -> bool {
        if self.worst_index.is_none() {
            return true;
        }
        match (self.total_significance, self.significance) {
            (Some(total), Some(worst)) => total < k && worst < k,
            _ => false,
        }
    }
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Sum of the negative entries and the index of the most negative one.
/// `significance` uses `sigma[worst]` when given.
pub fn negativity_report(p: &[f64], sigma: Option<&[f64]>) -> NegativityReport {
    let neg_mass = p.iter().filter(|&&v| v < 0.0).sum::<f64>() + 0.0;
    let worst_index = p
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < 0.0)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i);
    let significance = match (worst_index, sigma) {
        (Some(i), Some(s)) => finite_or_none(p[i].abs() / s[i]),
        _ => None,
    };
    NegativityReport {
        neg_mass,
        worst_index,
        significance,
        total_significance: None,
    }
}

/// Options for loss deconvolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeconvolutionOptions {
    /// Warn when `η_from / η_to` falls below this.
    pub ill_conditioned_ratio: f64,
    /// Clip negative entries to zero and renormalize (for plotting only).
    pub clamp: bool,
}

impl Default for DeconvolutionOptions {
    fn default() -> Self {
        Self {
            ill_conditioned_ratio: DEFAULT_ILL_CONDITIONED_RATIO,
            clamp: false,
        }
    }
}

/// Loss-deconvolved distribution with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deconvolved {
    pub distribution: PhotonDistribution,
    /// `η_from / η_to`.
    pub ratio: f64,
    pub negativity: NegativityReport,
    pub warnings: Vec<Warning>,
}

fn check_targets(eta_from: f64, eta_to: f64) -> Result<f64> {
    if !(eta_from > 0.0 && eta_from <= 1.0) {
        return Err(Error::Domain(format!(
            "source efficiency must lie in (0, 1], got {eta_from}"
        )));
    }
    if !(eta_to <= 1.0) {
        return Err(Error::Domain(format!("target efficiency must be <= 1, got {eta_to}")));
    }
    if eta_to < eta_from {
        return Err(Error::Domain(format!(
            "cannot add loss by deconvolution: target {eta_to} below source {eta_from}"
        )));
    }
    Ok(eta_from / eta_to)
}

fn clamp_renormalize(values: &mut [f64]) {
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    let s: f64 = values.iter().sum();
    if s > 0.0 {
        values.iter_mut().for_each(|v| *v /= s);
    }
}

/// Removes the loss between the distribution's efficiency tag and `eta_to`
/// by applying `H(η_to / η_from)` on the distribution's own truncated space.
///
/// Negative entries are kept and reported unless `options.clamp` is set.
pub fn deconvolve_loss(p: &PhotonDistribution, eta_to: f64, options: DeconvolutionOptions) -> Result<Deconvolved> {
    let ratio = check_targets(p.eta_tag(), eta_to)?;
    let inverse = loss_matrix(1.0 / ratio, p.n_max())?;
    let mut values = inverse.apply(p.values())?;
    let mut warnings = Vec::new();
    if ratio < options.ill_conditioned_ratio {
        warnings.push(Warning::IllConditioned {
            ratio,
            threshold: options.ill_conditioned_ratio,
        });
    }
    let negativity = negativity_report(&values, None);
    if let Some(worst_index) = negativity.worst_index {
        warnings.push(Warning::Negativity {
            mass: negativity.neg_mass,
            worst_index,
        });
    }
    if options.clamp {
        clamp_renormalize(&mut values);
    }
    let kind = if ratio == 1.0 {
        p.kind()
    } else {
        DistributionKind::Deconvolved
    };
    let distribution = PhotonDistribution::with_kind(values, eta_to, kind)?;
    Ok(Deconvolved {
        distribution,
        ratio,
        negativity,
        warnings,
    })
}

/// Analysis of one distribution in a reconstruction chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub distribution: PhotonDistribution,
    /// Bootstrap 1σ per entry; NaN for analytic input.
    #[serde(with = "float_repr::vec")]
    pub entry_sigma: Vec<f64>,
    pub q_mandel: Estimate,
    /// Binomial parameter with the detector's `N`.
    pub q_binomial: Estimate,
    pub negativity: NegativityReport,
    pub warnings: Vec<Warning>,
}

/// Pseudo-inversion result for one click data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub input: ClickDistribution,
    /// Click histogram the input was estimated from, when available.
    pub counts: Option<Vec<u64>>,
    /// Q parameters of the click data themselves.
    pub clicks_q_mandel: Estimate,
    pub clicks_q_binomial: Estimate,
    /// `p'(η) = C⁺ c`.
    pub pseudo: StageResult,
    /// Loss-deconvolved stages, in the order requested.
    pub deconvolved: Vec<StageResult>,
}

impl ReconstructionReport {
    pub fn output(&self) -> &PhotonDistribution {
        &self.pseudo.distribution
    }
}

fn q_mandel_raw(p: &[f64]) -> f64 {
    let m = moments(p);
    if m.mean > 0.0 {
        m.variance / m.mean - 1.0
    } else {
        f64::NAN
    }
}

fn q_binomial_raw(p: &[f64], n_bins: usize) -> f64 {
    let m = moments(p);
    q_binomial_from_moments(m.mean, m.variance, n_bins).unwrap_or(f64::NAN)
}

/// The linear chain clicks → pseudo-photons → deconvolved stages, with
/// matrices built once.
struct Chain {
    n_bins: usize,
    cplus: Arc<ChannelMatrix>,
    /// `H(1/r)` for each stage, relative to the pseudo distribution.
    stages: Vec<ChannelMatrix>,
}

impl Chain {
    fn run(&self, clicks: &[f64]) -> Result<Vec<Vec<f64>>> {
        let pseudo = self.cplus.apply(clicks)?;
        let mut out = Vec::with_capacity(1 + self.stages.len());
        for h in &self.stages {
            out.push(h.apply(&pseudo)?);
        }
        out.insert(0, pseudo);
        Ok(out)
    }
}

/// Reconstructs photon statistics for an `N`-bin detector of efficiency
/// `eta_detector`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoInverter {
    n_bins: usize,
    eta_detector: f64,
    options: DeconvolutionOptions,
}

impl PseudoInverter {
    pub fn new(n_bins: usize, eta_detector: f64) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::Domain("need N >= 1".into()));
        }
        if !(eta_detector > 0.0 && eta_detector <= 1.0) {
            return Err(Error::Domain(format!(
                "detector efficiency must lie in (0, 1], got {eta_detector}"
            )));
        }
        Ok(Self {
            n_bins,
            eta_detector,
            options: DeconvolutionOptions::default(),
        })
    }

    pub fn with_options(mut self, options: DeconvolutionOptions) -> Self {
        self.options = options;
        self
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn eta_detector(&self) -> f64 {
        self.eta_detector
    }

    fn chain(&self, targets: &[f64]) -> Result<(Chain, Vec<f64>)> {
        let mut ratios = Vec::with_capacity(targets.len());
        let mut stages = Vec::with_capacity(targets.len());
        for &eta_to in targets {
            let r = check_targets(self.eta_detector, eta_to)?;
            stages.push(loss_matrix(1.0 / r, self.n_bins)?);
            ratios.push(r);
        }
        Ok((
            Chain {
                n_bins: self.n_bins,
                cplus: cached_pseudo_inverse(self.n_bins)?,
                stages,
            },
            ratios,
        ))
    }

    fn check_dims(&self, len: usize) -> Result<()> {
        if len != self.n_bins + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n_bins + 1,
                actual: len,
            });
        }
        Ok(())
    }

    /// `p' = C⁺ c` for an analytic click distribution (no uncertainties).
    pub fn invert(&self, c: &ClickDistribution) -> Result<ReconstructionReport> {
        self.invert_and_deconvolve(c, &[])
    }

    /// Pseudo-inversion followed by deconvolution to each efficiency in
    /// `targets`, without uncertainties.
    pub fn invert_and_deconvolve(&self, c: &ClickDistribution, targets: &[f64]) -> Result<ReconstructionReport> {
        self.check_dims(c.values().len())?;
        let (chain, ratios) = self.chain(targets)?;
        let outputs = chain.run(c.values())?;
        let point = |v: &[f64], eta: f64, kind| self.stage(v.to_vec(), eta, kind, None, None);
        let mut iter = outputs.iter();
        let pseudo = point(
            iter.next().expect("pseudo stage"),
            self.eta_detector,
            DistributionKind::Pseudo,
        )?;
        let deconvolved = iter
            .zip(targets.iter().zip(&ratios))
            .map(|(v, (&eta_to, &r))| {
                let mut stage = point(v, eta_to, DistributionKind::Deconvolved)?;
                self.stage_warnings(&mut stage, r);
                Ok(stage)
            })
            .collect::<Result<Vec<_>>>()?;
        let q_exact = |x: f64| Estimate::exact(x);
        Ok(ReconstructionReport {
            input: c.clone(),
            counts: None,
            clicks_q_mandel: q_exact(q_mandel_raw(c.values())),
            clicks_q_binomial: q_exact(q_binomial_raw(c.values(), self.n_bins)),
            pseudo,
            deconvolved,
        })
    }

    /// Full analysis of a click histogram: pseudo-inversion, deconvolution to
    /// each of `targets`, Q parameters of every stage, and bootstrap
    /// uncertainties propagated through the whole chain.
    pub fn analyze_counts(
        &self,
        counts: &[u64],
        targets: &[f64],
        config: BootstrapConfig,
    ) -> Result<ReconstructionReport> {
        self.check_dims(counts.len())?;
        let input = ClickDistribution::from_counts(counts)?;
        let (chain, ratios) = self.chain(targets)?;
        let outputs = chain.run(input.values())?;

        // Negative index sets are fixed from the point estimate so their sums
        // can be tracked across resamples.
        let negative_sets: Vec<Vec<usize>> = outputs
            .iter()
            .map(|v| (0..v.len()).filter(|&i| v[i] < 0.0).collect())
            .collect();

        // Layout per stage: entries, Q_M, Q_B, negative-set sum; then the two
        // click-level Q parameters.
        let width = self.n_bins + 4;
        let statistic = |freqs: &[f64]| -> Option<Vec<f64>> {
            let stages = chain.run(freqs).ok()?;
            let mut out = Vec::with_capacity(stages.len() * width + 2);
            for (v, neg) in stages.iter().zip(&negative_sets) {
                out.extend_from_slice(v);
                out.push(q_mandel_raw(v));
                out.push(q_binomial_raw(v, chain.n_bins));
                out.push(neg.iter().map(|&i| v[i]).sum());
            }
            out.push(q_mandel_raw(freqs));
            out.push(q_binomial_raw(freqs, chain.n_bins));
            Some(out)
        };
        let spread = bootstrap(counts, config, statistic);

        let mut stages = Vec::with_capacity(outputs.len());
        for (s, v) in outputs.iter().enumerate() {
            let base = s * width;
            let sigma = &spread.sigma[base..base + self.n_bins + 1];
            let q_m = estimate_from_spread(q_mandel_raw(v), &spread, base + self.n_bins + 1);
            let q_b = estimate_from_spread(q_binomial_raw(v, self.n_bins), &spread, base + self.n_bins + 2);
            let neg_sigma = spread.sigma[base + self.n_bins + 3];
            let (eta, kind) = if s == 0 {
                (self.eta_detector, DistributionKind::Pseudo)
            } else {
                (targets[s - 1], DistributionKind::Deconvolved)
            };
            let mut stage = self.stage(v.clone(), eta, kind, Some(sigma), Some((q_m, q_b)))?;
            if stage.negativity.worst_index.is_some() {
                stage.negativity.total_significance = finite_or_none(stage.negativity.neg_mass.abs() / neg_sigma);
            }
            if s > 0 {
                self.stage_warnings(&mut stage, ratios[s - 1]);
            }
            stages.push(stage);
        }
        let tail = stages.len() * width;
        let clicks_q_mandel = estimate_from_spread(q_mandel_raw(input.values()), &spread, tail);
        let clicks_q_binomial = estimate_from_spread(q_binomial_raw(input.values(), self.n_bins), &spread, tail + 1);
        let mut iter = stages.into_iter();
        let pseudo = iter.next().expect("pseudo stage");
        Ok(ReconstructionReport {
            input,
            counts: Some(counts.to_vec()),
            clicks_q_mandel,
            clicks_q_binomial,
            pseudo,
            deconvolved: iter.collect(),
        })
    }

    fn stage(
        &self,
        mut values: Vec<f64>,
        eta: f64,
        kind: DistributionKind,
        sigma: Option<&[f64]>,
        q: Option<(Estimate, Estimate)>,
    ) -> Result<StageResult> {
        let negativity = negativity_report(&values, sigma);
        let (q_mandel, q_binomial) = q.unwrap_or_else(|| {
            (
                Estimate::exact(q_mandel_raw(&values)),
                Estimate::exact(q_binomial_raw(&values, self.n_bins)),
            )
        });
        let mut warnings = Vec::new();
        if let Some(worst_index) = negativity.worst_index {
            warnings.push(Warning::Negativity {
                mass: negativity.neg_mass,
                worst_index,
            });
        }
        if self.options.clamp && kind == DistributionKind::Deconvolved {
            clamp_renormalize(&mut values);
        }
        Ok(StageResult {
            distribution: PhotonDistribution::with_kind(values, eta, kind)?,
            entry_sigma: sigma.map_or_else(|| vec![f64::NAN; self.n_bins + 1], <[f64]>::to_vec),
            q_mandel,
            q_binomial,
            negativity,
            warnings,
        })
    }

    fn stage_warnings(&self, stage: &mut StageResult, ratio: f64) {
        if ratio < self.options.ill_conditioned_ratio {
            stage.warnings.insert(
                0,
                Warning::IllConditioned {
                    ratio,
                    threshold: self.options.ill_conditioned_ratio,
                },
            );
        }
    }
}

/// `p' = C⁺ c` with the click distribution's own `N`; the output is tagged
/// with `eta_detector`.
pub fn pseudo_invert(c: &ClickDistribution, eta_detector: f64) -> Result<ReconstructionReport> {
    PseudoInverter::new(c.n_bins(), eta_detector)?.invert(c)
}

/// Histogram-level convenience over [`PseudoInverter::analyze_counts`].
pub fn pseudo_invert_counts(
    counts: &[u64],
    eta_detector: f64,
    config: BootstrapConfig,
) -> Result<ReconstructionReport> {
    if counts.len() < 2 {
        return Err(Error::Domain("click histogram needs N + 1 >= 2 entries".into()));
    }
    PseudoInverter::new(counts.len() - 1, eta_detector)?.analyze_counts(counts, &[], config)
}
