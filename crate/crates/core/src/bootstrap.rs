//! Nonparametric bootstrap over shots.
//!
//! Resampling `S` shots with replacement from a click histogram is the same as
//! drawing a multinomial histogram with the empirical frequencies, so a
//! resample costs `O(N)` rather than `O(S)`. Resample `b` uses its own random
//! substream, making the result independent of the thread count.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float_repr;
use crate::rng::{substream, Purpose};
use crate::statistics::{frequencies, moments, q_binomial_from_moments, q_mandel, Moments};

pub const DEFAULT_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: DEFAULT_RESAMPLES,
            seed: 0,
        }
    }
}

/// Multinomial redraw of a histogram with its own empirical frequencies.
pub fn resample_counts<R: Rng + ?Sized>(counts: &[u64], rng: &mut R) -> Vec<u64> {
    let total: u64 = counts.iter().sum();
    let mut out = vec![0u64; counts.len()];
    let mut remaining_n = total;
    let mut remaining_weight = total;
    for (slot, &c) in out.iter_mut().zip(counts) {
        if remaining_n == 0 {
            break;
        }
        if c == remaining_weight {
            *slot = remaining_n;
            break;
        }
        let p = c as f64 / remaining_weight as f64;
        let draw = Binomial::new(remaining_n, p).map(|b| b.sample(rng)).unwrap_or(0);
        *slot = draw;
        remaining_n -= draw;
        remaining_weight -= c;
    }
    out
}

/// Spread of a vector-valued statistic across bootstrap resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSpread {
    /// Sample standard deviation per statistic component.
    pub sigma: Vec<f64>,
    /// Per component, resamples on which it was undefined.
    pub failed: Vec<usize>,
    pub resamples: usize,
}

/// Bootstraps `statistic`, evaluated on resampled relative frequencies.
///
/// `statistic` returns `None` where it is undefined as a whole, or NaN in
/// single components. Both are skipped: `failed[j]` counts the resamples that
/// contributed nothing to component `j`. The output has the component count
/// of the first successful evaluation; a component is NaN when fewer than two
/// resamples produced a finite value for it.
pub fn bootstrap<F>(counts: &[u64], config: BootstrapConfig, statistic: F) -> BootstrapSpread
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    let replicas: Vec<Option<Vec<f64>>> = (0..config.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(config.seed, Purpose::Bootstrap, b as u64);
            let resampled = resample_counts(counts, &mut rng);
            statistic(&frequencies(&resampled))
        })
        .collect();

    let good: Vec<&Vec<f64>> = replicas.iter().flatten().collect();
    let width = good.first().map_or(0, |v| v.len());
    let mut failed = Vec::with_capacity(width);
    let sigma = (0..width)
        .map(|j| {
            let finite: Vec<f64> = good.iter().map(|v| v[j]).filter(|x| x.is_finite()).collect();
            failed.push(config.resamples - finite.len());
            if finite.len() < 2 {
                return f64::NAN;
            }
            let n = finite.len() as f64;
            let mean = finite.iter().sum::<f64>() / n;
            let ss = finite.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
            (ss / (n - 1.0)).sqrt()
        })
        .collect();
    BootstrapSpread {
        sigma,
        failed,
        resamples: config.resamples,
    }
}

/// Which Q parameter to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QKind {
    Mandel,
    Binomial,
}

/// Why an uncertainty could not be estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaFlag {
    /// Every shot landed in the same outcome; resampling cannot vary.
    DegenerateCounts,
    /// The statistic was undefined on more than half of the resamples.
    UnstableResamples,
    /// No shot counts are available (analytic input).
    NoCounts,
}

/// A value with its 1σ uncertainty. `sigma` is NaN exactly when `flag` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    #[serde(with = "float_repr")]
    pub value: f64,
    #[serde(with = "float_repr")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<SigmaFlag>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            sigma: f64::NAN,
            flag: Some(SigmaFlag::NoCounts),
        }
    }

    /// `|value| / sigma`; NaN without a usable sigma.
    pub fn significance(&self) -> f64 {
        if self.flag.is_some() || !(self.sigma > 0.0) {
            return f64::NAN;
        }
        self.value.abs() / self.sigma
    }

    /// `|value| < k sigma`. False when sigma is unavailable.
    pub fn within(&self, k: f64) -> bool {
        self.flag.is_none() && self.value.abs() < k * self.sigma
    }
}

pub(crate) fn q_from_frequencies(freqs: &[f64], kind: QKind) -> Option<f64> {
    match kind {
        QKind::Mandel => q_mandel(freqs).ok(),
        QKind::Binomial => {
            let Moments { mean, variance } = moments(freqs);
            q_binomial_from_moments(mean, variance, freqs.len() - 1).ok()
        }
    }
}

/// Q parameter of a click histogram with its bootstrap 1σ.
///
/// Fails when fewer than two shots are given or the parameter is undefined on
/// the data. Degenerate histograms (one populated outcome) yield the value
/// with a NaN sigma and [`SigmaFlag::DegenerateCounts`].
pub fn q_uncertainty(counts: &[u64], kind: QKind, config: BootstrapConfig) -> Result<Estimate> {
    let total: u64 = counts.iter().sum();
    if total < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 shots, got {total}")));
    }
    if counts.len() < 2 {
        return Err(Error::Domain("histogram needs at least two outcomes".into()));
    }
    let freqs = frequencies(counts);
    let value = q_from_frequencies(&freqs, kind)
        .ok_or_else(|| Error::Domain(format!("{kind:?} parameter undefined for these counts")))?;

    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Ok(Estimate {
            value,
            sigma: f64::NAN,
            flag: Some(SigmaFlag::DegenerateCounts),
        });
    }
    let spread = bootstrap(counts, config, |f| q_from_frequencies(f, kind).map(|q| vec![q]));
    Ok(estimate_from_spread(value, &spread, 0))
}

/// Packs component `j` of a bootstrap spread into an [`Estimate`].
pub fn estimate_from_spread(value: f64, spread: &BootstrapSpread, j: usize) -> Estimate {
    let sigma = spread.sigma.get(j).copied().unwrap_or(f64::NAN);
    let failed = spread.failed.get(j).copied().unwrap_or(spread.resamples);
    if 2 * failed > spread.resamples || !sigma.is_finite() {
        return Estimate {
            value,
            sigma: f64::NAN,
            flag: Some(SigmaFlag::UnstableResamples),
        };
    }
    Estimate {
        value,
        sigma,
        flag: None,
    }
}

/// First-order (delta-method) standard error of a Q parameter, from the
/// sampling covariance of the first two raw moments. Offered as a cross-check
/// on the bootstrap.
pub fn delta_method_sigma(counts: &[u64], kind: QKind) -> f64 {
    let shots: u64 = counts.iter().sum();
    if shots < 2 {
        return f64::NAN;
    }
    let f = frequencies(counts);
    let raw = |p: i32| -> f64 { f.iter().enumerate().map(|(x, w)| (x as f64).powi(p) * w).sum() };
    let (m1, m2, m3, m4) = (raw(1), raw(2), raw(3), raw(4));
    let s = shots as f64;
    let c11 = (m2 - m1 * m1) / s;
    let c12 = (m3 - m1 * m2) / s;
    let c22 = (m4 - m2 * m2) / s;

    let (g1, g2) = match kind {
        QKind::Mandel => (-m2 / (m1 * m1) - 1.0, 1.0 / m1),
        QKind::Binomial => {
            let n = (counts.len() - 1) as f64;
            let v = m2 - m1 * m1;
            let d = m1 * (n - m1);
            (n * (-2.0 * m1 * d - v * (n - 2.0 * m1)) / (d * d), n / d)
        }
    };
    (g1 * g1 * c11 + 2.0 * g1 * g2 * c12 + g2 * g2 * c22).sqrt()
}
