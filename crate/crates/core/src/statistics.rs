//! Probability vectors over photon and click numbers, their moments, and the
//! Mandel / binomial Q parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of `sum(values)` from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Variances down to `-VARIANCE_CLAMP` are rounding noise and read as zero.
const VARIANCE_CLAMP: f64 = 1e-12;

/// Where a photon distribution came from; governs whether negative entries
/// are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    /// Physical probabilities, all entries nonnegative.
    Probability,
    /// Output of the click pseudo-inversion; may carry small negative entries.
    Pseudo,
    /// Output of loss deconvolution; may carry negative entries.
    Deconvolved,
}

impl DistributionKind {
    pub fn is_signed(self) -> bool {
        !matches!(self, DistributionKind::Probability)
    }
}

/// Anything that is a finite (quasi-)probability vector over `0, 1, 2, ...`.
pub trait Probabilities {
    fn probabilities(&self) -> &[f64];

    fn moments(&self) -> Moments {
        moments(self.probabilities())
    }
}

impl Probabilities for [f64] {
    fn probabilities(&self) -> &[f64] {
        self
    }
}

impl Probabilities for Vec<f64> {
    fn probabilities(&self) -> &[f64] {
        self
    }
}

fn check_normalized(values: &[f64]) -> Result<()> {
    let sum: f64 = values.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Normalization {
            sum,
            tolerance: NORMALIZATION_TOLERANCE,
        });
    }
    Ok(())
}

fn check_nonnegative(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v >= 0.0)) {
        Some(index) => Err(Error::NegativeEntry {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Distribution over photon numbers `n = 0..=n_max`, tagged with the detection
/// efficiency it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    values: Vec<f64>,
    eta_tag: f64,
    kind: DistributionKind,
}

impl PhotonDistribution {
    /// A physical distribution: nonnegative and normalized.
    pub fn new(values: Vec<f64>, eta_tag: f64) -> Result<Self> {
        Self::with_kind(values, eta_tag, DistributionKind::Probability)
    }

    /// A distribution of the given kind. Signed kinds skip the
    /// nonnegativity check but must still be normalized.
    pub fn with_kind(values: Vec<f64>, eta_tag: f64, kind: DistributionKind) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty photon distribution".into()));
        }
        if !(eta_tag > 0.0) || !eta_tag.is_finite() {
            return Err(Error::Domain(format!("efficiency tag must be positive, got {eta_tag}")));
        }
        if !kind.is_signed() {
            check_nonnegative(&values)?;
        }
        check_normalized(&values)?;
        Ok(Self { values, eta_tag, kind })
    }

    /// Point mass at photon number `n` on `0..=n_max`.
    pub fn point_mass(n: usize, n_max: usize, eta_tag: f64) -> Result<Self> {
        if n > n_max {
            return Err(Error::Domain(format!("point mass at {n} outside 0..={n_max}")));
        }
        let mut values = vec![0.0; n_max + 1];
        values[n] = 1.0;
        Self::new(values, eta_tag)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn eta_tag(&self) -> f64 {
        self.eta_tag
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Largest photon number represented.
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// Probability stored at the truncation edge `n_max`.
    pub fn edge_mass(&self) -> f64 {
        self.values[self.n_max()]
    }
}

impl Probabilities for PhotonDistribution {
    fn probabilities(&self) -> &[f64] {
        &self.values
    }
}

/// Distribution of the total click number `k = 0..=N` of an `N`-bin detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickDistribution {
    values: Vec<f64>,
    n_bins: usize,
    /// Number of shots the frequencies were estimated from; zero for analytic.
    shot_count: u64,
}

impl ClickDistribution {
    /// Wraps `N + 1` click probabilities. `shot_count` is zero for analytic
    /// vectors.
    pub fn new(values: Vec<f64>, shot_count: u64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "click distribution needs at least 2 entries (N >= 1), got {}",
                values.len()
            )));
        }
        check_nonnegative(&values)?;
        check_normalized(&values)?;
        let n_bins = values.len() - 1;
        Ok(Self {
            values,
            n_bins,
            shot_count,
        })
    }

    /// Relative frequencies of the histogram `counts[k]`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let shots: u64 = counts.iter().sum();
        if shots == 0 {
            return Err(Error::InsufficientData("click histogram has no shots".into()));
        }
        let values = frequencies(counts);
        Self::new(values, shots)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn shot_count(&self) -> u64 {
        self.shot_count
    }
}

impl Probabilities for ClickDistribution {
    fn probabilities(&self) -> &[f64] {
        &self.values
    }
}

/// `counts / sum(counts)`; all zeros for an empty histogram.
pub fn frequencies(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    let total = total as f64;
    counts.iter().map(|&c| c as f64 / total).collect()
}

/// First two moments of a count distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of `p` indexed by `x = 0, 1, ...`.
///
/// Variances in `[-1e-12, 0)` are clamped to zero. Signed quasi-distributions
/// can have a genuinely negative variance, which is returned unchanged.
pub fn moments(p: &[f64]) -> Moments {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (x, &px) in p.iter().enumerate() {
        let x = x as f64;
        m1 += x * px;
        m2 += x * x * px;
    }
    let mut variance = m2 - m1 * m1;
    if (-VARIANCE_CLAMP..0.0).contains(&variance) {
        variance = 0.0;
    }
    Moments { mean: m1, variance }
}

/// Mandel parameter `var / mean - 1`: zero for Poisson, negative for
/// sub-Poissonian statistics.
pub fn q_mandel<P: Probabilities + ?Sized>(d: &P) -> Result<f64> {
    let Moments { mean, variance } = d.moments();
    if !(mean > 0.0) {
        return Err(Error::Domain(format!(
            "Mandel parameter needs a positive mean, got {mean}"
        )));
    }
    Ok(variance / mean - 1.0)
}

/// Binomial parameter of a click distribution, `N var / (kbar (N - kbar)) - 1`:
/// zero for binomial statistics.
pub fn q_binomial(d: &ClickDistribution) -> Result<f64> {
    q_binomial_with_bins(d, d.n_bins())
}

/// Binomial parameter of any count distribution, evaluated for `n_bins`
/// detection bins. Used to probe photon-number vectors for binomial character.
pub fn q_binomial_with_bins<P: Probabilities + ?Sized>(d: &P, n_bins: usize) -> Result<f64> {
    let Moments { mean, variance } = d.moments();
    q_binomial_from_moments(mean, variance, n_bins)
}

pub(crate) fn q_binomial_from_moments(mean: f64, variance: f64, n_bins: usize) -> Result<f64> {
    let n = n_bins as f64;
    if !(mean > 0.0 && mean < n) {
        return Err(Error::Domain(format!(
            "binomial parameter undefined for mean clicks {mean} with N = {n_bins}"
        )));
    }
    Ok(n * variance / (mean * (n - mean)) - 1.0)
}

/// Total-variation distance `sum |a - b| / 2`, padding the shorter vector with
/// zeros.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}
