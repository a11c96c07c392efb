//! Detector calibration from coherent-state sweeps.
//!
//! Each calibration point pairs an independently known mean photon number
//! with the measured click histogram. The mean click number is mapped to the
//! response `Γ = -ln(1 - k̄/N)`, which is linear in `(ν, η, γ)`, so the
//! response fit is an ordinary weighted least-squares problem solved by QR.
//! Bin-resolved tallies additionally give per-bin means (splitting
//! uniformity) and pairwise covariances (cross-talk).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::aggregate::ShotStatistics;
use crate::error::{Error, Result};
use crate::float_repr;
use crate::statistics::{frequencies, moments};
use crate::warning::Warning;

/// A parameter is significant when it exceeds this many standard deviations.
pub const SIGNIFICANCE_SIGMAS: f64 = 3.0;

/// Minimum number of calibration points for a fit.
pub const MIN_POINTS: usize = 4;

/// `Γ = -ln(1 - k̄/N)`.
pub fn gamma_from_mean_clicks(kbar: f64, n_bins: usize) -> Result<f64> {
    let n = n_bins as f64;
    if !(kbar >= 0.0) {
        return Err(Error::Domain(format!("mean clicks must be >= 0, got {kbar}")));
    }
    if kbar >= n {
        return Err(Error::Saturation { kbar, n_bins });
    }
    Ok(-(-kbar / n).ln_1p())
}

/// `k̄ = N (1 - e^{-Γ})`, the inverse of [`gamma_from_mean_clicks`].
pub fn mean_clicks_from_gamma(gamma: f64, n_bins: usize) -> f64 {
    -(n_bins as f64) * (-gamma).exp_m1()
}

/// One coherent-state measurement of the calibration sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    /// Independently known mean photon number at the detector input.
    pub nbar: f64,
    pub click_counts: Vec<u64>,
    pub shots: u64,
    /// Bin-resolved tallies, when the click patterns were recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_bin: Option<ShotStatistics>,
}

impl CalibrationPoint {
    pub fn new(nbar: f64, click_counts: Vec<u64>) -> Result<Self> {
        if click_counts.len() < 2 {
            return Err(Error::Domain("click histogram needs N + 1 >= 2 entries".into()));
        }
        if !(nbar >= 0.0) {
            return Err(Error::Domain(format!("mean photon number must be >= 0, got {nbar}")));
        }
        let shots = click_counts.iter().sum();
        Ok(Self {
            nbar,
            click_counts,
            shots,
            per_bin: None,
        })
    }

    pub fn from_statistics(nbar: f64, stats: ShotStatistics) -> Result<Self> {
        let mut p = Self::new(nbar, stats.click_counts().to_vec())?;
        p.per_bin = Some(stats);
        Ok(p)
    }

    pub fn n_bins(&self) -> usize {
        self.click_counts.len() - 1
    }

    /// Mean click number and its standard error `sqrt(var_k / shots)`.
    pub fn mean_clicks(&self) -> Result<(f64, f64)> {
        if self.shots == 0 {
            return Err(Error::InsufficientData(format!(
                "calibration point at n̄ = {} has no shots",
                self.nbar
            )));
        }
        let m = moments(&frequencies(&self.click_counts));
        Ok((m.mean, (m.variance.max(0.0) / self.shots as f64).sqrt()))
    }

    /// Γ with its propagated uncertainty `σ_k̄ / (N - k̄)`.
    pub fn gamma_observation(&self) -> Result<GammaObservation> {
        let (kbar, sigma_kbar) = self.mean_clicks()?;
        let n = self.n_bins();
        let gamma = gamma_from_mean_clicks(kbar, n)?;
        Ok(GammaObservation {
            nbar: self.nbar,
            gamma,
            sigma: sigma_kbar / (n as f64 - kbar),
        })
    }
}

/// A response value `Γ(n̄)` with its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaObservation {
    pub nbar: f64,
    pub gamma: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitOrder {
    /// `Γ = ν + η n̄/N` (γ fixed to zero).
    Linear,
    /// `Γ = ν + η n̄/N + γ (n̄/N)²`.
    Quadratic,
}

impl FitOrder {
    fn parameters(self) -> usize {
        match self {
            FitOrder::Linear => 2,
            FitOrder::Quadratic => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Weights `1 / σ_Γ²`.
    InverseVariance,
    Unweighted,
}

/// Fitted response parameters `(ν, η, γ)`.
///
/// Arrays are ordered `[ν, η, γ]`. In linear mode γ is fixed at zero and its
/// row and column of the covariance are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseFit {
    pub n_bins: usize,
    pub order: FitOrder,
    pub weighting: Weighting,
    pub nu: f64,
    pub eta: f64,
    pub gamma: f64,
    /// Absolute 1σ per parameter.
    pub std_errors: [f64; 3],
    /// `σ / |value|` per parameter.
    #[serde(with = "float_repr::vec")]
    pub relative_errors: Vec<f64>,
    pub covariance: [[f64; 3]; 3],
    /// `|value| / σ` per parameter; zero for a fixed parameter.
    #[serde(with = "float_repr::vec")]
    pub significance: Vec<f64>,
    #[serde(with = "float_repr")]
    pub r_squared: f64,
    #[serde(with = "float_repr")]
    pub chi_squared: f64,
    pub dof: usize,
    pub points: usize,
    #[serde(default)]
    pub warnings: Vec<Warning>,
}

impl ResponseFit {
    pub fn values(&self) -> [f64; 3] {
        [self.nu, self.eta, self.gamma]
    }

    /// Whether parameter `i` (0 = ν, 1 = η, 2 = γ) differs from zero by more
    /// than three standard deviations.
    pub fn is_significant(&self, i: usize) -> bool {
        self.significance[i] >= SIGNIFICANCE_SIGMAS
    }
}

/// Weighted least-squares fit of `Γ_i = ν + η x_i + γ x_i²`, `x_i = n̄_i / N`.
pub fn fit_gamma_values(
    n_bins: usize,
    observations: &[GammaObservation],
    order: FitOrder,
    weighting: Weighting,
) -> Result<ResponseFit> {
    if n_bins == 0 {
        return Err(Error::Domain("need N >= 1".into()));
    }
    if observations.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_POINTS} calibration points, got {}",
            observations.len()
        )));
    }
    let k = order.parameters();
    let mut distinct: Vec<f64> = observations.iter().map(|o| o.nbar).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::RankDeficient(format!(
            "{} distinct n̄ values cannot determine {k} parameters",
            distinct.len()
        )));
    }

    let rows = observations.len();
    let mut design = DMatrix::<f64>::zeros(rows, k);
    let mut rhs = DVector::<f64>::zeros(rows);
    let mut weights = Vec::with_capacity(rows);
    for (i, o) in observations.iter().enumerate() {
        let w = match weighting {
            Weighting::Unweighted => 1.0,
            Weighting::InverseVariance => {
                if !(o.sigma > 0.0) || !o.sigma.is_finite() {
                    return Err(Error::InsufficientData(format!(
                        "point at n̄ = {} has no usable uncertainty (σ = {})",
                        o.nbar, o.sigma
                    )));
                }
                1.0 / (o.sigma * o.sigma)
            }
        };
        let sw = w.sqrt();
        let x = o.nbar / n_bins as f64;
        design[(i, 0)] = sw;
        design[(i, 1)] = sw * x;
        if k == 3 {
            design[(i, 2)] = sw * x * x;
        }
        rhs[i] = sw * o.gamma;
        weights.push(w);
    }

    let qr = design.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= scale * 1e-13) {
        return Err(Error::RankDeficient("calibration design matrix is singular".into()));
    }
    let qty = qr.q().transpose() * &rhs;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::RankDeficient("triangular inverse failed".into()))?;
    let cov = &r_inv * r_inv.transpose();

    let fitted = &design * &beta;
    let residual = &rhs - &fitted;
    let chi_squared = residual.norm_squared();
    let wsum: f64 = weights.iter().sum();
    let ybar = observations.iter().zip(&weights).map(|(o, w)| w * o.gamma).sum::<f64>() / wsum;
    let ss_tot: f64 = observations
        .iter()
        .zip(&weights)
        .map(|(o, w)| w * (o.gamma - ybar).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - chi_squared / ss_tot
    } else {
        f64::NAN
    };

    let mut values = [0.0; 3];
    let mut covariance = [[0.0; 3]; 3];
    for i in 0..k {
        values[i] = beta[i];
        for j in 0..k {
            covariance[i][j] = cov[(i, j)];
        }
    }
    let std_errors = [0, 1, 2].map(|i| covariance[i][i].max(0.0).sqrt());
    let significance = (0..3)
        .map(|i| if i < k { values[i].abs() / std_errors[i] } else { 0.0 })
        .collect();
    let relative_errors = (0..3)
        .map(|i| {
            if i < k {
                std_errors[i] / values[i].abs()
            } else {
                f64::NAN
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if values[1] < 0.0 {
        warnings.push(Warning::NegativeEfficiency { eta: values[1] });
    }
    Ok(ResponseFit {
        n_bins,
        order,
        weighting,
        nu: values[0],
        eta: values[1],
        gamma: values[2],
        std_errors,
        relative_errors,
        covariance,
        significance,
        r_squared,
        chi_squared,
        dof: rows - k,
        points: rows,
        warnings,
    })
}

fn common_bins(points: &[CalibrationPoint]) -> Result<usize> {
    let n = points
        .first()
        .ok_or_else(|| Error::InsufficientData("no calibration points".into()))?
        .n_bins();
    if let Some(p) = points.iter().find(|p| p.n_bins() != n) {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            actual: p.click_counts.len(),
        });
    }
    Ok(n)
}

/// Inverse-variance weighted response fit of measured calibration points.
pub fn fit_response(points: &[CalibrationPoint], order: FitOrder) -> Result<ResponseFit> {
    fit_response_weighted(points, order, Weighting::InverseVariance)
}

pub fn fit_response_weighted(
    points: &[CalibrationPoint],
    order: FitOrder,
    weighting: Weighting,
) -> Result<ResponseFit> {
    let n_bins = common_bins(points)?;
    if points.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_POINTS} calibration points, got {}",
            points.len()
        )));
    }
    let obs = points
        .iter()
        .map(CalibrationPoint::gamma_observation)
        .collect::<Result<Vec<_>>>()?;
    fit_gamma_values(n_bins, &obs, order, weighting)
}

/// Linear and quadratic fits side by side, with the order the data support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub linear: ResponseFit,
    pub quadratic: ResponseFit,
    /// Whether γ of the quadratic fit is significant at three sigma.
    pub gamma_significant: bool,
    pub preferred: FitOrder,
}

impl Calibration {
    pub fn fit(&self, order: FitOrder) -> &ResponseFit {
        match order {
            FitOrder::Linear => &self.linear,
            FitOrder::Quadratic => &self.quadratic,
        }
    }

    pub fn preferred_fit(&self) -> &ResponseFit {
        self.fit(self.preferred)
    }
}

/// Runs both model orders; the quadratic one is preferred only when its γ is
/// significant.
pub fn calibrate(points: &[CalibrationPoint], weighting: Weighting) -> Result<Calibration> {
    let linear = fit_response_weighted(points, FitOrder::Linear, weighting)?;
    let quadratic = fit_response_weighted(points, FitOrder::Quadratic, weighting)?;
    let gamma_significant = quadratic.is_significant(2);
    Ok(Calibration {
        linear,
        quadratic,
        gamma_significant,
        preferred: if gamma_significant {
            FitOrder::Quadratic
        } else {
            FitOrder::Linear
        },
    })
}

/// Mean clicks per bin with binomial standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMeans {
    pub means: Vec<f64>,
    pub sigma: Vec<f64>,
    pub shots: u64,
}

impl BinMeans {
    pub fn new(means: Vec<f64>, sigma: Vec<f64>, shots: u64) -> Result<Self> {
        if means.len() != sigma.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                actual: sigma.len(),
            });
        }
        Ok(Self { means, sigma, shots })
    }

    /// `(max - min)` of the means.
    pub fn spread(&self) -> f64 {
        let max = self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.means.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// `k̄_j = clicks in bin j / shots`, with σ `sqrt(k̄_j (1 - k̄_j) / shots)`.
pub fn bin_means(stats: &ShotStatistics) -> Result<BinMeans> {
    if stats.shots() == 0 {
        return Err(Error::InsufficientData("no shots recorded".into()));
    }
    let s = stats.shots() as f64;
    let means: Vec<f64> = stats.marginals().iter().map(|&c| c as f64 / s).collect();
    let sigma = means.iter().map(|m| (m * (1.0 - m) / s).sqrt()).collect();
    BinMeans::new(means, sigma, stats.shots())
}

/// Pairwise bin covariances with the standard error of each estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCovariance {
    pub cov: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
}

impl BinCovariance {
    /// Largest `|cov| / σ` over distinct bin pairs; entries with zero σ and
    /// zero covariance count as zero.
    pub fn max_off_diagonal_significance(&self) -> f64 {
        let n = self.cov.nrows();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                let (c, s) = (self.cov[(j, k)], self.sigma[(j, k)]);
                let z = if c == 0.0 { 0.0 } else { c.abs() / s };
                worst = worst.max(z);
            }
        }
        worst
    }

    /// All off-diagonal covariances lie within `k` standard errors of zero.
    pub fn off_diagonal_within(&self, k: f64) -> bool {
        self.max_off_diagonal_significance() < k
    }
}

/// `cov(j, j') = mean(k_j k_j') - mean(k_j) mean(k_j')` from pairwise click
/// tallies; the diagonal holds the Bernoulli variances.
///
/// Each σ is `sqrt((E[(k_j - a)²(k_j' - b)²] - cov²) / shots)`, evaluated from
/// the empirical 2x2 joint table of the pair.
pub fn bin_covariances(stats: &ShotStatistics) -> Result<BinCovariance> {
    if stats.shots() < 2 {
        return Err(Error::InsufficientData("need at least 2 shots for covariances".into()));
    }
    let n = stats.n_bins();
    let s = stats.shots() as f64;
    let mut cov = DMatrix::zeros(n, n);
    let mut sigma = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let a = stats.marginal(j) as f64 / s;
            let b = stats.marginal(k) as f64 / s;
            let p11 = stats.joint(j, k) as f64 / s;
            let p10 = a - p11;
            let p01 = b - p11;
            let p00 = 1.0 - a - b + p11;
            let c = p11 - a * b;
            let fourth = p11 * (1.0 - a).powi(2) * (1.0 - b).powi(2)
                + p10 * (1.0 - a).powi(2) * b * b
                + p01 * a * a * (1.0 - b).powi(2)
                + p00 * a * a * b * b;
            cov[(j, k)] = c;
            sigma[(j, k)] = ((fourth - c * c).max(0.0) / s).sqrt();
        }
    }
    Ok(BinCovariance { cov, sigma })
}

/// Chi-square test of equal bin means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformityTest {
    #[serde(with = "float_repr")]
    pub chi2: f64,
    pub dof: usize,
    #[serde(with = "float_repr")]
    pub p_value: f64,
    /// Some bin has zero variance; the statistic is undefined (NaN).
    pub degenerate: bool,
}

/// `χ² = Σ_j (k̄_j - k̄_pooled)² / σ_j²` with `N - 1` degrees of freedom, the
/// pooled mean being the inverse-variance weighted average.
pub fn uniformity_test(means: &BinMeans) -> Result<UniformityTest> {
    let n = means.means.len();
    if n < 2 {
        return Err(Error::Domain("uniformity test needs at least 2 bins".into()));
    }
    let dof = n - 1;
    if means.sigma.iter().any(|s| !(*s > 0.0)) {
        return Ok(UniformityTest {
            chi2: f64::NAN,
            dof,
            p_value: f64::NAN,
            degenerate: true,
        });
    }
    let w: Vec<f64> = means.sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let pooled = means.means.iter().zip(&w).map(|(m, w)| m * w).sum::<f64>() / w.iter().sum::<f64>();
    let chi2: f64 = means.means.iter().zip(&w).map(|(m, w)| w * (m - pooled).powi(2)).sum();
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(UniformityTest {
        chi2,
        dof,
        p_value: dist.sf(chi2),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_transform_examples() {
        assert_eq!(gamma_from_mean_clicks(0.0, 4).unwrap(), 0.0);
        let g = gamma_from_mean_clicks(1.0, 4).unwrap();
        assert!((g - 0.2876820724517809).abs() < 1e-15);
        assert!((mean_clicks_from_gamma(g, 4) - 1.0).abs() < 1e-12);
        assert!(matches!(gamma_from_mean_clicks(4.0, 4), Err(Error::Saturation { .. })));
        assert!(gamma_from_mean_clicks(-0.1, 4).is_err());
    }

    #[test]
    fn gamma_transform_round_trip() {
        for n in [1, 4, 8] {
            for i in 0..100 {
                let kbar = n as f64 * i as f64 / 100.0;
                let back = mean_clicks_from_gamma(gamma_from_mean_clicks(kbar, n).unwrap(), n);
                assert!((back - kbar).abs() < 1e-12);
            }
        }
    }

    fn exact_observations(nu: f64, eta: f64, gamma: f64, n: usize, count: usize) -> Vec<GammaObservation> {
        (0..count)
            .map(|i| {
                let nbar = 0.027 * (0.85f64 / 0.027).powf(i as f64 / (count - 1) as f64);
                let x = nbar / n as f64;
                GammaObservation {
                    nbar,
                    gamma: nu + eta * x + gamma * x * x,
                    sigma: 1e-4,
                }
            })
            .collect()
    }

    #[test]
    fn noiseless_fit_is_exact() {
        for (nu, eta, gamma) in [(0.0, 0.608, 0.0), (1.8e-4, 0.608, 0.019), (5.8e-6, 0.605, 0.062)] {
            let obs = exact_observations(nu, eta, gamma, 4, 16);
            let fit = fit_gamma_values(4, &obs, FitOrder::Quadratic, Weighting::InverseVariance).unwrap();
            assert!((fit.nu - nu).abs() < 1e-10, "{fit:?}");
            assert!((fit.eta - eta).abs() < 1e-10);
            assert!((fit.gamma - gamma).abs() < 1e-10);
            assert!(fit.r_squared > 1.0 - 1e-12);
        }
    }

    #[test]
    fn linear_mode_fixes_gamma() {
        let obs = exact_observations(1e-4, 0.6, 0.0, 8, 6);
        let fit = fit_gamma_values(8, &obs, FitOrder::Linear, Weighting::Unweighted).unwrap();
        assert_eq!(fit.gamma, 0.0);
        assert_eq!(fit.std_errors[2], 0.0);
        assert_eq!(fit.covariance[2], [0.0; 3]);
        assert!((fit.eta - 0.6).abs() < 1e-10);
        assert_eq!(fit.dof, 4);
    }

    #[test]
    fn fit_preconditions() {
        let obs = exact_observations(0.0, 0.6, 0.0, 4, 3);
        assert!(matches!(
            fit_gamma_values(4, &obs, FitOrder::Linear, Weighting::Unweighted),
            Err(Error::InsufficientData(_))
        ));
        let same = vec![
            GammaObservation {
                nbar: 0.5,
                gamma: 0.1,
                sigma: 1e-3
            };
            5
        ];
        assert!(matches!(
            fit_gamma_values(4, &same, FitOrder::Linear, Weighting::Unweighted),
            Err(Error::RankDeficient(_))
        ));
        let mut two = exact_observations(0.0, 0.6, 0.0, 4, 4);
        two[2].nbar = two[0].nbar;
        two[3].nbar = two[1].nbar;
        assert!(fit_gamma_values(4, &two, FitOrder::Quadratic, Weighting::Unweighted).is_err());
        assert!(fit_gamma_values(4, &two, FitOrder::Linear, Weighting::Unweighted).is_ok());
    }

    #[test]
    fn negative_efficiency_flagged() {
        let obs = exact_observations(0.01, -0.2, 0.0, 4, 6);
        let fit = fit_gamma_values(4, &obs, FitOrder::Linear, Weighting::Unweighted).unwrap();
        assert!(matches!(fit.warnings[..], [Warning::NegativeEfficiency { .. }]));
    }

    #[test]
    fn saturated_point_rejected() {
        let p = CalibrationPoint::new(5.0, vec![0, 0, 0, 0, 100]).unwrap();
        assert!(matches!(p.gamma_observation(), Err(Error::Saturation { .. })));
    }

    #[test]
    fn bin_means_of_all_clicks() {
        let mut s = ShotStatistics::new(4).unwrap();
        for _ in 0..10 {
            s.record_bits(0b1111);
        }
        let m = bin_means(&s).unwrap();
        assert_eq!(m.means, vec![1.0; 4]);
        let t = uniformity_test(&m).unwrap();
        assert!(t.degenerate);
        let cov = bin_covariances(&s).unwrap();
        assert_eq!(cov.cov, DMatrix::zeros(4, 4));
        assert!(bin_means(&ShotStatistics::new(4).unwrap()).is_err());
    }

    #[test]
    fn copied_bin_covariance_equals_variance() {
        let mut s = ShotStatistics::new(3).unwrap();
        // bin 1 copies bin 0; bin 2 independent
        for (i, b0) in [true, false, true, true, false, false, true, false].iter().enumerate() {
            let b2 = i % 3 == 0;
            let bits = u64::from(*b0) | u64::from(*b0) << 1 | u64::from(b2) << 2;
            s.record_bits(bits);
        }
        let cov = bin_covariances(&s).unwrap();
        assert_eq!(cov.cov[(0, 1)], cov.cov[(0, 0)]);
        assert!((cov.cov[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn uniformity_examples() {
        let m = BinMeans::new(vec![0.2; 4], vec![0.01; 4], 1000).unwrap();
        let t = uniformity_test(&m).unwrap();
        assert_eq!(t.chi2, 0.0);
        assert_eq!(t.dof, 3);
        assert!((t.p_value - 1.0).abs() < 1e-12);

        let biased = BinMeans::new(vec![0.2, 0.2, 0.2, 0.3], vec![0.01; 4], 1000).unwrap();
        let t = uniformity_test(&biased).unwrap();
        assert!(t.p_value < 1e-6, "{t:?}");
        assert!(uniformity_test(&BinMeans::new(vec![0.2], vec![0.01], 10).unwrap()).is_err());
    }
}
