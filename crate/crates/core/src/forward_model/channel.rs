use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, falling_factorial, tables};
use crate::error::{Error, Result};
use crate::statistics::{ClickDistribution, DistributionKind, PhotonDistribution};
use crate::warning::Warning;

/// Input mass at the truncation edge above which results get a tail warning.
pub const TAIL_WARNING_THRESHOLD: f64 = 1e-6;

/// What a [`ChannelMatrix`] maps between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelRole {
    /// Photon numbers (columns `n`) to click numbers (rows `k`).
    Conversion,
    /// Click numbers (columns `k`) to pseudo-photon numbers (rows `m`).
    PseudoInverse,
    /// Photon numbers before loss (columns `m`) to after loss (rows `n`).
    Loss,
}

impl ChannelRole {
    pub fn row_meaning(self) -> &'static str {
        match self {
            ChannelRole::Conversion => "total clicks k",
            ChannelRole::PseudoInverse => "pseudo-photon number m",
            ChannelRole::Loss => "photon number n after loss",
        }
    }

    pub fn col_meaning(self) -> &'static str {
        match self {
            ChannelRole::Conversion => "photon number n",
            ChannelRole::PseudoInverse => "total clicks k",
            ChannelRole::Loss => "photon number m before loss",
        }
    }
}

/// Dense real matrix tagged with its role. Vectors are columns; the matrix
/// acts from the left.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<f64>,
    role: ChannelRole,
    n_bins: Option<usize>,
    eta: Option<f64>,
}

impl ChannelMatrix {
    pub(crate) fn from_parts(
        entries: DMatrix<f64>,
        role: ChannelRole,
        n_bins: Option<usize>,
        eta: Option<f64>,
    ) -> Self {
        Self {
            entries,
            role,
            n_bins,
            eta,
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn role(&self) -> ChannelRole {
        self.role
    }

    pub fn n_bins(&self) -> Option<usize> {
        self.n_bins
    }

    /// Transmission of a loss matrix.
    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }

    /// Column sums; all ones for a normalization-preserving map.
    pub fn column_sums(&self) -> Vec<f64> {
        self.entries.row_sum().iter().copied().collect()
    }

    /// Matrix-vector product.
    pub fn apply(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.ncols(),
                actual: input.len(),
            });
        }
        let v = DVector::from_column_slice(input);
        Ok((&self.entries * v).iter().copied().collect())
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &ChannelMatrix) -> Result<DMatrix<f64>> {
        if self.entries.ncols() != rhs.entries.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.ncols(),
                actual: rhs.entries.nrows(),
            });
        }
        Ok(&self.entries * &rhs.entries)
    }
}

/// `numerator / denominator`, rounded once to the nearest `f64`.
pub(crate) fn ratio_to_f64(numerator: BigInt, denominator: BigInt) -> f64 {
    BigRational::new(numerator, denominator)
        .to_f64()
        .expect("finite rational converts to f64")
}

/// Photon-to-click conversion matrix of an `N`-bin detector,
/// `C[k, n] = binom(N, k) k! {n k} / N^n`, shape `(N+1) x (n_max+1)`.
///
/// Entries are formed as exact rationals and rounded once.
pub fn conversion_matrix(n_bins: usize, n_max: usize) -> Result<ChannelMatrix> {
    if n_bins == 0 {
        return Err(Error::Domain("conversion matrix needs N >= 1".into()));
    }
    if n_max < n_bins {
        return Err(Error::Domain(format!("n_max = {n_max} must be at least N = {n_bins}")));
    }
    let t = tables(n_max + 1);
    let base = BigInt::from(n_bins);
    let mut power = BigInt::one();
    let mut m = DMatrix::zeros(n_bins + 1, n_max + 1);
    let falling: Vec<BigInt> = (0..=n_bins as u64)
        .map(|k| falling_factorial(n_bins as u64, k))
        .collect();
    for n in 0..=n_max {
        if n > 0 {
            power *= &base;
        }
        for k in 0..=n_bins.min(n) {
            let num = &falling[k] * t.second(n, k);
            m[(k, n)] = ratio_to_f64(num, power.clone());
        }
    }
    Ok(ChannelMatrix::from_parts(
        m,
        ChannelRole::Conversion,
        Some(n_bins),
        None,
    ))
}

/// Binomial loss map `H[n, m] = binom(m, n) η^n (1-η)^{m-n}` for `m >= n`,
/// shape `(dim+1) x (dim+1)`. `η > 1` gives the inverse map of `H(1/η)`.
pub fn loss_matrix(eta: f64, dim: usize) -> Result<ChannelMatrix> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!("loss transmission must be > 0, got {eta}")));
    }
    let mut m = DMatrix::zeros(dim + 1, dim + 1);
    let loss = 1.0 - eta;
    for col in 0..=dim {
        for row in 0..=col {
            let c = binomial(col as u64, row as u64).to_f64().unwrap_or(f64::INFINITY);
            m[(row, col)] = c * eta.powi(row as i32) * loss.powi((col - row) as i32);
        }
    }
    Ok(ChannelMatrix::from_parts(m, ChannelRole::Loss, None, Some(eta)))
}

/// Result of pushing a photon distribution through a channel.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelOutput {
    Photons(PhotonDistribution),
    Clicks(ClickDistribution),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    pub output: ChannelOutput,
    pub warnings: Vec<Warning>,
}

/// Applies a loss or conversion matrix to a photon distribution.
///
/// A loss matrix multiplies the efficiency tag by its transmission; a
/// conversion matrix produces click statistics. Input mass above
/// [`TAIL_WARNING_THRESHOLD`] at the truncation edge yields a warning, since
/// the truncated vector then misses part of the state.
pub fn apply_channel(matrix: &ChannelMatrix, d: &PhotonDistribution) -> Result<Propagated> {
    let mut warnings = Vec::new();
    if d.edge_mass().abs() > TAIL_WARNING_THRESHOLD {
        warnings.push(Warning::TailMass {
            mass: d.edge_mass(),
            n_max: d.n_max(),
        });
    }
    let values = matrix.apply(d.values())?;
    let output = match matrix.role() {
        ChannelRole::Conversion => ChannelOutput::Clicks(ClickDistribution::new(values, 0)?),
        ChannelRole::Loss => {
            let eta = matrix.eta().expect("loss matrix carries its transmission");
            let kind = if eta > 1.0 || d.kind().is_signed() {
                match d.kind() {
                    DistributionKind::Probability => DistributionKind::Deconvolved,
                    other => other,
                }
            } else {
                d.kind()
            };
            ChannelOutput::Photons(PhotonDistribution::with_kind(values, d.eta_tag() * eta, kind)?)
        }
        ChannelRole::PseudoInverse => {
            return Err(Error::Domain(
                "the pseudo-inverse acts on click distributions, not photon distributions".into(),
            ))
        }
    };
    Ok(Propagated { output, warnings })
}
