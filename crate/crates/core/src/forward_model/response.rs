use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::statistics::ClickDistribution;
use num_traits::ToPrimitive;

/// Click-detector response `Γ(n̄) = ν + η n̄/N + γ (n̄/N)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseParams {
    /// Dark-count contribution per bin.
    pub nu: f64,
    /// Quantum efficiency.
    pub eta: f64,
    /// Second-order (nonlinear absorption) coefficient.
    pub gamma: f64,
    pub n_bins: usize,
}

impl ResponseParams {
    pub fn new(nu: f64, eta: f64, gamma: f64, n_bins: usize) -> Result<Self> {
        let p = Self { nu, eta, gamma, n_bins };
        p.validate()?;
        Ok(p)
    }

    /// Linear, dark-count-free detector.
    pub fn ideal(eta: f64, n_bins: usize) -> Result<Self> {
        Self::new(0.0, eta, 0.0, n_bins)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 {
            return Err(Error::Domain("detector needs at least one bin".into()));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::Domain(format!("dark-count rate must be >= 0, got {}", self.nu)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Domain(format!(
                "efficiency must lie in [0, 1], got {}",
                self.eta
            )));
        }
        if !self.gamma.is_finite() {
            return Err(Error::Domain("nonlinearity must be finite".into()));
        }
        Ok(())
    }

    /// Γ at mean photon number `nbar`.
    pub fn gamma_at(&self, nbar: f64) -> Result<f64> {
        response_gamma(self, nbar)
    }

    /// Per-bin click probability `1 - e^{-Γ}`.
    pub fn click_probability(&self, nbar: f64) -> Result<f64> {
        Ok(-(-self.gamma_at(nbar)?).exp_m1())
    }
}

/// Evaluates the response function; negative Γ is unphysical and an error.
pub fn response_gamma(p: &ResponseParams, nbar: f64) -> Result<f64> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::Domain(format!("mean photon number must be >= 0, got {nbar}")));
    }
    let x = nbar / p.n_bins as f64;
    let g = p.nu + p.eta * x + p.gamma * x * x;
    if g < 0.0 {
        return Err(Error::Domain(format!(
            "response Γ = {g} < 0 at n̄ = {nbar}: unphysical parameter set"
        )));
    }
    Ok(g)
}

/// Click-number distribution of a coherent state: binomial with per-bin
/// no-click probability `e^{-Γ(n̄)}`.
pub fn coherent_click_distribution(p: &ResponseParams, nbar: f64) -> Result<ClickDistribution> {
    let g = response_gamma(p, nbar)?;
    let n = p.n_bins;
    let no_click = (-g).exp();
    let click = -(-g).exp_m1();
    let values = (0..=n)
        .map(|k| {
            let c = binomial(n as u64, k as u64).to_f64().unwrap_or(f64::INFINITY);
            c * click.powi(k as i32) * no_click.powi((n - k) as i32)
        })
        .collect();
    ClickDistribution::new(values, 0)
}
