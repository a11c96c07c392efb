use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::forward_model::TAIL_WARNING_THRESHOLD;
use crate::statistics::PhotonDistribution;
use crate::warning::Warning;

/// Planck constant, J s (exact in the 2019 SI, CODATA 2018).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s (exact, CODATA 2018).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default photon-number cutoff: `max(ceil(4 n̄ N), 30)`.
pub fn default_n_max(nbar: f64, n_bins: usize) -> usize {
    ((4.0 * nbar * n_bins as f64).ceil() as usize).max(30)
}

/// A truncated Poisson distribution with the probability it leaves out.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPoisson {
    pub distribution: PhotonDistribution,
    /// `P(n > n_max)` of the untruncated distribution.
    pub tail_mass: f64,
    pub warning: Option<Warning>,
}

/// Poisson photon statistics of a coherent state with mean `nbar`, truncated
/// to `0..=n_max`.
///
/// The kept entries are rescaled by `1 / (1 - tail_mass)`; the lost tail is
/// reported, with a warning above 1e-6.
pub fn poisson_distribution(nbar: f64, n_max: usize) -> Result<TruncatedPoisson> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::Domain(format!("mean photon number must be >= 0, got {nbar}")));
    }
    if nbar == 0.0 {
        return Ok(TruncatedPoisson {
            distribution: PhotonDistribution::point_mass(0, n_max, 1.0)?,
            tail_mass: 0.0,
            warning: None,
        });
    }
    let ln_nbar = nbar.ln();
    let mut values: Vec<f64> = (0..=n_max)
        .map(|n| (-nbar + n as f64 * ln_nbar - ln_factorial(n as u64)).exp())
        .collect();
    // P(X >= n_max + 1) = P(n_max + 1, nbar), the regularized lower gamma.
    let tail_mass = gamma_lr((n_max + 1) as f64, nbar);
    let kept: f64 = values.iter().sum();
    if kept > 0.0 && (kept - 1.0).abs() > f64::EPSILON {
        values.iter_mut().for_each(|v| *v /= kept);
    }
    let warning = (tail_mass > TAIL_WARNING_THRESHOLD).then_some(Warning::TailMass { mass: tail_mass, n_max });
    Ok(TruncatedPoisson {
        distribution: PhotonDistribution::new(values, 1.0)?,
        tail_mass,
        warning,
    })
}

/// Mean photons per pulse from measured power and attenuation,
/// `n̄ = 10^{-(L0+L)/10} P0 λ / (r h c)`.
///
/// `p0_watts`, `lambda_m` and `rep_rate_hz` must be positive; the attenuations
/// are in dB.
pub fn photon_flux(p0_watts: f64, l0_db: f64, l_db: f64, lambda_m: f64, rep_rate_hz: f64) -> Result<f64> {
    for (name, v) in [
        ("power", p0_watts),
        ("wavelength", lambda_m),
        ("repetition rate", rep_rate_hz),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    if !l0_db.is_finite() || !l_db.is_finite() {
        return Err(Error::Domain("attenuation must be finite".into()));
    }
    let power = 10f64.powf(-(l0_db + l_db) / 10.0) * p0_watts;
    Ok(power * lambda_m / (rep_rate_hz * PLANCK * SPEED_OF_LIGHT))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::moments;

    #[test]
    fn vacuum_is_point_mass() {
        let t = poisson_distribution(0.0, 10).unwrap();
        assert_eq!(t.distribution.values()[0], 1.0);
        assert_eq!(t.tail_mass, 0.0);
    }

    #[test]
    fn tail_mass_and_mean() {
        let t = poisson_distribution(0.85, 30).unwrap();
        assert!(t.tail_mass < 1e-20, "{}", t.tail_mass);
        assert!(t.warning.is_none());
        assert!((moments(t.distribution.values()).mean - 0.85).abs() < 1e-12);

        // mpmath: P(X > 8) for X ~ Poisson(0.85)
        let t = poisson_distribution(0.85, 8).unwrap();
        assert!(
            (t.tail_mass / 2.9792421088130448e-7 - 1.0).abs() < 1e-9,
            "{}",
            t.tail_mass
        );
        assert!(t.warning.is_none());

        let t = poisson_distribution(0.85, 3).unwrap();
        assert!(matches!(t.warning, Some(Warning::TailMass { n_max: 3, .. })));
        assert!((t.distribution.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_mean_does_not_underflow() {
        let t = poisson_distribution(800.0, default_n_max(800.0, 4)).unwrap();
        assert!((moments(t.distribution.values()).mean - 800.0).abs() < 1e-6);
    }

    #[test]
    fn default_cutoff() {
        assert_eq!(default_n_max(0.85, 8), 30);
        assert_eq!(default_n_max(10.0, 8), 320);
    }

    #[test]
    fn photon_flux_scaling() {
        let base = photon_flux(1.5e-5, 33.4, 60.0, 1549.8e-9, 2e6).unwrap();
        let doubled = photon_flux(3.0e-5, 33.4, 60.0, 1549.8e-9, 2e6).unwrap();
        assert!((doubled / base - 2.0).abs() < 1e-14);
        let attenuated = photon_flux(1.5e-5, 33.4, 70.0, 1549.8e-9, 2e6).unwrap();
        assert!((base / attenuated - 10.0).abs() < 1e-12);
        assert!(photon_flux(0.0, 33.4, 60.0, 1549.8e-9, 2e6).is_err());
    }

    #[test]
    fn photon_flux_at_lab_settings() {
        // Independent evaluation (Python, CODATA 2018 h and c).
        let hi = photon_flux(1.5e-5, 33.4, 55.0, 1549.8e-9, 2e6).unwrap();
        let lo = photon_flux(1.5e-5, 33.4, 70.0, 1549.8e-9, 2e6).unwrap();
        assert!((hi / 0.08457854068763415 - 1.0).abs() < 1e-12, "{hi}");
        assert!((lo / 0.0026746082974614775 - 1.0).abs() < 1e-12, "{lo}");
        // 15 dB of span: the same ~31.5x dynamic range as 0.027..0.85, but
        // one decade lower.
        assert!((hi / lo - 10f64.powf(1.5)).abs() < 1e-9);
    }
}
