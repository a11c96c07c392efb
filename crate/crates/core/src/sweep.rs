//! Simulated coherent-state sweeps and the default experiment layout.
//!
//! The defaults describe two detectors, `N = 4` at `η = 0.608` measured at 16
//! mean photon numbers and `N = 8` at `η = 0.605` measured at 6, with the
//! photon numbers spaced geometrically over `[0.027, 0.85]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward_model::{ResponseParams, ShotSampler};
use crate::rng::derive_seed;
use crate::tomography::CalibrationPoint;

pub const NBAR_MIN: f64 = 0.027;
pub const NBAR_MAX: f64 = 0.85;

/// One detector of the default experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSetup {
    pub params: ResponseParams,
    /// Number of coherent states in the calibration sweep.
    pub points: usize,
}

impl DetectorSetup {
    pub fn nbar_grid(&self) -> Vec<f64> {
        nbar_grid(NBAR_MIN, NBAR_MAX, self.points).expect("default grid is valid")
    }
}

/// The `N = 4` and `N = 8` detectors of the default experiment.
pub fn default_setups() -> [DetectorSetup; 2] {
    [
        DetectorSetup {
            params: ResponseParams::ideal(0.608, 4).expect("valid"),
            points: 16,
        },
        DetectorSetup {
            params: ResponseParams::ideal(0.605, 8).expect("valid"),
            points: 6,
        },
    ]
}

/// `points` values spaced geometrically from `lo` to `hi` inclusive.
pub fn nbar_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Domain(format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
    }
    match points {
        0 => Err(Error::Domain("need at least one grid point".into())),
        1 => Ok(vec![hi]),
        _ => {
            let step = (hi / lo).ln() / (points - 1) as f64;
            let mut grid: Vec<f64> = (0..points).map(|i| lo * (step * i as f64).exp()).collect();
            grid[points - 1] = hi;
            Ok(grid)
        }
    }
}

/// Seed of point `index` in a sweep seeded with `seed`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64)
}

/// Simulates `shots` shots at each mean photon number and keeps the
/// bin-resolved tallies. Point `i` uses [`point_seed`]`(seed, i)`.
pub fn simulate_sweep(params: &ResponseParams, nbars: &[f64], shots: u64, seed: u64) -> Result<Vec<CalibrationPoint>> {
    if shots == 0 {
        return Err(Error::Domain("need at least one shot".into()));
    }
    nbars
        .iter()
        .enumerate()
        .map(|(i, &nbar)| {
            let sampler = ShotSampler::coherent(params, nbar, point_seed(seed, i))?;
            CalibrationPoint::from_statistics(nbar, sampler.aggregate(shots))
        })
        .collect()
}
