//! Per-shot Monte-Carlo model of a multiplexed click detector.
//!
//! Shot `i` draws its randomness from the counter-based substream
//! `(seed, i)`, so any subset of shots can be regenerated, in any order or in
//! parallel, with identical results.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aggregate::{unpack, ShotRecord, ShotStatistics, MAX_BINS};
use crate::error::{Error, Result};
use crate::forward_model::ResponseParams;
use crate::rng::{substream, Purpose};
use crate::statistics::PhotonDistribution;

/// Shots per parallel work item when aggregating.
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
enum Model {
    /// Coherent input: bins click independently with probability `1 - e^{-Γ}`.
    Coherent { click_probability: f64 },
    /// Arbitrary photon statistics: draw `n`, keep each photon with
    /// probability η, send survivors to uniformly random bins, then add dark
    /// clicks per bin with probability `1 - e^{-ν}`.
    GeneralState {
        cumulative: Vec<f64>,
        eta: f64,
        dark_probability: f64,
    },
}

/// Seeded generator of [`ShotRecord`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotSampler {
    n_bins: usize,
    seed: u64,
    model: Model,
}

fn check_bins(n_bins: usize) -> Result<()> {
    if n_bins == 0 || n_bins > MAX_BINS {
        return Err(Error::Domain(format!(
            "sampler supports 1..={MAX_BINS} bins, got {n_bins}"
        )));
    }
    Ok(())
}

impl ShotSampler {
    /// Coherent light of mean photon number `nbar`; losses, dark counts and
    /// the nonlinearity all enter through Γ.
    pub fn coherent(params: &ResponseParams, nbar: f64, seed: u64) -> Result<Self> {
        params.validate()?;
        check_bins(params.n_bins)?;
        Ok(Self {
            n_bins: params.n_bins,
            seed,
            model: Model::Coherent {
                click_probability: params.click_probability(nbar)?,
            },
        })
    }

    /// Arbitrary input photon statistics. Uses `params.eta` and `params.nu`;
    /// the nonlinearity `gamma` has no per-photon meaning and must be zero.
    pub fn general_state(params: &ResponseParams, input: &PhotonDistribution, seed: u64) -> Result<Self> {
        params.validate()?;
        check_bins(params.n_bins)?;
        if params.gamma != 0.0 {
            return Err(Error::Domain("general-state sampling needs gamma = 0".into()));
        }
        if input.kind().is_signed() {
            return Err(Error::Domain("cannot sample from a signed quasi-distribution".into()));
        }
        let mut acc = 0.0;
        let cumulative = input
            .values()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            n_bins: params.n_bins,
            seed,
            model: Model::GeneralState {
                cumulative,
                eta: params.eta,
                dark_probability: -(-params.nu).exp_m1(),
            },
        })
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Packed click pattern of shot `shot_id`.
    pub fn shot_bits(&self, shot_id: u64) -> u64 {
        let mut rng = substream(self.seed, Purpose::ShotSampler, shot_id);
        match &self.model {
            Model::Coherent { click_probability } => {
                let mut bits = 0u64;
                for j in 0..self.n_bins {
                    if rng.random::<f64>() < *click_probability {
                        bits |= 1 << j;
                    }
                }
                bits
            }
            Model::GeneralState {
                cumulative,
                eta,
                dark_probability,
            } => self.general_bits(&mut rng, cumulative, *eta, *dark_probability),
        }
    }

    fn general_bits(&self, rng: &mut ChaCha8Rng, cumulative: &[f64], eta: f64, dark: f64) -> u64 {
        let u: f64 = rng.random();
        let photons = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        let mut bits = 0u64;
        for _ in 0..photons {
            if rng.random::<f64>() < eta {
                bits |= 1 << rng.random_range(0..self.n_bins);
            }
        }
        for j in 0..self.n_bins {
            if rng.random::<f64>() < dark {
                bits |= 1 << j;
            }
        }
        bits
    }

    pub fn shot(&self, shot_id: u64) -> ShotRecord {
        ShotRecord {
            shot_id,
            pattern: unpack(self.shot_bits(shot_id), self.n_bins),
        }
    }

    /// Shots `0..count` in order.
    pub fn shots(&self, count: u64) -> impl Iterator<Item = ShotRecord> + '_ {
        (0..count).map(move |i| self.shot(i))
    }

    /// Tallies shots `0..count` in parallel; the result does not depend on the
    /// thread count.
    pub fn aggregate(&self, count: u64) -> ShotStatistics {
        let chunks = count.div_ceil(CHUNK);
        let empty = ShotStatistics::new(self.n_bins).expect("bin count validated");
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut stats = empty.clone();
                for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                    stats.record_bits(self.shot_bits(i));
                }
                stats
            })
            .reduce(
                || empty.clone(),
                |mut a, b| {
                    a.merge(&b).expect("same detector");
                    a
                },
            )
    }
}

/// Stream of `shots` coherent-light shot records, deterministic in `seed`.
pub fn sample_shots(
    params: &ResponseParams,
    nbar: f64,
    shots: u64,
    seed: u64,
) -> Result<impl Iterator<Item = ShotRecord>> {
    if shots == 0 {
        return Err(Error::Domain("need at least one shot".into()));
    }
    let sampler = ShotSampler::coherent(params, nbar, seed)?;
    Ok((0..shots).map(move |i| sampler.shot(i)))
}
