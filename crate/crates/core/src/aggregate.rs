//! Exact integer tallies of per-shot click patterns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest bin count a packed click pattern can hold.
pub const MAX_BINS: usize = 64;

/// One laser trigger: which of the `N` bins clicked. Bin 1 is `pattern[0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShotRecord {
    pub shot_id: u64,
    pub pattern: Vec<bool>,
}

impl ShotRecord {
    /// Pattern packed into an integer, bin `j` (0-based) at bit `j`.
    pub fn bits(&self) -> u64 {
        pack(&self.pattern)
    }

    pub fn clicks(&self) -> usize {
        self.pattern.iter().filter(|&&b| b).count()
    }
}

pub(crate) fn pack(pattern: &[bool]) -> u64 {
    pattern
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &b)| acc | (u64::from(b) << j))
}

pub(crate) fn unpack(bits: u64, n_bins: usize) -> Vec<bool> {
    (0..n_bins).map(|j| bits >> j & 1 == 1).collect()
}

/// Click histogram plus per-bin and pairwise click tallies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotStatistics {
    n_bins: usize,
    shots: u64,
    /// `click_counts[k]`: shots with exactly `k` clicks.
    click_counts: Vec<u64>,
    /// `joint[j * N + j']`: shots in which both bins clicked; the diagonal
    /// holds the per-bin click totals.
    joint: Vec<u64>,
}

impl ShotStatistics {
    pub fn new(n_bins: usize) -> Result<Self> {
        if n_bins == 0 || n_bins > MAX_BINS {
            return Err(Error::Domain(format!(
                "bin count must be in 1..={MAX_BINS}, got {n_bins}"
            )));
        }
        Ok(Self {
            n_bins,
            shots: 0,
            click_counts: vec![0; n_bins + 1],
            joint: vec![0; n_bins * n_bins],
        })
    }

    /// Adds one packed pattern. Bits at or above `n_bins` must be clear.
    pub fn record_bits(&mut self, bits: u64) {
        debug_assert!(self.n_bins == 64 || bits >> self.n_bins == 0);
        self.shots += 1;
        self.click_counts[bits.count_ones() as usize] += 1;
        let n = self.n_bins;
        let mut rest = bits;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let row = j * n;
            self.joint[row + j] += 1;
            let mut others = rest;
            while others != 0 {
                let k = others.trailing_zeros() as usize;
                others &= others - 1;
                self.joint[row + k] += 1;
                self.joint[k * n + j] += 1;
            }
        }
    }

    pub fn record(&mut self, shot: &ShotRecord) -> Result<()> {
        if shot.pattern.len() != self.n_bins {
            return Err(Error::DimensionMismatch {
                expected: self.n_bins,
                actual: shot.pattern.len(),
            });
        }
        self.record_bits(shot.bits());
        Ok(())
    }

    /// Folds another tally over the same detector into this one.
    pub fn merge(&mut self, other: &ShotStatistics) -> Result<()> {
        if other.n_bins != self.n_bins {
            return Err(Error::DimensionMismatch {
                expected: self.n_bins,
                actual: other.n_bins,
            });
        }
        self.shots += other.shots;
        for (a, b) in self.click_counts.iter_mut().zip(&other.click_counts) {
            *a += b;
        }
        for (a, b) in self.joint.iter_mut().zip(&other.joint) {
            *a += b;
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn click_counts(&self) -> &[u64] {
        &self.click_counts
    }

    /// Shots in which bin `j` clicked.
    pub fn marginal(&self, j: usize) -> u64 {
        self.joint[j * self.n_bins + j]
    }

    pub fn marginals(&self) -> Vec<u64> {
        (0..self.n_bins).map(|j| self.marginal(j)).collect()
    }

    /// Shots in which both bins `j` and `k` clicked.
    pub fn joint(&self, j: usize, k: usize) -> u64 {
        self.joint[j * self.n_bins + k]
    }
}
