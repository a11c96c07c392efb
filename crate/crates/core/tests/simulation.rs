//! Checks of the sampler, aggregation and diagnostics against independent
//! oracles: closed-form click statistics and a hand-written file fold.

use std::fs::File;
use std::io::{BufRead, BufReader};

use clickstat::dataio::{aggregate_path, write_shots, ShotHeader};
use clickstat::forward_model::{
    coherent_click_distribution, conversion_matrix, loss_matrix, poisson_distribution, sample_shots, ResponseParams,
    ShotSampler,
};
use clickstat::rng::derive_seed;
use clickstat::tomography::{bin_means, uniformity_test};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SEED: u64 = 20_240_601;

fn chi2_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let mut chi2 = 0.0;
    let mut used = 0;
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = p * total as f64;
        if expected > 0.0 {
            chi2 += (c as f64 - expected).powi(2) / expected;
            used += 1;
        }
    }
    ChiSquared::new((used - 1) as f64).unwrap().sf(chi2)
}

#[test]
fn sampler_matches_closed_form_click_statistics() {
    for (eta, n, nbar) in [(0.608, 4, 0.84), (0.605, 8, 0.85)] {
        let params = ResponseParams::ideal(eta, n).unwrap();
        let stats = ShotSampler::coherent(&params, nbar, SEED).unwrap().aggregate(1_000_000);
        let analytic = coherent_click_distribution(&params, nbar).unwrap();
        let counts = stats.click_counts();
        let p = chi2_p_value(counts, analytic.values());
        assert!(p > 1e-3, "N={n}: chi-square p = {p}");
        let shots = stats.shots() as f64;
        for (k, (&c, &q)) in counts.iter().zip(analytic.values()).enumerate() {
            let sigma = (shots * q * (1.0 - q)).sqrt();
            if sigma > 0.0 {
                assert!((c as f64 - shots * q).abs() < 4.0 * sigma, "N={n} k={k}");
            }
        }
    }
}

#[test]
fn conversion_of_lossy_poisson_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..20 {
        let eta: f64 = rng.random_range(0.05..1.0);
        let nbar: f64 = rng.random_range(0.0..3.0);
        for n in [4, 8] {
            let n_max = 60;
            let poisson = poisson_distribution(nbar, n_max).unwrap().distribution;
            let lossy = loss_matrix(eta, n_max).unwrap().apply(poisson.values()).unwrap();
            let clicks = conversion_matrix(n, n_max).unwrap().apply(&lossy).unwrap();
            let expected = coherent_click_distribution(&ResponseParams::ideal(eta, n).unwrap(), nbar).unwrap();
            let err = clicks
                .iter()
                .zip(expected.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "eta={eta} nbar={nbar} N={n}: {err}");
        }
    }
}

#[test]
fn streamed_file_aggregate_matches_independent_fold() {
    let n = 8;
    let params = ResponseParams::ideal(0.605, n).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shots.csv");
    let header = ShotHeader::new(n).with_seed(SEED).with_nbar(0.85);
    let written = write_shots(&path, &header, sample_shots(&params, 0.85, 1_000_000, SEED).unwrap()).unwrap();
    assert_eq!(written, 1_000_000);

    // Oracle: read the text directly, bin 1 leftmost.
    let mut click_counts = vec![0u64; n + 1];
    let mut marginals = vec![0u64; n];
    let mut joints = vec![vec![0u64; n]; n];
    for line in BufReader::new(File::open(&path).unwrap()).lines() {
        let line = line.unwrap();
        if line.starts_with('#') || line == "shot_id,pattern" {
            continue;
        }
        let pattern: Vec<bool> = line.split(',').nth(1).unwrap().chars().map(|c| c == '1').collect();
        click_counts[pattern.iter().filter(|&&b| b).count()] += 1;
        for (j, &hit) in pattern.iter().enumerate() {
            if hit {
                marginals[j] += 1;
                for (cell, &other) in joints[j].iter_mut().zip(&pattern) {
                    *cell += u64::from(other);
                }
            }
        }
    }

    let (read_header, stats) = aggregate_path(&path).unwrap();
    assert_eq!(read_header.n_bins, n);
    assert_eq!(stats.shots(), 1_000_000);
    assert_eq!(stats.click_counts(), &click_counts[..]);
    assert_eq!(stats.marginals(), marginals);
    for (j, row) in joints.iter().enumerate() {
        for (k, &expected) in row.iter().enumerate() {
            assert_eq!(stats.joint(j, k), expected, "joint ({j}, {k})");
        }
    }
}

#[test]
fn simulated_bin_means_are_uniform() {
    let params = ResponseParams::ideal(0.608, 4).unwrap();
    let stats = ShotSampler::coherent(&params, 0.84, SEED).unwrap().aggregate(1_000_000);
    let means = bin_means(&stats).unwrap();
    let max = means.means.iter().copied().fold(f64::MIN, f64::max);
    let min = means.means.iter().copied().fold(f64::MAX, f64::min);
    let sigma = means.sigma.iter().copied().fold(0.0, f64::max);
    assert!(max - min < 4.0 * sigma, "spread {} vs σ {sigma}", max - min);
}

#[test]
fn uniformity_p_values_are_uniform_over_seeds() {
    let params = ResponseParams::ideal(0.608, 4).unwrap();
    let mut p: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let stats = ShotSampler::coherent(&params, 0.84, derive_seed(SEED, i))
                .unwrap()
                .aggregate(100_000);
            uniformity_test(&bin_means(&stats).unwrap()).unwrap().p_value
        })
        .collect();
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    let distance = p
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max);
    assert!(distance < 0.1, "Kolmogorov distance {distance}");
}
