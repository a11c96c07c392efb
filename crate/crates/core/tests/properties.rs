use clickstat::aggregate::ShotStatistics;
use clickstat::forward_model::{conversion_matrix, loss_matrix};
use clickstat::reconstruction::{deconvolve_loss, pseudo_inverse_matrix, DeconvolutionOptions};
use clickstat::statistics::PhotonDistribution;
use clickstat::tomography::{
    fit_gamma_values, gamma_from_mean_clicks, mean_clicks_from_gamma, FitOrder, GammaObservation, Weighting,
};
use proptest::prelude::*;

fn normalized(raw: Vec<f64>) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn probability_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, len).prop_map(normalized)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pseudo_inverse_recovers_low_photon_states(
        n in prop::sample::select(vec![4usize, 8]),
        raw in prop::collection::vec(0.001f64..1.0, 9),
    ) {
        let p = normalized(raw[..=n].to_vec());
        let c = conversion_matrix(n, n).unwrap().apply(&p).unwrap();
        let back = pseudo_inverse_matrix(n).unwrap().apply(&c).unwrap();
        prop_assert!(max_abs_diff(&back, &p) < 1e-10);
    }

    #[test]
    fn loss_then_deconvolution_is_identity(
        p in probability_vector(9),
        eta in 0.3f64..1.0,
    ) {
        let lossy = loss_matrix(eta, 8).unwrap().apply(&p).unwrap();
        let d = PhotonDistribution::new(lossy, eta).unwrap();
        let restored = deconvolve_loss(&d, 1.0, DeconvolutionOptions::default()).unwrap();
        prop_assert!(max_abs_diff(restored.distribution.values(), &p) < 1e-9);
    }

    #[test]
    fn deconvolution_divides_the_mean(
        p in probability_vector(9),
        eta_from in 0.3f64..1.0,
        frac in 0.0f64..1.0,
    ) {
        let eta_to = eta_from + frac * (1.0 - eta_from);
        let mean = |v: &[f64]| v.iter().enumerate().map(|(m, x)| m as f64 * x).sum::<f64>();
        let d = PhotonDistribution::new(p.clone(), eta_from).unwrap();
        let out = deconvolve_loss(&d, eta_to, DeconvolutionOptions::default()).unwrap();
        let r = eta_from / eta_to;
        prop_assert!((mean(out.distribution.values()) - mean(&p) / r).abs() < 1e-9);
        prop_assert!((out.distribution.values().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deconvolution_steps_compose(p in probability_vector(9), a in 0.4f64..0.7, b in 0.7f64..0.9) {
        let opts = DeconvolutionOptions::default();
        let d = PhotonDistribution::new(p, a).unwrap();
        let two = deconvolve_loss(&deconvolve_loss(&d, b, opts).unwrap().distribution, 1.0, opts).unwrap();
        let one = deconvolve_loss(&d, 1.0, opts).unwrap();
        prop_assert!(max_abs_diff(two.distribution.values(), one.distribution.values()) < 1e-9);
    }

    #[test]
    fn fitted_efficiency_ignores_point_order(
        eta in 0.2f64..1.0,
        nu in 0.0f64..1e-3,
        noise in prop::collection::vec(-1.0f64..1.0, 8),
        order in prop::sample::select(vec![FitOrder::Linear, FitOrder::Quadratic]),
        shuffle_seed in any::<u64>(),
    ) {
        let obs: Vec<GammaObservation> = noise
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let nbar = 0.05 + 0.4 * i as f64;
                let sigma = 1e-4 * (1.0 + i as f64);
                GammaObservation { nbar, gamma: nu + eta * nbar / 4.0 + e * sigma, sigma }
            })
            .collect();
        let mut shuffled = obs.clone();
        let mut state = shuffle_seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = fit_gamma_values(4, &obs, order, Weighting::InverseVariance).unwrap();
        let b = fit_gamma_values(4, &shuffled, order, Weighting::InverseVariance).unwrap();
        prop_assert!((a.eta - b.eta).abs() <= 1e-12 * a.eta.abs().max(1.0));
    }

    #[test]
    fn response_and_mean_clicks_are_inverse(n in 1usize..=16, frac in 0.0f64..0.999) {
        let kbar = frac * n as f64;
        let gamma = gamma_from_mean_clicks(kbar, n).unwrap();
        prop_assert!((mean_clicks_from_gamma(gamma, n) - kbar).abs() < 1e-9 * n as f64);
    }

    #[test]
    fn loss_maps_form_a_semigroup(a in 1u32..=10, b in 1u32..=10, dim in 1usize..=32) {
        let (ea, eb) = (a as f64 / 10.0, b as f64 / 10.0);
        let prod = loss_matrix(ea, dim).unwrap().compose(&loss_matrix(eb, dim).unwrap()).unwrap();
        let direct = loss_matrix(ea * eb, dim).unwrap();
        prop_assert!((prod - direct.entries()).amax() < 1e-12);
    }

    #[test]
    fn aggregation_identity(n in 1usize..=64, shots in prop::collection::vec(any::<u64>(), 1..200)) {
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut stats = ShotStatistics::new(n).unwrap();
        for s in &shots {
            stats.record_bits(s & mask);
        }
        let by_bins: u64 = stats.marginals().iter().sum();
        let by_clicks: u64 = stats.click_counts().iter().enumerate().map(|(k, c)| k as u64 * c).sum();
        prop_assert_eq!(by_bins, by_clicks);
        prop_assert_eq!(stats.click_counts().iter().sum::<u64>(), shots.len() as u64);
    }
}

#[test]
fn conversion_columns_are_probability_vectors() {
    for n in 1..=16 {
        let c = conversion_matrix(n, 40).unwrap();
        for (col, s) in c.column_sums().iter().enumerate() {
            assert!((s - 1.0).abs() < 1e-12, "N={n} column {col} sums to {s}");
        }
        assert!(c.entries().iter().all(|&v| v >= 0.0));
    }
}
