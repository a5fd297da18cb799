use cramer_model::analytic::{delta_law, fair_coin_theta, poisson_gaussian_sum, theta};
use cramer_model::model::{exact_law, exact_law_mod, moments, sample_trajectory, ModelSpec, MomentSweep};
use cramer_model::stochastic::{
    gap_event_prob, lil_subseq_statistic, simulate_ou, walk_amplitude_event, AmplitudeWindow, Subsequence,
};
use cramer_model::sturm_liouville::{principal_eigenvalue, EigenProblem};
use proptest::prelude::*;

/// Law of a sum of independent Bernoullis by enumerating all outcomes.
fn brute_force_law(weights: &[f64]) -> Vec<f64> {
    let n = weights.len();
    let mut law = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let mut p = 1.0;
        for (i, w) in weights.iter().enumerate() {
            p *= if mask >> i & 1 == 1 { *w } else { 1.0 - w };
        }
        law[mask.count_ones() as usize] += p;
    }
    law
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.99, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_law_matches_enumeration(w in weights(), start in 1u64..50) {
        let spec = ModelSpec::general(start, w.clone()).unwrap();
        let n = start + w.len() as u64 - 1;
        let law = exact_law(&spec, n).unwrap();
        let probs = law.probabilities();
        let brute = brute_force_law(&w);
        let (lo, _) = law.window();
        for (k, b) in brute.iter().enumerate() {
            let got = if (k as u64) < lo { 0.0 } else { probs.get(k - lo as usize).copied().unwrap_or(0.0) };
            prop_assert!((got - b).abs() < 1e-14, "k={k}: {got} vs {b}");
        }
        prop_assert!((law.total() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn moments_are_sums_of_bernoulli_moments(w in weights()) {
        let spec = ModelSpec::general(3, w.clone()).unwrap();
        let m = moments(&spec, 2 + w.len() as u64).unwrap();
        let mean: f64 = w.iter().sum();
        let var: f64 = w.iter().map(|p| p * (1.0 - p)).sum();
        prop_assert!((m.mean - mean).abs() < 1e-12);
        prop_assert!((m.variance - var).abs() < 1e-12);
    }

    #[test]
    fn residue_law_folds_the_exact_law(w in weights(), d in 1u64..9) {
        let spec = ModelSpec::general(1, w.clone()).unwrap();
        let n = w.len() as u64;
        let folded = exact_law_mod(&spec, n, d).unwrap();
        let brute = brute_force_law(&w);
        for r in 0..d as usize {
            let expect: f64 = brute.iter().enumerate().filter(|(k, _)| k % d as usize == r).map(|(_, p)| p).sum();
            prop_assert!((folded[r] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn theta_is_periodic_and_even(d in 1u64..40, m in -200.0f64..200.0, b in 0.05f64..500.0) {
        let t0 = theta(d, m, b).unwrap().value;
        let shifted = theta(d, m + d as f64, b).unwrap().value;
        let mirrored = theta(d, -m, b).unwrap().value;
        prop_assert!((t0 - shifted).abs() < 1e-9 * t0.abs().max(1.0));
        prop_assert!((t0 - mirrored).abs() < 1e-9 * t0.abs().max(1.0));
        // a periodized density is nonnegative
        prop_assert!(t0 > -1e-12);
    }

    #[test]
    fn theta_matches_poisson_sum(d in 2u64..60, n in 20u64..5000) {
        let lhs = fair_coin_theta(d, n).unwrap().value / d as f64;
        let rhs = poisson_gaussian_sum(d, n);
        prop_assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn gap_probability_decreases_in_c(m in 3u64..1_000_000, c1 in 0.05f64..2.0, dc in 0.0f64..1.0) {
        let a = gap_event_prob(m, c1).unwrap();
        let b = gap_event_prob(m, c1 + dc).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn delta_law_is_a_probability(k in 1u64..80) {
        let hi = 2 * k + 60 * ((2 * k) as f64).sqrt() as u64 + 200;
        let total: f64 = (k..=hi).map(|m| delta_law(k, m)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert_eq!(delta_law(k, k - 1), 0.0);
    }

    #[test]
    fn eigenvalue_decreases_in_z(z in 0.2f64..2.5, dz in 0.05f64..0.5) {
        let a = principal_eigenvalue(EigenProblem::with_grid(z, 801)).unwrap();
        let b = principal_eigenvalue(EigenProblem::with_grid(z + dz, 801)).unwrap();
        prop_assert!(b.lambda < a.lambda);
        prop_assert!(a.residual < 1e-3, "residual {} at z={z}", a.residual);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn amplitude_event_is_monotone_in_z(seed in any::<u64>(), z in 0.2f64..2.0, dz in 0.0f64..1.0) {
        let spec = ModelSpec::cramer();
        let lo = AmplitudeWindow::new(1.0, z, 3).unwrap();
        let hi = AmplitudeWindow::new(1.0, z + dz, 3).unwrap();
        let sweep = MomentSweep::new(&spec, 5000).unwrap();
        let t = sample_trajectory(&spec, 5000, seed).unwrap();
        let a = walk_amplitude_event(&t, &sweep, &lo).unwrap();
        let b = walk_amplitude_event(&t, &sweep, &hi).unwrap();
        prop_assert!(!a || b);
    }

    #[test]
    fn lil_statistic_scales_inversely_with_normalizer(seed in any::<u64>(), s in 0.1f64..10.0) {
        let spec = ModelSpec::cramer();
        let sweep = MomentSweep::new(&spec, 20_000).unwrap();
        let t = sample_trajectory(&spec, 20_000, seed).unwrap();
        let e = std::f64::consts::E;
        let one = lil_subseq_statistic(&t, &sweep, &Subsequence::All, e, 1.0).unwrap();
        let scaled = lil_subseq_statistic(&t, &sweep, &Subsequence::All, e, s).unwrap();
        prop_assert!((scaled.value * s - one.value).abs() <= 1e-12 * one.value.max(1.0));
        prop_assert_eq!(scaled.argmax, one.argmax);
    }
}

#[test]
fn ou_samples_are_stationary_gaussian() {
    use cramer_model::stats::{ks_p_value, ks_statistic, normal_cdf};
    // one sample per path keeps them independent
    let mut first: Vec<f64> = (0..4000).map(|s| simulate_ou(0.1, 1.0, s).unwrap().samples[10]).collect();
    let d = ks_statistic(&mut first, normal_cdf);
    assert!(ks_p_value(d, first.len()) > 1e-3, "KS d = {d}");
}

#[test]
fn ou_lag_one_autocorrelation() {
    let dt = 0.05;
    let path = simulate_ou(dt, 4000.0, 9).unwrap();
    let x = &path.samples;
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let cov = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n - 1.0);
    // samples are strongly correlated, so the effective size is about T
    assert!((var - 1.0).abs() < 0.1, "variance {var}");
    assert!((cov / var - (-dt / 2.0f64).exp()).abs() < 2e-3, "lag-1 {}", cov / var);
}
