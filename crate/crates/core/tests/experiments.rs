use cramer_model::experiments::battery::smoke_reports;
use cramer_model::experiments::paths::{ou_spectrum_experiment, SpectrumConfig};
use cramer_model::experiments::{canonical_batch, Verdict};
use cramer_model::stochastic::Monitoring;
use serde_json::Value;

#[test]
fn smoke_reports_are_worker_independent() {
    let a = smoke_reports(7, 1).unwrap();
    let b = smoke_reports(7, 4).unwrap();
    assert_eq!(canonical_batch(&a), canonical_batch(&b));
    for r in &a {
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["experiment", "params", "master_seed", "replicas", "estimate", "ci_low", "ci_high", "predicted", "rule", "verdict", "elapsed_ms"] {
            assert!(v.get(key).is_some(), "{} lacks {key}", r.experiment);
        }
        assert!(r.ci_low <= r.estimate && r.estimate <= r.ci_high, "{}", r.experiment);
    }
}

#[test]
fn different_seeds_differ() {
    let a = smoke_reports(1, 1).unwrap();
    let b = smoke_reports(2, 1).unwrap();
    assert_ne!(canonical_batch(&a), canonical_batch(&b));
}

#[test]
fn spectrum_picks_half_lambda() {
    let cfg = SpectrumConfig {
        z_grid: vec![1.0, 1.5],
        times: vec![2.0, 4.0, 6.0],
        dt: 0.01,
        particles: 20_000,
        monitoring: Monitoring::BridgeCorrected,
        tol: 0.1,
    };
    let r = ou_spectrum_experiment(&cfg, 3, 1).unwrap();
    assert_eq!(r.details["convention"], "lambda/2");
    assert_eq!(r.verdict, Verdict::Pass);
}
