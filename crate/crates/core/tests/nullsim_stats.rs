use pvaudit_core::nullsim::{run_simulation, simulate_trial, Scenario, SimulationConfig};
use pvaudit_core::plot::{ks_uniform_test, PlotConfig, Verdict};

fn config(scenario: Scenario, k: usize, trials: usize, se_range: (f64, f64), seed: u64) -> SimulationConfig {
    SimulationConfig { scenario, k, trials, se_range, seed }
}

#[test]
fn null_p_values_are_uniform() {
    let cfg = config(Scenario::Null, 50, 400, (0.1, 0.5), 7);
    let mut ps: Vec<f64> = (0..cfg.trials as u64).flat_map(|i| simulate_trial(&cfg, i).unwrap()).collect();
    assert!(ps.len() >= 10_000);
    ps.sort_by(f64::total_cmp);
    let (d, p) = ks_uniform_test(&ps);
    assert!(p > 0.001, "KS D = {d}, p = {p}");
}

#[test]
fn null_mean_is_one_half() {
    let cfg = config(Scenario::Null, 100, 1_000, (0.1, 0.5), 8);
    let report = run_simulation(&cfg, &PlotConfig::default()).unwrap();
    assert!((0.49..=0.51).contains(&report.mean_p), "mean {}", report.mean_p);
    assert!(report.ks.pooled_p > 0.001);
}

#[test]
fn report_is_reproducible() {
    let cfg = config(Scenario::Mixture { effect_fraction: 0.3, log_or: 0.5 }, 20, 300, (0.1, 0.4), 42);
    let a = serde_json::to_string(&run_simulation(&cfg, &PlotConfig::default()).unwrap()).unwrap();
    let b = serde_json::to_string(&run_simulation(&cfg, &PlotConfig::default()).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = config(Scenario::Mixture { effect_fraction: 0.3, log_or: 0.5 }, 20, 300, (0.1, 0.4), 43);
    let c = serde_json::to_string(&run_simulation(&other, &PlotConfig::default()).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn trial_streams_are_independent_of_trial_count() {
    let short = config(Scenario::Null, 10, 5, (0.1, 0.5), 3);
    let long = config(Scenario::Null, 10, 500, (0.1, 0.5), 3);
    assert_eq!(simulate_trial(&short, 4).unwrap(), simulate_trial(&long, 4).unwrap());
}

#[test]
fn null_plots_of_27_read_as_uniform() {
    let cfg = config(Scenario::Null, 27, 1_000, (0.1, 0.5), 2024);
    let report = run_simulation(&cfg, &PlotConfig::default()).unwrap();
    let rate = report.histogram.fraction(Verdict::Uniform45);
    assert!(rate >= 0.90, "Uniform45 rate {rate}");
}

#[test]
fn real_effects_read_as_effect_line() {
    let cfg = config(Scenario::FixedEffect { log_or: 1.0 }, 27, 1_000, (0.2, 0.3), 2025);
    let report = run_simulation(&cfg, &PlotConfig::default()).unwrap();
    let rate = report.histogram.fraction(Verdict::EffectLine);
    assert!(rate >= 0.95, "EffectLine rate {rate}");
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(config(Scenario::Null, 0, 10, (0.1, 0.5), 1).validate().is_err());
    assert!(config(Scenario::Null, 5, 0, (0.1, 0.5), 1).validate().is_err());
    assert!(config(Scenario::Null, 5, 10, (0.5, 0.1), 1).validate().is_err());
    assert!(config(Scenario::Null, 5, 10, (0.0, 0.1), 1).validate().is_err());
    assert!(config(Scenario::Mixture { effect_fraction: 1.5, log_or: 0.2 }, 5, 10, (0.1, 0.5), 1).validate().is_err());
}
