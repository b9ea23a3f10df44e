use pvaudit_core::normal::two_sided_p;
use pvaudit_core::plot::{build_plot, classify_plot, ks_statistic, PlotConfig, PlotEntry, Verdict};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::distributions::Open01;
use pvaudit_core::normal::{std_normal_quantile, Probability};

/// sup |F_n(x) − x| evaluated from the empirical CDF at every jump, both sides.
fn brute_force_ks(ps: &[f64]) -> f64 {
    let n = ps.len() as f64;
    let mut d: f64 = 0.0;
    for &x in ps {
        let at = ps.iter().filter(|&&p| p <= x).count() as f64 / n;
        let before = ps.iter().filter(|&&p| p < x).count() as f64 / n;
        d = d.max(at - x).max(x - before);
    }
    d
}

fn entries(ps: &[f64]) -> Vec<PlotEntry> {
    ps.iter().enumerate().map(|(i, &p)| PlotEntry::new(format!("s{i:04}"), p).unwrap()).collect()
}

fn verdict(ps: &[f64]) -> Verdict {
    let config = PlotConfig::default();
    let plot = build_plot(&entries(ps), config.alpha).unwrap();
    classify_plot(&plot, &config).unwrap().verdict
}

proptest! {
    #[test]
    fn ks_matches_definition(mut ps in prop::collection::vec(prop_oneof![0.0f64..=1.0, Just(0.5), Just(0.05)], 1..60)) {
        let brute = brute_force_ks(&ps);
        ps.sort_by(f64::total_cmp);
        prop_assert_eq!(ks_statistic(&ps), brute);
    }

    #[test]
    fn plot_ignores_input_order(ps in prop::collection::vec(0.0f64..=1.0, 1..40), seed in any::<u64>()) {
        let mut e = entries(&ps);
        let a = build_plot(&e, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..e.len()).rev() {
            e.swap(i, rng.gen_range(0..=i));
        }
        let b = build_plot(&e, 0.05).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.points.windows(2).all(|w| w[0].p <= w[1].p));
        prop_assert!(a.points.iter().enumerate().all(|(i, pt)| pt.rank == i + 1));
    }
}

#[test]
fn uniform_p_values_read_as_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 1000;
    let mut hits = 0;
    for t in 0..trials {
        let n = 20 + t % 30;
        let ps: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        if verdict(&ps) == Verdict::Uniform45 {
            hits += 1;
        }
    }
    let rate = hits as f64 / trials as f64;
    assert!(rate >= 0.90, "uniform rate {rate}");
}

#[test]
fn strong_effects_read_as_effect_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trials = 1000;
    let mut hits = 0;
    for t in 0..trials {
        let n = 5 + t % 40;
        let ps: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                let z = std_normal_quantile(Probability::new(u).unwrap()).unwrap().value();
                two_sided_p(3.0 + z)
            })
            .collect();
        if verdict(&ps) == Verdict::EffectLine {
            hits += 1;
        }
    }
    let rate = hits as f64 / trials as f64;
    assert!(rate >= 0.95, "effect-line rate {rate}");
}

#[test]
fn fewer_than_min_points_is_ambiguous() {
    assert_eq!(verdict(&[0.001, 0.002, 0.003, 0.004]), Verdict::Ambiguous);
    assert_eq!(verdict(&[0.2, 0.4, 0.6, 0.8]), Verdict::Ambiguous);
}
