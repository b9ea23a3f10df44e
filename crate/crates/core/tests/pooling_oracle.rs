//! Pooling against a longhand DerSimonian–Laird computation.

use pvaudit_core::pooling::{heterogeneity_log, pool_log, LogEffect, PoolingMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Step-by-step DL, plain loops, no shared code with the library.
struct Longhand {
    fixed_mean: f64,
    fixed_se: f64,
    q: f64,
    tau2: f64,
    i2: f64,
    random_mean: f64,
    random_se: f64,
}

fn longhand(y: &[f64], v: &[f64]) -> Longhand {
    let k = y.len();
    let mut w = vec![0.0; k];
    let mut sw = 0.0;
    let mut swy = 0.0;
    let mut sw2 = 0.0;
    for i in 0..k {
        w[i] = 1.0 / v[i];
        sw += w[i];
        swy += w[i] * y[i];
        sw2 += w[i] * w[i];
    }
    let fixed_mean = swy / sw;
    let mut q = 0.0;
    for i in 0..k {
        q += w[i] * (y[i] - fixed_mean) * (y[i] - fixed_mean);
    }
    let df = (k - 1) as f64;
    let c = sw - sw2 / sw;
    let mut tau2 = if k > 1 { (q - df) / c } else { 0.0 };
    if tau2 < 0.0 {
        tau2 = 0.0;
    }
    let i2 = if q > 0.0 { ((q - df) / q).max(0.0) } else { 0.0 };
    let mut sws = 0.0;
    let mut swsy = 0.0;
    for i in 0..k {
        let ws = 1.0 / (v[i] + tau2);
        sws += ws;
        swsy += ws * y[i];
    }
    Longhand {
        fixed_mean,
        fixed_se: 1.0 / sw.sqrt(),
        q,
        tau2,
        i2,
        random_mean: swsy / sws,
        random_se: 1.0 / sws.sqrt(),
    }
}

fn random_instance(rng: &mut ChaCha8Rng, k: usize) -> (Vec<f64>, Vec<f64>) {
    let spread = rng.gen_range(0.0..0.8);
    let y = (0..k).map(|_| rng.gen_range(-1.0..1.0) * spread).collect();
    let v = (0..k).map(|_| rng.gen_range(0.01f64..0.5).powi(2)).collect();
    (y, v)
}

fn effects(y: &[f64], v: &[f64]) -> Vec<LogEffect> {
    y.iter().zip(v).enumerate().map(|(i, (&y, &v))| LogEffect::new(format!("study {i:03}"), y, v).unwrap()).collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn twenty_random_instances_match_longhand() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut clamped = 0;
    for case in 0..20 {
        let k = if case < 10 { 5 } else { rng.gen_range(2..15) };
        let (y, v) = random_instance(&mut rng, k);
        let oracle = longhand(&y, &v);
        let e = effects(&y, &v);
        let fixed = pool_log(&e, PoolingMethod::FixedEffect, 0.95).unwrap();
        let dl = pool_log(&e, PoolingMethod::DerSimonianLaird, 0.95).unwrap();
        let het = heterogeneity_log(&e).unwrap();
        assert!(close(fixed.pooled_log_or, oracle.fixed_mean, 1e-10), "case {case}");
        assert!(close(fixed.pooled_se, oracle.fixed_se, 1e-10), "case {case}");
        assert!(close(het.q_statistic, oracle.q, 1e-10), "case {case}");
        assert!(close(het.tau_squared, oracle.tau2, 1e-10), "case {case}");
        assert!(close(het.i_squared, oracle.i2, 1e-10), "case {case}");
        assert!(close(dl.tau_squared, oracle.tau2, 1e-10), "case {case}");
        assert!(close(dl.pooled_log_or, oracle.random_mean, 1e-10), "case {case}");
        assert!(close(dl.pooled_se, oracle.random_se, 1e-10), "case {case}");
        if oracle.tau2 == 0.0 {
            clamped += 1;
        }
    }
    // The instance mix covers both branches of the τ² clamp.
    assert!(clamped > 0 && clamped < 20, "clamped {clamped} of 20");
}

#[test]
fn invariants_on_a_thousand_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let k = rng.gen_range(1..20);
        let (y, v) = random_instance(&mut rng, k);
        let e = effects(&y, &v);
        let fixed = pool_log(&e, PoolingMethod::FixedEffect, 0.95).unwrap();
        let dl = pool_log(&e, PoolingMethod::DerSimonianLaird, 0.95).unwrap();
        assert!(dl.pooled_se >= fixed.pooled_se, "case {case}");
        assert!(dl.tau_squared >= 0.0 && dl.q_statistic >= 0.0);
        assert!((0.0..=1.0).contains(&dl.i_squared));
        assert_eq!(fixed.tau_squared, 0.0);
        if dl.q_statistic <= (k - 1) as f64 {
            assert_eq!(dl.tau_squared, 0.0, "case {case}: clamp");
        }
        if k == 1 {
            assert!(close(dl.pooled_log_or, y[0], 1e-15));
            assert!(close(dl.pooled_se, v[0].sqrt(), 1e-15));
            assert_eq!(dl.q_statistic, 0.0);
        }
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(fixed.pooled_log_or >= lo - 1e-15 && fixed.pooled_log_or <= hi + 1e-15);
        assert!(dl.ci_low <= dl.pooled_or && dl.pooled_or <= dl.ci_high);
        assert!((dl.pooled_or - dl.pooled_log_or.exp()).abs() == 0.0);
    }
}

#[test]
fn results_are_identical_under_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let (y, v) = random_instance(&mut rng, 9);
        let mut e = effects(&y, &v);
        let a = pool_log(&e, PoolingMethod::DerSimonianLaird, 0.95).unwrap();
        for _ in 0..5 {
            for i in (1..e.len()).rev() {
                let j = rng.gen_range(0..=i);
                e.swap(i, j);
            }
            let b = pool_log(&e, PoolingMethod::DerSimonianLaird, 0.95).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn near_infinite_variance_study_has_no_influence() {
    let e = vec![
        LogEffect::new("a", 0.2, 0.04).unwrap(),
        LogEffect::new("b", 0.5, 0.09).unwrap(),
    ];
    let base = pool_log(&e, PoolingMethod::FixedEffect, 0.95).unwrap();
    let mut with_noise = e.clone();
    with_noise.push(LogEffect::new("c", 3.0, 1e12).unwrap());
    let after = pool_log(&with_noise, PoolingMethod::FixedEffect, 0.95).unwrap();
    assert!((after.pooled_log_or - base.pooled_log_or).abs() < 1e-10);
}
