use pvaudit_core::effects::{ci_from_p, p_from_effect, ConversionMethod, EffectEstimate};
use proptest::prelude::*;

const METHODS: [ConversionMethod; 2] = [ConversionMethod::NaturalScale, ConversionMethod::LogScale];

fn p(e: &EffectEstimate, m: ConversionMethod) -> f64 {
    p_from_effect(e, m).unwrap().value()
}

fn est(or: f64, lo: f64, hi: f64) -> EffectEstimate {
    EffectEstimate::new("s", None, or, lo, hi).unwrap()
}

proptest! {
    #[test]
    fn log_scale_reciprocal_invariance(ln_or in -2.0f64..2.0, below in 0.01f64..1.5, above in 0.01f64..1.5) {
        let or = ln_or.exp();
        let (lo, hi) = ((ln_or - below).exp(), (ln_or + above).exp());
        let a = p(&est(or, lo, hi), ConversionMethod::LogScale);
        let b = p(&est(1.0 / or, 1.0 / hi, 1.0 / lo), ConversionMethod::LogScale);
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn natural_scale_reflection_invariance(d in -0.9f64..0.9, a in -0.9f64..0.85, width in 0.01f64..0.5) {
        let b = (a + width).min(0.95);
        prop_assume!(b > a);
        let left = p(&est(1.0 + d, 1.0 + a, 1.0 + b), ConversionMethod::NaturalScale);
        let right = p(&est(1.0 - d, 1.0 - b, 1.0 - a), ConversionMethod::NaturalScale);
        prop_assert!((left - right).abs() <= 1e-12, "{left} vs {right}");
    }

    #[test]
    fn round_trip_through_ci_from_p(ln_or in prop_oneof![-2.5f64..-0.05, 0.05f64..2.5], half in 0.05f64..1.0) {
        // Log-symmetric intervals are the ones the log method can recover exactly.
        let or = ln_or.exp();
        let (lo, hi) = ((ln_or - half).exp(), (ln_or + half).exp());
        let e = est(or, lo, hi);
        let pv = p_from_effect(&e, ConversionMethod::LogScale).unwrap();
        prop_assume!(pv.value() > 1e-300);
        let (rlo, rhi) = ci_from_p(ln_or, pv, 0.95).unwrap();
        prop_assert!(((rlo - lo) / lo).abs() <= 1e-9, "{rlo} vs {lo}");
        prop_assert!(((rhi - hi) / hi).abs() <= 1e-9, "{rhi} vs {hi}");
    }
}

#[test]
fn widening_the_interval_strictly_increases_p() {
    for method in METHODS {
        for or in [0.5, 0.8, 1.3, 2.0] {
            let mut last = -1.0;
            for step in 1..=60 {
                // Narrower intervals underflow p to 0 for the natural method.
                let step = step + 15;
                let spread = 0.02 * step as f64;
                let (lo, hi) = (or * (-spread).exp(), or * spread.exp());
                let pv = p(&est(or, lo, hi), method);
                assert!(pv > last, "{method} OR={or} spread={spread}: {pv} <= {last}");
                last = pv;
            }
        }
    }
}

#[test]
fn one_hundred_seeded_round_trips() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_240_101);
    for _ in 0..100 {
        let ln_or: f64 = loop {
            let v = rng.gen_range(-2.0..2.0);
            if f64::abs(v) > 0.02 {
                break v;
            }
        };
        let half: f64 = rng.gen_range(0.05..1.2);
        let e = est(ln_or.exp(), (ln_or - half).exp(), (ln_or + half).exp());
        let pv = p_from_effect(&e, ConversionMethod::LogScale).unwrap();
        let (lo, hi) = ci_from_p(ln_or, pv, 0.95).unwrap();
        assert!(((lo - e.ci_low) / e.ci_low).abs() <= 1e-9);
        assert!(((hi - e.ci_high) / e.ci_high).abs() <= 1e-9);
    }
}
