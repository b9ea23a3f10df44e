//! Seeded Monte Carlo scenarios for checking that p-values are uniform under
//! the null and for calibrating the plot classifier.
//!
//! Random numbers come from ChaCha8 seeded with the configured seed; trial
//! `i` reads from ChaCha stream `i`, so every trial is reproducible on its own
//! and trials can run in any order or in parallel.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::plot::{build_plot, classify_plot, ks_uniform_test, PlotConfig, PlotEntry, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Scenario {
    Null,
    FixedEffect { log_or: f64 },
    Mixture { effect_fraction: f64, log_or: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    /// Studies per trial.
    pub k: usize,
    pub trials: usize,
    /// Per-study log-OR standard errors are drawn uniformly from this range.
    pub se_range: (f64, f64),
    pub seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let (lo, hi) = self.se_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Config(format!("se_range must satisfy 0 < low <= high, got ({lo}, {hi})")));
        }
        match self.scenario {
            Scenario::Null => {}
            Scenario::FixedEffect { log_or } => {
                if !log_or.is_finite() {
                    return Err(Error::Config("log_or must be finite".into()));
                }
            }
            Scenario::Mixture { effect_fraction, log_or } => {
                if !(0.0..=1.0).contains(&effect_fraction) {
                    return Err(Error::Config("effect_fraction must lie in [0, 1]".into()));
                }
                if !log_or.is_finite() {
                    return Err(Error::Config("log_or must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Two-sided p-values for the `k` studies of one trial.
pub fn simulate_trial(config: &SimulationConfig, trial_index: u64) -> Result<Vec<f64>> {
    config.validate()?;
    let mut rng = trial_rng(config.seed, trial_index);
    let (lo, hi) = config.se_range;
    let ps = (0..config.k)
        .map(|_| {
            let se = lo + (hi - lo) * rng.gen::<f64>();
            let truth = match config.scenario {
                Scenario::Null => 0.0,
                Scenario::FixedEffect { log_or } => log_or,
                Scenario::Mixture { effect_fraction, log_or } => {
                    if rng.gen::<f64>() < effect_fraction {
                        log_or
                    } else {
                        0.0
                    }
                }
            };
            let u: f64 = rng.sample(Open01);
            let observed = truth + se * normal::quantile(u);
            normal::two_sided_p(observed / se)
        })
        .collect();
    Ok(ps)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VerdictHistogram {
    #[serde(rename = "Uniform45")]
    pub uniform45: usize,
    #[serde(rename = "EffectLine")]
    pub effect_line: usize,
    #[serde(rename = "Bilinear")]
    pub bilinear: usize,
    #[serde(rename = "Ambiguous")]
    pub ambiguous: usize,
}

impl VerdictHistogram {
    pub fn record(&mut self, v: Verdict) {
        match v {
            Verdict::Uniform45 => self.uniform45 += 1,
            Verdict::EffectLine => self.effect_line += 1,
            Verdict::Bilinear => self.bilinear += 1,
            Verdict::Ambiguous => self.ambiguous += 1,
        }
    }

    pub fn get(&self, v: Verdict) -> usize {
        match v {
            Verdict::Uniform45 => self.uniform45,
            Verdict::EffectLine => self.effect_line,
            Verdict::Bilinear => self.bilinear,
            Verdict::Ambiguous => self.ambiguous,
        }
    }

    pub fn total(&self) -> usize {
        self.uniform45 + self.effect_line + self.bilinear + self.ambiguous
    }

    pub fn fraction(&self, v: Verdict) -> f64 {
        self.get(v) as f64 / self.total().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsSummary {
    /// Mean per-trial KS distance from Uniform(0, 1).
    pub mean_statistic: f64,
    /// Share of trials whose KS p-value fell below the plot config's threshold.
    pub rejection_rate: f64,
    /// KS test of all p-values from all trials taken together.
    pub pooled_statistic: f64,
    pub pooled_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub alpha: f64,
    pub trials: usize,
    pub histogram: VerdictHistogram,
    pub mean_fraction_below_alpha: f64,
    pub mean_p: f64,
    pub ks: KsSummary,
}

struct TrialOutcome {
    ps: Vec<f64>,
    verdict: Verdict,
    fraction_below: f64,
    ks_statistic: f64,
    ks_p: f64,
}

fn run_trial(config: &SimulationConfig, plot_config: &PlotConfig, index: u64) -> Result<TrialOutcome> {
    let ps = simulate_trial(config, index)?;
    let entries = ps
        .iter()
        .enumerate()
        .map(|(i, &p)| PlotEntry::new(format!("study {}", i + 1), p))
        .collect::<Result<Vec<_>>>()?;
    let plot = build_plot(&entries, plot_config.alpha)?;
    let c = classify_plot(&plot, plot_config)?;
    Ok(TrialOutcome {
        verdict: c.verdict,
        fraction_below: c.diagnostics.fraction_below_alpha,
        ks_statistic: c.diagnostics.ks_statistic,
        ks_p: c.diagnostics.ks_p,
        ps,
    })
}

/// Runs every trial, classifies its plot and aggregates the results. Trials
/// run in parallel; aggregation walks them in index order so the report is
/// identical for identical inputs.
pub fn run_simulation(config: &SimulationConfig, plot_config: &PlotConfig) -> Result<SimulationReport> {
    config.validate()?;
    plot_config.validate()?;
    let outcomes = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(config, plot_config, i))
        .collect::<Result<Vec<_>>>()?;

    let mut histogram = VerdictHistogram::default();
    let mut fraction_sum = 0.0;
    let mut ks_sum = 0.0;
    let mut rejections = 0usize;
    let mut all_ps = Vec::with_capacity(config.trials * config.k);
    for o in &outcomes {
        histogram.record(o.verdict);
        fraction_sum += o.fraction_below;
        ks_sum += o.ks_statistic;
        if o.ks_p < plot_config.uniform_ks_threshold {
            rejections += 1;
        }
        all_ps.extend_from_slice(&o.ps);
    }
    let mean_p = all_ps.iter().sum::<f64>() / all_ps.len() as f64;
    all_ps.sort_by(f64::total_cmp);
    let (pooled_statistic, pooled_p) = ks_uniform_test(&all_ps);
    let trials = outcomes.len() as f64;

    Ok(SimulationReport {
        config: config.clone(),
        alpha: plot_config.alpha,
        trials: outcomes.len(),
        histogram,
        mean_fraction_below_alpha: fraction_sum / trials,
        mean_p,
        ks: KsSummary {
            mean_statistic: ks_sum / trials,
            rejection_rate: rejections as f64 / trials,
            pooled_statistic,
            pooled_p,
        },
    })
}
