//! Fixed-effect (inverse-variance) and DerSimonian–Laird random-effects
//! pooling of log odds ratios.
//!
//! Inputs are put into a canonical order (by label, then by value) before any
//! accumulation and all sums are compensated, so results do not depend on
//! input order.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::effects::{standard_error, ConversionMethod, EffectEstimate, DEFAULT_CI_LEVEL};
use crate::error::{Error, Result};
use crate::normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PoolingMethod {
    FixedEffect,
    DerSimonianLaird,
}

/// One study on the log-OR scale: estimate `log_or` with sampling variance
/// `variance`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEffect {
    pub label: String,
    pub subgroup: String,
    pub log_or: f64,
    pub variance: f64,
}

impl LogEffect {
    pub fn new(label: impl Into<String>, log_or: f64, variance: f64) -> Result<Self> {
        let effect = Self { label: label.into(), subgroup: String::new(), log_or, variance };
        effect.validate()?;
        Ok(effect)
    }

    pub fn from_estimate(e: &EffectEstimate) -> Result<Self> {
        let se = standard_error(e, ConversionMethod::LogScale)?;
        Ok(Self {
            label: e.study_label.clone(),
            subgroup: e.subgroup_label.clone().unwrap_or_default(),
            log_or: e.log_odds_ratio(),
            variance: se * se,
        })
    }

    fn validate(&self) -> Result<()> {
        if !self.log_or.is_finite() {
            return Err(Error::Domain(format!("log odds ratio {} is not finite", self.log_or)));
        }
        if !(self.variance.is_finite() && self.variance > 0.0) {
            return Err(Error::DegenerateInterval);
        }
        Ok(())
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.label
            .cmp(&other.label)
            .then_with(|| self.subgroup.cmp(&other.subgroup))
            .then_with(|| self.log_or.total_cmp(&other.log_or))
            .then_with(|| self.variance.total_cmp(&other.variance))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Heterogeneity {
    pub q_statistic: f64,
    pub tau_squared: f64,
    pub i_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledResult {
    pub method: PoolingMethod,
    pub k: usize,
    pub pooled_log_or: f64,
    pub pooled_se: f64,
    pub pooled_or: f64,
    pub ci_level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
    pub p_value: f64,
    pub q_statistic: f64,
    pub tau_squared: f64,
    pub i_squared: f64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.compensation
    }
}

fn compensated<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

fn canonical(effects: &[LogEffect]) -> Result<Vec<&LogEffect>> {
    if effects.is_empty() {
        return Err(Error::EmptyInput("pooling requires at least one study"));
    }
    for e in effects {
        e.validate()?;
    }
    let mut sorted: Vec<&LogEffect> = effects.iter().collect();
    sorted.sort_by(|a, b| a.canonical_cmp(b));
    Ok(sorted)
}

/// Weighted mean and the inverse square root of the weight total.
fn weighted_mean(sorted: &[&LogEffect], weights: &[f64]) -> (f64, f64) {
    if let [only] = sorted {
        return (only.log_or, only.variance.sqrt());
    }
    let total = compensated(weights.iter().copied());
    let mean = compensated(sorted.iter().zip(weights).map(|(e, w)| w * e.log_or)) / total;
    (mean, total.sqrt().recip())
}

fn heterogeneity_sorted(sorted: &[&LogEffect]) -> Heterogeneity {
    let k = sorted.len();
    if k == 1 {
        return Heterogeneity { q_statistic: 0.0, tau_squared: 0.0, i_squared: 0.0 };
    }
    let weights: Vec<f64> = sorted.iter().map(|e| e.variance.recip()).collect();
    let (fixed_mean, _) = weighted_mean(sorted, &weights);
    let q = compensated(
        sorted.iter().zip(&weights).map(|(e, w)| w * (e.log_or - fixed_mean).powi(2)),
    );
    let df = (k - 1) as f64;
    let sum_w = compensated(weights.iter().copied());
    let sum_w2 = compensated(weights.iter().map(|w| w * w));
    let c = sum_w - sum_w2 / sum_w;
    let tau_squared = if k > 1 && c > 0.0 { ((q - df) / c).max(0.0) } else { 0.0 };
    let i_squared = if q > 0.0 { ((q - df) / q).max(0.0) } else { 0.0 };
    Heterogeneity { q_statistic: q, tau_squared, i_squared }
}

/// Cochran's Q with the DerSimonian–Laird τ² and I².
pub fn heterogeneity_log(effects: &[LogEffect]) -> Result<Heterogeneity> {
    Ok(heterogeneity_sorted(&canonical(effects)?))
}

pub fn pool_log(effects: &[LogEffect], method: PoolingMethod, ci_level: f64) -> Result<PooledResult> {
    let sorted = canonical(effects)?;
    let q = crate::effects::two_sided_multiplier(ci_level)?;
    let het = heterogeneity_sorted(&sorted);
    let tau_squared = match method {
        PoolingMethod::FixedEffect => 0.0,
        PoolingMethod::DerSimonianLaird => het.tau_squared,
    };
    let weights: Vec<f64> = sorted.iter().map(|e| (e.variance + tau_squared).recip()).collect();
    let (pooled_log_or, pooled_se) = weighted_mean(&sorted, &weights);
    let z = pooled_log_or / pooled_se;
    Ok(PooledResult {
        method,
        k: sorted.len(),
        pooled_log_or,
        pooled_se,
        pooled_or: pooled_log_or.exp(),
        ci_level,
        ci_low: (pooled_log_or - q * pooled_se).exp(),
        ci_high: (pooled_log_or + q * pooled_se).exp(),
        z,
        p_value: normal::two_sided_p(z),
        q_statistic: het.q_statistic,
        tau_squared,
        i_squared: het.i_squared,
    })
}

fn to_log(effects: &[EffectEstimate]) -> Result<Vec<LogEffect>> {
    effects.iter().map(LogEffect::from_estimate).collect()
}

pub fn pool(effects: &[EffectEstimate], method: PoolingMethod, ci_level: f64) -> Result<PooledResult> {
    pool_log(&to_log(effects)?, method, ci_level)
}

/// Inverse-variance fixed-effect pooling at the 95% level.
pub fn pool_fixed(effects: &[EffectEstimate]) -> Result<PooledResult> {
    pool(effects, PoolingMethod::FixedEffect, DEFAULT_CI_LEVEL)
}

/// DerSimonian–Laird random-effects pooling at the 95% level.
pub fn pool_dersimonian_laird(effects: &[EffectEstimate]) -> Result<PooledResult> {
    pool(effects, PoolingMethod::DerSimonianLaird, DEFAULT_CI_LEVEL)
}

pub fn heterogeneity_stats(effects: &[EffectEstimate]) -> Result<Heterogeneity> {
    heterogeneity_log(&to_log(effects)?)
}
