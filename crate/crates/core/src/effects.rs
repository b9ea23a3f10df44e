//! Study effect estimates and conversions between odds-ratio/CI form and
//! two-sided p-values.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{self, Probability};

pub const DEFAULT_CI_LEVEL: f64 = 0.95;

/// One study (or subgroup) odds ratio with its confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub study_label: String,
    pub subgroup_label: Option<String>,
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
}

/// Scale on which the standard error is recovered from the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConversionMethod {
    /// SE from the untransformed interval, z = (OR − 1)/SE. Reproduces the
    /// published tables that were produced with desktop statistics software.
    #[serde(rename = "natural")]
    NaturalScale,
    /// SE from the log interval, z = ln(OR)/SE.
    #[serde(rename = "log")]
    LogScale,
}

impl ConversionMethod {
    pub fn name(self) -> &'static str {
        match self {
            ConversionMethod::NaturalScale => "natural",
            ConversionMethod::LogScale => "log",
        }
    }
}

impl fmt::Display for ConversionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl EffectEstimate {
    /// Builds a validated estimate at the default 95% level.
    pub fn new(
        study_label: impl Into<String>,
        subgroup_label: Option<&str>,
        odds_ratio: f64,
        ci_low: f64,
        ci_high: f64,
    ) -> Result<Self> {
        Self::with_level(study_label, subgroup_label, odds_ratio, ci_low, ci_high, DEFAULT_CI_LEVEL)
    }

    pub fn with_level(
        study_label: impl Into<String>,
        subgroup_label: Option<&str>,
        odds_ratio: f64,
        ci_low: f64,
        ci_high: f64,
        ci_level: f64,
    ) -> Result<Self> {
        let estimate = Self {
            study_label: study_label.into(),
            subgroup_label: subgroup_label.map(str::to_owned),
            odds_ratio,
            ci_low,
            ci_high,
            ci_level,
        };
        estimate.validate()?;
        Ok(estimate)
    }

    /// Checks the hard invariants. A point estimate outside its own interval
    /// is only reported by [`EffectEstimate::warnings`].
    pub fn validate(&self) -> Result<()> {
        if !(self.odds_ratio.is_finite() && self.odds_ratio > 0.0) {
            return Err(Error::Domain(format!(
                "odds ratio must be a positive finite number, got {}",
                self.odds_ratio
            )));
        }
        if !(self.ci_low.is_finite() && self.ci_high.is_finite())
            || self.ci_low <= 0.0
            || self.ci_high <= self.ci_low
        {
            return Err(Error::InvalidInterval { low: self.ci_low, high: self.ci_high });
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Domain(format!(
                "confidence level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.odds_ratio < self.ci_low || self.odds_ratio > self.ci_high {
            out.push(format!(
                "{}: odds ratio {} lies outside its interval [{}, {}]",
                self.label(),
                self.odds_ratio,
                self.ci_low,
                self.ci_high
            ));
        }
        out
    }

    /// "study" or "study, subgroup".
    pub fn label(&self) -> String {
        match &self.subgroup_label {
            Some(sub) if !sub.is_empty() => format!("{}, {}", self.study_label, sub),
            _ => self.study_label.clone(),
        }
    }

    pub fn log_odds_ratio(&self) -> f64 {
        self.odds_ratio.ln()
    }

    /// Whether the point estimate is protective (OR < 1).
    pub fn is_negative(&self) -> bool {
        self.odds_ratio < 1.0
    }
}

/// Two-sided normal multiplier for a confidence level, e.g. 1.959964 at 0.95.
pub fn two_sided_multiplier(ci_level: f64) -> Result<f64> {
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {ci_level}")));
    }
    Ok(normal::quantile(1.0 - (1.0 - ci_level) / 2.0))
}

pub fn standard_error(e: &EffectEstimate, method: ConversionMethod) -> Result<f64> {
    e.validate()?;
    let q = two_sided_multiplier(e.ci_level)?;
    let width = match method {
        ConversionMethod::NaturalScale => e.ci_high - e.ci_low,
        ConversionMethod::LogScale => e.ci_high.ln() - e.ci_low.ln(),
    };
    let se = width / (2.0 * q);
    if se <= 0.0 || !se.is_finite() {
        return Err(Error::DegenerateInterval);
    }
    Ok(se)
}

pub fn z_statistic(e: &EffectEstimate, method: ConversionMethod) -> Result<f64> {
    let se = standard_error(e, method)?;
    let centre = match method {
        ConversionMethod::NaturalScale => e.odds_ratio - 1.0,
        ConversionMethod::LogScale => e.odds_ratio.ln(),
    };
    Ok(centre / se)
}

/// Two-sided p-value implied by an odds ratio and its interval.
pub fn p_from_effect(e: &EffectEstimate, method: ConversionMethod) -> Result<Probability> {
    let z = z_statistic(e, method)?;
    Probability::new(normal::two_sided_p(z))
}

/// Recovers the interval from a log-OR estimate and its two-sided p-value.
pub fn ci_from_p(estimate_log_or: f64, p: Probability, ci_level: f64) -> Result<(f64, f64)> {
    if !estimate_log_or.is_finite() {
        return Err(Error::Domain(format!("log odds ratio {estimate_log_or} is not finite")));
    }
    let p = p.value();
    if p >= 1.0 {
        return Err(Error::CannotRecoverSe("p = 1 implies z = 0"));
    }
    if p <= 0.0 {
        return Err(Error::Domain("p must be strictly positive".into()));
    }
    if estimate_log_or == 0.0 {
        return Err(Error::CannotRecoverSe("estimate lies at the null"));
    }
    let z = -normal::quantile(p / 2.0);
    if z <= 0.0 {
        return Err(Error::CannotRecoverSe("p too close to 1"));
    }
    let se = estimate_log_or.abs() / z;
    let q = two_sided_multiplier(ci_level)?;
    Ok(((estimate_log_or - q * se).exp(), (estimate_log_or + q * se).exp()))
}

/// All conversion intermediates for one estimate under one method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conversion {
    pub method: ConversionMethod,
    pub standard_error: f64,
    pub z: f64,
    pub p_value: f64,
}

pub fn convert(e: &EffectEstimate, method: ConversionMethod) -> Result<Conversion> {
    let standard_error = standard_error(e, method)?;
    let z = z_statistic(e, method)?;
    Ok(Conversion { method, standard_error, z, p_value: normal::two_sided_p(z) })
}
