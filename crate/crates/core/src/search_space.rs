//! Hypothesis search-space counting: N_H = Σ O × P × 2^C over a study's
//! analysis blocks, expected false positives at a significance level, and
//! ledger summaries across studies.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_COVARIATES: u32 = 128;

/// Outcomes × predictors × covariates for one family of models in a study.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountBlock {
    pub block_label: String,
    pub outcomes: u64,
    pub predictors: u64,
    pub covariates: u32,
    /// Free-text derivation, e.g. "7 measures x 3 basic models".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl CountBlock {
    pub fn new(block_label: impl Into<String>, outcomes: u64, predictors: u64, covariates: u32) -> Result<Self> {
        let block = Self { block_label: block_label.into(), outcomes, predictors, covariates, notes: None };
        block.validate()?;
        Ok(block)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outcomes == 0 || self.predictors == 0 {
            return Err(Error::Domain(format!(
                "block '{}': outcomes and predictors must be at least 1",
                self.block_label
            )));
        }
        if self.covariates > MAX_COVARIATES {
            return Err(Error::OverflowGuard { covariates: self.covariates, max: MAX_COVARIATES });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StudyCounts {
    pub paper_label: String,
    pub region: String,
    pub blocks: Vec<CountBlock>,
    #[serde(serialize_with = "serialize_biguint")]
    pub n_h: BigUint,
}

impl StudyCounts {
    pub fn new(paper_label: impl Into<String>, region: impl Into<String>, blocks: Vec<CountBlock>) -> Result<Self> {
        let n_h = blocks_search_space(&blocks)?;
        Ok(Self { paper_label: paper_label.into(), region: region.into(), blocks, n_h })
    }
}

/// Big integers travel as decimal strings.
pub fn serialize_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

/// O × P × 2^C, exactly.
pub fn block_search_space(b: &CountBlock) -> Result<BigUint> {
    b.validate()?;
    Ok((BigUint::from(b.outcomes) * BigUint::from(b.predictors)) << b.covariates as usize)
}

fn blocks_search_space(blocks: &[CountBlock]) -> Result<BigUint> {
    if blocks.is_empty() {
        return Err(Error::EmptyInput("a study needs at least one count block"));
    }
    blocks.iter().try_fold(BigUint::zero(), |acc, b| Ok(acc + block_search_space(b)?))
}

pub fn study_search_space(s: &StudyCounts) -> Result<BigUint> {
    blocks_search_space(&s.blocks)
}

/// α × N_H.
pub fn expected_false_positives(n_h: &BigUint, alpha: f64) -> f64 {
    alpha * biguint_to_f64(n_h)
}

/// α × N_C × N_H,median for a cohort reused across N_C publications.
pub fn cohort_false_positives(n_publications: u64, n_h_median: &BigUint, alpha: f64) -> f64 {
    alpha * n_publications as f64 * biguint_to_f64(n_h_median)
}

pub fn biguint_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerSummary {
    pub n: usize,
    pub minimum: f64,
    pub lower_quartile: f64,
    pub median: f64,
    pub upper_quartile: f64,
    pub maximum: f64,
    pub mean: f64,
}

/// Quantile of sorted data by linear interpolation at 1-based position
/// 1 + (n − 1)q.
pub fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_values(values: &[f64]) -> Result<LedgerSummary> {
    if values.is_empty() {
        return Err(Error::EmptyInput("ledger summary needs at least one study"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(LedgerSummary {
        n: sorted.len(),
        minimum: sorted[0],
        lower_quartile: interpolated_quantile(&sorted, 0.25),
        median: interpolated_quantile(&sorted, 0.5),
        upper_quartile: interpolated_quantile(&sorted, 0.75),
        maximum: sorted[sorted.len() - 1],
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
    })
}

pub fn summarize_ledger(ledger: &[StudyCounts]) -> Result<LedgerSummary> {
    let values: Vec<f64> = ledger.iter().map(|s| biguint_to_f64(&s.n_h)).collect();
    summarize_values(&values)
}
