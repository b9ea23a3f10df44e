//! Full audit of one effects file: per-row conversions under both methods,
//! fixed and random-effects pooling, the p-value plot reading, and an
//! optional search-space ledger.

use pvaudit_core::effects::{convert, Conversion};
use pvaudit_core::plot::Diagnostics;
use pvaudit_core::pooling::pool;
use pvaudit_core::search_space::{expected_false_positives, summarize_ledger, LedgerSummary};
use pvaudit_core::{
    build_plot, classify_plot, ConversionMethod, EffectEstimate, PlotConfig, PlotEntry, PooledResult, PoolingMethod,
    StudyCounts, Verdict,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub file_name: String,
    pub rows: usize,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(file_name: impl Into<String>, rows: usize, content: &[u8]) -> Self {
        let hash = Sha256::digest(content);
        let sha256 = hash.iter().map(|b| format!("{b:02x}")).collect();
        Self { file_name: file_name.into(), rows, sha256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowConversion {
    pub label: String,
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
    pub natural: Conversion,
    pub log: Conversion,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSummary {
    pub method: ConversionMethod,
    pub n: usize,
    pub n_below_alpha: usize,
    pub n_negative_below_alpha: usize,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpaceSection {
    pub input: InputDigest,
    pub studies: Vec<StudyCounts>,
    pub summary: LedgerSummary,
    pub expected_false_positives_at_median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditConfig {
    pub plot_method: ConversionMethod,
    pub ci_level: f64,
    pub plot: PlotConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub toolkit_version: String,
    pub input: InputDigest,
    pub config: AuditConfig,
    pub conversions: Vec<RowConversion>,
    pub pooled_fixed: PooledResult,
    pub pooled_dersimonian_laird: PooledResult,
    pub plot: PlotSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_space: Option<SearchSpaceSection>,
}

pub fn audit(
    input: InputDigest,
    effects: &[EffectEstimate],
    counts: Option<(InputDigest, Vec<StudyCounts>)>,
    config: AuditConfig,
) -> Result<AuditReport> {
    config.plot.validate()?;
    let conversions = effects
        .iter()
        .map(|e| {
            Ok(RowConversion {
                label: e.label(),
                odds_ratio: e.odds_ratio,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                ci_level: e.ci_level,
                natural: convert(e, ConversionMethod::NaturalScale)?,
                log: convert(e, ConversionMethod::LogScale)?,
                warnings: e.warnings(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled_fixed = pool(effects, PoolingMethod::FixedEffect, config.ci_level)?;
    let pooled_dersimonian_laird = pool(effects, PoolingMethod::DerSimonianLaird, config.ci_level)?;

    let entries = effects
        .iter()
        .map(|e| PlotEntry::from_effect(e, config.plot_method))
        .collect::<pvaudit_core::Result<Vec<_>>>()?;
    let plot = build_plot(&entries, config.plot.alpha)?;
    let classification = classify_plot(&plot, &config.plot)?;
    let plot = PlotSummary {
        method: config.plot_method,
        n: plot.n,
        n_below_alpha: plot.n_below_alpha,
        n_negative_below_alpha: plot.n_negative_below_alpha(),
        verdict: classification.verdict,
        diagnostics: classification.diagnostics,
    };

    let search_space = match counts {
        Some((digest, studies)) => {
            let summary = summarize_ledger(&studies)?;
            let median = summary.median;
            Some(SearchSpaceSection {
                input: digest,
                expected_false_positives_at_median: config.plot.alpha * median,
                summary,
                studies,
            })
        }
        None => None,
    };

    Ok(AuditReport {
        toolkit_version: TOOLKIT_VERSION.to_owned(),
        input,
        config,
        conversions,
        pooled_fixed,
        pooled_dersimonian_laird,
        plot,
        search_space,
    })
}

/// Ledger output of the `count` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub input: InputDigest,
    pub alpha: f64,
    pub studies: Vec<StudyLedgerRow>,
    pub summary: LedgerSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyLedgerRow {
    #[serde(flatten)]
    pub study: StudyCounts,
    pub expected_false_positives: f64,
}

pub fn count_report(input: InputDigest, studies: Vec<StudyCounts>, alpha: f64) -> Result<CountReport> {
    let summary = summarize_ledger(&studies)?;
    let studies = studies
        .into_iter()
        .map(|study| StudyLedgerRow { expected_false_positives: expected_false_positives(&study.n_h, alpha), study })
        .collect();
    Ok(CountReport { input, alpha, studies, summary })
}
