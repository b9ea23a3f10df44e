//! Reliability audit toolkit for meta-analyses of odds ratios.
//!
//! - [`normal`]: standard normal CDF and quantile
//! - [`effects`]: odds ratio / confidence interval ↔ p-value conversion
//! - [`pooling`]: fixed-effect and DerSimonian–Laird pooling
//! - [`plot`] and [`render`]: p-value plots, shape classification, SVG/CSV
//! - [`search_space`]: multiple-testing search-space counts
//! - [`nullsim`]: seeded Monte Carlo validation of the plot reading

pub mod effects;
pub mod error;
pub mod normal;
pub mod nullsim;
pub mod plot;
pub mod pooling;
pub mod render;
pub mod search_space;

pub use effects::{ci_from_p, p_from_effect, standard_error, ConversionMethod, EffectEstimate};
pub use error::{Error, Result};
pub use normal::{std_normal_cdf, std_normal_quantile, Probability, ZScore};
pub use nullsim::{run_simulation, simulate_trial, Scenario, SimulationConfig, SimulationReport};
pub use plot::{build_plot, classify_plot, PValuePlot, PlotClassification, PlotConfig, PlotEntry, Verdict};
pub use pooling::{heterogeneity_stats, pool_dersimonian_laird, pool_fixed, PooledResult, PoolingMethod};
pub use render::{render_plot, RenderFormat};
pub use search_space::{
    block_search_space, cohort_false_positives, expected_false_positives, study_search_space,
    summarize_ledger, CountBlock, LedgerSummary, StudyCounts,
};
