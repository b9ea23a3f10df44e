//! Bundled input data. Only the published input columns (odds ratios,
//! intervals, outcome/predictor/covariate counts) are embedded here; the
//! published results they should reproduce live in [`crate::reproduce`].

use pvaudit_core::search_space::StudyCounts;
use pvaudit_core::EffectEstimate;

use crate::ingest::{parse_counts, parse_effects};

/// Search-space counts for the base papers of the gas stove meta-analysis.
pub const TABLE1_CSV: &str = include_str!("../fixtures/table1.csv");
/// Gas stove and current asthma.
pub const TABLE2_CSV: &str = include_str!("../fixtures/table2.csv");
/// Gas stove and current wheeze.
pub const TABLE3_CSV: &str = include_str!("../fixtures/table3.csv");
/// Two-block search-space count for one lung function study.
pub const FIGURE1_CSV: &str = include_str!("../fixtures/figure1.csv");
/// Two estimates combined by inverse-variance weighting.
pub const COMBINATION_CSV: &str = include_str!("../fixtures/combination.csv");

pub fn table1() -> Vec<StudyCounts> {
    parse_counts("table1.csv", TABLE1_CSV).expect("bundled table1.csv is valid")
}

pub fn table2() -> Vec<EffectEstimate> {
    parse_effects("table2.csv", TABLE2_CSV).expect("bundled table2.csv is valid")
}

pub fn table3() -> Vec<EffectEstimate> {
    parse_effects("table3.csv", TABLE3_CSV).expect("bundled table3.csv is valid")
}

pub fn figure1() -> Vec<StudyCounts> {
    parse_counts("figure1.csv", FIGURE1_CSV).expect("bundled figure1.csv is valid")
}

pub fn combination() -> Vec<EffectEstimate> {
    parse_effects("combination.csv", COMBINATION_CSV).expect("bundled combination.csv is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_sizes() {
        assert_eq!(table1().len(), 14);
        assert_eq!(table2().len(), 13);
        assert_eq!(table3().len(), 27);
        assert_eq!(figure1().len(), 1);
        assert_eq!(figure1()[0].blocks.len(), 2);
        assert_eq!(combination().len(), 2);
    }

    #[test]
    fn table2_keeps_row_order() {
        let labels: Vec<String> = table2().iter().map(|e| e.label()).collect();
        assert_eq!(labels[0], "Melia 1977, boys");
        assert_eq!(labels[4], "McConnell 2002, no wheeze");
        assert_eq!(labels[12], "Lin 2013");
    }
}
