//! The Table 2 p-value plot at default settings must match the checked-in
//! SVG byte for byte. Regenerate with `UPDATE_GOLDEN=1 cargo test`.

use std::path::PathBuf;
use std::process::Command;

use pvaudit::fixtures;
use pvaudit_core::render::render_svg;
use pvaudit_core::{build_plot, classify_plot, ConversionMethod, PlotConfig, PlotEntry};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/table2.svg")
}

fn render_table2() -> String {
    let config = PlotConfig::default();
    let entries: Vec<PlotEntry> = fixtures::table2()
        .iter()
        .map(|e| PlotEntry::from_effect(e, ConversionMethod::NaturalScale).unwrap())
        .collect();
    let plot = build_plot(&entries, config.alpha).unwrap();
    let classification = classify_plot(&plot, &config).unwrap();
    render_svg(&plot, &classification, &config).unwrap()
}

#[test]
fn table2_svg_matches_golden() {
    let svg = render_table2();
    assert_eq!(svg, render_table2());
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden_path(), &svg).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).expect("golden file; run with UPDATE_GOLDEN=1 to create");
    assert_eq!(svg, golden);
}

#[test]
fn plot_command_writes_the_golden_svg() {
    let dir = tempfile::TempDir::new().unwrap();
    let input = dir.path().join("table2.csv");
    std::fs::write(&input, fixtures::TABLE2_CSV).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pvaudit"))
        .args(["plot", input.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(dir.path().join("table2.svg")).unwrap();
    let golden = std::fs::read_to_string(golden_path()).unwrap();
    assert_eq!(written, golden);
}
