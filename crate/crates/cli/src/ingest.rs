//! CSV ingestion for effect estimates and search-space counts.
//!
//! Columns are located by header name, so extra columns are ignored and
//! the files this tool writes can be read back. Every bad row is reported
//! with file, line and column, and any bad row rejects the whole file.

use std::fmt;
use std::path::Path;

use pvaudit_core::effects::DEFAULT_CI_LEVEL;
use pvaudit_core::search_space::{CountBlock, StudyCounts};
use pvaudit_core::{EffectEstimate, Error};

pub const EFFECTS_COLUMNS: [&str; 5] = ["study_label", "subgroup_label", "odds_ratio", "ci_low", "ci_high"];
pub const COUNTS_COLUMNS: [&str; 6] = ["paper_label", "region", "block_label", "outcomes", "predictors", "covariates"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u64,
    /// Column name, when the problem is tied to one field.
    pub column: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestError {
    pub source_name: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl IngestError {
    fn single(source_name: &str, line: u64, column: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            source_name: source_name.to_owned(),
            diagnostics: vec![Diagnostic { line, column: column.map(str::to_owned), message: message.into() }],
        }
    }
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match &d.column {
                Some(col) => write!(f, "{}:{}: column {col}: {}", self.source_name, d.line, d.message)?,
                None => write!(f, "{}:{}: {}", self.source_name, d.line, d.message)?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for IngestError {}

/// Header positions of the named columns.
struct Columns {
    index: Vec<Option<usize>>,
}

impl Columns {
    fn locate(
        source_name: &str,
        headers: &csv::StringRecord,
        required: &[&str],
        optional: &[&str],
    ) -> Result<Self, IngestError> {
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let missing: Vec<&str> = required.iter().copied().filter(|c| find(c).is_none()).collect();
        if !missing.is_empty() {
            return Err(IngestError::single(
                source_name,
                1,
                None,
                format!("header is missing required column(s): {}", missing.join(", ")),
            ));
        }
        let index = required.iter().chain(optional).map(|c| find(c)).collect();
        Ok(Self { index })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, i: usize) -> &'r str {
        self.index[i].and_then(|at| record.get(at)).map(str::trim).unwrap_or("")
    }
}

struct Row<'a> {
    line: u64,
    diagnostics: &'a mut Vec<Diagnostic>,
}

impl Row<'_> {
    fn fail(&mut self, column: &str, message: String) {
        self.diagnostics.push(Diagnostic { line: self.line, column: Some(column.to_owned()), message });
    }

    fn fail_row(&mut self, message: String) {
        self.diagnostics.push(Diagnostic { line: self.line, column: None, message });
    }

    fn number(&mut self, column: &str, raw: &str) -> Option<f64> {
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.fail(column, format!("expected a finite number, got '{raw}'"));
                None
            }
        }
    }

    fn count<T: std::str::FromStr>(&mut self, column: &str, raw: &str) -> Option<T> {
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.fail(column, format!("expected a non-negative integer, got '{raw}'"));
                None
            }
        }
    }

    fn text(&mut self, column: &str, raw: &str) -> Option<String> {
        if raw.is_empty() {
            self.fail(column, "value is required".into());
            None
        } else {
            Some(raw.to_owned())
        }
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(text.as_bytes())
}

fn records(source_name: &str, text: &str) -> Result<(csv::StringRecord, Vec<csv::StringRecord>), IngestError> {
    let mut rdr = reader(text);
    let csv_error = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        IngestError::single(source_name, line, None, format!("malformed CSV: {e}"))
    };
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows.push(record);
    }
    Ok((headers, rows))
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub fn read_source(path: &Path) -> std::io::Result<String> {
    std::fs::read_to_string(path)
}

pub fn ingest_effects(path: &Path) -> crate::error::Result<Vec<EffectEstimate>> {
    let text = read_source(path).map_err(|source| crate::error::CliError::Read { path: path.to_owned(), source })?;
    Ok(parse_effects(&path.display().to_string(), &text)?)
}

/// Parse an effects CSV held in memory. `source_name` appears in diagnostics.
pub fn parse_effects(source_name: &str, text: &str) -> Result<Vec<EffectEstimate>, IngestError> {
    let (headers, rows) = records(source_name, text)?;
    let cols = Columns::locate(source_name, &headers, &EFFECTS_COLUMNS, &["ci_level"])?;
    if rows.is_empty() {
        return Err(IngestError::single(source_name, 1, None, "empty input: no data rows after the header"));
    }
    let mut diagnostics = Vec::new();
    let mut out = Vec::with_capacity(rows.len());
    for record in &rows {
        let mut row = Row { line: line_of(record), diagnostics: &mut diagnostics };
        let study = row.text("study_label", cols.get(record, 0));
        let subgroup = cols.get(record, 1);
        let or = row.number("odds_ratio", cols.get(record, 2));
        let lo = row.number("ci_low", cols.get(record, 3));
        let hi = row.number("ci_high", cols.get(record, 4));
        let level_raw = cols.get(record, 5);
        let level = if level_raw.is_empty() { Some(DEFAULT_CI_LEVEL) } else { row.number("ci_level", level_raw) };
        let (Some(study), Some(or), Some(lo), Some(hi), Some(level)) = (study, or, lo, hi, level) else {
            continue;
        };
        let subgroup = (!subgroup.is_empty()).then_some(subgroup);
        match EffectEstimate::with_level(study, subgroup, or, lo, hi, level) {
            Ok(e) => out.push(e),
            Err(err) => {
                let column = match &err {
                    Error::InvalidInterval { .. } | Error::DegenerateInterval => "ci_low",
                    Error::Domain(msg) if msg.contains("confidence level") => "ci_level",
                    _ => "odds_ratio",
                };
                row.fail(column, err.to_string());
            }
        }
    }
    if diagnostics.is_empty() {
        Ok(out)
    } else {
        Err(IngestError { source_name: source_name.to_owned(), diagnostics })
    }
}

pub fn ingest_counts(path: &Path) -> crate::error::Result<Vec<StudyCounts>> {
    let text = read_source(path).map_err(|source| crate::error::CliError::Read { path: path.to_owned(), source })?;
    Ok(parse_counts(&path.display().to_string(), &text)?)
}

/// Parse a counts CSV. Rows sharing a `paper_label` become one study, in
/// order of first appearance.
pub fn parse_counts(source_name: &str, text: &str) -> Result<Vec<StudyCounts>, IngestError> {
    let (headers, rows) = records(source_name, text)?;
    let cols = Columns::locate(source_name, &headers, &COUNTS_COLUMNS, &["notes"])?;
    if rows.is_empty() {
        return Err(IngestError::single(source_name, 1, None, "empty input: no data rows after the header"));
    }
    let mut diagnostics = Vec::new();
    // (paper, region, first line, blocks)
    let mut groups: Vec<(String, String, u64, Vec<CountBlock>)> = Vec::new();
    for record in &rows {
        let mut row = Row { line: line_of(record), diagnostics: &mut diagnostics };
        let paper = row.text("paper_label", cols.get(record, 0));
        let region = cols.get(record, 1).to_owned();
        let block = row.text("block_label", cols.get(record, 2));
        let outcomes = row.count::<u64>("outcomes", cols.get(record, 3));
        let predictors = row.count::<u64>("predictors", cols.get(record, 4));
        let covariates = row.count::<u32>("covariates", cols.get(record, 5));
        let notes = cols.get(record, 6);
        let (Some(paper), Some(block), Some(outcomes), Some(predictors), Some(covariates)) =
            (paper, block, outcomes, predictors, covariates)
        else {
            continue;
        };
        let mut block = match CountBlock::new(block, outcomes, predictors, covariates) {
            Ok(b) => b,
            Err(err) => {
                let column = if matches!(err, Error::OverflowGuard { .. }) { "covariates" } else { "outcomes" };
                row.fail(column, err.to_string());
                continue;
            }
        };
        block.notes = (!notes.is_empty()).then(|| notes.to_owned());
        match groups.iter_mut().find(|g| g.0 == paper) {
            Some(group) => {
                if group.1 != region {
                    row.fail(
                        "region",
                        format!("'{paper}' was given region '{}' on line {}, here '{region}'", group.1, group.2),
                    );
                    continue;
                }
                group.3.push(block);
            }
            None => groups.push((paper, region, row.line, vec![block])),
        }
    }
    if !diagnostics.is_empty() {
        return Err(IngestError { source_name: source_name.to_owned(), diagnostics });
    }
    let mut out = Vec::with_capacity(groups.len());
    for (paper, region, line, blocks) in groups {
        match StudyCounts::new(paper, region, blocks) {
            Ok(s) => out.push(s),
            Err(err) => {
                let mut row = Row { line, diagnostics: &mut diagnostics };
                row.fail_row(err.to_string());
            }
        }
    }
    if diagnostics.is_empty() {
        Ok(out)
    } else {
        Err(IngestError { source_name: source_name.to_owned(), diagnostics })
    }
}
