//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use pvaudit_core::effects::convert;
use pvaudit_core::nullsim::run_simulation;
use pvaudit_core::pooling::pool;
use pvaudit_core::render::{render_csv, render_svg};
use pvaudit_core::search_space::cohort_false_positives;
use pvaudit_core::{
    build_plot, classify_plot, ConversionMethod, PlotConfig, PlotEntry, PoolingMethod, SimulationConfig,
};
use serde::{Deserialize, Serialize};

use crate::audit::{audit, count_report, AuditConfig, InputDigest};
use crate::error::{CliError, Result};
use crate::ingest::{parse_counts, parse_effects};
use crate::json::to_canonical_json;
use crate::reproduce::reproduce;

#[derive(Debug, Parser)]
#[command(name = "pvaudit", version, about = "Reliability audit for meta-analyses of odds ratios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    /// SE from the untransformed interval
    Natural,
    /// SE from the log interval
    Log,
}

impl From<MethodArg> for ConversionMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Natural => ConversionMethod::NaturalScale,
            MethodArg::Log => ConversionMethod::LogScale,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    /// Inverse-variance fixed effect
    Fixed,
    /// DerSimonian–Laird random effects
    Dl,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert odds ratios and intervals to p-values (CSV out)
    Convert {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Natural)]
        method: MethodArg,
        /// Write here instead of standard output
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pool estimates on the log odds ratio scale (JSON out)
    Pool {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Dl)]
        model: ModelArg,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw and classify a p-value plot (SVG, CSV and classification JSON)
    Plot {
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Natural)]
        method: MethodArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        title: Option<String>,
        /// Output file stem; defaults to the input file stem
        #[arg(long)]
        stem: Option<String>,
    },
    /// Search-space ledger from a counts CSV (JSON out)
    Count {
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Expected false positives across publications from one cohort
    Cohort {
        #[arg(long)]
        publications: u64,
        /// Median search space per publication (integer)
        #[arg(long)]
        median_nh: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Run a seeded Monte Carlo scenario from a JSON config (JSON out)
    Simulate {
        config: PathBuf,
        /// Worker threads; defaults to all cores
        #[arg(long)]
        threads: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reproduce the published tables and figures from bundled inputs
    Reproduce {
        #[arg(long, default_value = "reproduction")]
        out_dir: PathBuf,
    },
    /// Full audit report for one effects file (JSON out)
    Audit {
        input: PathBuf,
        /// Optional counts CSV for the search-space section
        #[arg(long)]
        counts: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Natural)]
        method: MethodArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Config file for `simulate`: the simulation settings plus optional
/// classifier settings.
#[derive(Debug, Deserialize, Serialize)]
struct SimulateFile {
    #[serde(flatten)]
    simulation: SimulationConfig,
    #[serde(default)]
    plot: PlotConfig,
}

fn no_color() -> bool {
    std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty())
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let color = if no_color() { ColorChoice::Never } else { ColorChoice::Auto };
    let matches = match Cli::command().color(color).try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            e.exit_code()
        }
    }
}

fn report_error(e: &CliError) {
    let mut stderr = std::io::stderr().lock();
    let prefix = if !no_color() && stderr.is_terminal() { "\x1b[31merror\x1b[0m" } else { "error" };
    let _ = writeln!(stderr, "{prefix}: {e}");
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.to_owned(), source })
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_owned(), source })
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Convert { input, method, output } => {
            let text = read(&input)?;
            let effects = parse_effects(&input.display().to_string(), &text)?;
            let csv = convert_csv(&effects, method.into())?;
            emit(output.as_deref(), &csv)?;
        }
        Command::Pool { input, model, level, output } => {
            let text = read(&input)?;
            let effects = parse_effects(&input.display().to_string(), &text)?;
            let method = match model {
                ModelArg::Fixed => PoolingMethod::FixedEffect,
                ModelArg::Dl => PoolingMethod::DerSimonianLaird,
            };
            let pooled = pool(&effects, method, level)?;
            emit(output.as_deref(), &to_canonical_json(&pooled)?)?;
        }
        Command::Plot { input, out_dir, method, alpha, title, stem } => {
            check_alpha(alpha)?;
            let text = read(&input)?;
            let effects = parse_effects(&input.display().to_string(), &text)?;
            let mut config = PlotConfig { alpha, ..PlotConfig::default() };
            config.style.title = title;
            config.validate()?;
            let entries = effects
                .iter()
                .map(|e| PlotEntry::from_effect(e, method.into()))
                .collect::<pvaudit_core::Result<Vec<_>>>()?;
            let plot = build_plot(&entries, alpha)?;
            let classification = classify_plot(&plot, &config)?;
            let svg = render_svg(&plot, &classification, &config)?;
            let stem = stem.unwrap_or_else(|| {
                input.file_stem().map_or_else(|| "plot".into(), |s| s.to_string_lossy().into_owned())
            });
            create_dir(&out_dir)?;
            let svg_path = out_dir.join(format!("{stem}.svg"));
            let csv_path = out_dir.join(format!("{stem}.csv"));
            let json_path = out_dir.join(format!("{stem}.classification.json"));
            write_file(&svg_path, svg.as_bytes())?;
            write_file(&csv_path, render_csv(&plot).as_bytes())?;
            write_file(&json_path, to_canonical_json(&classification)?.as_bytes())?;
            println!(
                "{}: n = {}, {} below {}, {}",
                input.display(),
                plot.n,
                plot.n_below_alpha,
                alpha,
                classification.verdict
            );
        }
        Command::Count { input, alpha, output } => {
            check_alpha(alpha)?;
            let text = read(&input)?;
            let studies = parse_counts(&input.display().to_string(), &text)?;
            let digest = InputDigest::new(input.display().to_string(), studies.len(), text.as_bytes());
            let report = count_report(digest, studies, alpha)?;
            emit(output.as_deref(), &to_canonical_json(&report)?)?;
        }
        Command::Cohort { publications, median_nh, alpha } => {
            check_alpha(alpha)?;
            let median: BigUint = median_nh
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("--median-nh must be a non-negative integer, got '{median_nh}'")))?;
            let expected = cohort_false_positives(publications, &median, alpha);
            let report = CohortReport {
                publications,
                median_nh: median.to_string(),
                alpha,
                expected_false_positives: expected,
                expected_false_positives_rounded: expected.round() as u64,
            };
            emit(None, &to_canonical_json(&report)?)?;
        }
        Command::Simulate { config, threads, output } => {
            let text = read(&config)?;
            let file: SimulateFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
            let report = match threads {
                Some(n) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build()
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                    pool.install(|| run_simulation(&file.simulation, &file.plot))?
                }
                None => run_simulation(&file.simulation, &file.plot)?,
            };
            emit(output.as_deref(), &to_canonical_json(&report)?)?;
        }
        Command::Reproduce { out_dir } => {
            let r = reproduce()?;
            create_dir(&out_dir)?;
            write_file(&out_dir.join("reproduction.json"), to_canonical_json(&r.diff)?.as_bytes())?;
            for (name, svg) in &r.figures {
                write_file(&out_dir.join(name), svg.as_bytes())?;
            }
            for e in r.diff.entries.iter().filter(|e| e.gated && !e.pass) {
                eprintln!("FAIL {}: paper {} computed {} (tolerance {})", e.name, e.paper_value, e.computed_value, e.tolerance);
            }
            println!(
                "reproduce: {}/{} gated checks pass, {} informational; written to {}",
                r.diff.gated_passed,
                r.diff.gated_total,
                r.diff.informational_total,
                out_dir.display()
            );
            return Ok(if r.diff.all_gated_pass { 0 } else { 1 });
        }
        Command::Audit { input, counts, method, alpha, level, output } => {
            check_alpha(alpha)?;
            let text = read(&input)?;
            let effects = parse_effects(&input.display().to_string(), &text)?;
            let digest = InputDigest::new(input.display().to_string(), effects.len(), text.as_bytes());
            let counts = match counts {
                Some(path) => {
                    let text = read(&path)?;
                    let studies = parse_counts(&path.display().to_string(), &text)?;
                    Some((InputDigest::new(path.display().to_string(), studies.len(), text.as_bytes()), studies))
                }
                None => None,
            };
            let config = AuditConfig {
                plot_method: method.into(),
                ci_level: level,
                plot: PlotConfig { alpha, ..PlotConfig::default() },
            };
            let report = audit(digest, &effects, counts, config)?;
            emit(output.as_deref(), &to_canonical_json(&report)?)?;
        }
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct CohortReport {
    publications: u64,
    median_nh: String,
    alpha: f64,
    expected_false_positives: f64,
    expected_false_positives_rounded: u64,
}

/// Input columns followed by the conversion; readable by `parse_effects`.
pub fn convert_csv(effects: &[pvaudit_core::EffectEstimate], method: ConversionMethod) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record([
        "study_label",
        "subgroup_label",
        "odds_ratio",
        "ci_low",
        "ci_high",
        "ci_level",
        "method",
        "standard_error",
        "z",
        "p_value",
    ])
    .map_err(internal)?;
    for e in effects {
        let c = convert(e, method)?;
        w.write_record([
            e.study_label.clone(),
            e.subgroup_label.clone().unwrap_or_default(),
            e.odds_ratio.to_string(),
            e.ci_low.to_string(),
            e.ci_high.to_string(),
            e.ci_level.to_string(),
            method.name().to_owned(),
            c.standard_error.to_string(),
            c.z.to_string(),
            c.p_value.to_string(),
        ])
        .map_err(internal)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}
