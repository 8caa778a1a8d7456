//! The `clinchsim` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, rules, ranges),
//! 2 when a data file cannot be read or fails validation. Setting
//! `CLINCHSIM_DATA_DIR` makes the bundled pools, the reference table and the
//! historical fixtures (under `history/`) load from that directory.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dataset::{
    builtin_reference, load_excerpt, load_reference, validate_against_reference, CheckStatus, HistoryFixture,
};
use crate::domain::{ratio_to_f64, SeasonOutcome};
use crate::error::{Error, Result};
use crate::evaluate::{self, ranked, Evaluator};
use crate::montecarlo::{self, DatasetSource, ExperimentConfig, ExperimentReport, DEFAULT_REPLICATIONS, DEFAULT_SEED};
use crate::racegen::{Method, PairDraw};
use crate::rng::RngStream;
use crate::scoring::{format_rational, normalize_to_100, parse_rule_list, parse_rule_spec};

pub const DATA_DIR_ENV: &str = "CLINCHSIM_DATA_DIR";

const DEFAULT_RULES: &str = "S1,S2,S3,S4,G:1,G:1.05,G:1.3,G:1.6";

#[derive(Parser, Debug)]
#[command(
    name = "clinchsim",
    version,
    about = "Compare points scoring systems by simulating championship seasons",
    long_about = "Compare points scoring systems by simulating championship seasons.\n\n\
        Two risks are measured for every rule: the expected number of races held after the \
        title is already decided, and the probability that the champion never wins a race.\n\n\
        Set CLINCHSIM_DATA_DIR to read the bundled data files from another directory."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate seasons of a fixed length and report both risks per rule.
    Simulate(SimulateArgs),
    /// Repeat the simulation for a range of season lengths.
    Sweep(SweepArgs),
    /// Standings, champion and clinch race of a historical season.
    History(HistoryArgs),
    /// Print score vectors for rule specs.
    Rules(RulesArgs),
    /// Dataset utilities.
    Dataset {
        #[command(subcommand)]
        command: DatasetCommand,
    },
}

#[derive(Subcommand, Debug)]
enum DatasetCommand {
    /// Recompute per-season characteristics and compare them with the reference table.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::One => Method::M1,
            MethodArg::Two => Method::M2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PairDrawArg {
    Distinct,
    WithReplacement,
}

impl From<PairDrawArg> for PairDraw {
    fn from(p: PairDrawArg) -> PairDraw {
        match p {
            PairDrawArg::Distinct => PairDraw::Distinct,
            PairDrawArg::WithReplacement => PairDraw::WithReplacement,
        }
    }
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Race pool: standard, small-margin, full, or a CSV file.
    #[arg(long, default_value = "standard")]
    dataset: String,
    /// Race generation method: 1 resamples whole races, 2 recombines two races.
    #[arg(long, value_enum, default_value = "2")]
    method: MethodArg,
    /// How method 2 picks its two source races.
    #[arg(long, value_enum, default_value = "distinct")]
    pair_draw: PairDrawArg,
    /// Replications (simulated seasons).
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    reps: u64,
    /// Comma-separated rule specs: S1, S2, S3, S4, M1993, G:<p>, V:<v1,v2,...>.
    #[arg(long, default_value = DEFAULT_RULES)]
    rules: String,
    /// Master seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Keep simulated seasons as generated instead of making the champion risk averse.
    #[arg(long)]
    raw: bool,
    /// Rule deciding whose race wins the risk-averse transform removes.
    #[arg(long, default_value = "S4")]
    reference_rule: String,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write output to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Races per season.
    #[arg(long, default_value_t = 20)]
    races: usize,
    #[command(flatten)]
    experiment: ExperimentArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Range of season lengths, `A..B` inclusive, within 3..30.
    #[arg(long, default_value = "3..20")]
    races: String,
    #[command(flatten)]
    experiment: ExperimentArgs,
}

#[derive(Args, Debug)]
struct HistoryArgs {
    /// Bundled season (f1-2002, gp125-1999, motogp-2020) or a CSV file.
    #[arg(long)]
    fixture: String,
    /// Rule spec to score with (default: the rule used that season, S4 for files).
    #[arg(long)]
    rule: Option<String>,
    /// Seed for drawing lots between exactly tied drivers.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct RulesArgs {
    /// Comma-separated rule specs to print.
    #[arg(long, default_value = "S1,S2,S3,S4,G:1,G:1.05,G:1.3,G:1.6,M1993")]
    show: String,
    /// Also print scores rescaled so that a win is worth 100.
    #[arg(long)]
    normalized: bool,
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Race pool to check: standard, small-margin, full, or a CSV file.
    #[arg(long, default_value = "full")]
    dataset: String,
    /// Reference table CSV (default: the bundled one).
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let data_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
    match dispatch(cli.command, data_dir.as_deref(), out) {
        Ok(code) => code,
        Err(e) if e.is_broken_pipe() => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_data_error() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command, data_dir: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate(a) => {
            let config = experiment_config(&a.experiment, a.races, data_dir)?;
            let report = montecarlo::run_experiment(&config)?;
            emit_reports(&a.experiment, &[report], out)?;
        }
        Command::Sweep(a) => {
            let range = parse_range(&a.races)?;
            let config = experiment_config(&a.experiment, *range.start(), data_dir)?;
            let reports = montecarlo::sweep_races(&config, range)?;
            emit_reports(&a.experiment, &reports, out)?;
        }
        Command::History(a) => history(&a, data_dir, out)?,
        Command::Rules(a) => rules(&a, out)?,
        Command::Dataset {
            command: DatasetCommand::Validate(a),
        } => return validate(&a, data_dir, out),
    }
    Ok(0)
}

fn experiment_config(a: &ExperimentArgs, races_n: usize, data_dir: Option<&Path>) -> Result<ExperimentConfig> {
    let rules = parse_rule_list(&a.rules)?;
    parse_rule_spec(&a.reference_rule)?;
    let config = ExperimentConfig {
        dataset: DatasetSource::from_arg(&a.dataset),
        method: a.method.into(),
        pair_draw: a.pair_draw.into(),
        races_n,
        replications: a.reps,
        rules: rules.iter().map(|r| r.name().to_string()).collect(),
        risk_averse: !a.raw,
        reference_rule: a.reference_rule.clone(),
        master_seed: a.seed,
        threads: a.threads,
        data_dir: data_dir.map(Path::to_path_buf),
    };
    config.validate()?;
    Ok(config)
}

/// `A..B` (also `A..=B` or `A-B`), inclusive.
fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::Config(format!("race range `{s}` should look like 3..20"));
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'))
        .ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(Error::Config(format!("race range {a}..{b} is decreasing")));
    }
    Ok(a..=b)
}

fn emit_reports(a: &ExperimentArgs, reports: &[ExperimentReport], out: &mut dyn Write) -> Result<()> {
    let mut sink: Box<dyn Write + '_> = match &a.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::write(path.display().to_string(), e))?,
        )),
        None => Box::new(&mut *out),
    };
    match a.format {
        Format::Json => write_json(&mut sink, &reports)?,
        Format::Csv | Format::Text => montecarlo::write_csv(&mut sink, reports)?,
    }
    sink.flush().map_err(|e| Error::write("output", e))
}

fn write_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out).map_err(|e| Error::write("output", e))
}

fn io_out(e: io::Error) -> Error {
    Error::write("output", e)
}

#[derive(Serialize)]
struct HistoryRow {
    rank: usize,
    driver: usize,
    name: String,
    points: String,
    wins: u32,
    champion: bool,
}

#[derive(Serialize)]
struct HistoryReport {
    season: String,
    rule: String,
    races: usize,
    champion: usize,
    clinch_index: usize,
    uninteresting_races: usize,
    champion_won_a_race: bool,
    standings: Vec<HistoryRow>,
}

fn history(a: &HistoryArgs, data_dir: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let (season, names, default_rule): (SeasonOutcome, Vec<String>, String) = match a.fixture.parse::<HistoryFixture>()
    {
        Ok(f) => {
            let season = match data_dir {
                Some(dir) => load_excerpt(&dir.join("history").join(f.file_name()))?,
                None => f.season(),
            };
            (
                season,
                f.drivers().iter().map(|s| s.to_string()).collect(),
                f.rule().name().to_string(),
            )
        }
        Err(_) if Path::new(&a.fixture).exists() => (load_excerpt(Path::new(&a.fixture))?, Vec::new(), "S4".into()),
        Err(e) => return Err(e),
    };
    let rule = parse_rule_spec(a.rule.as_deref().unwrap_or(&default_rule))?;
    let rows = evaluate::score_season(&season, &rule, None)?;
    let mut rng = RngStream::new(a.seed, 0);
    let champ = evaluate::champion(&rows, &mut rng)?;
    let clinch = Evaluator::new(&rule)?.clinch_index(&season, champ)?;
    let name_of = |rank: usize| names.get(rank - 1).cloned().unwrap_or_else(|| format!("#{rank}"));
    let report = HistoryReport {
        season: a.fixture.clone(),
        rule: rule.name().to_string(),
        races: season.len(),
        champion: champ.rank(),
        clinch_index: clinch,
        uninteresting_races: season.len() - clinch,
        champion_won_a_race: rows[champ.index()].wins > 0,
        standings: ranked(rows)
            .into_iter()
            .enumerate()
            .map(|(i, r)| HistoryRow {
                rank: i + 1,
                driver: r.driver.rank(),
                name: name_of(r.driver.rank()),
                points: format_rational(&r.points),
                wins: r.wins,
                champion: r.driver == champ,
            })
            .collect(),
    };
    match a.format {
        Format::Json => write_json(out, &report),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record([
                "rank",
                "driver",
                "name",
                "points",
                "wins",
                "champion",
                "clinch_index",
                "races",
            ])?;
            for r in &report.standings {
                w.write_record([
                    r.rank.to_string(),
                    r.driver.to_string(),
                    r.name.clone(),
                    r.points.clone(),
                    r.wins.to_string(),
                    r.champion.to_string(),
                    report.clinch_index.to_string(),
                    report.races.to_string(),
                ])?;
            }
            w.flush().map_err(io_out)
        }
        Format::Text => {
            writeln!(out, "{} under {} ({} races)", report.season, report.rule, report.races).map_err(io_out)?;
            writeln!(out, "{:>4}  {:<20} {:>10} {:>5}", "pos", "driver", "points", "wins").map_err(io_out)?;
            for r in &report.standings {
                let mark = if r.champion { "  champion" } else { "" };
                writeln!(
                    out,
                    "{:>4}  {:<20} {:>10} {:>5}{mark}",
                    r.rank, r.name, r.points, r.wins
                )
                .map_err(io_out)?;
            }
            writeln!(
                out,
                "clinched after race {} of {} ({} uninteresting)",
                report.clinch_index, report.races, report.uninteresting_races
            )
            .map_err(io_out)?;
            writeln!(
                out,
                "champion won a race: {}",
                if report.champion_won_a_race { "yes" } else { "no" }
            )
            .map_err(io_out)
        }
    }
}

#[derive(Serialize)]
struct RuleListing {
    rule: String,
    scores: Vec<f64>,
    exact: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized: Option<Vec<f64>>,
}

fn rules(a: &RulesArgs, out: &mut dyn Write) -> Result<()> {
    let listings: Vec<RuleListing> = parse_rule_list(&a.show)?
        .iter()
        .map(|rule| RuleListing {
            rule: rule.name().to_string(),
            scores: rule.scores_f64(),
            exact: rule.scores().iter().map(format_rational).collect(),
            normalized: a
                .normalized
                .then(|| normalize_to_100(rule).iter().map(ratio_to_f64).collect()),
        })
        .collect();
    match a.format {
        Format::Json => write_json(out, &listings),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["rule", "place", "score", "exact", "normalized"])?;
            for l in &listings {
                for (j, score) in l.scores.iter().enumerate() {
                    let norm = l.normalized.as_ref().map_or(String::new(), |n| n[j].to_string());
                    w.write_record([
                        l.rule.clone(),
                        (j + 1).to_string(),
                        score.to_string(),
                        l.exact[j].clone(),
                        norm,
                    ])?;
                }
            }
            w.flush().map_err(io_out)
        }
        Format::Text => {
            for l in &listings {
                writeln!(out, "{:<8} {}", l.rule, join_rounded(&l.scores)).map_err(io_out)?;
                if let Some(n) = &l.normalized {
                    writeln!(out, "{:<8} {}", "", join_rounded(n)).map_err(io_out)?;
                }
            }
            Ok(())
        }
    }
}

fn join_rounded(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| {
            let s = format!("{v:.4}");
            let s = s.trim_end_matches('0').trim_end_matches('.');
            s.to_string()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn validate(a: &ValidateArgs, data_dir: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let dataset = DatasetSource::from_arg(&a.dataset).load(data_dir)?;
    let reference = match (&a.reference, data_dir) {
        (Some(path), _) => load_reference(path)?,
        (None, Some(dir)) => load_reference(&dir.join("reference.csv"))?,
        (None, None) => builtin_reference(),
    };
    let relevant: Vec<_> = reference
        .into_iter()
        .filter(|r| dataset.seasons().contains(&r.season))
        .collect();
    if relevant.is_empty() {
        return Err(Error::InvalidDataset(format!(
            "{} has no season listed in the reference table",
            dataset.name()
        )));
    }
    let report = validate_against_reference(&dataset, &relevant);
    match a.format {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["season", "field", "expected", "actual", "status"])?;
            for s in &report.seasons {
                for c in &s.checks {
                    let status = match c.status {
                        CheckStatus::Match => "match",
                        CheckStatus::Mismatch => "mismatch",
                        CheckStatus::Skipped => "skipped",
                    };
                    w.write_record([
                        s.season.to_string(),
                        c.field.to_string(),
                        c.expected.clone(),
                        c.actual.clone().unwrap_or_default(),
                        status.to_string(),
                    ])?;
                }
            }
            w.flush().map_err(io_out)?;
        }
        Format::Text => {
            for s in &report.seasons {
                let parts: Vec<String> = s.checks.iter().map(ToString::to_string).collect();
                writeln!(out, "{}: {}", s.season, parts.join(", ")).map_err(io_out)?;
            }
            writeln!(
                out,
                "{}: {} mismatch(es) in {} season(s)",
                dataset.name(),
                report.mismatch_count(),
                report.seasons.len()
            )
            .map_err(io_out)?;
        }
    }
    Ok(if report.is_ok() { 0 } else { 2 })
}
