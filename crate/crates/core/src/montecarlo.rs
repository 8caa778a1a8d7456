//! Replicated season simulation and aggregation of both risks.
//!
//! Replication `r` of a run with `n` races draws from its own stream
//! `(seed, n << 32 | r)`. Within a replication the season is generated,
//! optionally made risk averse, and then evaluated under every rule, so all
//! rules see the same seasons. Aggregates are integer sums, which makes the
//! report independent of how replications are spread over threads.

use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{builtin_dataset, builtin_dataset_in, load_dataset, BuiltinDataset};
use crate::domain::{Dataset, ScoringRule, SeasonMetrics, SeasonOutcome};
use crate::error::{Error, Result};
use crate::evaluate::Evaluator;
use crate::racegen::{generate_season_with, transform_for, Method, PairDraw};
use crate::rng::RngStream;
use crate::scoring::{parse_rule_spec, standard_rules};

pub const DEFAULT_SEED: u64 = 20_191_201;
pub const DEFAULT_REPLICATIONS: u64 = 100_000;
pub const SWEEP_RANGE: RangeInclusive<usize> = 3..=30;

/// Where the race pool comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Builtin(String),
    Path(PathBuf),
}

impl DatasetSource {
    /// Bundled names resolve against `data_dir` when given, otherwise to the
    /// copies compiled into the crate. Anything else is read as a CSV path.
    pub fn load(&self, data_dir: Option<&Path>) -> Result<Dataset> {
        match self {
            DatasetSource::Builtin(name) => {
                let which: BuiltinDataset = name.parse()?;
                match data_dir {
                    Some(dir) => builtin_dataset_in(which, dir),
                    None => Ok(builtin_dataset(which)),
                }
            }
            DatasetSource::Path(path) => load_dataset(path, None),
        }
    }

    /// A builtin name if it is one, a path otherwise.
    pub fn from_arg(arg: &str) -> DatasetSource {
        match arg.parse::<BuiltinDataset>() {
            Ok(b) => DatasetSource::Builtin(b.name().to_string()),
            Err(_) => DatasetSource::Path(PathBuf::from(arg)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub method: Method,
    #[serde(default)]
    pub pair_draw: PairDraw,
    pub races_n: usize,
    pub replications: u64,
    /// Rule specs, e.g. `S4`, `G:1.3`, `V:10,5,1`.
    pub rules: Vec<String>,
    pub risk_averse: bool,
    pub reference_rule: String,
    pub master_seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSource::Builtin("standard".into()),
            method: Method::M2,
            pair_draw: PairDraw::default(),
            races_n: 20,
            replications: DEFAULT_REPLICATIONS,
            rules: standard_rules().iter().map(|r| r.name().to_string()).collect(),
            risk_averse: true,
            reference_rule: "S4".into(),
            master_seed: DEFAULT_SEED,
            threads: None,
            data_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Config("replications must be ≥ 1".into()));
        }
        if self.replications > u64::from(u32::MAX) {
            return Err(Error::Config(format!(
                "at most {} replications are supported",
                u32::MAX
            )));
        }
        if self.races_n < 1 {
            return Err(Error::Config("races per season must be ≥ 1".into()));
        }
        if self.races_n > u16::MAX as usize {
            return Err(Error::Config("too many races per season".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::Config("at least one rule is required".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn parsed_rules(&self) -> Result<Vec<ScoringRule>> {
        self.rules.iter().map(|s| parse_rule_spec(s)).collect()
    }
}

/// Aggregates for one rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub rule: String,
    pub mean_uninteresting: f64,
    pub se_mean: f64,
    pub p_no_win: f64,
    pub se_p_no_win: f64,
    pub p_ge3: f64,
    pub se_p_ge3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub method: Method,
    pub races: usize,
    pub reps: u64,
    pub seed: u64,
    pub risk_averse: bool,
    pub reference_rule: String,
    pub rules: Vec<RuleReport>,
}

pub const CSV_HEADER: [&str; 13] = [
    "rule",
    "dataset",
    "method",
    "races",
    "reps",
    "seed",
    "risk_averse",
    "mean_uninteresting",
    "se_mean",
    "p_no_win",
    "se_p_no_win",
    "p_ge3",
    "se_p_ge3",
];

impl ExperimentReport {
    pub fn csv_records(&self) -> Vec<[String; 13]> {
        self.rules
            .iter()
            .map(|r| {
                [
                    r.rule.clone(),
                    self.dataset.clone(),
                    self.method.to_string(),
                    self.races.to_string(),
                    self.reps.to_string(),
                    self.seed.to_string(),
                    self.risk_averse.to_string(),
                    r.mean_uninteresting.to_string(),
                    r.se_mean.to_string(),
                    r.p_no_win.to_string(),
                    r.se_p_no_win.to_string(),
                    r.p_ge3.to_string(),
                    r.se_p_ge3.to_string(),
                ]
            })
            .collect()
    }

    pub fn rule(&self, name: &str) -> Option<&RuleReport> {
        self.rules.iter().find(|r| r.rule == name)
    }
}

/// Writes reports as one CSV table, one row per (report, rule).
pub fn write_csv<W: Write>(out: W, reports: &[ExperimentReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for report in reports {
        for record in report.csv_records() {
            w.write_record(&record)?;
        }
    }
    w.flush().map_err(|e| Error::write("output", e))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    sum: u64,
    sum_sq: u64,
    no_win: u64,
    ge3: u64,
}

impl Tally {
    fn add(&mut self, m: &SeasonMetrics) {
        let u = m.uninteresting_count as u64;
        self.sum += u;
        self.sum_sq += u * u;
        self.no_win += u64::from(!m.champion_won_a_race);
        self.ge3 += u64::from(u >= 3);
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.no_win += other.no_win;
        self.ge3 += other.ge3;
        self
    }

    fn report(&self, rule: &str, reps: u64) -> RuleReport {
        let r = reps as f64;
        let mean = self.sum as f64 / r;
        let se_mean = if reps > 1 {
            let (n, s, q) = (reps as i128, self.sum as i128, self.sum_sq as i128);
            let var = (n * q - s * s) as f64 / (r * (r - 1.0));
            (var.max(0.0) / r).sqrt()
        } else {
            0.0
        };
        let proportion = |k: u64| {
            let p = k as f64 / r;
            (p, (p * (1.0 - p) / r).sqrt())
        };
        let (p_no_win, se_p_no_win) = proportion(self.no_win);
        let (p_ge3, se_p_ge3) = proportion(self.ge3);
        RuleReport {
            rule: rule.to_string(),
            mean_uninteresting: mean,
            se_mean,
            p_no_win,
            se_p_no_win,
            p_ge3,
            se_p_ge3,
        }
    }
}

/// A compiled experiment: everything that is shared by the replications.
pub struct Simulation<'a> {
    dataset: &'a Dataset,
    method: Method,
    pair_draw: PairDraw,
    races_n: usize,
    seed: u64,
    reference: Option<Evaluator>,
    evaluators: Vec<Evaluator>,
}

/// One replication, kept whole for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct Replication {
    pub season: SeasonOutcome,
    pub metrics: Vec<SeasonMetrics>,
}

pub fn stream_index(races_n: usize, replication: u64) -> u64 {
    ((races_n as u64) << 32) | replication
}

impl<'a> Simulation<'a> {
    pub fn new(config: &ExperimentConfig, dataset: &'a Dataset, rules: &[ScoringRule]) -> Result<Self> {
        config.validate()?;
        let reference = if config.risk_averse {
            Some(Evaluator::new(&parse_rule_spec(&config.reference_rule)?)?)
        } else {
            None
        };
        Ok(Simulation {
            dataset,
            method: config.method,
            pair_draw: config.pair_draw,
            races_n: config.races_n,
            seed: config.master_seed,
            reference,
            evaluators: rules.iter().map(Evaluator::new).collect::<Result<_>>()?,
        })
    }

    /// Replication `r` (1-based): the season every rule is evaluated on and
    /// the metrics of each rule, in rule order.
    pub fn replication(&self, r: u64) -> Result<Replication> {
        let mut rng = RngStream::new(self.seed, stream_index(self.races_n, r));
        let mut season = generate_season_with(self.dataset, self.method, self.pair_draw, self.races_n, &mut rng)?;
        if let Some(reference) = &self.reference {
            let champ = reference.champion(&season, &mut rng);
            season = transform_for(&season, champ);
        }
        let metrics = self
            .evaluators
            .iter()
            .map(|e| e.metrics(&season, &mut rng))
            .collect::<Result<_>>()?;
        Ok(Replication { season, metrics })
    }

    fn tally(&self, replications: u64) -> Result<Vec<Tally>> {
        let k = self.evaluators.len();
        (1..=replications)
            .into_par_iter()
            .try_fold(
                || vec![Tally::default(); k],
                |mut acc, r| {
                    let rep = self.replication(r)?;
                    for (t, m) in acc.iter_mut().zip(&rep.metrics) {
                        t.add(m);
                    }
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || vec![Tally::default(); k],
                |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
            )
    }
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => job(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(job),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dataset = config.dataset.load(config.data_dir.as_deref())?;
    let rules = config.parsed_rules()?;
    run_experiment_on(config, &dataset, &rules)
}

/// Like [`run_experiment`] with the pool and rules already in hand.
pub fn run_experiment_on(
    config: &ExperimentConfig,
    dataset: &Dataset,
    rules: &[ScoringRule],
) -> Result<ExperimentReport> {
    let sim = Simulation::new(config, dataset, rules)?;
    let tallies = in_pool(config.threads, || sim.tally(config.replications))?;
    Ok(ExperimentReport {
        dataset: dataset.name().to_string(),
        method: config.method,
        races: config.races_n,
        reps: config.replications,
        seed: config.master_seed,
        risk_averse: config.risk_averse,
        reference_rule: config.reference_rule.clone(),
        rules: rules
            .iter()
            .zip(&tallies)
            .map(|(rule, t)| t.report(rule.name(), config.replications))
            .collect(),
    })
}

/// One experiment per season length in `n_range`, which must lie within
/// 3..=30.
pub fn sweep_races(config: &ExperimentConfig, n_range: RangeInclusive<usize>) -> Result<Vec<ExperimentReport>> {
    check_sweep_range(&n_range)?;
    config.validate()?;
    let dataset = config.dataset.load(config.data_dir.as_deref())?;
    let rules = config.parsed_rules()?;
    sweep_races_on(config, &dataset, &rules, n_range)
}

pub fn sweep_races_on(
    config: &ExperimentConfig,
    dataset: &Dataset,
    rules: &[ScoringRule],
    n_range: RangeInclusive<usize>,
) -> Result<Vec<ExperimentReport>> {
    check_sweep_range(&n_range)?;
    n_range
        .map(|n| {
            let cfg = ExperimentConfig {
                races_n: n,
                ..config.clone()
            };
            run_experiment_on(&cfg, dataset, rules)
        })
        .collect()
}

fn check_sweep_range(n_range: &RangeInclusive<usize>) -> Result<()> {
    let (a, b) = (*n_range.start(), *n_range.end());
    if a > b || !SWEEP_RANGE.contains(&a) || !SWEEP_RANGE.contains(&b) {
        return Err(Error::Config(format!(
            "race range {a}..{b} must be increasing and lie within {}..{}",
            SWEEP_RANGE.start(),
            SWEEP_RANGE.end()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RaceResult;

    fn tiny() -> Dataset {
        Dataset::new(
            "tiny",
            vec![
                RaceResult::from_places(&[1, 3, 2]).unwrap(),
                RaceResult::from_places(&[2, 1, 3]).unwrap(),
                RaceResult::from_places(&[3, 2, 1]).unwrap(),
            ],
            vec![],
        )
        .unwrap()
    }

    fn config(reps: u64) -> ExperimentConfig {
        ExperimentConfig {
            races_n: 6,
            replications: reps,
            rules: vec!["S2".into(), "S4".into()],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn single_replication_is_exact() {
        let ds = tiny();
        let cfg = config(1);
        let rules = cfg.parsed_rules().unwrap();
        let report = run_experiment_on(&cfg, &ds, &rules).unwrap();
        let rep = Simulation::new(&cfg, &ds, &rules).unwrap().replication(1).unwrap();
        for (row, m) in report.rules.iter().zip(&rep.metrics) {
            assert_eq!(row.mean_uninteresting, m.uninteresting_count as f64);
            assert_eq!(row.p_no_win, if m.champion_won_a_race { 0.0 } else { 1.0 });
            assert_eq!(row.se_mean, 0.0);
            assert_eq!(row.se_p_no_win, 0.0);
        }
    }

    #[test]
    fn zero_replications_rejected() {
        let err = config(0).validate().unwrap_err();
        assert!(err.to_string().contains("replications must be ≥ 1"));
    }

    #[test]
    fn sample_standard_error() {
        // values 0, 2: mean 1, sample variance 2, se = sqrt(2 / 2) = 1
        let t = Tally {
            sum: 2,
            sum_sq: 4,
            no_win: 1,
            ge3: 0,
        };
        let r = t.report("x", 2);
        assert_eq!(r.mean_uninteresting, 1.0);
        assert!((r.se_mean - 1.0).abs() < 1e-12);
        assert!((r.se_p_no_win - 0.5 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sweep_range_checked() {
        let ds = tiny();
        let cfg = config(3);
        let rules = cfg.parsed_rules().unwrap();
        #[allow(clippy::reversed_empty_ranges)]
        let backwards = 20..=3;
        assert!(sweep_races_on(&cfg, &ds, &rules, backwards).is_err());
        assert!(sweep_races_on(&cfg, &ds, &rules, 2..=5).is_err());
        assert!(sweep_races_on(&cfg, &ds, &rules, 3..=31).is_err());
        assert_eq!(sweep_races_on(&cfg, &ds, &rules, 4..=6).unwrap().len(), 3);
    }

    #[test]
    fn dataset_source_from_arg() {
        assert_eq!(
            DatasetSource::from_arg("small-margin"),
            DatasetSource::Builtin("small-margin".into())
        );
        assert_eq!(DatasetSource::from_arg("x.csv"), DatasetSource::Path("x.csv".into()));
    }
}
