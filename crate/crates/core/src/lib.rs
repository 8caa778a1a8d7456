//! Season simulation engine for comparing positional points scoring systems.
//!
//! Two risks are traded off against each other when choosing how many points
//! each finishing place is worth:
//!
//! * the *threat of early clinch*: the title is secured before the last
//!   race(s), leaving the remaining races uninteresting;
//! * the *danger of winning without finishing first*: the champion never
//!   wins a single race.
//!
//! The crate resamples historical Formula One races into synthetic seasons
//! ([`racegen`]), scores them under arbitrary rules ([`scoring`],
//! [`evaluate`]) and aggregates both risks over many replications
//! ([`montecarlo`]). The [`cli`] module drives everything from the command
//! line.

pub mod cli;
pub mod dataset;
pub mod domain;
pub mod error;
pub mod evaluate;
pub mod montecarlo;
pub mod racegen;
pub mod rng;
pub mod scoring;

pub use dataset::{builtin_dataset, load_dataset, BuiltinDataset};
pub use domain::{
    Dataset, DriverId, Points, Position, RaceResult, ScoringRule, SeasonMetrics, SeasonOutcome, StandingsRow,
};
pub use error::{Error, Result};
pub use evaluate::{champion, clinch_index, score_season, season_metrics};
pub use montecarlo::{run_experiment, sweep_races, ExperimentConfig, ExperimentReport};
pub use racegen::{generate_season, risk_averse_transform, Method, PairDraw};
pub use rng::RngStream;
pub use scoring::{geometric_rule, normalize_to_100, points_for, preset_rule, Preset};
