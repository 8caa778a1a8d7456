//! Race pools: CSV loading, the bundled Formula One pools, the historical
//! excerpts and the season reference table.
//!
//! CSV layout, header required:
//!
//! ```text
//! season,race,driver,position
//! 2016,1,1,2
//! 2016,1,2,1
//! 2016,1,7,DNF
//! ```
//!
//! `driver` is the driver's final standing in that season and `position` a
//! place or `DNF`. Rows for unclassified drivers may be left out. The bundled
//! pools record the top ten of every race, so a driver outside the top ten is
//! unclassified there.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, DriverId, Points, Position, RaceResult, SeasonOutcome};
use crate::error::{Error, Result};
use crate::evaluate::{self, Evaluator};
use crate::rng::RngStream;
use crate::scoring::{format_rational, parse_rational, preset_rule, Preset};

const STANDARD_CSV: &str = include_str!("../data/standard.csv");
const SMALL_MARGIN_CSV: &str = include_str!("../data/small_margin.csv");
const FULL_CSV: &str = include_str!("../data/f1_2007_2019.csv");
const REFERENCE_CSV: &str = include_str!("../data/reference.csv");
const F1_2002_CSV: &str = include_str!("../data/history/f1_2002.csv");
const GP125_1999_CSV: &str = include_str!("../data/history/gp125_1999.csv");
const MOTOGP_2020_CSV: &str = include_str!("../data/history/motogp_2020.csv");

const HEADER: [&str; 4] = ["season", "race", "driver", "position"];

/// The race pools shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinDataset {
    /// Every race of the 2010-2019 seasons.
    Standard,
    /// The six closest title fights: 2007, 2008, 2009, 2010, 2012, 2016.
    SmallMargin,
    /// All thirteen seasons 2007-2019.
    Full,
}

impl BuiltinDataset {
    pub const ALL: [BuiltinDataset; 3] = [
        BuiltinDataset::Standard,
        BuiltinDataset::SmallMargin,
        BuiltinDataset::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinDataset::Standard => "standard",
            BuiltinDataset::SmallMargin => "small-margin",
            BuiltinDataset::Full => "f1-2007-2019",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            BuiltinDataset::Standard => "standard.csv",
            BuiltinDataset::SmallMargin => "small_margin.csv",
            BuiltinDataset::Full => "f1_2007_2019.csv",
        }
    }

    fn contents(self) -> &'static str {
        match self {
            BuiltinDataset::Standard => STANDARD_CSV,
            BuiltinDataset::SmallMargin => SMALL_MARGIN_CSV,
            BuiltinDataset::Full => FULL_CSV,
        }
    }
}

impl FromStr for BuiltinDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "standard" => Ok(BuiltinDataset::Standard),
            "small-margin" => Ok(BuiltinDataset::SmallMargin),
            "full" | "f1-2007-2019" => Ok(BuiltinDataset::Full),
            _ => Err(Error::Unknown {
                kind: "dataset",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for BuiltinDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn builtin_dataset(which: BuiltinDataset) -> Dataset {
    parse_dataset(which.name(), which.file_name(), which.contents(), None).expect("bundled pools are valid")
}

/// The builtin pool read from `dir` instead of the copy compiled into the
/// binary.
pub fn builtin_dataset_in(which: BuiltinDataset, dir: &Path) -> Result<Dataset> {
    load_dataset(&dir.join(which.file_name()), None)
}

pub fn load_dataset(path: &Path, driver_count_override: Option<usize>) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(
        &name_from_path(path),
        &path.display().to_string(),
        &text,
        driver_count_override,
    )
}

fn name_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().replace('_', "-"))
        .unwrap_or_else(|| "dataset".to_string())
}

#[derive(Debug)]
struct Row {
    season: u16,
    race: u32,
    driver: usize,
    position: Position,
    line: usize,
}

fn read_rows(origin: &str, text: &str) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyDataset);
    }
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse {
            path: origin.to_string(),
            line: 1,
            message: format!("expected header `{}`", HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        if record.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", record.len())));
        }
        let season = record[0]
            .parse()
            .map_err(|_| bad(format!("bad season `{}`", &record[0])))?;
        let race: u32 = record[1]
            .parse()
            .map_err(|_| bad(format!("bad race number `{}`", &record[1])))?;
        let driver: usize = record[2]
            .parse()
            .map_err(|_| bad(format!("bad driver `{}`", &record[2])))?;
        if race == 0 || driver == 0 {
            return Err(bad("race numbers and drivers start at 1".into()));
        }
        let position = match &record[3] {
            "DNF" | "dnf" | "" => Position::Unclassified,
            p => p
                .parse::<u16>()
                .ok()
                .filter(|&p| p > 0)
                .map(Position::Classified)
                .ok_or_else(|| bad(format!("bad position `{p}`")))?,
        };
        rows.push(Row {
            season,
            race,
            driver,
            position,
            line,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(rows)
}

/// Rows grouped into races ordered by (season, race number).
fn group_races(origin: &str, rows: &[Row]) -> Result<BTreeMap<(u16, u32), Vec<Position>>> {
    let mut races: BTreeMap<(u16, u32), Vec<Position>> = BTreeMap::new();
    let mut seen: BTreeMap<(u16, u32, usize), usize> = BTreeMap::new();
    for row in rows {
        if let Some(first) = seen.insert((row.season, row.race, row.driver), row.line) {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: row.line,
                message: format!(
                    "driver {} already has a result in season {} race {} (line {first})",
                    row.driver, row.season, row.race
                ),
            });
        }
        let positions = races.entry((row.season, row.race)).or_default();
        if positions.len() < row.driver {
            positions.resize(row.driver, Position::Unclassified);
        }
        positions[row.driver - 1] = row.position;
    }
    Ok(races)
}

pub fn parse_dataset(name: &str, origin: &str, text: &str, driver_count_override: Option<usize>) -> Result<Dataset> {
    let rows = read_rows(origin, text)?;
    let widest = rows.iter().map(|r| r.driver).max().unwrap_or(0);
    let width = driver_count_override.unwrap_or(widest).max(widest);
    let mut races = Vec::new();
    for ((season, race), positions) in group_races(origin, &rows)? {
        let mut positions = positions;
        positions.resize(width, Position::Unclassified);
        let result = RaceResult::new(positions)
            .map_err(|e| Error::InvalidDataset(format!("{origin}: season {season} race {race}: {e}")))?;
        races.push(result.with_season(Some(season)));
    }
    let seasons: BTreeSet<u16> = rows.iter().map(|r| r.season).collect();
    Dataset::with_driver_count(name, races, seasons.into_iter().collect(), driver_count_override)
}

/// A single historical season copied from a published table that lists only
/// the leading drivers. Places need to be distinct but may have gaps, and a
/// race need not include its winner.
pub fn load_excerpt(path: &Path) -> Result<SeasonOutcome> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_excerpt(&path.display().to_string(), &text)
}

pub fn parse_excerpt(origin: &str, text: &str) -> Result<SeasonOutcome> {
    let rows = read_rows(origin, text)?;
    let width = rows.iter().map(|r| r.driver).max().unwrap_or(0);
    let mut races = Vec::new();
    for ((season, race), mut positions) in group_races(origin, &rows)? {
        positions.resize(width, Position::Unclassified);
        let result = RaceResult::excerpt(positions)
            .map_err(|e| Error::InvalidDataset(format!("{origin}: season {season} race {race}: {e}")))?;
        races.push(result.with_season(Some(season)));
    }
    SeasonOutcome::new(races)
}

/// The historical seasons used to illustrate the two risks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HistoryFixture {
    /// Formula One 2002, top five drivers.
    F1_2002,
    /// 125cc motorcycle Grand Prix 1999, top seven riders.
    Gp125_1999,
    /// MotoGP 2020, top seven riders.
    MotoGp2020,
}

impl HistoryFixture {
    pub const ALL: [HistoryFixture; 3] = [
        HistoryFixture::F1_2002,
        HistoryFixture::Gp125_1999,
        HistoryFixture::MotoGp2020,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HistoryFixture::F1_2002 => "f1-2002",
            HistoryFixture::Gp125_1999 => "gp125-1999",
            HistoryFixture::MotoGp2020 => "motogp-2020",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            HistoryFixture::F1_2002 => "f1_2002.csv",
            HistoryFixture::Gp125_1999 => "gp125_1999.csv",
            HistoryFixture::MotoGp2020 => "motogp_2020.csv",
        }
    }

    /// Driver names in final-standing order.
    pub fn drivers(self) -> &'static [&'static str] {
        match self {
            HistoryFixture::F1_2002 => &[
                "Schumacher, M.",
                "Barrichello",
                "Montoya",
                "Schumacher, R.",
                "Coulthard",
            ],
            HistoryFixture::Gp125_1999 => &[
                "Alzamora",
                "Melandri",
                "Azuma",
                "Locatelli",
                "Ueda",
                "Scalvini",
                "Vincent",
            ],
            HistoryFixture::MotoGp2020 => &[
                "Mir",
                "Morbidelli",
                "Rins",
                "Dovizioso",
                "Espargaró",
                "Viñales",
                "Miller",
            ],
        }
    }

    /// The scoring rule in force that season.
    pub fn rule(self) -> Preset {
        match self {
            HistoryFixture::F1_2002 => Preset::S2,
            HistoryFixture::Gp125_1999 | HistoryFixture::MotoGp2020 => Preset::M1993,
        }
    }

    fn contents(self) -> &'static str {
        match self {
            HistoryFixture::F1_2002 => F1_2002_CSV,
            HistoryFixture::Gp125_1999 => GP125_1999_CSV,
            HistoryFixture::MotoGp2020 => MOTOGP_2020_CSV,
        }
    }

    pub fn season(self) -> SeasonOutcome {
        parse_excerpt(self.file_name(), self.contents()).expect("bundled excerpts are valid")
    }
}

impl FromStr for HistoryFixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        HistoryFixture::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::Unknown {
                kind: "fixture",
                name: s.to_string(),
            })
    }
}

/// One row of the season reference table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub season: u16,
    pub drivers: usize,
    pub races: usize,
    pub clinched: usize,
    pub margin: Points,
    /// False for seasons whose real scoring differs from the plain preset
    /// (another points table, half points, double points, bonus points).
    pub margin_checkable: bool,
}

pub fn builtin_reference() -> Vec<ReferenceRow> {
    parse_reference("reference.csv", REFERENCE_CSV).expect("bundled reference table is valid")
}

pub fn load_reference(path: &Path) -> Result<Vec<ReferenceRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_reference(&path.display().to_string(), &text)
}

pub fn parse_reference(origin: &str, text: &str) -> Result<Vec<ReferenceRow>> {
    #[derive(Deserialize)]
    struct Raw {
        season: u16,
        drivers: usize,
        races: usize,
        clinched: usize,
        margin: String,
        margin_checkable: bool,
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, raw) in reader.deserialize::<Raw>().enumerate() {
        let bad = |message: String| Error::Parse {
            path: origin.to_string(),
            line: i + 2,
            message,
        };
        let raw = raw.map_err(|e| bad(e.to_string()))?;
        let margin = parse_rational(&raw.margin).map_err(|e| bad(e.to_string()))?;
        if raw.clinched > raw.races || margin < Points::zero() {
            return Err(bad(
                "clinched must not exceed races and margin must be non-negative".into()
            ));
        }
        rows.push(ReferenceRow {
            season: raw.season,
            drivers: raw.drivers,
            races: raw.races,
            clinched: raw.clinched,
            margin,
            margin_checkable: raw.margin_checkable,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Match,
    Mismatch,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldCheck {
    pub field: &'static str,
    pub expected: String,
    pub actual: Option<String>,
    pub status: CheckStatus,
}

impl fmt::Display for FieldCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            CheckStatus::Match => write!(f, "{}: {} ok", self.field, self.expected),
            CheckStatus::Mismatch => write!(
                f,
                "{}: expected {}, got {}",
                self.field,
                self.expected,
                self.actual.as_deref().unwrap_or("nothing")
            ),
            CheckStatus::Skipped => write!(f, "{}: skipped (special scoring)", self.field),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeasonCheck {
    pub season: u16,
    pub checks: Vec<FieldCheck>,
}

impl SeasonCheck {
    pub fn mismatches(&self) -> impl Iterator<Item = &FieldCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Mismatch)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub seasons: Vec<SeasonCheck>,
}

impl ValidationReport {
    pub fn mismatch_count(&self) -> usize {
        self.seasons.iter().map(|s| s.mismatches().count()).sum()
    }

    pub fn is_ok(&self) -> bool {
        self.mismatch_count() == 0
    }
}

/// Recomputed characteristics of one source season: drivers with at least
/// one classified finish, races, and under plain S4 the clinch index and the
/// final champion-runner-up margin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeasonSummary {
    pub drivers: usize,
    pub races: usize,
    pub clinched: usize,
    pub margin: Points,
}

pub fn summarize_season(races: &[RaceResult]) -> Result<SeasonSummary> {
    let season = SeasonOutcome::new(races.to_vec())?;
    let drivers = (0..season.driver_count())
        .filter(|&i| {
            let d = DriverId::from_index(i);
            races.iter().any(|r| r.position(d).place().is_some())
        })
        .count();
    let s4 = preset_rule(Preset::S4);
    let rows = evaluate::score_season(&season, &s4, None)?;
    // ties at the top would be decided by lot; any fixed stream will do
    let champ = evaluate::champion(&rows, &mut RngStream::new(0, 0))?;
    let runner_points = rows
        .iter()
        .filter(|r| r.driver != champ)
        .map(|r| r.points)
        .max()
        .unwrap_or_else(Points::zero);
    let clinched = Evaluator::new(&s4)?.clinch_index(&season, champ)?;
    Ok(SeasonSummary {
        drivers,
        races: races.len(),
        clinched,
        margin: rows[champ.index()].points - runner_points,
    })
}

pub fn validate_against_reference(dataset: &Dataset, reference: &[ReferenceRow]) -> ValidationReport {
    let seasons = reference
        .iter()
        .map(|row| {
            let races = dataset.season_races(row.season);
            let summary = if races.is_empty() {
                None
            } else {
                summarize_season(&races).ok()
            };
            let check = |field: &'static str, expected: String, actual: Option<String>, enabled: bool| {
                let status = if !enabled {
                    CheckStatus::Skipped
                } else if actual.as_ref() == Some(&expected) {
                    CheckStatus::Match
                } else {
                    CheckStatus::Mismatch
                };
                FieldCheck {
                    field,
                    expected,
                    actual,
                    status,
                }
            };
            let s = summary.as_ref();
            SeasonCheck {
                season: row.season,
                checks: vec![
                    check(
                        "drivers",
                        row.drivers.to_string(),
                        s.map(|s| s.drivers.to_string()),
                        true,
                    ),
                    check("races", row.races.to_string(), s.map(|s| s.races.to_string()), true),
                    check(
                        "clinched",
                        row.clinched.to_string(),
                        s.map(|s| s.clinched.to_string()),
                        row.margin_checkable,
                    ),
                    check(
                        "margin",
                        format_rational(&row.margin),
                        s.map(|s| format_rational(&s.margin)),
                        row.margin_checkable,
                    ),
                ],
            }
        })
        .collect();
    ValidationReport { seasons }
}

/// Directory holding the bundled CSV files in the source tree.
pub fn source_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}
