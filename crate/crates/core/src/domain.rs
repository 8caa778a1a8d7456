//! Value types shared by every module.
//!
//! All constructors validate their invariants, so a value that exists is a
//! value that is well formed. Everything here is immutable after construction
//! and can be shared freely between threads.

use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact point totals. Half points and geometric scores stay exact, so ties
/// are detected without floating-point noise.
pub type Points = Ratio<i128>;

/// A driver, identified by their final standing (1-based) in the source
/// season. Standing 1 is the champion of that season.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct DriverId(u16);

impl DriverId {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 || rank > u16::MAX as usize {
            return Err(Error::OutOfRange(format!("driver rank {rank} out of range")));
        }
        Ok(DriverId(rank as u16))
    }

    pub(crate) fn from_index(index: usize) -> Self {
        DriverId(index as u16 + 1)
    }

    pub fn rank(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl TryFrom<u16> for DriverId {
    type Error = Error;

    fn try_from(v: u16) -> Result<Self> {
        DriverId::new(v as usize)
    }
}

impl From<DriverId> for u16 {
    fn from(d: DriverId) -> u16 {
        d.0
    }
}

impl fmt::Display for DriverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A finishing position in one race. `Unclassified` covers retirements,
/// disqualifications and, in the bundled pools, finishes outside the top ten.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Option<u16>", into = "Option<u16>")]
pub enum Position {
    Classified(u16),
    Unclassified,
}

impl Position {
    pub fn classified(place: u16) -> Result<Self> {
        if place == 0 {
            return Err(Error::InvalidRace("places start at 1".into()));
        }
        Ok(Position::Classified(place))
    }

    pub fn place(self) -> Option<u16> {
        match self {
            Position::Classified(p) => Some(p),
            Position::Unclassified => None,
        }
    }

    pub fn is_win(self) -> bool {
        self == Position::Classified(1)
    }
}

impl TryFrom<Option<u16>> for Position {
    type Error = Error;

    fn try_from(v: Option<u16>) -> Result<Self> {
        match v {
            Some(p) => Position::classified(p),
            None => Ok(Position::Unclassified),
        }
    }
}

impl From<Position> for Option<u16> {
    fn from(p: Position) -> Self {
        p.place()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Classified(p) => write!(f, "{p}"),
            Position::Unclassified => f.write_str("DNF"),
        }
    }
}

/// The outcome of one race: the position of every driver, indexed by
/// [`DriverId`].
///
/// Complete results (everything that is sampled from) have pairwise distinct
/// classified places forming `1..=m` with `m >= 1`. Excerpts of historical
/// tables, which list only a handful of drivers, only need distinct places;
/// build those with [`RaceResult::excerpt`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RaceResultRepr")]
pub struct RaceResult {
    positions: Vec<Position>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    season: Option<u16>,
}

#[derive(Deserialize)]
struct RaceResultRepr {
    positions: Vec<Position>,
    #[serde(default)]
    season: Option<u16>,
}

impl TryFrom<RaceResultRepr> for RaceResult {
    type Error = Error;

    fn try_from(r: RaceResultRepr) -> Result<Self> {
        Ok(RaceResult::excerpt(r.positions)?.with_season(r.season))
    }
}

impl RaceResult {
    /// A complete race result; rejects duplicate, gapped or winnerless
    /// classified places.
    pub fn new(positions: Vec<Position>) -> Result<Self> {
        let race = RaceResult::excerpt(positions)?;
        let classified = race.classified_count();
        if classified == 0 {
            return Err(Error::InvalidRace("nobody is classified".into()));
        }
        // distinct places, so max == count iff they are exactly 1..=count
        let max = race.positions.iter().filter_map(|p| p.place()).max();
        if max != Some(classified as u16) {
            return Err(Error::InvalidRace(format!(
                "classified places are not contiguous: {} drivers classified but highest place is {}",
                classified,
                max.unwrap_or(0)
            )));
        }
        Ok(race)
    }

    /// A partial result, such as a few rows copied out of a season table.
    /// Only distinctness of classified places is enforced.
    pub fn excerpt(positions: Vec<Position>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidRace("no drivers".into()));
        }
        let mut places: Vec<u16> = positions.iter().filter_map(|p| p.place()).collect();
        if places.contains(&0) {
            return Err(Error::InvalidRace("places start at 1".into()));
        }
        places.sort_unstable();
        if let Some(w) = places.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidRace(format!("place {} is held twice", w[0])));
        }
        Ok(RaceResult {
            positions,
            season: None,
        })
    }

    /// Complete result from a vector of places, every driver classified.
    /// `[2, 3, 1]` means the first driver finished second, and so on.
    pub fn from_places(places: &[u16]) -> Result<Self> {
        let positions = places
            .iter()
            .map(|&p| Position::classified(p))
            .collect::<Result<Vec<_>>>()?;
        RaceResult::new(positions)
    }

    pub fn with_season(mut self, season: Option<u16>) -> Self {
        self.season = season;
        self
    }

    pub fn season(&self) -> Option<u16> {
        self.season
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn driver_count(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, driver: DriverId) -> Position {
        self.positions
            .get(driver.index())
            .copied()
            .unwrap_or(Position::Unclassified)
    }

    pub fn classified_count(&self) -> usize {
        self.positions.iter().filter(|p| p.place().is_some()).count()
    }

    pub fn driver_at(&self, place: u16) -> Option<DriverId> {
        self.positions
            .iter()
            .position(|&p| p == Position::Classified(place))
            .map(DriverId::from_index)
    }

    pub fn winner(&self) -> Option<DriverId> {
        self.driver_at(1)
    }

    /// Places as plain integers, 0 for unclassified.
    pub fn places(&self) -> Vec<u16> {
        self.positions.iter().map(|p| p.place().unwrap_or(0)).collect()
    }

    /// Extends the driver universe to `count`, new drivers unclassified.
    pub fn padded(&self, count: usize) -> RaceResult {
        let mut positions = self.positions.clone();
        if positions.len() < count {
            positions.resize(count, Position::Unclassified);
        }
        RaceResult {
            positions,
            season: self.season,
        }
    }

    pub(crate) fn swap_drivers(&mut self, a: DriverId, b: DriverId) {
        self.positions.swap(a.index(), b.index());
    }

    pub(crate) fn from_positions_unchecked(positions: Vec<Position>) -> Self {
        RaceResult {
            positions,
            season: None,
        }
    }
}

impl fmt::Display for RaceResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.positions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

/// An ordered list of races over a common driver universe.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SeasonRepr")]
pub struct SeasonOutcome {
    races: Vec<RaceResult>,
}

#[derive(Deserialize)]
struct SeasonRepr {
    races: Vec<RaceResult>,
}

impl TryFrom<SeasonRepr> for SeasonOutcome {
    type Error = Error;

    fn try_from(r: SeasonRepr) -> Result<Self> {
        SeasonOutcome::new(r.races)
    }
}

impl SeasonOutcome {
    pub fn new(races: Vec<RaceResult>) -> Result<Self> {
        let first = races
            .first()
            .ok_or_else(|| Error::InvalidSeason("a season needs at least one race".into()))?;
        let drivers = first.driver_count();
        if let Some(i) = races.iter().position(|r| r.driver_count() != drivers) {
            return Err(Error::InvalidSeason(format!(
                "race {} has {} drivers, race 1 has {}",
                i + 1,
                races[i].driver_count(),
                drivers
            )));
        }
        Ok(SeasonOutcome { races })
    }

    pub fn races(&self) -> &[RaceResult] {
        &self.races
    }

    /// Number of races, `n`.
    pub fn len(&self) -> usize {
        self.races.len()
    }

    pub fn is_empty(&self) -> bool {
        self.races.is_empty()
    }

    pub fn driver_count(&self) -> usize {
        self.races[0].driver_count()
    }

    pub(crate) fn races_mut(&mut self) -> &mut [RaceResult] {
        &mut self.races
    }

    pub(crate) fn from_races_unchecked(races: Vec<RaceResult>) -> Self {
        SeasonOutcome { races }
    }
}

/// A pool of historical races to resample from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    races: Vec<RaceResult>,
    driver_count: usize,
    seasons: Vec<u16>,
}

impl Dataset {
    /// Pads every race to the largest driver universe. Drivers missing from
    /// a season are unclassified in its races.
    pub fn new(name: impl Into<String>, races: Vec<RaceResult>, seasons: Vec<u16>) -> Result<Self> {
        Dataset::with_driver_count(name, races, seasons, None)
    }

    pub fn with_driver_count(
        name: impl Into<String>,
        races: Vec<RaceResult>,
        seasons: Vec<u16>,
        driver_count: Option<usize>,
    ) -> Result<Self> {
        if races.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let widest = races.iter().map(RaceResult::driver_count).max().unwrap_or(0);
        let driver_count = match driver_count {
            Some(n) if n < widest => {
                return Err(Error::InvalidDataset(format!(
                    "driver count {n} is smaller than the {widest} drivers present"
                )))
            }
            Some(n) => n,
            None => widest,
        };
        let races = races.iter().map(|r| r.padded(driver_count)).collect();
        Ok(Dataset {
            name: name.into(),
            races,
            driver_count,
            seasons,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn races(&self) -> &[RaceResult] {
        &self.races
    }

    pub fn driver_count(&self) -> usize {
        self.driver_count
    }

    pub fn seasons(&self) -> &[u16] {
        &self.seasons
    }

    /// The races of one source season, in calendar order.
    pub fn season_races(&self, season: u16) -> Vec<RaceResult> {
        self.races
            .iter()
            .filter(|r| r.season() == Some(season))
            .cloned()
            .collect()
    }
}

/// A named, non-increasing score vector over finishing places. Places past
/// the end of the vector score nothing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RuleRepr")]
pub struct ScoringRule {
    name: String,
    scores: Vec<Points>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    geometric_p: Option<Points>,
}

#[derive(Deserialize)]
struct RuleRepr {
    name: String,
    scores: Vec<Points>,
    #[serde(default)]
    geometric_p: Option<Points>,
}

impl TryFrom<RuleRepr> for ScoringRule {
    type Error = Error;

    fn try_from(r: RuleRepr) -> Result<Self> {
        let rule = ScoringRule::new(r.name, r.scores)?;
        Ok(match r.geometric_p {
            Some(p) => rule.with_geometric_p(p),
            None => rule,
        })
    }
}

impl ScoringRule {
    pub fn new(name: impl Into<String>, scores: Vec<Points>) -> Result<Self> {
        let first = scores
            .first()
            .ok_or_else(|| Error::InvalidRule("no scored places".into()))?;
        if !first.is_positive() {
            return Err(Error::InvalidRule("the winner must score more than zero".into()));
        }
        if scores.iter().any(|s| s.is_negative()) {
            return Err(Error::InvalidRule("scores must be non-negative".into()));
        }
        if let Some(j) = scores.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::InvalidRule(format!(
                "scores must be non-increasing (place {} scores {} but place {} scores {})",
                j + 1,
                scores[j],
                j + 2,
                scores[j + 1]
            )));
        }
        Ok(ScoringRule {
            name: name.into(),
            scores,
            geometric_p: None,
        })
    }

    pub fn from_integers(name: impl Into<String>, scores: &[i64]) -> Result<Self> {
        ScoringRule::new(name, scores.iter().map(|&s| Points::from_integer(s as i128)).collect())
    }

    pub(crate) fn with_geometric_p(mut self, p: Points) -> Self {
        self.geometric_p = Some(p);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scores(&self) -> &[Points] {
        &self.scores
    }

    /// Number of scored places, `L`.
    pub fn places(&self) -> usize {
        self.scores.len()
    }

    pub fn geometric_p(&self) -> Option<Points> {
        self.geometric_p
    }

    pub fn first_place(&self) -> Points {
        self.scores[0]
    }

    pub fn score(&self, place: u16) -> Points {
        match place {
            0 => Points::zero(),
            p => self.scores.get(p as usize - 1).copied().unwrap_or_else(Points::zero),
        }
    }

    pub fn scores_f64(&self) -> Vec<f64> {
        self.scores.iter().map(ratio_to_f64).collect()
    }
}

pub(crate) fn ratio_to_f64(r: &Points) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// One line of a standings table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandingsRow {
    pub driver: DriverId,
    pub points: Points,
    pub wins: u32,
}

/// What one season looks like from the point of view of the two risks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonMetrics {
    pub champion: DriverId,
    /// Number of races after which the title was first secured.
    pub clinch_index: usize,
    /// Races held after the title was secured.
    pub uninteresting_count: usize,
    pub champion_won_a_race: bool,
}

impl SeasonMetrics {
    pub fn new(champion: DriverId, clinch_index: usize, races: usize, won: bool) -> Result<Self> {
        if clinch_index == 0 || clinch_index > races {
            return Err(Error::OutOfRange(format!(
                "clinch index {clinch_index} outside 1..={races}"
            )));
        }
        Ok(SeasonMetrics {
            champion,
            clinch_index,
            uninteresting_count: races - clinch_index,
            champion_won_a_race: won,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: u16) -> Position {
        Position::Classified(p)
    }

    #[test]
    fn race_rejects_duplicate_places() {
        let err = RaceResult::new(vec![c(1), c(2), c(2)]).unwrap_err();
        assert!(err.to_string().contains("held twice"), "{err}");
    }

    #[test]
    fn race_rejects_gaps() {
        let err = RaceResult::new(vec![c(1), Position::Unclassified, c(3)]).unwrap_err();
        assert!(err.to_string().contains("contiguous"), "{err}");
    }

    #[test]
    fn race_needs_a_winner() {
        assert!(RaceResult::new(vec![Position::Unclassified; 3]).is_err());
        assert!(RaceResult::new(vec![c(2), c(3)]).is_err());
    }

    #[test]
    fn excerpt_allows_gaps_but_not_duplicates() {
        assert!(RaceResult::excerpt(vec![c(2), c(7), Position::Unclassified]).is_ok());
        assert!(RaceResult::excerpt(vec![c(7), c(7)]).is_err());
    }

    #[test]
    fn race_lookup() {
        let r = RaceResult::from_places(&[2, 3, 1]).unwrap();
        assert_eq!(r.winner(), Some(DriverId::new(3).unwrap()));
        assert_eq!(r.driver_at(2), Some(DriverId::new(1).unwrap()));
        assert_eq!(r.position(DriverId::new(7).unwrap()), Position::Unclassified);
        assert_eq!(r.to_string(), "[2, 3, 1]");
        assert_eq!(r.padded(4).places(), vec![2, 3, 1, 0]);
    }

    #[test]
    fn season_requires_common_universe() {
        let a = RaceResult::from_places(&[1, 2]).unwrap();
        let b = RaceResult::from_places(&[1, 2, 3]).unwrap();
        assert!(SeasonOutcome::new(vec![a.clone(), b]).is_err());
        assert!(SeasonOutcome::new(vec![]).is_err());
        assert_eq!(SeasonOutcome::new(vec![a.clone(), a]).unwrap().len(), 2);
    }

    #[test]
    fn rule_must_be_non_increasing() {
        let err = ScoringRule::from_integers("up", &[1, 2, 3]).unwrap_err();
        assert!(err.to_string().contains("non-increasing"), "{err}");
        assert!(ScoringRule::from_integers("zero", &[0, 0]).is_err());
        assert!(ScoringRule::from_integers("flat", &[1, 1, 0]).is_ok());
    }

    #[test]
    fn rule_scores_zero_past_last_place() {
        let r = ScoringRule::from_integers("x", &[3, 1]).unwrap();
        assert_eq!(r.score(1), Points::from_integer(3));
        assert_eq!(r.score(3), Points::zero());
    }

    #[test]
    fn dataset_pads_to_widest_universe() {
        let a = RaceResult::from_places(&[1, 2]).unwrap();
        let b = RaceResult::from_places(&[2, 1, 3]).unwrap();
        let ds = Dataset::new("t", vec![a, b], vec![]).unwrap();
        assert_eq!(ds.driver_count(), 3);
        assert_eq!(ds.races()[0].places(), vec![1, 2, 0]);
        assert!(matches!(Dataset::new("t", vec![], vec![]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn metrics_invariants() {
        let d = DriverId::new(1).unwrap();
        let m = SeasonMetrics::new(d, 11, 17, true).unwrap();
        assert_eq!(m.uninteresting_count, 6);
        assert!(SeasonMetrics::new(d, 0, 17, true).is_err());
        assert!(SeasonMetrics::new(d, 18, 17, true).is_err());
    }
}
