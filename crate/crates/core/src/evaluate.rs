//! Standings, champion, clinch detection and per-season metrics.
//!
//! Ranking uses points first, race wins second and a drawing of lots last.
//! Further countback criteria (second places and so on) are not applied.

use num_integer::Integer;
use num_traits::Zero;

use crate::domain::{DriverId, Points, Position, ScoringRule, SeasonMetrics, SeasonOutcome, StandingsRow};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scoring::points_for;

/// Totals over the first `up_to` races (all races when `None`), one row per
/// driver in driver order.
pub fn score_season(season: &SeasonOutcome, rule: &ScoringRule, up_to: Option<usize>) -> Result<Vec<StandingsRow>> {
    let m = checkpoint(season, up_to)?;
    let mut rows: Vec<StandingsRow> = (0..season.driver_count())
        .map(|i| StandingsRow {
            driver: DriverId::from_index(i),
            points: Points::zero(),
            wins: 0,
        })
        .collect();
    for race in &season.races()[..m] {
        for (row, &pos) in rows.iter_mut().zip(race.positions()) {
            row.points += points_for(rule, pos);
            row.wins += u32::from(pos.is_win());
        }
    }
    Ok(rows)
}

fn checkpoint(season: &SeasonOutcome, up_to: Option<usize>) -> Result<usize> {
    let n = season.len();
    match up_to {
        None => Ok(n),
        Some(m) if (1..=n).contains(&m) => Ok(m),
        Some(m) => Err(Error::OutOfRange(format!("checkpoint {m} outside 1..={n}"))),
    }
}

/// Rows sorted as a championship table: points, then wins, then driver.
pub fn ranked(mut rows: Vec<StandingsRow>) -> Vec<StandingsRow> {
    rows.sort_by(|a, b| {
        b.points
            .cmp(&a.points)
            .then(b.wins.cmp(&a.wins))
            .then(a.driver.cmp(&b.driver))
    });
    rows
}

/// The driver maximizing `(points, wins)`; remaining ties are drawn by lot.
/// The stream is only consumed when a lot is needed.
pub fn champion(standings: &[StandingsRow], rng: &mut RngStream) -> Result<DriverId> {
    let best = standings
        .iter()
        .map(|r| (r.points, r.wins))
        .max()
        .ok_or_else(|| Error::InvalidSeason("no drivers in the standings".into()))?;
    let tied: Vec<DriverId> = standings
        .iter()
        .filter(|r| (r.points, r.wins) == best)
        .map(|r| r.driver)
        .collect();
    Ok(draw_lot(&tied, rng))
}

fn draw_lot<T: Copy>(tied: &[T], rng: &mut RngStream) -> T {
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.below(tied.len())]
    }
}

/// Number of races after which `champ` had secured the title.
pub fn clinch_index(season: &SeasonOutcome, rule: &ScoringRule, champ: DriverId) -> Result<usize> {
    Evaluator::new(rule)?.clinch_index(season, champ)
}

pub fn season_metrics(season: &SeasonOutcome, rule: &ScoringRule, rng: &mut RngStream) -> Result<SeasonMetrics> {
    Evaluator::new(rule)?.metrics(season, rng)
}

/// A rule compiled to integer scores.
///
/// Every score is multiplied by the least common multiple of the
/// denominators, which preserves every comparison in the clinch test while
/// keeping the inner loops on plain integers.
#[derive(Clone, Debug)]
pub struct Evaluator {
    scores: Vec<i128>,
    first: i128,
}

impl Evaluator {
    pub fn new(rule: &ScoringRule) -> Result<Self> {
        let too_large = || Error::InvalidRule(format!("scores of {} are too large to evaluate exactly", rule.name()));
        let mut lcm: i128 = 1;
        for s in rule.scores() {
            lcm = lcm.lcm(s.denom());
            if lcm <= 0 || lcm > i128::MAX >> 40 {
                return Err(too_large());
            }
        }
        let scores = rule
            .scores()
            .iter()
            .map(|s| s.numer().checked_mul(lcm / s.denom()))
            .collect::<Option<Vec<i128>>>()
            .ok_or_else(too_large)?;
        // leave headroom for summing over a long season
        if scores[0] > i128::MAX >> 24 {
            return Err(too_large());
        }
        Ok(Evaluator {
            first: scores[0],
            scores,
        })
    }

    fn score(&self, pos: Position) -> i128 {
        match pos {
            Position::Classified(p) => self.scores.get(p as usize - 1).copied().unwrap_or(0),
            Position::Unclassified => 0,
        }
    }

    fn add_race(&self, race: &crate::domain::RaceResult, points: &mut [i128], wins: &mut [u32]) {
        for (i, &pos) in race.positions().iter().enumerate() {
            points[i] += self.score(pos);
            wins[i] += u32::from(pos.is_win());
        }
    }

    /// Scaled totals and wins after the whole season.
    pub fn totals(&self, season: &SeasonOutcome) -> (Vec<i128>, Vec<u32>) {
        let d = season.driver_count();
        let mut points = vec![0i128; d];
        let mut wins = vec![0u32; d];
        for race in season.races() {
            self.add_race(race, &mut points, &mut wins);
        }
        (points, wins)
    }

    pub fn champion(&self, season: &SeasonOutcome, rng: &mut RngStream) -> DriverId {
        let (points, wins) = self.totals(season);
        champion_of(&points, &wins, rng)
    }

    pub fn clinch_index(&self, season: &SeasonOutcome, champ: DriverId) -> Result<usize> {
        let c = champ.index();
        let d = season.driver_count();
        if c >= d {
            return Err(Error::NotChampion(champ.rank()));
        }
        let (final_points, final_wins) = self.totals(season);
        let best = (0..d).map(|i| (final_points[i], final_wins[i])).max();
        if best != Some((final_points[c], final_wins[c])) {
            return Err(Error::NotChampion(champ.rank()));
        }
        Ok(self.clinch_unchecked(season, c))
    }

    fn clinch_unchecked(&self, season: &SeasonOutcome, c: usize) -> usize {
        let n = season.len();
        let d = season.driver_count();
        let mut points = vec![0i128; d];
        let mut wins = vec![0u32; d];
        for (m, race) in season.races().iter().enumerate().map(|(i, r)| (i + 1, r)) {
            self.add_race(race, &mut points, &mut wins);
            let (runner_points, runner_wins) = (0..d)
                .filter(|&i| i != c)
                .map(|i| (points[i], wins[i]))
                .max()
                .unwrap_or((0, 0));
            let remaining = (n - m) as i128;
            let reachable = remaining * self.first;
            let lead = points[c] - runner_points;
            let win_gap = i128::from(wins[c]) - i128::from(runner_wins);
            let open = lead < reachable || (lead == reachable && win_gap <= remaining);
            if !open {
                return m;
            }
        }
        n
    }

    pub fn metrics(&self, season: &SeasonOutcome, rng: &mut RngStream) -> Result<SeasonMetrics> {
        let (points, wins) = self.totals(season);
        let champ = champion_of(&points, &wins, rng);
        let m = self.clinch_unchecked(season, champ.index());
        SeasonMetrics::new(champ, m, season.len(), wins[champ.index()] > 0)
    }
}

fn champion_of(points: &[i128], wins: &[u32], rng: &mut RngStream) -> DriverId {
    let best = (0..points.len()).map(|i| (points[i], wins[i])).max().unwrap_or((0, 0));
    let tied: Vec<usize> = (0..points.len()).filter(|&i| (points[i], wins[i]) == best).collect();
    DriverId::from_index(draw_lot(&tied, rng))
}
