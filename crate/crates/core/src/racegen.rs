//! Synthetic races and seasons.
//!
//! Method 1 resamples whole historical races. Method 2 recombines two
//! historical races driver by driver (uniform crossover) and re-ranks the
//! resulting provisional spots, breaking ties at random.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Points, Position, RaceResult, ScoringRule, SeasonOutcome};
use crate::error::{Error, Result};
use crate::evaluate::Evaluator;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    M1,
    M2,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "M1" | "m1" => Ok(Method::M1),
            "2" | "M2" | "m2" => Ok(Method::M2),
            other => Err(Error::Unknown {
                kind: "method",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::M1 => "1",
            Method::M2 => "2",
        })
    }
}

/// How Method 2 picks its two source races.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairDraw {
    /// Two different races (a one-race pool pairs the race with itself).
    #[default]
    Distinct,
    /// Two independent uniform draws, so both may be the same race.
    WithReplacement,
}

impl FromStr for PairDraw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "distinct" => Ok(PairDraw::Distinct),
            "with-replacement" | "replacement" => Ok(PairDraw::WithReplacement),
            other => Err(Error::Unknown {
                kind: "pair draw",
                name: other.to_string(),
            }),
        }
    }
}

pub fn sample_race_m1(dataset: &Dataset, rng: &mut RngStream) -> RaceResult {
    dataset.races()[rng.below(dataset.races().len())].clone()
}

fn draw_pair(k: usize, pair: PairDraw, rng: &mut RngStream) -> (usize, usize) {
    let x = rng.below(k);
    let y = match pair {
        PairDraw::WithReplacement => rng.below(k),
        PairDraw::Distinct if k >= 2 => {
            let j = rng.below(k - 1);
            if j >= x {
                j + 1
            } else {
                j
            }
        }
        PairDraw::Distinct => x,
    };
    (x, y)
}

/// Sort key of a provisional spot: unclassified after every place.
fn spot_key(p: Position) -> u32 {
    p.place().map_or(u32::MAX, u32::from)
}

pub fn sample_race_m2(dataset: &Dataset, pair: PairDraw, rng: &mut RngStream) -> RaceResult {
    let races = dataset.races();
    let (x, y) = draw_pair(races.len(), pair, rng);
    let (a, b) = (races[x].positions(), races[y].positions());
    let keys: Vec<u32> = (0..dataset.driver_count())
        .map(|i| spot_key(if rng.coin() { a[i] } else { b[i] }))
        .collect();
    // a uniform shuffle followed by a stable sort breaks every tie uniformly
    let mut order: Vec<usize> = (0..keys.len()).collect();
    rng.shuffle(&mut order);
    order.sort_by_key(|&i| keys[i]);
    let mut positions = vec![Position::Unclassified; keys.len()];
    for (place, &driver) in order.iter().enumerate() {
        positions[driver] = Position::Classified(place as u16 + 1);
    }
    RaceResult::from_positions_unchecked(positions)
}

pub fn sample_race(dataset: &Dataset, method: Method, pair: PairDraw, rng: &mut RngStream) -> RaceResult {
    match method {
        Method::M1 => sample_race_m1(dataset, rng),
        Method::M2 => sample_race_m2(dataset, pair, rng),
    }
}

/// `n` independent races. Method 2 uses the default [`PairDraw`].
pub fn generate_season(dataset: &Dataset, method: Method, n: usize, rng: &mut RngStream) -> Result<SeasonOutcome> {
    generate_season_with(dataset, method, PairDraw::default(), n, rng)
}

pub fn generate_season_with(
    dataset: &Dataset,
    method: Method,
    pair: PairDraw,
    n: usize,
    rng: &mut RngStream,
) -> Result<SeasonOutcome> {
    if n == 0 {
        return Err(Error::OutOfRange("a season needs at least one race".into()));
    }
    let races = (0..n).map(|_| sample_race(dataset, method, pair, rng)).collect();
    Ok(SeasonOutcome::from_races_unchecked(races))
}

/// Turns every race win of the reference-rule champion into a second place,
/// promoting that race's runner-up. Races without a second-placed driver are
/// left alone.
pub fn risk_averse_transform(
    season: &SeasonOutcome,
    reference_rule: &ScoringRule,
    rng: &mut RngStream,
) -> Result<SeasonOutcome> {
    let champ = Evaluator::new(reference_rule)?.champion(season, rng);
    Ok(transform_for(season, champ))
}

pub(crate) fn transform_for(season: &SeasonOutcome, champ: crate::domain::DriverId) -> SeasonOutcome {
    let mut out = season.clone();
    for race in out.races_mut() {
        if race.position(champ).is_win() {
            if let Some(second) = race.driver_at(2) {
                race.swap_drivers(champ, second);
            }
        }
    }
    out
}

pub const ENUMERATION_MAX_DRIVERS: usize = 6;
pub const ENUMERATION_MAX_RACES: usize = 4;

/// Exact Method 2 distribution, by enumerating every source pair, every coin
/// outcome and every tie-break order.
pub fn enumerate_m2_distribution(dataset: &Dataset, pair: PairDraw) -> Result<BTreeMap<RaceResult, Points>> {
    let d = dataset.driver_count();
    let k = dataset.races().len();
    if d > ENUMERATION_MAX_DRIVERS || k > ENUMERATION_MAX_RACES {
        return Err(Error::TooLarge(format!(
            "{d} drivers and {k} races (limits {ENUMERATION_MAX_DRIVERS} and {ENUMERATION_MAX_RACES})"
        )));
    }
    let mut pairs = Vec::new();
    match pair {
        PairDraw::WithReplacement => {
            let w = Points::new(1, (k * k) as i128);
            for x in 0..k {
                for y in 0..k {
                    pairs.push((x, y, w));
                }
            }
        }
        PairDraw::Distinct if k >= 2 => {
            let w = Points::new(1, (k * (k - 1)) as i128);
            for x in 0..k {
                for y in (0..k).filter(|&y| y != x) {
                    pairs.push((x, y, w));
                }
            }
        }
        PairDraw::Distinct => pairs.push((0, 0, Points::one())),
    }

    let coin_weight = Points::new(1, 1i128 << d);
    let mut dist: BTreeMap<RaceResult, Points> = BTreeMap::new();
    for (x, y, pair_weight) in pairs {
        let (a, b) = (dataset.races()[x].positions(), dataset.races()[y].positions());
        for mask in 0u32..(1 << d) {
            let keys: Vec<u32> = (0..d)
                .map(|i| spot_key(if mask >> i & 1 == 1 { a[i] } else { b[i] }))
                .collect();
            let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for (i, &key) in keys.iter().enumerate() {
                groups.entry(key).or_default().push(i);
            }
            let groups: Vec<Vec<usize>> = groups.into_values().collect();
            let orders: usize = groups.iter().map(|g| factorial(g.len())).product();
            let weight = pair_weight * coin_weight / Points::from_integer(orders as i128);
            for order in tie_orders(&groups) {
                let mut positions = vec![Position::Unclassified; d];
                for (place, &driver) in order.iter().enumerate() {
                    positions[driver] = Position::Classified(place as u16 + 1);
                }
                *dist
                    .entry(RaceResult::from_positions_unchecked(positions))
                    .or_insert_with(Points::zero) += weight;
            }
        }
    }
    Ok(dist)
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Every finishing order consistent with the groups (groups in order, any
/// permutation inside a group).
fn tie_orders(groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for group in groups {
        let perms = permutations(group);
        out = out
            .iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(p);
                    v
                })
            })
            .collect();
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}
