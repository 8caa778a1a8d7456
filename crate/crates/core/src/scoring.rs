//! Scoring rules: historical presets, the geometric family and custom
//! vectors, plus the rule-spec grammar used on the command line.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, ToPrimitive, Zero};

use crate::domain::{Points, Position, ScoringRule};
use crate::error::{Error, Result};

/// The fixed rules shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Formula One 1991-2002 style, 9 points for a win.
    S1,
    /// Formula One 1991-2002, 10 points for a win.
    S2,
    /// Formula One 2003-2009.
    S3,
    /// Formula One since 2010.
    S4,
    /// Motorcycle Grand Prix since 1993, fifteen scoring places.
    M1993,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::S1, Preset::S2, Preset::S3, Preset::S4, Preset::M1993];

    pub fn name(self) -> &'static str {
        match self {
            Preset::S1 => "S1",
            Preset::S2 => "S2",
            Preset::S3 => "S3",
            Preset::S4 => "S4",
            Preset::M1993 => "M1993",
        }
    }

    fn scores(self) -> &'static [i64] {
        match self {
            Preset::S1 => &[9, 6, 4, 3, 2, 1, 0, 0, 0, 0],
            Preset::S2 => &[10, 6, 4, 3, 2, 1, 0, 0, 0, 0],
            Preset::S3 => &[10, 8, 6, 5, 4, 3, 2, 1, 0, 0],
            Preset::S4 => &[25, 18, 15, 12, 10, 8, 6, 4, 2, 1],
            Preset::M1993 => &[25, 20, 16, 13, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1],
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "preset rule",
                name: s.to_string(),
            })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn preset_rule(preset: Preset) -> ScoringRule {
    ScoringRule::from_integers(preset.name(), preset.scores()).expect("preset vectors are valid")
}

/// `s_j = (p^(places+1-j) - 1) / (p - 1)`, or `places + 1 - j` when `p = 1`.
///
/// Computed exactly when the scores fit in 128-bit rationals. A `p` with many
/// decimals raised to a high power does not fit (`1.000001` at ten places
/// needs a denominator of 10^54); such scores are computed with big rationals
/// and rounded to multiples of 10^-12. Fails if `p <= 0` or if even the
/// rounded scores are out of range.
pub fn geometric_rule(p: Points, places: usize) -> Result<ScoringRule> {
    if p <= Points::zero() {
        return Err(Error::InvalidRule(format!(
            "geometric parameter must be positive, got {p}"
        )));
    }
    if places == 0 {
        return Err(Error::InvalidRule("a rule needs at least one scored place".into()));
    }
    let mut scores = Vec::with_capacity(places);
    if p.is_one() {
        for j in 1..=places {
            scores.push(Points::from_integer((places + 1 - j) as i128));
        }
    } else if let Some(exact) = geometric_exact(p, places) {
        scores = exact;
    } else {
        scores = geometric_rounded(p, places)
            .ok_or_else(|| Error::InvalidRule(format!("geometric scores for p = {p} are too large to represent")))?;
    }
    Ok(ScoringRule::new(format!("G:{}", format_rational(&p)), scores)?.with_geometric_p(p))
}

const ROUNDING_GRID: i128 = 1_000_000_000_000;

// s_L = 1 and s_j = s_(j+1) + p^(L-j), built from the last place upwards
fn geometric_exact(p: Points, places: usize) -> Option<Vec<Points>> {
    let mut power = Points::one();
    let mut s = Points::one();
    let mut scores = vec![s];
    for _ in 1..places {
        power = power.checked_mul(&p)?;
        s = s.checked_add(&power)?;
        scores.push(s);
    }
    scores.reverse();
    Some(scores)
}

fn geometric_rounded(p: Points, places: usize) -> Option<Vec<Points>> {
    let p = BigRational::new((*p.numer()).into(), (*p.denom()).into());
    let grid = BigRational::from_integer(ROUNDING_GRID.into());
    let mut power = BigRational::one();
    let mut s = BigRational::one();
    let mut scores = vec![Points::one()];
    for _ in 1..places {
        power *= &p;
        s += &power;
        let n = (&s * &grid).round().to_integer().to_i128()?;
        scores.push(Points::new(n, ROUNDING_GRID));
    }
    scores.reverse();
    Some(scores)
}

/// The closed form of [`geometric_rule`], used to cross-check the recurrence.
pub fn geometric_score(p: Points, places: usize, j: usize) -> Option<Points> {
    if p.is_one() {
        return Some(Points::from_integer((places + 1 - j) as i128));
    }
    let mut power = Points::one();
    for _ in 0..(places + 1 - j) {
        power = power.checked_mul(&p)?;
    }
    power.checked_sub(&Points::one())?.checked_div(&(p - Points::one()))
}

pub fn points_for(rule: &ScoringRule, position: Position) -> Points {
    match position {
        Position::Classified(place) => rule.score(place),
        Position::Unclassified => Points::zero(),
    }
}

/// Scores rescaled so that a win is worth 100.
pub fn normalize_to_100(rule: &ScoringRule) -> Vec<Points> {
    let first = rule.first_place();
    let hundred = Points::from_integer(100);
    rule.scores().iter().map(|s| hundred * s / first).collect()
}

/// Parses a decimal (`1.05`), integer (`3`) or fraction (`21/20`) into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<Points> {
    let s = s.trim();
    let bad = || Error::InvalidRule(format!("`{s}` is not a number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Points::new(n, d));
    }
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 30
    {
        return Err(bad());
    }
    let numer: i128 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let denom = 10i128.pow(frac.len() as u32);
    let value = Points::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Shortest decimal rendering when one exists, `n/d` otherwise.
pub fn format_rational(r: &Points) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    let scaled = match 10i128
        .checked_pow(digits)
        .and_then(|t| r.checked_mul(&Points::from_integer(t)))
    {
        Some(v) => v.to_integer(),
        None => return format!("{}/{}", r.numer(), r.denom()),
    };
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs().to_string();
    let width = digits as usize + 1;
    let padded = format!("{abs:0>width$}");
    let (int, frac) = padded.split_at(padded.len() - digits as usize);
    format!("{sign}{int}.{frac}")
}

/// Parses one rule spec: `S1`, `S2`, `S3`, `S4`, `M1993`, `G:<p>` or
/// `V:<v1,v2,...>`. `G1`..`G4` are accepted as shorthands for the four
/// geometric rules with `p` = 1, 1.05, 1.3 and 1.6.
pub fn parse_rule_spec(spec: &str) -> Result<ScoringRule> {
    let spec = spec.trim();
    if let Some(p) = spec.strip_prefix("G:").or_else(|| spec.strip_prefix("g:")) {
        return geometric_rule(parse_rational(p)?, 10);
    }
    if let Some(values) = spec.strip_prefix("V:").or_else(|| spec.strip_prefix("v:")) {
        let scores = values.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        return ScoringRule::new(format!("V:{values}"), scores);
    }
    if let Some(rule) = geometric_shorthand(spec) {
        return rule;
    }
    spec.parse::<Preset>().map(preset_rule).map_err(|_| Error::Unknown {
        kind: "rule",
        name: spec.to_string(),
    })
}

fn geometric_shorthand(spec: &str) -> Option<Result<ScoringRule>> {
    let p = match spec {
        "G1" => "1",
        "G2" => "1.05",
        "G3" => "1.3",
        "G4" => "1.6",
        _ => return None,
    };
    Some(geometric_rule(parse_rational(p).ok()?, 10))
}

/// Splits a comma-separated list of rule specs. Because custom vectors are
/// themselves comma-separated, bare numbers following a `V:` spec belong to
/// it: `S4,V:10,5,1,G:1.3` yields three rules.
pub fn parse_rule_list(list: &str) -> Result<Vec<ScoringRule>> {
    let mut specs: Vec<String> = Vec::new();
    for token in list.split(',').map(str::trim) {
        let continues_vector = specs
            .last()
            .is_some_and(|last| last.starts_with("V:") || last.starts_with("v:"))
            && parse_rational(token).is_ok();
        match specs.last_mut() {
            Some(last) if continues_vector => {
                last.push(',');
                last.push_str(token);
            }
            _ => specs.push(token.to_string()),
        }
    }
    if specs.iter().all(|s| s.is_empty()) {
        return Err(Error::InvalidRule("no rules given".into()));
    }
    specs.iter().map(|s| parse_rule_spec(s)).collect()
}

/// The eight rules compared throughout: S1-S4 and G1-G4.
pub fn standard_rules() -> Vec<ScoringRule> {
    parse_rule_list("S1,S2,S3,S4,G:1,G:1.05,G:1.3,G:1.6").expect("built-in rules parse")
}
