use clinchsim::evaluate::{ranked, Evaluator};
use clinchsim::racegen::{generate_season_with, PairDraw};
use clinchsim::scoring::{geometric_rule, normalize_to_100, parse_rule_spec};
use clinchsim::{
    builtin_dataset, champion, risk_averse_transform, score_season, season_metrics, BuiltinDataset, DriverId, Method,
    Points, Position, RaceResult, RngStream, ScoringRule, SeasonOutcome,
};
use proptest::prelude::*;

fn race_strategy(drivers: usize) -> impl Strategy<Value = RaceResult> {
    (
        Just((1..=drivers as u16).collect::<Vec<_>>()).prop_shuffle(),
        1..=drivers,
    )
        .prop_map(|(places, classified)| {
            let positions = places
                .into_iter()
                .map(|p| {
                    if (p as usize) <= classified {
                        Position::Classified(p)
                    } else {
                        Position::Unclassified
                    }
                })
                .collect();
            RaceResult::new(positions).unwrap()
        })
}

fn season_strategy() -> impl Strategy<Value = SeasonOutcome> {
    (2usize..=7, 1usize..=12)
        .prop_flat_map(|(d, n)| prop::collection::vec(race_strategy(d), n))
        .prop_map(|races| SeasonOutcome::new(races).unwrap())
}

/// Non-increasing, non-negative score vectors with a positive first entry,
/// sometimes fractional.
fn rule_strategy() -> impl Strategy<Value = ScoringRule> {
    (prop::collection::vec(0i128..6, 1..=10), 1i128..=4, 1i128..=5).prop_map(|(steps, denom, tail)| {
        let mut scores = Vec::with_capacity(steps.len());
        let mut acc = tail;
        for s in steps.iter().rev() {
            scores.push(Points::new(acc, denom));
            acc += s;
        }
        scores.reverse();
        ScoringRule::new("V", scores).unwrap()
    })
}

/// Plain recomputation of the title decision: after `m` races the champion is
/// safe if every rival, even winning all remaining races while the champion
/// scores nothing, ends behind on (points, wins).
fn naive_clinch(season: &SeasonOutcome, rule: &ScoringRule, champ: DriverId) -> usize {
    let n = season.len();
    let d = season.driver_count();
    let s1 = rule.first_place();
    for m in 0..n {
        let mut pts = vec![Points::from_integer(0); d];
        let mut wins = vec![0i64; d];
        for race in &season.races()[..m] {
            for (i, pos) in race.positions().iter().enumerate() {
                if let Some(place) = pos.place() {
                    pts[i] += rule.score(place);
                    wins[i] += i64::from(place == 1);
                }
            }
        }
        let rem = (n - m) as i64;
        let c = champ.rank() - 1;
        let safe = (0..d).filter(|&i| i != c).all(|i| {
            let best = pts[i] + s1 * Points::from_integer(rem as i128);
            (pts[c], wins[c]) > (best, wins[i] + rem)
        });
        if safe {
            return m;
        }
    }
    n
}

fn scaled(rule: &ScoringRule, k: i128) -> ScoringRule {
    ScoringRule::new(
        "scaled",
        rule.scores().iter().map(|s| s * Points::from_integer(k)).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn race_result_json_round_trip(race in (1usize..9).prop_flat_map(race_strategy)) {
        let json = serde_json::to_string(&race).unwrap();
        prop_assert_eq!(serde_json::from_str::<RaceResult>(&json).unwrap(), race);
    }

    #[test]
    fn season_json_round_trip(season in season_strategy()) {
        let json = serde_json::to_string(&season).unwrap();
        prop_assert_eq!(serde_json::from_str::<SeasonOutcome>(&json).unwrap(), season);
    }

    #[test]
    fn rule_json_round_trip(rule in rule_strategy()) {
        let json = serde_json::to_string(&rule).unwrap();
        prop_assert_eq!(serde_json::from_str::<ScoringRule>(&json).unwrap(), rule);
    }

    #[test]
    fn geometric_rule_shape(num in 1i128..=60, places in 2usize..=15) {
        prop_assume!(num != 20);
        let p = Points::new(num, 20);
        let rule = geometric_rule(p, places).unwrap();
        let s = rule.scores();
        prop_assert_eq!(s.len(), places);
        prop_assert_eq!(s[places - 1], Points::from_integer(1));
        for j in 0..places - 1 {
            prop_assert!(s[j] > s[j + 1]);
            // consecutive gaps are powers of p
            let mut power = Points::from_integer(1);
            for _ in 0..places - 1 - j {
                power *= p;
            }
            prop_assert_eq!(s[j] - s[j + 1], power);
        }
        let pf = num as f64 / 20.0;
        for (j, v) in rule.scores_f64().iter().enumerate() {
            let k = (places - j) as i32;
            let closed = (pf.powi(k) - 1.0) / (pf - 1.0);
            prop_assert!((v - closed).abs() <= 1e-9 * closed);
        }
    }

    #[test]
    fn power_and_summed_geometric_forms_rank_alike(
        season in (2usize..=10, 1usize..=12).prop_flat_map(|(d, n)| {
            prop::collection::vec(Just((1..=d as u16).collect::<Vec<_>>()).prop_shuffle(), n)
        }),
        num in 21i128..=40,
    ) {
        // with every driver classified, s_j is an affine function of p^(L+1-j)
        let season = SeasonOutcome::new(season.iter().map(|p| RaceResult::from_places(p).unwrap()).collect()).unwrap();
        let p = Points::new(num, 20);
        let summed = geometric_rule(p, 10).unwrap();
        let mut power = Points::from_integer(1);
        let mut powers = Vec::new();
        for _ in 0..10 {
            power *= p;
            powers.push(power);
        }
        powers.reverse();
        let pure = ScoringRule::new("power", powers).unwrap();
        let order = |rule: &ScoringRule| {
            let rows = score_season(&season, rule, None).unwrap();
            let mut idx: Vec<usize> = (0..rows.len()).collect();
            idx.sort_by(|&a, &b| (rows[b].points, rows[b].wins).cmp(&(rows[a].points, rows[a].wins)).then(a.cmp(&b)));
            let ties: Vec<bool> = idx.windows(2).map(|w| (rows[w[0]].points, rows[w[0]].wins) == (rows[w[1]].points, rows[w[1]].wins)).collect();
            (idx, ties)
        };
        prop_assert_eq!(order(&summed), order(&pure));
    }

    #[test]
    fn normalization_preserves_order(rule in rule_strategy()) {
        let norm = normalize_to_100(&rule);
        prop_assert_eq!(norm[0], Points::from_integer(100));
        for j in 0..norm.len() - 1 {
            prop_assert_eq!(rule.scores()[j].cmp(&rule.scores()[j + 1]), norm[j].cmp(&norm[j + 1]));
        }
    }

    #[test]
    fn prefix_standings_match_truncated_season(season in season_strategy(), rule in rule_strategy(), cut in 1usize..12) {
        let m = cut.min(season.len());
        let truncated = SeasonOutcome::new(season.races()[..m].to_vec()).unwrap();
        prop_assert_eq!(
            score_season(&season, &rule, Some(m)).unwrap(),
            score_season(&truncated, &rule, None).unwrap()
        );
    }

    #[test]
    fn champion_is_maximal(season in season_strategy(), rule in rule_strategy(), seed: u64) {
        let rows = score_season(&season, &rule, None).unwrap();
        let champ = champion(&rows, &mut RngStream::new(seed, 0)).unwrap();
        let best = ranked(rows.clone())[0].clone();
        let c = &rows[champ.rank() - 1];
        prop_assert_eq!((c.points, c.wins), (best.points, best.wins));
    }

    #[test]
    fn clinch_matches_naive_oracle(season in season_strategy(), rule in rule_strategy(), seed: u64) {
        let m = season_metrics(&season, &rule, &mut RngStream::new(seed, 1)).unwrap();
        prop_assert_eq!(m.clinch_index, naive_clinch(&season, &rule, m.champion));
        prop_assert_eq!(m.uninteresting_count, season.len() - m.clinch_index);
        let wins = season.races().iter().filter(|r| r.position(m.champion).is_win()).count();
        prop_assert_eq!(m.champion_won_a_race, wins > 0);
    }

    #[test]
    fn metrics_invariant_under_rescaling(season in season_strategy(), rule in rule_strategy(), k in 2i128..50, seed: u64) {
        let a = season_metrics(&season, &rule, &mut RngStream::new(seed, 2)).unwrap();
        let b = season_metrics(&season, &scaled(&rule, k), &mut RngStream::new(seed, 2)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn integer_evaluator_agrees_with_exact_path(season in season_strategy(), rule in rule_strategy(), seed: u64) {
        let exact = season_metrics(&season, &rule, &mut RngStream::new(seed, 3)).unwrap();
        let fast = Evaluator::new(&rule).unwrap().metrics(&season, &mut RngStream::new(seed, 3)).unwrap();
        prop_assert_eq!(exact, fast);
    }

    #[test]
    fn non_champion_is_rejected(season in season_strategy(), rule in rule_strategy()) {
        let rows = ranked(score_season(&season, &rule, None).unwrap());
        let last = rows.last().unwrap();
        if (last.points, last.wins) < (rows[0].points, rows[0].wins) {
            prop_assert!(clinchsim::clinch_index(&season, &rule, last.driver).is_err());
        }
    }

    #[test]
    fn transform_removes_reference_champion_wins(season in season_strategy(), seed: u64) {
        let s4 = parse_rule_spec("S4").unwrap();
        let mut rng = RngStream::new(seed, 4);
        let champ = champion(&score_season(&season, &s4, None).unwrap(), &mut rng.clone()).unwrap();
        let out = risk_averse_transform(&season, &s4, &mut rng).unwrap();
        prop_assert_eq!(out.len(), season.len());
        for (before, after) in season.races().iter().zip(out.races()) {
            if before.position(champ).is_win() && before.driver_at(2).is_some() {
                let second = before.driver_at(2).unwrap();
                prop_assert_eq!(after.winner(), Some(second));
                prop_assert_eq!(after.position(champ), Position::Classified(2));
            } else {
                prop_assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn generated_races_are_complete_orders(seed: u64, n in 1usize..25, m2 in any::<bool>(), distinct in any::<bool>()) {
        let ds = builtin_dataset(BuiltinDataset::SmallMargin);
        let method = if m2 { Method::M2 } else { Method::M1 };
        let pair = if distinct { PairDraw::Distinct } else { PairDraw::WithReplacement };
        let season = generate_season_with(&ds, method, pair, n, &mut RngStream::new(seed, 5)).unwrap();
        prop_assert_eq!(season.len(), n);
        for race in season.races() {
            let mut places = race.places();
            places.sort_unstable();
            if m2 {
                prop_assert_eq!(places, (1..=ds.driver_count() as u16).collect::<Vec<_>>());
            } else {
                prop_assert!(ds.races().contains(race));
            }
        }
    }
}

#[test]
fn geometric_rule_approaches_linear_as_p_tends_to_one() {
    for p in [Points::new(1_000_001, 1_000_000), Points::new(999_999, 1_000_000)] {
        let rule = geometric_rule(p, 10).unwrap();
        for (j, v) in rule.scores_f64().iter().enumerate() {
            assert!((v - (10 - j) as f64).abs() < 1e-4, "p={p} place {}: {v}", j + 1);
        }
    }
    let linear = geometric_rule(Points::from_integer(1), 10).unwrap();
    assert_eq!(linear.scores_f64(), (1..=10).rev().map(f64::from).collect::<Vec<_>>());
}

#[test]
fn same_stream_same_season() {
    let ds = builtin_dataset(BuiltinDataset::Standard);
    let a = generate_season_with(&ds, Method::M2, PairDraw::Distinct, 20, &mut RngStream::new(1, 7)).unwrap();
    let b = generate_season_with(&ds, Method::M2, PairDraw::Distinct, 20, &mut RngStream::new(1, 7)).unwrap();
    let c = generate_season_with(&ds, Method::M2, PairDraw::Distinct, 20, &mut RngStream::new(1, 8)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
