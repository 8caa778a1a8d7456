use clinchsim::montecarlo::{stream_index, DatasetSource, Simulation};
use clinchsim::racegen::{generate_season_with, PairDraw};
use clinchsim::scoring::{parse_rule_list, parse_rule_spec};
use clinchsim::{
    builtin_dataset, risk_averse_transform, run_experiment, season_metrics, sweep_races, BuiltinDataset,
    ExperimentConfig, Method, RngStream,
};

fn config(reps: u64) -> ExperimentConfig {
    ExperimentConfig {
        dataset: DatasetSource::Builtin("small-margin".into()),
        method: Method::M2,
        races_n: 15,
        replications: reps,
        rules: ["S1", "S4", "G:1.3", "G:1"].map(String::from).to_vec(),
        master_seed: 11,
        ..ExperimentConfig::default()
    }
}

#[test]
fn replications_share_one_season_across_rules() {
    let cfg = config(1);
    let ds = builtin_dataset(BuiltinDataset::SmallMargin);
    let rules = cfg.parsed_rules().unwrap();
    let sim = Simulation::new(&cfg, &ds, &rules).unwrap();
    let s4 = parse_rule_spec("S4").unwrap();
    for r in 1..=100 {
        // rebuild the replication step by step from its stream
        let mut rng = RngStream::new(cfg.master_seed, stream_index(cfg.races_n, r));
        let season = generate_season_with(&ds, Method::M2, PairDraw::Distinct, cfg.races_n, &mut rng).unwrap();
        let season = risk_averse_transform(&season, &s4, &mut rng).unwrap();
        let metrics: Vec<_> = rules
            .iter()
            .map(|rule| season_metrics(&season, rule, &mut rng).unwrap())
            .collect();
        let rep = sim.replication(r).unwrap();
        assert_eq!(rep.season, season, "replication {r}");
        assert_eq!(rep.metrics, metrics, "replication {r}");
    }
}

#[test]
fn report_matches_direct_aggregation() {
    let reps = 400u64;
    let cfg = config(reps);
    let ds = builtin_dataset(BuiltinDataset::SmallMargin);
    let rules = cfg.parsed_rules().unwrap();
    let sim = Simulation::new(&cfg, &ds, &rules).unwrap();
    let all: Vec<_> = (1..=reps).map(|r| sim.replication(r).unwrap()).collect();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.reps, reps);
    let r = reps as f64;
    for (k, rule) in report.rules.iter().enumerate() {
        let u: Vec<f64> = all
            .iter()
            .map(|rep| rep.metrics[k].uninteresting_count as f64)
            .collect();
        let mean = u.iter().sum::<f64>() / r;
        let var = u.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
        let no_win = all.iter().filter(|rep| !rep.metrics[k].champion_won_a_race).count() as f64 / r;
        let ge3 = u.iter().filter(|&&x| x >= 3.0).count() as f64 / r;
        assert!((rule.mean_uninteresting - mean).abs() < 1e-12, "{}", rule.rule);
        assert!((rule.se_mean - (var / r).sqrt()).abs() < 1e-12, "{}", rule.rule);
        assert!((rule.p_no_win - no_win).abs() < 1e-12);
        assert!((rule.se_p_no_win - (no_win * (1.0 - no_win) / r).sqrt()).abs() < 1e-12);
        assert!((rule.p_ge3 - ge3).abs() < 1e-12);
        assert!((rule.se_p_ge3 - (ge3 * (1.0 - ge3) / r).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn single_replication_has_zero_standard_errors() {
    let report = run_experiment(&config(1)).unwrap();
    for rule in &report.rules {
        assert_eq!((rule.se_mean, rule.se_p_no_win, rule.se_p_ge3), (0.0, 0.0, 0.0));
    }
}

#[test]
fn seed_changes_results_and_fixes_them() {
    let a = run_experiment(&config(300)).unwrap();
    let b = run_experiment(&config(300)).unwrap();
    let c = run_experiment(&ExperimentConfig {
        master_seed: 12,
        ..config(300)
    })
    .unwrap();
    assert_eq!(a, b);
    assert_ne!(a.rules, c.rules);
}

#[test]
fn thread_count_does_not_change_results() {
    let base = run_experiment(&ExperimentConfig {
        threads: Some(1),
        ..config(500)
    })
    .unwrap();
    for threads in [2, 3, 7] {
        assert_eq!(
            base,
            run_experiment(&ExperimentConfig {
                threads: Some(threads),
                ..config(500)
            })
            .unwrap()
        );
    }
}

#[test]
fn flat_rule_trades_early_clinch_for_winless_champions() {
    let cfg = ExperimentConfig {
        rules: ["G:1", "G:1.6"].map(String::from).to_vec(),
        races_n: 20,
        ..config(3000)
    };
    let report = run_experiment(&cfg).unwrap();
    let (flat, steep) = (report.rule("G:1").unwrap(), report.rule("G:1.6").unwrap());
    assert!(flat.p_no_win > steep.p_no_win);
    assert!(flat.mean_uninteresting < steep.mean_uninteresting);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_experiment(&config(0)).is_err());
    assert!(run_experiment(&ExperimentConfig {
        races_n: 0,
        ..config(5)
    })
    .is_err());
    assert!(run_experiment(&ExperimentConfig {
        rules: vec![],
        ..config(5)
    })
    .is_err());
    assert!(run_experiment(&ExperimentConfig {
        rules: vec!["S9".into()],
        ..config(5)
    })
    .is_err());
    assert!(run_experiment(&ExperimentConfig {
        reference_rule: "nope".into(),
        ..config(5)
    })
    .is_err());
    let missing = DatasetSource::Path("/nonexistent/pool.csv".into());
    assert!(run_experiment(&ExperimentConfig {
        dataset: missing,
        ..config(5)
    })
    .unwrap_err()
    .is_data_error());
}

#[test]
fn sweep_covers_each_length_once() {
    let reports = sweep_races(&config(50), 3..=7).unwrap();
    assert_eq!(reports.iter().map(|r| r.races).collect::<Vec<_>>(), [3, 4, 5, 6, 7]);
    assert!(sweep_races(&config(50), 2..=7).is_err());
    assert!(sweep_races(&config(50), 10..=31).is_err());
    // each length is an independent experiment, so a sweep entry equals a single run
    let single = run_experiment(&ExperimentConfig {
        races_n: 5,
        ..config(50)
    })
    .unwrap();
    assert_eq!(reports[2], single);
}

#[test]
fn raw_seasons_skip_the_transform() {
    let cfg = ExperimentConfig {
        risk_averse: false,
        ..config(1)
    };
    let ds = builtin_dataset(BuiltinDataset::SmallMargin);
    let rules = parse_rule_list("S4").unwrap();
    let sim = Simulation::new(&cfg, &ds, &rules).unwrap();
    let mut rng = RngStream::new(cfg.master_seed, stream_index(cfg.races_n, 9));
    let season = generate_season_with(&ds, Method::M2, PairDraw::Distinct, cfg.races_n, &mut rng).unwrap();
    assert_eq!(sim.replication(9).unwrap().season, season);
}
