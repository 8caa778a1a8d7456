"""Quick check that the compiled extension loads and agrees with known values.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

from fractions import Fraction

import clinchsim_py as cs


def check_rules():
    s4 = cs.ScoringRule("S4")
    assert s4.scores == [25, 18, 15, 12, 10, 8, 6, 4, 2, 1]
    assert s4.normalized()[:3] == [100, 72, 60]
    assert s4.points_for(None) == 0
    g = cs.ScoringRule.geometric("1.3")
    assert round(g.scores[0], 2) == 42.62 and g.scores[-1] == 1
    assert g.exact_scores()[-2] == Fraction(23, 10)
    assert [r.name for r in cs.ScoringRule.parse_list("S1,G:1.6")] == ["S1", "G:1.6"]
    try:
        cs.ScoringRule("V:1,2,3")
    except ValueError:
        pass
    else:
        raise AssertionError("increasing vector accepted")


def check_history():
    season, names, rule = cs.history_fixture("f1-2002")
    top = sorted(season.standings(rule), key=lambda r: -r["points"])[:5]
    assert [int(r["points"]) for r in top] == [144, 77, 50, 42, 41]
    m = season.metrics(rule)
    assert names[m["champion"] - 1] == "Schumacher, M."
    assert m["clinch_index"] == 11
    assert season.metrics(cs.ScoringRule("S3"))["clinch_index"] == 12


def check_example_season():
    season = cs.Season([cs.RaceResult([1, 3, 2]), cs.RaceResult([2, 1, 3])])
    out = season.risk_averse(cs.ScoringRule("S4"))
    assert [r.places for r in out.races] == [[2, 3, 1], [2, 1, 3]]
    ds = cs.Dataset("example", season.races)
    dist = ds.m2_distribution()
    assert dist[(1, 2, 3)] == Fraction(1, 4)
    assert dist[(1, 3, 2)] == Fraction(5, 16)
    assert dist.get((3, 2, 1), 0) == 0 and sum(dist.values()) == 1


def check_simulation():
    kwargs = dict(dataset="small-margin", races=20, reps=2000, rules="S4,G:1,G:1.6", seed=7)
    a = cs.run_experiment(threads=1, **kwargs)
    b = cs.run_experiment(threads=2, **kwargs)
    assert a == b
    by_rule = {r["rule"]: r for r in a["rules"]}
    assert by_rule["G:1"]["p_no_win"] > by_rule["G:1.6"]["p_no_win"]
    sweep = cs.sweep_races(3, 5, reps=200, rules="S4")
    assert [r["races"] for r in sweep] == [3, 4, 5]
    season = cs.Dataset.builtin("standard").sample_season(20, method=2, seed=1)
    assert len(season) == 20


def check_validation():
    report = cs.validate_dataset("full")
    statuses = {c["status"] for s in report["seasons"] for c in s["checks"]}
    assert "mismatch" not in statuses


if __name__ == "__main__":
    for check in (check_rules, check_history, check_example_season, check_simulation, check_validation):
        check()
        print(f"ok  {check.__name__}")
    print("smoke test passed")
