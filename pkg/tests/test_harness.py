import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pebblehunt.harness import (
    COLUMNS,
    ExperimentConfig,
    ExperimentRecord,
    bound_value,
    brute_force_optimal_single_pebble,
    check_lower_bound_counting,
    check_upper_bound,
    emit_report,
    lower_bound_formula,
    parse_config,
    run_cell,
    run_experiment,
)


def test_tree_grid_with_five_seeds():
    cfg = ExperimentConfig(families=["tree"], deltas=[3], Ds=[4], ks=[1], seeds=list(range(5)))
    records = run_experiment(cfg)
    assert len(records) == 5
    assert all(r.status == "ok" and r.found and r.passed and r.ratio > 0 for r in records)
    assert {r.regime for r in records} == {"tree"}


def test_single_pebble_marker_cell_is_skipped():
    rec = run_cell("general", 4, 6, 0, 1, regime="marker")
    assert rec.status == "skip" and not rec.found
    assert rec.reason.startswith("single pebble impossibility")


def test_empty_grid():
    records = run_experiment(ExperimentConfig(seeds=[]))
    assert records == []
    assert emit_report(records) == ",".join(COLUMNS) + "\n"


def test_hunt_failure_dumps_a_transcript(tmp_path, monkeypatch):
    import pebblehunt.harness as harness

    monkeypatch.setattr(harness, "GUARD_FACTOR", 0)
    monkeypatch.setattr(harness, "C_BOUND", 0)
    rec = run_cell("general", 4, 12, 0, 0, regime="none", transcript_dir=str(tmp_path))
    # without headroom the budget is a flat 1000 moves, far short of 4^12
    assert rec.status == "failure" and "HuntAborted" in rec.reason
    assert rec.transcript_path and open(rec.transcript_path).read()


@pytest.mark.parametrize(
    "regime,params,expected",
    [
        ("alternate", dict(D=6, k=3, delta=4), 48),
        ("marker", dict(D=10, k=3, delta=4), 2560),
        ("milestone", dict(D=5, k=5, c=1, delta=32), 2565),
    ],
)
def test_bound_examples(regime, params, expected):
    assert bound_value(regime, **params) == expected


def test_real_exponents_are_available():
    assert bound_value("alternate", D=6, k=3, delta=4, exponent="real") == pytest.approx(3 * 4**1.5)
    assert bound_value("marker", D=10, k=3, delta=4, exponent="real") == pytest.approx(10 * 4 ** (10 / 3))


def test_upper_bound_check_uses_the_constant():
    rec = ExperimentRecord("general", 4, 6, 0, "alternate", 3, found=True, time=768)
    assert check_upper_bound(rec) and rec.bound_value == 48 and rec.ratio == 16
    rec.time = 769
    assert not check_upper_bound(rec)


def test_light_milestone_bound_is_beta_d():
    assert bound_value("milestone", D=5, delta=8, k=5, c=1, fat=False) == 26 * 5


@pytest.mark.parametrize(
    "delta,D,k,p,x_min,formula",
    [(3, 2, 1, 6, 3, 1.213), (3, 3, 2, 12, 4, 1.629), (4, 2, 1, 12, 4, 1.820)],
)
def test_lower_bound_worked_rows(delta, D, k, p, x_min, formula):
    rec = check_lower_bound_counting(delta, D, k)
    assert (rec.p, rec.x_min) == (p, x_min)
    assert rec.formula == pytest.approx(formula, abs=1e-3)
    assert rec.passed


@given(st.integers(3, 6), st.integers(2, 9), st.data())
def test_x_min_is_the_least_solution(delta, D, data):
    k = data.draw(st.integers(1, D - 1))
    rec = check_lower_bound_counting(delta, D, k)
    assert rec.x_min * math.comb(rec.x_min, k) >= rec.p
    assert (rec.x_min - 1) * math.comb(rec.x_min - 1, k) < rec.p
    assert rec.formula == lower_bound_formula(delta, D, k)


def test_lower_bound_rejects_bad_arguments():
    with pytest.raises(ValueError):
        check_lower_bound_counting(3, 3, 3)


@pytest.mark.parametrize("D,best", [(2, {1}), (3, {1, 2}), (4, {2})])
def test_single_pebble_optimum_sits_mid_path(D, best):
    table = brute_force_optimal_single_pebble(3, D)
    assert set(table.worst) == set(range(D))
    assert set(table.best_levels) <= best
    assert table.optimal_near_middle


def test_single_pebble_degenerate_depth():
    table = brute_force_optimal_single_pebble(3, 1)
    assert list(table.worst) == [0] and table.optimal_near_middle


def test_single_pebble_size_guard():
    with pytest.raises(ValueError):
        brute_force_optimal_single_pebble(5, 6)


def test_report_shapes():
    rec = ExperimentRecord("tree", 3, 4, 0, "tree", 1, time=10, bound_value=3.0, ratio=10 / 3, passed=True)
    csv_text = emit_report([rec])
    lines = csv_text.splitlines()
    assert len(lines) == 2
    assert lines[0].split(",")[:6] == ["family", "delta", "D", "seed", "regime", "k"]
    assert "3.333333" in lines[1] and "true" in lines[1]
    rows = json.loads(emit_report([rec], "json"))
    assert list(rows[0]) == COLUMNS and rows[0]["ratio"] == 3.333333
    assert json.loads(emit_report([], "json")) == []


def test_reports_are_byte_stable():
    cfg = parse_config("families=general,bipartite\ndeltas=3,4\nDs=4..6\nks=all\nseeds=0,1\n")
    a = emit_report(run_experiment(cfg))
    b = emit_report(run_experiment(cfg))
    assert a == b and len(a.splitlines()) > 1


def test_config_parsing():
    cfg = parse_config("# grid\nfamily = tree\ndelta = 3\nD = 2..4\nk = 1, 2\nseed = 7\nregime = marker\n")
    assert cfg.families == ["tree"] and cfg.Ds == [2, 3, 4] and cfg.ks == [1, 2]
    assert cfg.seeds == [7] and cfg.regime == "marker"
    with pytest.raises(ValueError):
        parse_config("colour=blue\n")
