import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import cycle_with_tail, decoy_milestone
from pebblehunt.agent import AgentView, HuntAborted, begin_hunt, replay_positions
from pebblehunt.graph import PortLabeledGraph, gen_instance, make_instance
from pebblehunt.harness import progress_ok, search_node_levels
from pebblehunt.hunters import (
    HUNTERS,
    algorithm_for,
    checker_for_milestone,
    hunt_alternate,
    hunt_bipartite,
    hunt_marker,
    hunt_milestone,
    hunt_naive,
)
from pebblehunt.oracle import (
    PebblePlacement,
    choose_regime,
    no_pebbles,
    place,
    place_alternate_levels,
    place_bipartite_parity,
    place_marker_groups,
    place_milestone_encoding,
    placement_feasible,
)


def run(hunter, inst, placement):
    view, _ = begin_hunt(inst, placement)
    return hunter(view)


def events(result, kind):
    return [e for e in result.transcript.events if e[1] == kind]


def test_naive_finds_adjacent_treasure_in_one_move():
    g = PortLabeledGraph.from_edges(3, [(0, 1), (0, 2)])
    r = run(hunt_naive, make_instance(g, 0, 1), no_pebbles())
    assert r.found and r.time == 1


def test_naive_without_a_reachable_treasure_hits_the_budget():
    g = PortLabeledGraph.from_edges(3, [(0, 1), (1, 2)])
    view = AgentView(make_instance(g, 0, 2), no_pebbles(), budget=50)
    view._treasure = None  # a target no walk can reach
    with pytest.raises(HuntAborted):
        hunt_naive(view)


def test_alternate_with_one_pebble_on_a_path_of_two():
    g = PortLabeledGraph.from_edges(3, [(0, 1), (1, 2)])
    inst = make_instance(g, 0, 2)
    r = run(hunt_alternate, inst, place_alternate_levels(inst, 1))
    assert r.found and r.time <= 4
    assert r.pebbles_seen == 1


def test_alternate_progress_on_a_six_cycle():
    g = PortLabeledGraph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)])
    inst = make_instance(g, 0, 3)
    r = run(hunt_alternate, inst, place_alternate_levels(inst, 1))
    assert r.found
    levels = search_node_levels(inst, r.transcript)
    assert progress_ok(levels) and levels == [2]


def test_bipartite_tree_runs_three_search_phases():
    inst = gen_instance("tree", 3, 9, 0)
    placement = place_bipartite_parity(inst, 2)
    r = run(hunt_bipartite, inst, placement)
    assert r.found
    assert search_node_levels(inst, r.transcript) == [3, 6]


def test_marker_on_a_tree_never_rejects():
    inst = gen_instance("tree", 3, 10, 0)
    r = run(hunt_marker, inst, place_marker_groups(inst, 3))
    assert r.found
    assert events(r, "possibility1") == []
    assert progress_ok(search_node_levels(inst, r.transcript))


def test_marker_with_two_pebbles():
    inst = gen_instance("general", 4, 7, 2)
    r = run(hunt_marker, inst, place_marker_groups(inst, 2))
    assert r.found
    assert progress_ok(search_node_levels(inst, r.transcript))


def test_marker_rejects_the_pebble_it_came_from():
    inst = cycle_with_tail()
    placement = place_marker_groups(inst, 2)
    assert placement.pebbled == {2, 3}
    r = run(hunt_marker, inst, placement)
    assert (r.found, r.time) == (True, 32)
    pos = replay_positions(inst, r.transcript)
    got = [(t, kind, detail, pos[t]) for t, kind, detail in r.transcript.events]
    assert got == [
        (4, "search_node", "initial", 2),
        (5, "search_node", "marker", 3),
        (14, "possibility1", "1.1.1", 3),
        (26, "possibility1", "2.0.0", 3),
    ]


def test_milestone_reads_advice_and_skips_a_decoy():
    inst = decoy_milestone()
    placement = place_milestone_encoding(inst, 3)
    m = placement.plan.milestones[0]
    assert (m.values, m.encoding_half, m.skipped) == ([0, 1, 1, 1, 1], 1, 2)
    r = run(hunt_milestone, inst, placement)
    assert (r.found, r.time) == (True, 110)
    pos = replay_positions(inst, r.transcript)
    assert ("0,1,1,1,1", 0) in [(d, pos[t]) for t, k, d in r.transcript.events if k == "milestone"]
    rejects = [(d, pos[t]) for t, k, d in r.transcript.events if k == "reject"]
    assert rejects == [("2.1", 33)]
    assert progress_ok(search_node_levels(inst, r.transcript))


def hub(degree, pebbled_ports):
    # the treasure hangs off leaf 1, out of probing range
    edges = [(0, i) for i in range(1, degree + 1)] + [(1, degree + 1)]
    inst = make_instance(PortLabeledGraph.from_edges(degree + 2, edges), 0, degree + 1)
    pebbled = frozenset(1 + p for p in pebbled_ports)
    return AgentView(inst, PebblePlacement(pebbled, len(pebbled), "test"))


def test_checker_sees_two_pebbles_in_the_second_half():
    verdict = checker_for_milestone(hub(12, [6, 7]))
    assert verdict.milestone and verdict.half == 1


def test_checker_with_a_single_pebble_returns_a_hint():
    verdict = checker_for_milestone(hub(12, [8]))
    assert not verdict.milestone and verdict.hint == 8


def test_checker_ignores_small_degrees():
    view = hub(10, [0, 1])
    verdict = checker_for_milestone(view)
    assert not verdict.milestone and view.time == 0


def test_checker_skips_the_arrival_port():
    verdict = checker_for_milestone(hub(12, [0, 2]), arrival=0)
    assert not verdict.milestone and verdict.hint == 2


def test_algorithm_registry():
    assert algorithm_for("auto", "none").__name__ == "hunt_naive"
    assert algorithm_for("auto", "tree").__name__ == "hunt_alternate"
    assert algorithm_for("marker", "tree") is HUNTERS["marker"]


def possibility1_nodes_are_trail_nodes(inst, result):
    pos = replay_positions(inst, result.transcript)
    trail = set()
    for t, kind, _ in result.transcript.events:
        if kind == "search_node":
            trail.add(pos[t])
        elif kind == "possibility1":
            assert pos[t] in trail


def test_rejections_only_hit_committed_nodes():
    for seed in range(40):
        inst = gen_instance("general", 4, 9, seed)
        for regime, k in (("marker", 2), ("marker", 4), ("alternate", 4)):
            placement = place(inst, regime, k)
            result = run(algorithm_for("auto", regime), inst, placement)
            assert result.found
            possibility1_nodes_are_trail_nodes(inst, result)


REGIME_K = {
    "none": lambda D: 0,
    "tree": lambda D: max(1, D // 3),
    "alternate": lambda D: max(1, (D - 1) // 2),
    "bipartite": lambda D: max(1, D // 4),
    "marker": lambda D: max(2, D // 3),
}
FAMILY = {"none": "general", "tree": "tree", "alternate": "general", "bipartite": "bipartite", "marker": "general"}


@settings(max_examples=80, deadline=None)
@given(
    regime=st.sampled_from(sorted(REGIME_K)),
    delta=st.integers(3, 5),
    D=st.integers(2, 9),
    seed=st.integers(0, 10_000),
)
def test_every_hunt_reaches_the_treasure(regime, delta, D, seed):
    if regime == "none" and D > 5:
        D = 5
    inst = gen_instance(FAMILY[regime], delta, D, seed)
    k = REGIME_K[regime](D)
    if regime != "none" and not placement_feasible(inst, regime, k)[0]:
        return
    placement = place(inst, regime, k)
    view, _ = begin_hunt(inst, placement, budget=10**6)
    result = algorithm_for("auto", regime)(view)
    assert result.found
    assert replay_positions(inst, result.transcript)[-1] == inst.t
    assert progress_ok(search_node_levels(inst, result.transcript))
    possibility1_nodes_are_trail_nodes(inst, result)


@settings(max_examples=30, deadline=None)
@given(
    c=st.integers(1, 5),
    delta=st.sampled_from([32, 48, 64]),
    D=st.integers(2, 8),
    hubs=st.integers(0, 3),
    seed=st.integers(0, 10_000),
)
def test_milestone_hunts_reach_the_treasure(c, delta, D, hubs, seed):
    inst = gen_instance("general", delta, D, seed, hubs=hubs)
    if not placement_feasible(inst, "milestone", c * D)[0]:
        return
    placement = place(inst, "milestone", c * D)
    view, _ = begin_hunt(inst, placement, budget=10**7)
    result = hunt_milestone(view)
    assert result.found
    assert progress_ok(search_node_levels(inst, result.transcript))
