import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pebblehunt.agent import (
    AgentView,
    HuntAborted,
    Observation,
    begin_hunt,
    bounded_path_search,
    check_transcript,
    replay_ports,
    replay_positions,
)
from pebblehunt.graph import PortLabeledGraph, gen_complete_tree, gen_instance, make_instance
from pebblehunt.hunters import HUNTERS
from pebblehunt.oracle import PebblePlacement, choose_regime, no_pebbles, place


def pebbles(*nodes):
    return PebblePlacement(frozenset(nodes), len(nodes), "test")


def star(delta=3, treasure=3):
    g = PortLabeledGraph.from_edges(delta + 1, [(0, i) for i in range(1, delta + 1)])
    return make_instance(g, 0, treasure)


PAIR = make_instance(PortLabeledGraph((((1, 0),), ((0, 0),))), 0, 1)


def test_initial_observation():
    view, obs = begin_hunt(star(), pebbles(0))
    assert obs == Observation(3, True, False, None)
    assert view.time == 0


def test_move_and_return():
    view, _ = begin_hunt(PAIR, no_pebbles())
    obs = view.move(0)
    assert obs.treasure and view.time == 1
    back = view.move(obs.arrival_port)
    assert back.degree == 1 and view.time == 2


def test_out_of_range_port_is_a_contract_violation():
    view, _ = begin_hunt(PAIR, no_pebbles())
    with pytest.raises(IndexError):
        view.move(1)


def test_star_search_hits_last_port_after_five_moves():
    view, _ = begin_hunt(star(treasure=3), no_pebbles())
    out = bounded_path_search(view, 1)
    assert out.ports == (2,)
    assert view.time == 5
    assert [s.port for s in view.transcript.steps] == [0, 0, 1, 0, 2]


def test_pebble_on_port_zero_is_hit_at_once():
    view, _ = begin_hunt(star(treasure=3), pebbles(1))
    out = bounded_path_search(view, 1, stop=lambda o: o.pebble)
    assert out.ports == (0,) and view.time == 1


@pytest.mark.parametrize("delta,D,l", [(3, 3, 1), (3, 3, 2), (4, 3, 3)])
def test_exhausted_search_on_complete_tree(delta, D, l):
    g, root = gen_complete_tree(delta, D)
    inst = make_instance(g, root, g.n - 1, "complete-tree")
    view, _ = begin_hunt(inst, no_pebbles())
    out = bounded_path_search(view, l, stop=lambda o: False) if l < D else None
    if out is None:
        return
    assert out.exhausted
    nodes = sum(delta * (delta - 1) ** (i - 1) for i in range(1, l + 1))
    assert view.time == 2 * nodes
    assert replay_positions(inst, view.transcript)[-1] == root


def test_exclusions_skip_root_ports():
    view, _ = begin_hunt(star(treasure=3), no_pebbles())
    out = bounded_path_search(view, 1, excluded_root_ports=[0, 1])
    assert out.ports == (2,) and view.time == 1


def test_replay_ports():
    view, _ = begin_hunt(star(treasure=3), pebbles(1))
    assert replay_ports(view, []) == view.observe() and view.time == 0
    obs = replay_ports(view, [0])
    assert obs.pebble and view.time == 2


def reachable_by_non_reversing_walks(g, root, radius):
    """Brute force over node ids, independent of the agent code."""
    seen = set()
    frontier = [(root, None)]
    for _ in range(radius):
        nxt = []
        for u, came_by in frontier:
            for p, (v, q) in enumerate(g.adj[u]):
                if p == came_by:
                    continue
                seen.add(v)
                nxt.append((v, q))
        frontier = nxt
    return seen


@settings(max_examples=60, deadline=None)
@given(
    family=st.sampled_from(["general", "bipartite", "tree"]),
    delta=st.integers(2, 4),
    D=st.integers(2, 4),
    seed=st.integers(0, 5000),
    radius=st.integers(1, 4),
)
def test_search_visits_exactly_the_walk_reachable_nodes(family, delta, D, seed, radius):
    inst = gen_instance(family, delta, D, seed)
    if inst.graph.n > 12:
        return
    view = AgentView(inst, no_pebbles())
    g = inst.graph
    walk_nodes = reachable_by_non_reversing_walks(g, inst.s, radius)
    if inst.t in walk_nodes:
        return
    out = bounded_path_search(view, radius, stop=lambda o: False)
    assert out.exhausted
    visited = set(replay_positions(inst, view.transcript)[1:])
    assert visited - {inst.s} == walk_nodes - {inst.s}
    assert check_transcript(inst, no_pebbles(), view.transcript)


def test_budget_guard():
    view, _ = begin_hunt(star(treasure=3), no_pebbles(), budget=2)
    with pytest.raises(HuntAborted):
        bounded_path_search(view, 1)


PUBLIC = {"observe", "move", "time", "note", "halt_on_treasure", "transcript"}


def test_agent_surface_has_no_identity():
    surface = {name for name in dir(AgentView(PAIR, no_pebbles())) if not name.startswith("_")}
    assert surface == PUBLIC
    assert set(Observation.__dataclass_fields__) == {"degree", "pebble", "treasure", "arrival_port"}


class RecordingView:
    """Forwards only the agent surface and logs every access."""

    def __init__(self, view):
        object.__setattr__(self, "_view", view)
        object.__setattr__(self, "calls", [])

    def __getattr__(self, name):
        if name == "_result":  # result assembly, done by the runtime wrapper
            return self._view._result
        if name not in PUBLIC:
            raise AttributeError(f"algorithm touched {name!r}")
        self.calls.append(name)
        return getattr(self._view, name)

    def __setattr__(self, name, value):
        if name != "halt_on_treasure":
            raise AttributeError(f"algorithm set {name!r}")
        self.calls.append(name)
        setattr(self._view, name, value)


@pytest.mark.parametrize(
    "name,family,delta,D,k",
    [
        ("naive", "general", 3, 4, 0),
        ("alternate", "general", 4, 6, 3),
        ("bipartite", "bipartite", 4, 7, 2),
        ("marker", "general", 4, 10, 3),
        ("milestone", "general", 48, 6, 6),
    ],
)
def test_hunters_use_only_the_agent_surface(name, family, delta, D, k):
    inst = gen_instance(family, delta, D, 1, hubs=2 if name == "milestone" else 0)
    placement = place(inst, choose_regime(inst, k), k)
    proxy = RecordingView(AgentView(inst, placement))
    result = HUNTERS[name](proxy)
    assert result.found
    assert set(proxy.calls) <= PUBLIC


@pytest.mark.parametrize("name", sorted(HUNTERS))
def test_hunts_are_deterministic(name):
    regimes = {"naive": 0, "alternate": 5, "bipartite": 3, "marker": 3, "milestone": 14}
    family = "bipartite" if name == "bipartite" else "general"
    inst = gen_instance(family, 4, 7, 5)
    k = regimes[name]
    placement = place(inst, choose_regime(inst, k), k)
    runs = [HUNTERS[name](AgentView(inst, placement)).transcript for _ in range(2)]
    assert runs[0] == runs[1]
    assert check_transcript(inst, placement, runs[0])
