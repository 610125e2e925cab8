"""Deterministic hunt procedures written against :class:`AgentView` only.

Revisits are detected by signatures: the agent remembers the observations
along the route it took (its trail) and, standing on a pebble, replays a
few trail steps to test whether it is back on a pebble it already used.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .agent import (
    AgentView,
    HuntFailure,
    HuntResult,
    Observation,
    TreasureFound,
    bounded_path_search,
    iter_walks,
    probe,
    walk_back,
)
from .encoding import EncodingFormatError, SlotReader, bits_to_int, partition_block
from .oracle import port_halves

@dataclass(frozen=True)
class Signature:
    degree: int
    pebble: bool
    steps: tuple[tuple[int, Observation], ...]


def signature_matches(view: AgentView, sig: Signature) -> bool:
    """Replay the signature's walk from here and compare every observation."""
    here = view.observe()
    if here.degree != sig.degree or here.pebble != sig.pebble:
        return False
    arrivals: list[int] = []
    ok = True
    for port, expect in sig.steps:
        if port >= view.observe().degree:
            ok = False
            break
        got = view.move(port)
        arrivals.append(got.arrival_port)
        if got != expect:
            ok = False
            break
    walk_back(view, arrivals)
    return ok


class Trail:
    """The agent's own route, newest node first.

    ``nodes[j]`` is (degree, pebble) of the j-th node back from the current
    SearchNode. ``back[j]`` is the step from node j to node j+1 and
    ``fwd[j]`` the step from node j+1 to node j, each as (port, observation
    on arrival).
    """

    def __init__(self, start: Observation):
        self.nodes = [(start.degree, start.pebble)]
        self.back: list[tuple[int, Observation]] = []
        self.fwd: list[tuple[int, Observation]] = []

    def advance(self, ports: Sequence[int], observations: Sequence[Observation]) -> None:
        before = [self.nodes[0]] + [(o.degree, o.pebble) for o in observations[:-1]]
        back, fwd = [], []
        for j in reversed(range(len(ports))):
            deg, peb = before[j]
            back.append((observations[j].arrival_port, Observation(deg, peb, False, ports[j])))
            fwd.append((ports[j], observations[j]))
        self.nodes = [(o.degree, o.pebble) for o in reversed(observations)] + self.nodes
        self.back = back + self.back
        self.fwd = fwd + self.fwd

    @property
    def arrival_port(self) -> int | None:
        return self.back[0][0] if self.back else None

    def signatures(self, j: int, length: int | None = None) -> tuple[Signature, Signature]:
        """Backward and forward signatures of node j (full trail by default)."""
        stop = len(self.back) if length is None else j + length
        backward = self.back[j:stop]
        low = -1 if length is None else max(j - 1 - length, -1)
        forward = [self.fwd[i] for i in range(j - 1, low, -1)]
        deg, peb = self.nodes[j]
        return Signature(deg, peb, tuple(backward)), Signature(deg, peb, tuple(forward))

    def pebbled(self) -> list[int]:
        return [j for j, (_, peb) in enumerate(self.nodes) if peb]


class Memory:
    """Signatures of every pebble the agent has committed to so far."""

    def __init__(self, trail: Trail, extra: Iterable[Signature] = ()):
        self.trail = trail
        self.extra = list(extra)

    def known(self, view: AgentView, walk_length: int | None = None) -> bool:
        """Whether the pebble under the agent is one already committed to.

        A non-reversing walk returns to its root only after 3 or more steps,
        so short hits skip the current SearchNode.
        """
        for j in self.trail.pebbled():
            if j == 0 and walk_length is not None and walk_length < 3:
                continue
            back, fwd = self.trail.signatures(j)
            if signature_matches(view, back) and (not fwd.steps or signature_matches(view, fwd)):
                return True
        return any(signature_matches(view, sig) for sig in self.extra)


def _hunt(name: str):
    def wrap(fn: Callable[[AgentView], None]) -> Callable[[AgentView], HuntResult]:
        @functools.wraps(fn)
        def run(view: AgentView) -> HuntResult:
            if view.observe().treasure:
                return view._result(name)
            view.halt_on_treasure = True
            try:
                fn(view)
            except TreasureFound:
                pass
            finally:
                view.halt_on_treasure = False
            if not view.observe().treasure:
                raise HuntFailure(f"{name}: search ended without the treasure")
            return view._result(name)

        return run

    return wrap


# --- k = 0 ------------------------------------------------------------------


@_hunt("naive")
def hunt_naive(view: AgentView) -> None:
    r = 0
    while True:
        r += 1
        bounded_path_search(view, r)


# --- pebbles on the path, found by bounded searches -------------------------


def _first_pebble(view: AgentView):
    """Iterative deepening from the start until a pebble (or the treasure)."""
    r = 0
    while True:
        r += 1
        out = bounded_path_search(view, r, stop=lambda o: o.pebble, min_depth=r)
        if not out.exhausted:
            return out


def _search_new_pebble(view: AgentView, radius: int, excluded, memory: Memory, *, min_depth: int = 1):
    """Enumerate walks until a pebble that is not a remembered one."""
    walks = iter_walks(view, radius, excluded)
    seen: list[Observation] = []
    for seq, obs in walks:
        del seen[len(seq) - 1:]
        seen.append(obs)
        if len(seq) < min_depth or not obs.pebble:
            continue
        if memory.known(view, len(seq)):
            view.note("possibility1", ".".join(map(str, seq)))
            continue
        walks.close()
        view.note("possibility2", ".".join(map(str, seq)))
        return seq, tuple(seen)
    return None


def _partner(view: AgentView, memory: Memory):
    """Probe the neighbors for a fresh pebble; stay there if one is found."""
    arrival = memory.trail.arrival_port
    for p in range(view.observe().degree):
        if p == arrival:
            continue
        obs = view.move(p)
        if obs.pebble and not memory.known(view, 1):
            return p, obs
        view.move(obs.arrival_port)
    return None


def _anchor_hunt(view: AgentView, mode: str) -> None:
    trail = Trail(view.observe())
    memory = Memory(trail)
    first = _first_pebble(view)
    trail.advance(first.ports, first.observations)
    view.note("search_node", "initial")
    l = len(first.ports)
    if mode == "marker":
        l += 1
        found = _partner(view, memory)
        if found is not None:
            trail.advance([found[0]], [found[1]])
            view.note("search_node", "marker")
    min_depth = l if mode == "bipartite" else 1
    while True:
        hit = _search_new_pebble(view, l, [trail.arrival_port], memory, min_depth=min_depth)
        if hit is None:
            raise HuntFailure(f"{mode}: radius {l} search exhausted")
        trail.advance(*hit)
        view.note("search_node", "")
        if mode == "marker":
            found = _partner(view, memory)
            if found is not None:
                trail.advance([found[0]], [found[1]])
                view.note("search_node", "marker")


@_hunt("alternate")
def hunt_alternate(view: AgentView) -> None:
    _anchor_hunt(view, "alternate")


@_hunt("bipartite")
def hunt_bipartite(view: AgentView) -> None:
    _anchor_hunt(view, "bipartite")


@_hunt("marker")
def hunt_marker(view: AgentView) -> None:
    _anchor_hunt(view, "marker")


# --- milestones -------------------------------------------------------------

CHECK_WINDOW = 5
MIN_CHECK_DEGREE = 2 * CHECK_WINDOW + 1


@dataclass(frozen=True)
class CheckerVerdict:
    milestone: bool
    half: int | None = None
    hint: int | None = None
    # ports probed and found empty
    empty: frozenset[int] = frozenset()


def _window(view: AgentView, half: int, arrival: int | None) -> list[int]:
    ports = [p for p in port_halves(view.observe().degree)[half] if p != arrival]
    return ports[:CHECK_WINDOW]


def checker_for_milestone(view: AgentView, arrival: int | None = None) -> CheckerVerdict:
    """Probe the head of each port half; two pebbles in one window mark a milestone.

    ``arrival`` is the port the agent entered through; probes change what
    :meth:`AgentView.observe` reports, so callers pass it explicitly.
    """
    if view.observe().degree < MIN_CHECK_DEGREE:
        return CheckerVerdict(False)
    hint = None
    empty = set()
    for half in (0, 1):
        pebbled = []
        for p in _window(view, half, arrival):
            if probe(view, p).pebble:
                pebbled.append(p)
            else:
                empty.add(p)
        if len(pebbled) >= 2:
            return CheckerVerdict(True, half, None, frozenset(empty))
        if pebbled and hint is None:
            hint = pebbled[0]
    return CheckerVerdict(False, None, hint, frozenset(empty))


def read_encoding(view: AgentView, half: int, arrival: int | None = None):
    """Scan the encoding half slot by slot.

    Returns ``(values, width, pebbled_slots)`` where ``pebbled_slots`` lists
    (port, observation) of the pebbled encoding neighbors, or None if the
    slots do not form a well-formed encoding.
    """
    reader = SlotReader()
    pebbled = []
    for p in port_halves(view.observe().degree)[half]:
        if p == arrival:
            continue
        obs = probe(view, p)
        if obs.pebble:
            pebbled.append((p, obs))
        try:
            if reader.feed(int(obs.pebble)):
                break
        except EncodingFormatError:
            return None
    if not reader.done or not reader.strings:
        return None
    width = len(reader.strings[0])
    if width == 0 or any(len(x) != width for x in reader.strings):
        return None
    return [bits_to_int(x) for x in reader.strings], width, pebbled


def _advance(view: AgentView, trail: Trail, ports, observations, detail: str = "") -> None:
    trail.advance(ports, observations)
    view.note("search_node", detail)


def _scan(view: AgentView, ports: Iterable[int], memory: Memory, arrival: int | None) -> tuple[int, Observation] | None:
    """Visit each port's neighbor; stay on the first fresh pebble."""
    for p in ports:
        if p == arrival:
            continue
        obs = view.move(p)
        if obs.pebble and not memory.known(view, 1):
            return p, obs
        view.move(obs.arrival_port)
    return None


def _light_step(view: AgentView, trail: Trail, memory: Memory, verdict: CheckerVerdict) -> None:
    deg = view.observe().degree
    order = ([verdict.hint] if verdict.hint is not None else []) + [
        p for p in range(deg) if p != verdict.hint and p not in verdict.empty
    ]
    hit = _scan(view, order, memory, trail.arrival_port)
    if hit is not None:
        _advance(view, trail, [hit[0]], [hit[1]], "light")
        return
    _recover(view, trail, memory)


def _recover(view: AgentView, trail: Trail, memory: Memory) -> None:
    """Widen the search past an unpebbled hop until a fresh pebble turns up."""
    # a dead end leaves only the way back
    excluded = [trail.arrival_port] if view.observe().degree > 1 else []
    r = 1
    while True:
        r += 1
        hit = _search_new_pebble(view, r, excluded, memory, min_depth=2)
        if hit is not None:
            _advance(view, trail, *hit, detail="recover")
            return


def _block(ports: Sequence[int], value: int, width: int) -> list[int]:
    return partition_block(list(ports), value, width)


def _guided_advance(view: AgentView, trail: Trail, memory: Memory, values, width, half) -> None:
    # hop 1 uses the half without the encoding
    deg = view.observe().degree
    hit = _scan(view, _block(port_halves(deg)[1 - half], values[0], width), memory, trail.arrival_port)
    if hit is None:
        view.note("guide_miss", "1")
        return _light_step(view, trail, memory, CheckerVerdict(False))
    _advance(view, trail, [hit[0]], [hit[1]], "guided")
    if len(values) < 3:
        return
    # hop 2 lands on the unpebbled node; hop 3 must reach a fresh pebble
    deg = view.observe().degree
    arrival = trail.arrival_port
    candidates = []
    for p in _block(range(deg), values[1], width):
        if p != arrival and not probe(view, p).pebble:
            candidates.append(p)
    stack = list(reversed(candidates))
    accepted = None
    while stack and accepted is None:
        p = stack.pop()
        w = view.move(p)
        for q in _block(range(w.degree), values[2], width):
            if q == w.arrival_port:
                continue
            x = view.move(q)
            if x.pebble:
                if memory.known(view, 2):
                    view.note("reject", f"{p}.{q}")
                else:
                    accepted = ([p, q], [w, x])
                    break
            view.move(x.arrival_port)
        else:
            view.move(w.arrival_port)
    if accepted is None:
        view.note("guide_miss", "3")
        return _recover(view, trail, memory)
    _advance(view, trail, *accepted, detail="guided")
    for j in range(3, len(values)):
        deg = view.observe().degree
        hit = _scan(view, _block(range(deg), values[j], width), memory, trail.arrival_port)
        if hit is None:
            view.note("guide_miss", str(j + 1))
            return _light_step(view, trail, memory, CheckerVerdict(False))
        _advance(view, trail, [hit[0]], [hit[1]], "guided")


@_hunt("milestone")
def hunt_milestone(view: AgentView) -> None:
    trail = Trail(view.observe())
    memory = Memory(trail)
    while True:
        verdict = checker_for_milestone(view, trail.arrival_port)
        if verdict.milestone:
            read = read_encoding(view, verdict.half, trail.arrival_port)
            if read is not None:
                values, width, pebbled = read
                here = view.observe()
                back, _ = trail.signatures(0)
                for p, obs in pebbled:
                    step = (obs.arrival_port, Observation(here.degree, here.pebble, False, p))
                    memory.extra.append(Signature(obs.degree, True, (step,) + back.steps))
                view.note("milestone", ",".join(map(str, values)))
                _guided_advance(view, trail, memory, values, width, verdict.half)
                continue
        _light_step(view, trail, memory, verdict)


HUNTERS: dict[str, Callable[[AgentView], HuntResult]] = {
    "naive": hunt_naive,
    "alternate": hunt_alternate,
    "bipartite": hunt_bipartite,
    "marker": hunt_marker,
    "milestone": hunt_milestone,
}

REGIME_ALGORITHM = {
    "none": "naive",
    "tree": "alternate",
    "alternate": "alternate",
    "bipartite": "bipartite",
    "marker": "marker",
    "milestone": "milestone",
}


def algorithm_for(name: str, regime: str) -> Callable[[AgentView], HuntResult]:
    """Resolve an algorithm name; ``auto`` follows the placement regime."""
    if name == "auto":
        name = REGIME_ALGORITHM[regime]
    try:
        return HUNTERS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}") from None
