"""The agent's restricted view of an instance.

An :class:`AgentView` hides the graph and the agent's position. Algorithms
get degrees, pebble and treasure flags and arrival ports, nothing else.
Every move is one unit of time and lands in the transcript.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .graph import InstanceSpec
from .oracle import PebblePlacement


class TreasureFound(Exception):
    """Raised on entering the treasure node while the view halts on treasure."""


class HuntAborted(RuntimeError):
    """The traversal budget guard tripped."""


class HuntFailure(RuntimeError):
    """An algorithm exhausted its options without reaching the treasure."""


@dataclass(frozen=True)
class Observation:
    degree: int
    pebble: bool
    treasure: bool
    arrival_port: int | None = None


@dataclass(frozen=True)
class Step:
    port: int
    obs: Observation


@dataclass
class Transcript:
    steps: list[Step] = field(default_factory=list)
    # (time, kind, detail) annotations written by algorithms
    events: list[tuple[int, str, str]] = field(default_factory=list)

    @property
    def time(self) -> int:
        return len(self.steps)

    def export(self) -> str:
        lines = []
        for i, st in enumerate(self.steps, 1):
            o = st.obs
            lines.append(
                f"{i} move {st.port} -> deg={o.degree} pebble={int(o.pebble)} "
                f"treasure={int(o.treasure)} in={o.arrival_port}"
            )
        return "\n".join(lines) + ("\n" if lines else "")

    def export_events(self) -> str:
        return "".join(f"{t} {kind} {detail}\n" for t, kind, detail in self.events)


@dataclass
class HuntResult:
    found: bool
    time: int
    pebbles_seen: int
    transcript: Transcript
    algorithm: str = ""


class AgentView:
    """Handle for one agent on one instance. Use strictly sequentially."""

    def __init__(self, inst: InstanceSpec, placement: PebblePlacement, *, budget: int | None = None):
        self._graph = inst.graph
        self._pebbled = placement.pebbled
        self._treasure = inst.t
        self._pos = self._start = inst.s
        self.halt_on_treasure = False
        self._budget = budget
        self._transcript = Transcript()
        self._obs = Observation(self._graph.degree(self._pos), self._pos in self._pebbled, self._pos == self._treasure)

    def observe(self) -> Observation:
        return self._obs

    @property
    def time(self) -> int:
        return self._transcript.time

    def move(self, port: int) -> Observation:
        if not 0 <= port < self._obs.degree:
            raise IndexError(f"port {port} out of range for degree {self._obs.degree}")
        if self._budget is not None and self.time >= self._budget:
            raise HuntAborted(f"traversal budget {self._budget} exhausted")
        v, q = self._graph.adj[self._pos][port]
        self._pos = v
        self._obs = Observation(self._graph.degree(v), v in self._pebbled, v == self._treasure, q)
        self._transcript.steps.append(Step(port, self._obs))
        if self._obs.treasure and self.halt_on_treasure:
            raise TreasureFound
        return self._obs

    def note(self, kind: str, detail: str = "") -> None:
        """Annotate the transcript at the current time."""
        self._transcript.events.append((self.time, kind, detail))

    # runtime-side accessors, not for algorithms
    def _result(self, algorithm: str = "") -> HuntResult:
        return HuntResult(self._obs.treasure, self.time, self._pebbles_seen(), self._transcript, algorithm)

    def _pebbles_seen(self) -> int:
        g, pos = self._graph, self._start
        seen = {pos} & self._pebbled
        for st in self._transcript.steps:
            pos = g.adj[pos][st.port][0]
            if pos in self._pebbled:
                seen.add(pos)
        return len(seen)

    @property
    def transcript(self) -> Transcript:
        return self._transcript


def begin_hunt(inst: InstanceSpec, placement: PebblePlacement, *, budget: int | None = None) -> tuple[AgentView, Observation]:
    view = AgentView(inst, placement, budget=budget)
    return view, view.observe()


def replay_positions(inst: InstanceSpec, transcript: Transcript) -> list[int]:
    """Node occupied after each step (index 0 is the start)."""
    pos = inst.s
    out = [pos]
    for st in transcript.steps:
        pos = inst.graph.adj[pos][st.port][0]
        out.append(pos)
    return out


def check_transcript(inst: InstanceSpec, placement: PebblePlacement, transcript: Transcript) -> bool:
    """Replaying the moves from s reproduces every recorded observation."""
    pos = inst.s
    for st in transcript.steps:
        v, q = inst.graph.adj[pos][st.port]
        expect = Observation(inst.graph.degree(v), v in placement.pebbled, v == inst.t, q)
        if expect != st.obs:
            return False
        pos = v
    return True


# --- walking primitives -----------------------------------------------------


def walk(view: AgentView, ports: Sequence[int]) -> list[Observation]:
    return [view.move(p) for p in ports]


def walk_back(view: AgentView, arrivals: Sequence[int]) -> None:
    """Undo a walk given the arrival ports recorded on the way out."""
    for q in reversed(arrivals):
        view.move(q)


def iter_walks(
    view: AgentView,
    radius: int,
    excluded_root_ports: Sequence[int] = (),
) -> Iterator[tuple[tuple[int, ...], Observation]]:
    """Depth-first enumeration of non-reversing walks of length <= radius.

    Yields ``(port_sequence, observation)`` on arrival at each walk's end,
    with the agent physically there. When resumed, the consumer must have
    put the agent back on that node. Walks are produced in lexicographic
    order of port sequences; root ports in ``excluded_root_ports`` are
    skipped and no walk takes its arrival port straight back.
    On exhaustion the agent is back at the root. Closing the generator
    early leaves the agent where it is.
    """
    excluded = set(excluded_root_ports)
    ports: list[int] = []
    arrivals: list[int] = []
    # next port to try at each depth
    nxt = [0]
    degrees = [view.observe().degree]
    while nxt:
        depth = len(ports)
        p = nxt[-1]
        deg = degrees[-1]
        back = arrivals[-1] if arrivals else None
        while p < deg and ((depth == 0 and p in excluded) or p == back):
            p += 1
        if depth >= radius or p >= deg:
            nxt.pop()
            degrees.pop()
            if arrivals:
                view.move(arrivals.pop())
                ports.pop()
            continue
        nxt[-1] = p + 1
        obs = view.move(p)
        ports.append(p)
        arrivals.append(obs.arrival_port)
        nxt.append(0)
        degrees.append(obs.degree)
        yield tuple(ports), obs


@dataclass
class SearchOutcome:
    hit: Observation | None
    ports: tuple[int, ...] = ()
    observations: tuple[Observation, ...] = ()

    @property
    def exhausted(self) -> bool:
        return self.hit is None


def bounded_path_search(
    view: AgentView,
    radius: int,
    excluded_root_ports: Sequence[int] = (),
    stop: Callable[[Observation], bool] = lambda o: o.treasure,
    *,
    min_depth: int = 1,
) -> SearchOutcome:
    """Walk every non-reversing port sequence up to ``radius`` until ``stop`` holds.

    ``stop`` is only consulted at depth >= ``min_depth``; the treasure
    always stops the search. On a hit the agent stays on the hit node.
    """
    walks = iter_walks(view, radius, excluded_root_ports)
    seen: list[Observation] = []
    for seq, obs in walks:
        del seen[len(seq) - 1:]
        seen.append(obs)
        if obs.treasure or (len(seq) >= min_depth and stop(obs)):
            walks.close()
            return SearchOutcome(obs, seq, tuple(seen))
    return SearchOutcome(None)


def replay_ports(view: AgentView, seq: Sequence[int]) -> Observation | None:
    """Walk ``seq``, observe, and walk back. Returns None on an invalid port.

    On an invalid port the agent returns to where it started. If the walk
    reaches the treasure the agent stays there.
    """
    arrivals = []
    final = view.observe()
    for p in seq:
        if p >= view.observe().degree:
            walk_back(view, arrivals)
            return None
        final = view.move(p)
        if final.treasure:
            return final
        arrivals.append(final.arrival_port)
    walk_back(view, arrivals)
    return final


def probe(view: AgentView, port: int) -> Observation:
    """Look at one neighbor and come back (two time units)."""
    obs = view.move(port)
    if not obs.treasure:
        view.move(obs.arrival_port)
    return obs
