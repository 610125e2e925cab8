"""Pebble placement for each budget regime.

Every planner anchors its pebbles on the oracle's shortest path ``P`` from
``s`` to ``t`` (see :func:`pebblehunt.graph.shortest_path`).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

from .encoding import (
    block_index,
    int_to_bits,
    layout,
    layout_length,
    partition_block,
    read_slots,
)
from .graph import InstanceSpec, PathP, is_bipartite, shortest_path

REGIMES = ("none", "tree", "alternate", "marker", "bipartite", "milestone")
MIN_STRINGS = 5
MILESTONE_GAP = 5


class PlacementError(ValueError):
    """Placement cannot be produced for this instance and budget."""


class RegimeError(PlacementError):
    pass


class ImpossibleError(PlacementError):
    pass


SINGLE_PEBBLE = "single pebble impossibility: one pebble cannot guide the agent in a general graph"


class FeasibilityError(PlacementError):
    pass


@dataclass(frozen=True)
class PebblePlacement:
    pebbled: frozenset[int]
    budget: int
    regime: str = "none"
    plan: Any = None

    @property
    def used(self) -> int:
        return len(self.pebbled)

    def __contains__(self, node: int) -> bool:
        return node in self.pebbled


def no_pebbles() -> PebblePlacement:
    return PebblePlacement(frozenset(), 0, "none")


# --- k < D ------------------------------------------------------------------


@dataclass
class LevelPlan:
    levels: list[int]
    gap: int
    dropped: int = 0


def _pebbles_at(path: PathP, levels) -> frozenset[int]:
    return frozenset(path.nodes[i] for i in levels)


def place_tree_levels(inst: InstanceSpec, k: int) -> PebblePlacement:
    """k pebbles at levels ceil(jD/(k+1)) of P."""
    D = inst.D
    if inst.family not in ("tree", "complete-tree"):
        raise RegimeError("tree-level placement needs a tree instance")
    if not 1 <= k < D:
        raise RegimeError(f"tree-level placement needs 1 <= k < D, got k={k}, D={D}")
    levels = [math.ceil(j * D / (k + 1)) for j in range(1, k + 1)]
    path = shortest_path(inst.graph, inst.s, inst.t)
    plan = LevelPlan(levels, math.ceil(D / (k + 1)))
    return PebblePlacement(_pebbles_at(path, levels), k, "tree", plan)


def alternate_levels(D: int, k: int) -> list[int]:
    evens = list(range(2, D, 2))
    if len(evens) > k:
        raise RegimeError(f"alternate levels need {len(evens)} pebbles, budget is {k}")
    odds = [j for j in range(D - 1, 0, -1) if j % 2]
    return sorted(evens + odds[: k - len(evens)])


def place_alternate_levels(inst: InstanceSpec, k: int) -> PebblePlacement:
    """Pebbles on even levels of P; surplus on the odd levels closest to t.

    Consecutive pebbles (and s to the first pebble) are at most 2 apart.
    """
    D = inst.D
    if not 1 <= k < D:
        raise RegimeError(f"alternate placement needs k < D, got k={k}, D={D}")
    levels = alternate_levels(D, k)
    path = shortest_path(inst.graph, inst.s, inst.t)
    plan = LevelPlan(levels, 2 if 2 in levels else 1)
    return PebblePlacement(_pebbles_at(path, levels), k, "alternate", plan)


def bipartite_gap(D: int, k: int) -> int:
    gap = math.ceil(D / (k + 1))
    return gap if gap % 2 else gap + 1


def place_bipartite_parity(inst: InstanceSpec, k: int) -> PebblePlacement:
    """Pebbles every ``l`` levels along P with ``l`` odd."""
    D = inst.D
    if not 1 <= k < D:
        raise RegimeError(f"bipartite placement needs 1 <= k < D, got k={k}, D={D}")
    if not is_bipartite(inst.graph):
        raise RegimeError("graph has an odd cycle")
    gap = bipartite_gap(D, k)
    levels = [j * gap for j in range(1, k + 1) if j * gap <= D - 1]
    path = shortest_path(inst.graph, inst.s, inst.t)
    plan = LevelPlan(levels, gap, dropped=k - len(levels))
    return PebblePlacement(_pebbles_at(path, levels), k, "bipartite", plan)


@dataclass
class Anchor:
    kind: str  # "marker" or "pebble"
    levels: list[int]


@dataclass
class MarkerPlan:
    eta: int
    case: str
    l_formula: int
    l: int
    anchors: list[Anchor]
    dropped: int = 0


def marker_formula(D: int, k: int) -> tuple[int, str, int]:
    eta = k // 3
    r = k - 3 * eta
    if r == 0:
        return eta, "k=3eta", (D - eta) // (2 * eta + 1)
    if r == 1:
        return eta, "k=3eta+1", (D - eta) // (2 * eta + 2)
    return eta, "k=3eta+2", (D - eta - 1) // (2 * eta + 2)


def _anchor_kinds(k: int) -> list[str]:
    eta, r = divmod(k, 3)
    kinds = ["marker", "pebble"] * eta
    if r == 1:
        kinds.append("pebble")
    elif r == 2:
        kinds.append("marker")
    return kinds


def _lay_anchors(kinds: list[str], l: int) -> list[Anchor]:
    anchors = []
    end = 0
    for idx, kind in enumerate(kinds):
        # the first marker sits at v_{l-1}, v_l; later anchors start l after the previous one ends
        first = l - 1 if idx == 0 else end + l
        if idx == 0 and kind != "marker":
            raise PlacementError("anchor sequence must open with a marker")
        levels = [first, first + 1] if kind == "marker" else [first]
        anchors.append(Anchor(kind, levels))
        end = levels[-1]
    return anchors


def marker_layout(D: int, k: int) -> MarkerPlan:
    if k < 2:
        raise ImpossibleError(SINGLE_PEBBLE)
    eta, case, l_formula = marker_formula(D, k)
    kinds = _anchor_kinds(k)
    dropped = 0
    while kinds:
        l = max(l_formula, 1)
        while True:
            anchors = _lay_anchors(kinds, l)
            end = anchors[-1].levels[-1]
            if end > D - 1:
                break
            if D - end <= l:
                return MarkerPlan(eta, case, l_formula, l, anchors, dropped)
            l += 1
        # drop a trailing anchor that cannot fit
        dropped += 2 if kinds[-1] == "marker" else 1
        kinds = kinds[:-1]
    raise RegimeError(f"no marker layout fits D={D}, k={k}")


def place_marker_groups(inst: InstanceSpec, k: int) -> PebblePlacement:
    """Markers (two adjacent pebbles) alternating with lone pebbles, l apart."""
    D = inst.D
    if k < 2:
        raise ImpossibleError(SINGLE_PEBBLE)
    if k >= math.ceil(D / 2):
        raise RegimeError(f"marker placement needs k < D/2, got k={k}, D={D}")
    plan = marker_layout(D, k)
    if plan.l < 3:
        raise RegimeError(f"marker spacing l={plan.l} < 3; use alternate levels")
    path = shortest_path(inst.graph, inst.s, inst.t)
    levels = [lv for a in plan.anchors for lv in a.levels]
    return PebblePlacement(_pebbles_at(path, levels), k, "marker", plan)


# --- k = cD -----------------------------------------------------------------


def fatness_threshold(c: int) -> int:
    return 10 * (c + 1) + 6


def string_width(c: int) -> int:
    return (c - 1) // 2


def port_halves(deg: int) -> tuple[list[int], list[int]]:
    cut = math.ceil(deg / 2)
    return list(range(cut)), list(range(cut, deg))


@dataclass
class Milestone:
    node: int
    index: int
    alpha: int
    strings: list[list[int]]
    values: list[int]
    encoding_half: int  # 0 = first half of ports, 1 = second
    region: list[int]  # encoding ports in slot order
    encoding_nodes: list[int]
    R: list[int]
    skipped: int | None


@dataclass
class MilestonePlan:
    c: int
    beta: int
    width: int
    milestones: list[Milestone]
    path_pebbles: list[int]
    ineligible: list[tuple[int, str]] = field(default_factory=list)


def _guide_ports(inst: InstanceSpec, path: PathP, m_index: int, j: int, enc_half: int) -> tuple[list[int], int] | None:
    """Ports partitioned for hop j (1-based) after the milestone, and the true port."""
    pos = m_index + j - 1
    if pos >= path.length:
        return None
    node = path.nodes[pos]
    if j == 1:
        ports = port_halves(inst.graph.degree(node))[1 - enc_half]
    else:
        ports = list(range(inst.graph.degree(node)))
    return ports, path.out_ports[pos]


def place_milestone_encoding(inst: InstanceSpec, c: int) -> PebblePlacement:
    """Pebbles on every path node but one after each milestone, plus encodings."""
    if c < 1:
        raise PlacementError("c must be a positive integer")
    g, D = inst.graph, inst.D
    budget = c * D
    beta = fatness_threshold(c)
    width = string_width(c)
    path = shortest_path(g, inst.s, inst.t)
    ineligible: list[tuple[int, str]] = []

    candidates = []
    for i in range(D):
        v = path.nodes[i]
        if g.degree(v) >= beta:
            candidates.append(i)
    if candidates and math.floor(beta / 2) < MIN_STRINGS * (c + 1) + 3:
        raise FeasibilityError("fat threshold too small for five strings")

    chosen: list[tuple[int, dict]] = []
    encoding_total = 0
    last = -MILESTONE_GAP
    for i in candidates:
        v = path.nodes[i]
        if i - last < MILESTONE_GAP:
            continue
        info, reason = _milestone_layout(inst, path, i, width, c)
        if info is None:
            ineligible.append((v, reason))
            continue
        skipped = path.nodes[i + 2] if i + 2 <= D - 1 else None
        path_count = D - sum(1 for _, x in chosen if x["skipped"] is not None) - (skipped is not None)
        if path_count + encoding_total + len(info["U"]) > budget:
            ineligible.append((v, "budget"))
            continue
        info["skipped"] = skipped
        chosen.append((i, info))
        encoding_total += len(info["U"])
        last = i

    # string counts depend on the gap to the next milestone; the first pass
    # reserved budget for the minimum of five strings each
    skip_count = sum(1 for _, x in chosen if x["skipped"] is not None)
    spare = budget - (D - skip_count) - encoding_total
    milestones = []
    for idx, (i, info) in enumerate(chosen):
        nxt = chosen[idx + 1][0] if idx + 1 < len(chosen) else D
        final = info
        for alpha in range(min(nxt - i, info["capacity"]), MIN_STRINGS, -1):
            trial = _milestone_layout(inst, path, i, width, c, alpha=alpha)[0]
            if trial is not None and len(trial["U"]) - len(info["U"]) <= spare:
                final = trial
                break
        spare -= len(final["U"]) - len(info["U"])
        milestones.append(
            Milestone(
                node=path.nodes[i],
                index=i,
                alpha=len(final["values"]),
                strings=[list(x) for x in final["strings"]],
                values=final["values"],
                encoding_half=final["half"],
                region=final["region"],
                encoding_nodes=final["U"],
                R=final["R"],
                skipped=info["skipped"],
            )
        )

    skipped = {m.skipped for m in milestones if m.skipped is not None}
    path_pebbles = [path.nodes[i] for i in range(D) if path.nodes[i] not in skipped]
    pebbled = set(path_pebbles)
    for m in milestones:
        pebbled.update(m.encoding_nodes)
    if len(pebbled) > budget:
        audit = ", ".join(f"{m.node}:{len(m.encoding_nodes)}" for m in milestones)
        raise FeasibilityError(f"budget {budget} exceeded ({len(pebbled)} pebbles; encodings {audit})")
    plan = MilestonePlan(c, beta, width, milestones, path_pebbles, ineligible)
    placement = PebblePlacement(frozenset(pebbled), budget, "milestone", plan)
    _self_check(inst, path, placement)
    return placement


def _milestone_layout(inst, path, i, width, c, alpha=MIN_STRINGS):
    g = inst.graph
    v = path.nodes[i]
    deg = g.degree(v)
    halves = port_halves(deg)
    nxt = path.out_ports[i]
    enc_half = 1 if nxt in halves[0] else 0
    parent = path.in_ports[i - 1] if i > 0 else None
    region = [p for p in halves[enc_half] if p != parent]
    capacity = 0
    # the slots must fit, and the half must hold alpha(c+1)+3 neighbors
    while layout_length(capacity + 1, width) <= len(region) and (capacity + 1) * (c + 1) + 3 <= deg // 2:
        capacity += 1
    if capacity < MIN_STRINGS:
        return None, f"encoding half holds {capacity} strings, need {MIN_STRINGS}"
    strings, values = [], []
    for j in range(1, alpha + 1):
        guide = _guide_ports(inst, path, i, j, enc_half)
        value = 0
        if guide is not None and width:
            ports, port = guide
            value = block_index(ports, port, width)
        strings.append(int_to_bits(value, width))
        values.append(value)
    slots = layout(strings)
    U = [g.adj[v][region[pos]][0] for pos, bit in enumerate(slots) if bit]
    # encoding pebbles must not neighbor the two path nodes leading into v
    before = {path.nodes[j] for j in (i - 1, i - 2) if j >= 0}
    for u in U:
        if before & set(g.neighbors(u)):
            return None, "encoding pebble adjacent to the approach path"
    R = [nxt] + ([g.port_to(v, path.nodes[i - 1])] if i > 0 else [])
    R += [g.port_to(u, v) for u in U]
    return {
        "strings": strings,
        "values": values,
        "half": enc_half,
        "region": region,
        "U": U,
        "R": R,
        "capacity": capacity,
    }, ""


def read_back(inst: InstanceSpec, placement: PebblePlacement, m: Milestone) -> list[tuple[int, ...]]:
    """Decode a milestone's strings by scanning its region ports in order."""
    g = inst.graph
    bits = [int(g.adj[m.node][p][0] in placement.pebbled) for p in m.region]
    return read_slots(bits + [0, 0, 0])


def _self_check(inst: InstanceSpec, path: PathP, placement: PebblePlacement) -> None:
    plan: MilestonePlan = placement.plan
    for m in plan.milestones:
        if plan.width:
            got = [list(s) for s in read_back(inst, placement, m)]
            if got != m.strings:
                raise PlacementError(f"milestone {m.node}: read-back {got} != planned {m.strings}")
        for j, value in enumerate(m.values, 1):
            guide = _guide_ports(inst, path, m.index, j, m.encoding_half)
            if guide is None:
                continue
            ports, port = guide
            if port not in partition_block(ports, value, plan.width):
                raise PlacementError(f"milestone {m.node}: hop {j} not in advertised block")


# --- dispatch, feasibility, file format --------------------------------------


def place(inst: InstanceSpec, regime: str, k: int) -> PebblePlacement:
    """Run the planner for ``regime``. For ``milestone`` the budget k must be a multiple of D."""
    if regime == "none":
        return no_pebbles()
    if regime == "tree":
        return place_tree_levels(inst, k)
    if regime == "alternate":
        return place_alternate_levels(inst, k)
    if regime == "marker":
        return place_marker_groups(inst, k)
    if regime == "bipartite":
        return place_bipartite_parity(inst, k)
    if regime == "milestone":
        if k < inst.D or k % inst.D:
            raise RegimeError(f"milestone placement needs k = cD, got k={k}, D={inst.D}")
        return place_milestone_encoding(inst, k // inst.D)
    raise RegimeError(f"unknown regime {regime!r}")


def placement_feasible(inst: InstanceSpec, regime: str, k: int) -> tuple[bool, str]:
    try:
        place(inst, regime, k)
    except ImpossibleError as exc:
        return False, str(exc)
    except PlacementError as exc:
        return False, str(exc)
    return True, "ok"


def choose_regime(inst: InstanceSpec, k: int) -> str:
    """Pick the regime for a budget, using only oracle-side knowledge."""
    D = inst.D
    if k == 0:
        return "none"
    if k >= D:
        return "milestone"
    if inst.family in ("tree", "complete-tree"):
        return "tree"
    if inst.family == "bipartite":
        return "bipartite"
    if k >= math.ceil(D / 2):
        return "alternate"
    if k == 1:
        # infeasible; the placement reason then names the impossibility
        return "marker"
    if k >= 2:
        try:
            if marker_layout(D, k).l >= 3:
                return "marker"
        except PlacementError:
            pass
    return "alternate"


def write_placement(placement: PebblePlacement) -> str:
    lines = [f"pebble {v}" for v in sorted(placement.pebbled)]
    plan = asdict(placement.plan) if placement.plan is not None else None
    blob = {"regime": placement.regime, "budget": placement.budget, "plan": plan}
    lines.append("plan " + json.dumps(blob, sort_keys=True))
    return "\n".join(lines) + "\n"


def read_placement(text: str) -> PebblePlacement:
    pebbled = set()
    regime, budget, plan = "none", 0, None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        if kind == "pebble":
            try:
                pebbled.add(int(rest))
            except ValueError:
                raise PlacementError(f"line {lineno}: bad pebble line {raw!r}") from None
        elif kind == "plan":
            blob = json.loads(rest)
            regime, budget, plan = blob["regime"], blob["budget"], blob["plan"]
        else:
            raise PlacementError(f"line {lineno}: unknown directive {kind!r}")
    return PebblePlacement(frozenset(pebbled), budget or len(pebbled), regime, plan)
