"""Experiment runner, bound checks and reports."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from .agent import HuntAborted, HuntFailure, Transcript, begin_hunt, bounded_path_search, replay_positions
from .graph import (
    InstanceSpec,
    bfs_distances,
    complete_tree_leaves,
    gen_complete_tree,
    gen_instance,
    make_instance,
    shortest_path,
)
from .hunters import algorithm_for
from .oracle import (
    PebblePlacement,
    choose_regime,
    fatness_threshold,
    place,
    placement_feasible,
)

C_BOUND = 16
GUARD_FACTOR = 64


# --- bound formulas ---------------------------------------------------------


def _power(base: float, num: int, den: int, exponent: str) -> float:
    if exponent == "ceil":
        return base ** math.ceil(num / den)
    if exponent == "real":
        return base ** (num / den)
    raise ValueError(f"exponent mode must be 'ceil' or 'real', not {exponent!r}")


def bound_value(
    regime: str,
    *,
    D: int,
    delta: int,
    k: int = 0,
    c: int | None = None,
    fat: bool = True,
    exponent: str = "ceil",
) -> float:
    """Asymptotic time bound for a regime, without the constant.

    ``fat`` matters only for milestones: with no fat node on the path the
    bound is beta * D.
    """
    if regime == "none":
        return float(delta**D)
    if regime in ("tree", "alternate"):
        return k * _power(delta, D, k + 1, exponent)
    if regime == "marker":
        eta = k // 3
        return D * _power(delta, D, 2 * eta + 1, exponent)
    if regime == "bipartite":
        return k * _power(delta, D, k, exponent)
    if regime == "milestone":
        if c is None:
            c = k // D
        if not fat:
            return float(fatness_threshold(c) * D)
        # (delta / 2^(c/2))^2 written without the square root
        return c * D * delta**2 / 2**c + c * D
    raise ValueError(f"no bound for regime {regime!r}")


# --- records ----------------------------------------------------------------


@dataclass
class ExperimentRecord:
    family: str
    delta: int
    D: int
    seed: int
    regime: str
    k: int
    c: int | None = None
    hubs: int = 0
    algorithm: str = ""
    status: str = "ok"  # ok | skip | failure
    found: bool = False
    time: int = 0
    bound_value: float = 0.0
    ratio: float = 0.0
    passed: bool = False
    progress: bool = True
    fat: bool = False
    reason: str = ""
    transcript_path: str = ""


COLUMNS = [f.name for f in fields(ExperimentRecord)]


def check_upper_bound(rec: ExperimentRecord, C: float = C_BOUND, exponent: str = "ceil") -> bool:
    """time <= C * bound for a successful record; fills in bound_value and ratio."""
    if rec.status != "ok" or not rec.found:
        return False
    bound = bound_value(rec.regime, D=rec.D, delta=rec.delta, k=rec.k, c=rec.c, fat=rec.fat, exponent=exponent)
    rec.bound_value = float(bound)
    rec.ratio = rec.time / bound
    return rec.time <= C * bound


@dataclass
class LowerBoundRecord:
    delta: int
    D: int
    k: int
    p: int
    x_min: int
    formula: float
    passed: bool


def lower_bound_formula(delta: int, D: int, k: int) -> float:
    return (k / math.e) ** (k / (k + 1)) * (delta - 1) ** (D / (k + 1))


def check_lower_bound_counting(delta: int, D: int, k: int) -> LowerBoundRecord:
    """Least x with x * C(x, k) >= delta (delta-1)^(D-1), against the closed form."""
    if delta < 3 or D < 1 or not 1 <= k < D:
        raise ValueError(f"need delta >= 3, D >= 1 and 1 <= k < D; got {delta}, {D}, {k}")
    p = delta * (delta - 1) ** (D - 1)
    x = k
    while x * math.comb(x, k) < p:
        x += 1
    formula = lower_bound_formula(delta, D, k)
    return LowerBoundRecord(delta, D, k, p, x, formula, x >= math.floor(formula))


# --- progress ---------------------------------------------------------------


def search_node_levels(inst: InstanceSpec, transcript: Transcript) -> list[int]:
    """BFS level from s of the agent at every ``search_node`` event."""
    dist = bfs_distances(inst.graph, inst.s)
    pos = replay_positions(inst, transcript)
    return [dist[pos[t]] for t, kind, _ in transcript.events if kind == "search_node"]


def progress_ok(levels: Sequence[int]) -> bool:
    return all(b > a for a, b in zip(levels, levels[1:]))


# --- running ----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    families: list[str] = field(default_factory=lambda: ["general"])
    deltas: list[int] = field(default_factory=lambda: [3])
    Ds: list[int] = field(default_factory=lambda: [4])
    # None means every k in 1..D-1
    ks: list[int] | None = None
    cs: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    hubs: list[int] = field(default_factory=lambda: [0])
    regime: str = "auto"
    algorithm: str = "auto"
    transcript_dir: str = ""


_LIST_KEYS = {"families": str, "deltas": int, "Ds": int, "ks": int, "cs": int, "seeds": int, "hubs": int}
_KEY_ALIASES = {"family": "families", "delta": "deltas", "D": "Ds", "k": "ks", "c": "cs", "seed": "seeds"}


def _int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out += range(int(lo), int(hi) + 1)
        elif part:
            out.append(int(part))
    return out


def parse_config(text: str) -> ExperimentConfig:
    """``key=value`` lines; grids are comma lists and ``a..b`` ranges; ``ks=all``."""
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = _KEY_ALIASES.get(key, key)
        if key == "ks" and value == "all":
            cfg.ks = None
        elif key in _LIST_KEYS:
            conv = _LIST_KEYS[key]
            setattr(cfg, key, [x.strip() for x in value.split(",") if x.strip()] if conv is str else _int_list(value))
        elif key in ("regime", "algorithm", "transcript_dir"):
            setattr(cfg, key, value)
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return cfg


def _cells(cfg: ExperimentConfig):
    for family in cfg.families:
        for delta in cfg.deltas:
            for D in cfg.Ds:
                for hubs in cfg.hubs:
                    if cfg.cs:
                        budgets = [(c * D, c) for c in cfg.cs]
                    else:
                        ks = cfg.ks if cfg.ks is not None else range(1, D)
                        budgets = [(k, None) for k in ks]
                    for k, c in budgets:
                        for seed in cfg.seeds:
                            yield family, delta, D, hubs, k, c, seed


def run_cell(family: str, delta: int, D: int, seed: int, k: int, *, c: int | None = None, hubs: int = 0,
             regime: str = "auto", algorithm: str = "auto", transcript_dir: str = "") -> ExperimentRecord:
    inst = gen_instance(family, delta, D, seed, hubs=hubs)
    if regime == "auto":
        regime = "milestone" if c is not None else choose_regime(inst, k)
    rec = ExperimentRecord(family, delta, D, seed, regime, k, c, hubs)
    ok, reason = placement_feasible(inst, regime, k)
    if not ok:
        rec.status, rec.reason = "skip", reason
        return rec
    placement = place(inst, regime, k)
    return run_hunt(inst, placement, rec, algorithm, transcript_dir)


def _is_fat(inst: InstanceSpec, c: int) -> bool:
    """Whether some path node before t reaches the fatness threshold."""
    path = shortest_path(inst.graph, inst.s, inst.t)
    beta = fatness_threshold(c)
    return any(inst.graph.degree(v) >= beta for v in path.nodes[:-1])


def run_hunt(inst: InstanceSpec, placement: PebblePlacement, rec: ExperimentRecord,
             algorithm: str = "auto", transcript_dir: str = "") -> ExperimentRecord:
    if rec.regime == "milestone" and rec.c is None:
        rec.c = rec.k // rec.D
    rec.fat = rec.regime == "milestone" and _is_fat(inst, rec.c)
    hunt = algorithm_for(algorithm, rec.regime)
    rec.algorithm = hunt.__name__.removeprefix("hunt_")
    # a guard against runaway loops, far above any bound we check
    guard = bound_value(rec.regime, D=rec.D, delta=inst.graph.max_degree, k=rec.k, c=rec.c, fat=rec.fat)
    view, _ = begin_hunt(inst, placement, budget=int(GUARD_FACTOR * C_BOUND * max(guard, inst.D)) + 1000)
    try:
        result = hunt(view)
    except (HuntFailure, HuntAborted) as exc:
        rec.status, rec.reason = "failure", f"{type(exc).__name__}: {exc}"
        rec.time = view.time
        if transcript_dir:
            rec.transcript_path = _dump(transcript_dir, rec, view.transcript)
        return rec
    rec.found, rec.time = result.found, result.time
    rec.progress = progress_ok(search_node_levels(inst, result.transcript))
    rec.passed = check_upper_bound(rec) and rec.progress
    return rec


def _dump(directory: str, rec: ExperimentRecord, transcript: Transcript) -> str:
    path = Path(directory) / f"{rec.family}-d{rec.delta}-D{rec.D}-k{rec.k}-s{rec.seed}.transcript"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(transcript.export() + transcript.export_events())
    return str(path)


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    return [
        run_cell(family, delta, D, seed, k, c=c, hubs=hubs, regime=cfg.regime,
                 algorithm=cfg.algorithm, transcript_dir=cfg.transcript_dir)
        for family, delta, D, hubs, k, c, seed in _cells(cfg)
    ]


# --- single pebble on a complete tree ---------------------------------------


@dataclass
class SinglePebbleTable:
    delta: int
    D: int
    worst: dict[int, int]  # pebble level -> worst-case time over treasure leaves

    @property
    def best_levels(self) -> list[int]:
        low = min(self.worst.values())
        return sorted(i for i, t in self.worst.items() if t == low)

    @property
    def optimal_near_middle(self) -> bool:
        return bool(set(self.best_levels) & {self.D // 2, (self.D + 1) // 2}) or self.D == 1


MAX_BRUTE_NODES = 200


def _single_pebble_time(inst: InstanceSpec, pebble: int) -> int:
    placement = PebblePlacement(frozenset({pebble}), 1, "single", None)
    view, start = begin_hunt(inst, placement)
    view.halt_on_treasure = False
    excluded = []
    if not start.pebble:
        r = 0
        while True:
            r += 1
            out = bounded_path_search(view, r, stop=lambda o: o.pebble, min_depth=r)
            if not out.exhausted:
                break
        if out.hit.treasure:
            return view.time
        excluded = [out.hit.arrival_port]
    r = 0
    while not view.observe().treasure:
        r += 1
        bounded_path_search(view, r, excluded)
    return view.time


def brute_force_optimal_single_pebble(delta: int, D: int) -> SinglePebbleTable:
    """Worst-case hunt time for every level of a single pebble on a complete tree.

    The agent deepens from the root until it meets the pebble, then deepens
    below the pebble, never stepping back through the port it came in by.
    """
    g, root = gen_complete_tree(delta, D)
    if g.n > MAX_BRUTE_NODES:
        raise ValueError(f"complete tree with {g.n} nodes exceeds the brute-force limit {MAX_BRUTE_NODES}")
    leaves = complete_tree_leaves(g, root)
    dist = bfs_distances(g, root)
    worst: dict[int, int] = {}
    for leaf in leaves:
        inst = make_instance(g, root, leaf, "complete-tree", 0)
        # walk up from the leaf to list its ancestors by level
        chain = [leaf]
        while chain[-1] != root:
            chain.append(g.neighbor(chain[-1], 0)[0])
        ancestors = {dist[v]: v for v in chain}
        for level in range(D):
            t = _single_pebble_time(inst, ancestors[level])
            worst[level] = max(worst.get(level, 0), t)
    return SinglePebbleTable(delta, D, worst)


# --- reports ----------------------------------------------------------------


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    if value is None:
        return ""
    return str(value)


def emit_report(records: Iterable[ExperimentRecord], fmt: str = "csv") -> str:
    records = list(records)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for rec in records:
            writer.writerow([_cell(getattr(rec, col)) for col in COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        rows = []
        for rec in records:
            row = asdict(rec)
            for key in ("bound_value", "ratio"):
                row[key] = round(row[key], 6)
            rows.append(row)
        return json.dumps(rows, indent=2) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def max_ratio(records: Iterable[ExperimentRecord]) -> float:
    return max((r.ratio for r in records if r.status == "ok"), default=0.0)


# --- fixed sweeps -----------------------------------------------------------

SWEEP_DELTAS = (3, 4, 6, 8)
SWEEP_DS = tuple(range(2, 11))
# uninformed search costs about delta^D moves; cells above this are skipped
NAIVE_CAP = 10**5
SWEEP_REGIMES = ("none", "alternate", "bipartite", "marker", "milestone")


def _sweep_budgets(regime: str, delta: int, D: int) -> list[tuple[str, int, int | None]]:
    """(family, k, c) choices for one (delta, D) cell."""
    if regime == "none":
        return [("general", 0, None)] if delta**D <= NAIVE_CAP else []
    if regime == "alternate":
        return [("general", k, None) for k in range(math.ceil(D / 2), D)]
    if regime == "bipartite":
        return [("bipartite", k, None) for k in range(1, D)]
    if regime == "marker":
        return [("general", k, None) for k in range(2, math.ceil(D / 2))]
    if regime == "milestone":
        return [("general", c * D, c) for c in (1, 2)]
    raise ValueError(f"no sweep for regime {regime!r}")


def sweep(regime: str, count: int = 100, *, max_seed: int = 10_000) -> list[ExperimentRecord]:
    """The first ``count`` feasible cells of a fixed seed walk over the sweep grid.

    Seed ``s`` picks delta from ``SWEEP_DELTAS[s % 4]``, D from
    ``SWEEP_DS[(s // 4) % 9]`` and cycles through the budgets valid there.
    """
    records: list[ExperimentRecord] = []
    seed = 0
    while len(records) < count and seed < max_seed:
        delta = SWEEP_DELTAS[seed % len(SWEEP_DELTAS)]
        D = SWEEP_DS[(seed // len(SWEEP_DELTAS)) % len(SWEEP_DS)]
        options = _sweep_budgets(regime, delta, D)
        if options:
            family, k, c = options[(seed // 36) % len(options)]
            rec = run_cell(family, delta, D, seed, k, c=c, regime=regime)
            if rec.status != "skip":
                records.append(rec)
        seed += 1
    return records


def milestone_desk_sweep(cs=(1, 2), deltas=(32, 48, 64), Ds=range(2, 9), hubs=(0, 1, 2, 3), seeds=(0, 1)):
    """Milestone cells at high degree, where hub nodes on the path can be fat."""
    return [
        run_cell("general", delta, D, seed, c * D, c=c, hubs=h, regime="milestone")
        for c in cs
        for delta in deltas
        for D in Ds
        for h in hubs
        for seed in seeds
    ]
