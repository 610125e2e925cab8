"""Command line entry point: ``hunt <command> ...``. Exit status 0 iff all checks pass."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .agent import HuntAborted, HuntFailure, begin_hunt
from .graph import GraphError, gen_instance, parse_graph, read_instance, validate_graph, write_instance
from .harness import (
    check_lower_bound_counting,
    emit_report,
    max_ratio,
    parse_config,
    run_experiment,
)
from .hunters import HUNTERS, algorithm_for
from .oracle import PlacementError, choose_regime, place, read_placement, write_placement

REGIMES = ["auto", "none", "tree", "alternate", "bipartite", "marker", "milestone"]


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = parse_config(Path(args.config).read_text())
    records = run_experiment(cfg)
    _write(args.out, emit_report(records, args.format))
    ok = [r for r in records if r.status == "ok"]
    skipped = sum(r.status == "skip" for r in records)
    failed = sum(r.status == "failure" for r in records)
    passed = sum(r.passed for r in ok)
    print(
        f"{len(records)} cells: {len(ok)} hunted, {skipped} skipped, {failed} failed; "
        f"{passed}/{len(ok)} within bound; max ratio {max_ratio(records):.4f}",
        file=sys.stderr,
    )
    return 0 if failed == 0 and passed == len(ok) else 1


def cmd_gen(args: argparse.Namespace) -> int:
    inst = gen_instance(args.family, args.delta, args.D, args.seed, hubs=args.hubs)
    _write(args.out, write_instance(inst))
    return 0


def cmd_place(args: argparse.Namespace) -> int:
    inst = read_instance(Path(args.graph).read_text(), args.family)
    regime = choose_regime(inst, args.k) if args.regime == "auto" else args.regime
    try:
        placement = place(inst, regime, args.k)
    except PlacementError as exc:
        print(f"placement failed: {exc}", file=sys.stderr)
        return 1
    _write(args.out, write_placement(placement))
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    inst = read_instance(Path(args.graph).read_text(), args.family)
    placement = read_placement(Path(args.placement).read_text())
    hunt = algorithm_for(args.algo, placement.regime)
    view, _ = begin_hunt(inst, placement, budget=args.budget)
    try:
        result = hunt(view)
    except (HuntFailure, HuntAborted) as exc:
        print(f"hunt failed after {view.time} moves: {exc}", file=sys.stderr)
        if args.transcript:
            Path(args.transcript).write_text(view.transcript.export())
        return 1
    if args.transcript:
        Path(args.transcript).write_text(result.transcript.export())
    print(f"found={str(result.found).lower()} time={result.time} pebbles_seen={result.pebbles_seen}")
    return 0 if result.found else 1


def cmd_lowerbound(args: argparse.Namespace) -> int:
    print("delta,D,k,p,x_min,formula,pass")
    ok = True
    for delta in range(3, args.deltamax + 1):
        for D in range(2, args.dmax + 1):
            for k in range(1, D):
                rec = check_lower_bound_counting(delta, D, k)
                ok &= rec.passed
                print(f"{delta},{D},{k},{rec.p},{rec.x_min},{rec.formula:.6f},{str(rec.passed).lower()}")
    return 0 if ok else 1


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        g = parse_graph(Path(args.graph).read_text())
    except GraphError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    report = validate_graph(g)
    for v in report.violations:
        print(v)
    print(f"{g.n} nodes, max degree {g.max_degree}: {'ok' if report.ok else 'invalid'}")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hunt", description="Treasure hunt with pebbles on anonymous graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment grid and write a report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("--family", default="general", choices=["general", "bipartite", "tree", "complete-tree"])
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hubs", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("place", help="compute a pebble placement")
    p.add_argument("--graph", required=True)
    p.add_argument("--regime", choices=REGIMES, default="auto")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--family", default="general")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_place)

    p = sub.add_parser("solve", help="run a hunt on an instance and placement")
    p.add_argument("--graph", required=True)
    p.add_argument("--placement", required=True)
    p.add_argument("--algo", choices=["auto", *HUNTERS], default="auto")
    p.add_argument("--family", default="general")
    p.add_argument("--transcript")
    p.add_argument("--budget", type=int, default=10_000_000)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lowerbound", help="check the counting lower bound over a grid")
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--deltamax", type=int, required=True)
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("verify", help="validate a graph file")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
