"""Command line front end: single scheduling runs, exact solves, LP export,
and full benchmark grids.

Every failure path prints one JSON error line to stderr and exits nonzero, so
wrapping scripts never have to scrape prose.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import bench
from .bench import (
    BUILDING_METHODS,
    ORDERED_METHODS,
    ExperimentConfig,
    load_config,
    render_table,
    report,
    run_experiment,
)
from .conflict import conflict_graph, dependency_dag
from .exact.formulations import (
    building_rounds_model,
    building_timed_model,
    ordered_rounds_model,
    ordered_timed_model,
)
from .exact.lp import lp_text, write_lp
from .exact.solver import skip_reason, solve
from .model import BlockKind, Workload
from .workload import filter_transfers, ingest

__all__ = ["main"]


class _UsageError(ValueError):
    """Bad command line; printed as a machine-readable error like any other."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _add_source_args(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--synth", metavar="SPEC", help="synthetic workload spec, e.g. 'random(n=50)'")
    source.add_argument("--trace", metavar="PATH", help="line-delimited trace file, .gz accepted")
    parser.add_argument(
        "--transfers-only",
        action="store_true",
        help="keep only plain transfer records from the trace",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for synthetic workloads")


def _add_output_args(parser: argparse.ArgumentParser, formats: tuple[str, ...]) -> None:
    parser.add_argument("--format", choices=formats, default=formats[0], help="output format")
    parser.add_argument("--out", metavar="PATH", default=None, help="write here instead of stdout")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="ascii")
        print(out)


def _single_run_config(args: argparse.Namespace, problem: str, kind: BlockKind) -> ExperimentConfig:
    return ExperimentConfig(
        problem=problem,
        kind=kind,
        methods=tuple(dict.fromkeys(args.method or ["greedy"])),
        cores=(args.cores,),
        sizes=(args.size,),
        pool_factors=(getattr(args, "pool_factor", 1),) if problem == "building" else (1,),
        synth_spec=args.synth,
        trace=args.trace,
        transfers_only=args.transfers_only,
        workloads=args.workloads,
        seed=args.seed,
        time_limit=args.time_limit,
        jobs=1,
    )


def _run_ordered(args: argparse.Namespace) -> int:
    if (args.rounds is None) == (args.budget is None):
        raise _UsageError("give exactly one of --rounds and --budget")
    kind = BlockKind.HOMOGENEOUS if args.rounds is not None else BlockKind.HETEROGENEOUS
    args.size = args.rounds if args.rounds is not None else args.budget
    rows = run_experiment(_single_run_config(args, "ordered", kind))
    _emit(render_table(rows, args.format), args.out)
    return 0


def _run_building(args: argparse.Namespace) -> int:
    args.size = args.budget
    rows = run_experiment(_single_run_config(args, "building", BlockKind(args.kind)))
    _emit(render_table(rows, args.format), args.out)
    return 0


def _one_workload(args: argparse.Namespace, problem: str, kind: BlockKind) -> Workload:
    config = ExperimentConfig(
        problem=problem,
        kind=kind,
        methods=(),
        cores=(args.cores,),
        sizes=(args.size,),
        synth_spec=args.synth,
        trace=args.trace,
        transfers_only=args.transfers_only,
        seed=args.seed,
        workloads=1,
    )
    records = None
    if config.trace is not None:
        records = ingest(config.trace)
        if config.transfers_only:
            records = filter_transfers(records)
    cell = bench._Cell(args.size, args.cores, 1)
    return bench._cell_workloads(config, cell, records)[0]


def _build_model(args: argparse.Namespace, workload: Workload):
    if args.problem == "ordered":
        dag = dependency_dag(workload.txs)
        if args.formulation == "rounds":
            return ordered_rounds_model(dag, args.cores)
        return ordered_timed_model(dag, workload.txs, args.cores)
    graph = conflict_graph(workload.txs)
    budget = bench._time_budget(workload, args.size)
    if args.formulation == "rounds":
        step = workload.txs[0].exec_time if workload.txs else 1
        weights = [tx.reward for tx in workload.txs]
        return building_rounds_model(graph, weights, args.cores, budget // step)
    return building_timed_model(graph, workload.txs, args.cores, budget)


def _exact_kind(args: argparse.Namespace) -> BlockKind:
    if args.problem == "ordered":
        if (args.rounds is None) == (args.budget is None):
            raise _UsageError("give exactly one of --rounds and --budget")
        args.size = args.rounds if args.rounds is not None else args.budget
        return BlockKind.HOMOGENEOUS if args.rounds is not None else BlockKind.HETEROGENEOUS
    if args.budget is None:
        raise _UsageError("block building needs --budget")
    args.size = args.budget
    return BlockKind(args.kind)


def _run_exact(args: argparse.Namespace) -> int:
    kind = _exact_kind(args)
    if args.formulation == "rounds" and kind is not BlockKind.HOMOGENEOUS:
        raise _UsageError("the round-indexed formulation needs uniform costs")
    workload = _one_workload(args, args.problem, kind)
    model = _build_model(args, workload)
    reason = skip_reason(model)
    if reason:
        raise ValueError(f"instance beyond the solver's practical reach: {reason}")
    result = solve(model, time_limit=args.time_limit)
    objective = "" if result.objective is None else str(result.objective)
    fields = [
        ("status", result.status.value),
        ("objective", objective),
        ("nodes", str(result.nodes)),
        ("elapsed", f"{result.elapsed:.3f}"),
    ]
    if args.format == "csv":
        text = ",".join(name for name, _ in fields) + "\n"
        text += ",".join(value for _, value in fields) + "\n"
    else:
        text = "".join(f"{name} {value}\n" for name, value in fields)
    _emit(text, args.out)
    return 0


def _run_export_lp(args: argparse.Namespace) -> int:
    kind = _exact_kind(args)
    if args.formulation == "rounds" and kind is not BlockKind.HOMOGENEOUS:
        raise _UsageError("the round-indexed formulation needs uniform costs")
    workload = _one_workload(args, args.problem, kind)
    model = _build_model(args, workload)
    if args.out is None:
        sys.stdout.write(lp_text(model))
    else:
        write_lp(model, args.out)
        print(args.out)
    return 0


def _run_bench(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.jobs is not None:
        config = ExperimentConfig(**{**config.__dict__, "jobs": args.jobs})
    rows = run_experiment(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if args.format in ("csv", "both"):
        written.append(report(rows, "csv", out_dir / "report.csv"))
    if args.format in ("text", "both"):
        written.append(report(rows, "text", out_dir / "report.txt"))
    if not args.no_figures:
        from .figures import render_figures  # matplotlib import is slow; keep it off other paths

        written.extend(render_figures(rows, out_dir))
    for path in written:
        print(path)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="blocksched", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ordered = commands.add_parser(
        "obs",
        aliases=["schedule"],
        help="schedule one ordered block on p cores",
    )
    _add_source_args(ordered)
    ordered.add_argument("-p", "--cores", type=int, required=True)
    ordered.add_argument("-R", "--rounds", type=int, default=None, help="uniform block size in rounds")
    ordered.add_argument("-B", "--budget", type=int, default=None, help="mixed block size in gas")
    ordered.add_argument(
        "--method", action="append", choices=ORDERED_METHODS, help="scheduler to run, repeatable"
    )
    ordered.add_argument("--workloads", type=int, default=1, help="blocks to average over")
    ordered.add_argument("--time-limit", type=float, default=60.0, help="exact solver limit, seconds")
    _add_output_args(ordered, ("text", "csv"))
    ordered.set_defaults(run=_run_ordered)

    building = commands.add_parser(
        "pbc",
        aliases=["build"],
        help="build a block from a candidate pool under a time budget",
    )
    _add_source_args(building)
    building.add_argument("-p", "--cores", type=int, required=True)
    building.add_argument(
        "-B", "--budget", type=int, required=True, help="per-core budget: rounds if uniform, gas if mixed"
    )
    building.add_argument("-X", "--pool-factor", type=int, default=1, help="pool size in blocks")
    building.add_argument(
        "--kind", choices=[k.value for k in BlockKind], default=BlockKind.HOMOGENEOUS.value
    )
    building.add_argument(
        "--method", action="append", choices=BUILDING_METHODS, help="builder to run, repeatable"
    )
    building.add_argument("--workloads", type=int, default=1, help="pools to average over")
    building.add_argument("--time-limit", type=float, default=60.0, help="exact solver limit, seconds")
    _add_output_args(building, ("text", "csv"))
    building.set_defaults(run=_run_building)

    def add_model_args(sub: argparse.ArgumentParser) -> None:
        _add_source_args(sub)
        sub.add_argument("--problem", choices=("ordered", "building"), required=True)
        sub.add_argument("--formulation", choices=("rounds", "timed"), default="timed")
        sub.add_argument("-p", "--cores", type=int, required=True)
        sub.add_argument("-R", "--rounds", type=int, default=None)
        sub.add_argument("-B", "--budget", type=int, default=None)
        sub.add_argument(
            "--kind", choices=[k.value for k in BlockKind], default=BlockKind.HOMOGENEOUS.value
        )

    exact = commands.add_parser("exact", help="solve one instance to proven optimality")
    add_model_args(exact)
    exact.add_argument("--time-limit", type=float, default=60.0)
    _add_output_args(exact, ("text", "csv"))
    exact.set_defaults(run=_run_exact)

    export = commands.add_parser("export-lp", help="write one instance as an LP file")
    add_model_args(export)
    export.add_argument("--out", metavar="PATH", default=None, help="write here instead of stdout")
    export.set_defaults(run=_run_export_lp)

    grid = commands.add_parser("bench", help="run an experiment grid from a config file")
    grid.add_argument("--config", required=True, metavar="PATH", help="JSON experiment config")
    grid.add_argument("--out-dir", default="bench-out", metavar="DIR")
    grid.add_argument("--format", choices=("both", "csv", "text"), default="both")
    grid.add_argument("--jobs", type=int, default=None, help="override the config's worker count")
    grid.add_argument("--no-figures", action="store_true", help="skip chart rendering")
    grid.set_defaults(run=_run_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.run(args)
    except _UsageError as err:
        print(json.dumps({"error": "usage", "message": str(err)}), file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(
            json.dumps({"error": type(err).__name__, "message": str(err)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
