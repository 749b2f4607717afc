"""Experiment grids over the schedulers, reduced to small metric tables.

The runner sweeps a grid of (block size, core count, pool factor) cells,
repeats each cell over several workloads, validates every schedule before
measuring it, and reports per-cell means in a fixed column order. Cells are
independent and the final table is sorted canonically, so the output does not
depend on how many worker threads computed it.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .builder import PoolOrder, run_builder
from .conflict import conflict_graph, dependency_dag
from .exact.bounds import reward_upper_bound
from .exact.formulations import (
    building_rounds_model,
    building_timed_model,
    ordered_rounds_model,
    ordered_timed_model,
)
from .exact.solver import SolveStatus, skip_reason, solve
from .model import BlockKind, PoolParams, Schedule, Workload, sequential_time
from .ordered import run_ordered, schedule_in_order
from .validate import check_built_block, check_ordered_schedule
from .workload import filter_transfers, ingest, slice_blocks, slice_pools, synth

__all__ = [
    "ORDERED_METHODS",
    "BUILDING_METHODS",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "Row",
    "speedup",
    "run_experiment",
    "render_table",
    "report",
    "config_from_mapping",
    "load_config",
]

ORDERED_METHODS = ("greedy", "in-order", "in-order-skip", "exact-rounds", "exact-timed")
BUILDING_METHODS = ("greedy", "reward-greedy", "exact-rounds", "exact-timed", "upper-bound")

# Column order of every emitted table. R_or_B is the block-size axis: rounds
# for uniform ordered blocks, the budget otherwise.
CSV_COLUMNS = (
    "problem",
    "kind",
    "R_or_B",
    "p",
    "X",
    "method",
    "metric",
    "mean",
    "n",
    "timeout_flag",
)

_METRIC_ORDER = ("rounds", "makespan", "reward", "speedup", "percent_of_bound")


def speedup(workload: Workload, schedule: Schedule) -> Fraction:
    """Sequential running time of the scheduled set over its makespan.

    Exact rational; an empty schedule has no meaningful ratio and reports 1.
    """
    span = schedule.makespan
    if span == 0:
        return Fraction(1)
    return Fraction(sequential_time(workload, schedule.selected), span)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a problem, a workload source, a grid, and methods.

    ``sizes`` is the block-size axis: round counts for uniform ordered
    blocks, time budgets for block building, and per-block gas budgets for
    mixed-cost ordered blocks. Exactly one of ``synth_spec`` and ``trace``
    names the workload source; a synth spec may use the placeholders ``{n}``,
    ``{cores}``, ``{rounds}``, ``{budget}`` and ``{pool_factor}``, filled in
    per grid cell.
    """

    problem: str
    kind: BlockKind
    methods: tuple[str, ...]
    cores: tuple[int, ...]
    sizes: tuple[int, ...]
    pool_factors: tuple[int, ...] = (1,)
    synth_spec: str | None = None
    trace: str | None = None
    transfers_only: bool = False
    workloads: int = 5
    seed: int = 0
    time_limit: float = 60.0
    jobs: int = 1

    def __post_init__(self) -> None:
        known = _methods_for(self.problem)
        for name in self.methods:
            if name not in known:
                raise ValueError(
                    f"unknown {self.problem} method {name!r}; expected one of {known}"
                )
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate method names in config")
        if "exact-rounds" in self.methods and self.kind is not BlockKind.HOMOGENEOUS:
            raise ValueError("the round-indexed exact model needs uniform costs")
        for label, values in (("cores", self.cores), ("sizes", self.sizes)):
            if not values:
                raise ValueError(f"{label} grid must not be empty")
            if any(v < 1 for v in values):
                raise ValueError(f"{label} must all be positive, got {values}")
        if not self.pool_factors or any(x < 1 for x in self.pool_factors):
            raise ValueError(f"pool factors must be positive, got {self.pool_factors}")
        if self.problem == "ordered" and self.pool_factors != (1,):
            raise ValueError("pool factors only apply to block building")
        if (self.synth_spec is None) == (self.trace is None):
            raise ValueError("config needs exactly one of synth_spec and trace")
        if self.workloads < 1:
            raise ValueError(f"workloads per cell must be positive, got {self.workloads}")
        if self.time_limit <= 0:
            raise ValueError(f"time limit must be positive, got {self.time_limit}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be positive, got {self.jobs}")


@dataclass(frozen=True)
class Row:
    """One table line: the mean of one metric for one method in one cell."""

    problem: str
    kind: str
    size: int
    cores: int
    pool_factor: int
    method: str
    metric: str
    mean: Fraction | None
    n: int
    timeout_flag: str = ""


@dataclass(frozen=True)
class _Cell:
    size: int
    cores: int
    pool_factor: int


def _methods_for(problem: str) -> tuple[str, ...]:
    if problem == "ordered":
        return ORDERED_METHODS
    if problem == "building":
        return BUILDING_METHODS
    raise ValueError(f"unknown problem {problem!r}; expected ordered or building")


def _primary_metric(config: ExperimentConfig) -> str:
    if config.problem == "building":
        return "reward"
    return "rounds" if config.kind is BlockKind.HOMOGENEOUS else "makespan"


def _time_budget(workload: Workload, size: int) -> int:
    """Per-core time budget for building a block out of this pool."""
    if isinstance(workload.params, PoolParams):
        return workload.params.budget
    if workload.kind is BlockKind.HOMOGENEOUS and workload.txs:
        return size * workload.txs[0].exec_time
    return size


def _ordered_metrics(workload: Workload, schedule: Schedule) -> dict[str, Fraction]:
    check_ordered_schedule(workload, schedule)
    span = schedule.makespan
    out: dict[str, Fraction] = {}
    if workload.kind is BlockKind.HOMOGENEOUS:
        step = workload.txs[0].exec_time if workload.txs else 1
        out["rounds"] = Fraction(span, step)
    else:
        out["makespan"] = Fraction(span)
    out["speedup"] = speedup(workload, schedule)
    return out


def _bounded_reward(reward: int, bound: int, out: dict[str, Fraction]) -> None:
    out["reward"] = Fraction(reward)
    if bound:
        percent = Fraction(100 * reward, bound)
        if percent > 100:
            raise AssertionError(f"reward {reward} exceeds its upper bound {bound}")
        out["percent_of_bound"] = percent


def _building_metrics(
    workload: Workload, schedule: Schedule, budget: int, bound: int
) -> dict[str, Fraction]:
    check_built_block(workload, schedule, budget)
    reward = sum(workload.txs[i].reward for i in schedule.selected)
    out: dict[str, Fraction] = {}
    _bounded_reward(reward, bound, out)
    out["speedup"] = speedup(workload, schedule)
    return out


def _run_ordered_method(
    method: str, workload: Workload, cell: _Cell, config: ExperimentConfig
) -> tuple[dict[str, Fraction] | None, str]:
    if method == "greedy":
        return _ordered_metrics(workload, run_ordered(workload, cell.cores)), ""
    if method in ("in-order", "in-order-skip"):
        graph = conflict_graph(workload.txs)
        schedule = schedule_in_order(
            workload.txs, cell.cores, graph, skip_blocked=method == "in-order-skip"
        )
        return _ordered_metrics(workload, schedule), ""
    dag = dependency_dag(workload.txs)
    if method == "exact-rounds":
        model = ordered_rounds_model(dag, cell.cores)
    else:
        model = ordered_timed_model(dag, workload.txs, cell.cores)
    reason = skip_reason(model)
    if reason:
        return None, reason
    result = solve(model, time_limit=config.time_limit)
    if result.objective is None:
        return None, result.status.value
    flag = "" if result.status is SolveStatus.OPTIMAL else result.status.value
    step = workload.txs[0].exec_time if workload.txs else 1
    span = result.objective * step if method == "exact-rounds" else result.objective
    out: dict[str, Fraction] = {}
    if workload.kind is BlockKind.HOMOGENEOUS:
        out["rounds"] = Fraction(span, step)
    else:
        out["makespan"] = Fraction(span)
    out["speedup"] = Fraction(sequential_time(workload), span) if span else Fraction(1)
    return out, flag


def _run_building_method(
    method: str, workload: Workload, cell: _Cell, config: ExperimentConfig
) -> tuple[dict[str, Fraction] | None, str]:
    budget = _time_budget(workload, cell.size)
    bound = reward_upper_bound(workload.txs, cell.cores, budget)
    if method == "upper-bound":
        return {"reward": Fraction(bound)}, ""
    if method in ("greedy", "reward-greedy"):
        order = PoolOrder.DENSITY if method == "greedy" else PoolOrder.REWARD
        schedule = run_builder(workload, cell.cores, budget, order=order)
        return _building_metrics(workload, schedule, budget, bound), ""
    graph = conflict_graph(workload.txs)
    if method == "exact-rounds":
        step = workload.txs[0].exec_time if workload.txs else 1
        weights = [tx.reward for tx in workload.txs]
        model = building_rounds_model(graph, weights, cell.cores, budget // step)
    else:
        model = building_timed_model(graph, workload.txs, cell.cores, budget)
    reason = skip_reason(model)
    if reason:
        return None, reason
    result = solve(model, time_limit=config.time_limit)
    if result.objective is None:
        return None, result.status.value
    flag = "" if result.status is SolveStatus.OPTIMAL else result.status.value
    out: dict[str, Fraction] = {}
    _bounded_reward(result.objective, bound, out)
    return out, flag


def _template_values(config: ExperimentConfig, cell: _Cell) -> dict[str, int]:
    # {n} is the cell's uniform capacity in transactions
    pool = cell.pool_factor if config.problem == "building" else 1
    return {
        "n": cell.size * cell.cores * pool,
        "cores": cell.cores,
        "rounds": cell.size,
        "budget": cell.size,
        "pool_factor": cell.pool_factor,
    }


def _cell_workloads(
    config: ExperimentConfig, cell: _Cell, records
) -> list[Workload]:
    if config.synth_spec is not None:
        spec = config.synth_spec.format(**_template_values(config, cell))
        base = (
            config.seed * 1_000_003
            + cell.size * 10_007
            + cell.cores * 101
            + cell.pool_factor * 11
        )
        return [synth(spec, seed=base + rep) for rep in range(config.workloads)]
    if config.problem == "ordered":
        if config.kind is BlockKind.HOMOGENEOUS:
            return slice_blocks(
                records, config.kind, cell.cores, rounds=cell.size, count=config.workloads
            )
        return slice_blocks(
            records, config.kind, cell.cores, budget=cell.size, count=config.workloads
        )
    if config.kind is BlockKind.HOMOGENEOUS:
        return slice_pools(
            records,
            config.kind,
            cell.cores,
            rounds=cell.size,
            pool_factor=cell.pool_factor,
            count=config.workloads,
        )
    return slice_pools(
        records,
        config.kind,
        cell.cores,
        budget=cell.size,
        pool_factor=cell.pool_factor,
        count=config.workloads,
    )


def _cell_rows(
    config: ExperimentConfig, cell: _Cell, workloads: Sequence[Workload]
) -> list[Row]:
    runner = _run_ordered_method if config.problem == "ordered" else _run_building_method
    rows: list[Row] = []
    for method in config.methods:
        samples: dict[str, list[Fraction]] = {}
        flags: list[str] = []
        for workload in workloads:
            metrics, flag = runner(method, workload, cell, config)
            if flag:
                flags.append(flag)
            for name, value in (metrics or {}).items():
                samples.setdefault(name, []).append(value)
        flag_text = "; ".join(sorted(set(flags)))
        common = dict(
            problem=config.problem,
            kind=config.kind.value,
            size=cell.size,
            cores=cell.cores,
            pool_factor=cell.pool_factor,
            method=method,
        )
        if not samples:
            rows.append(
                Row(metric=_primary_metric(config), mean=None, n=0, timeout_flag=flag_text, **common)
            )
            continue
        for name, values in samples.items():
            rows.append(
                Row(
                    metric=name,
                    mean=sum(values, Fraction(0)) / len(values),
                    n=len(values),
                    timeout_flag=flag_text,
                    **common,
                )
            )
    return rows


def run_experiment(config: ExperimentConfig) -> list[Row]:
    """Run every grid cell and return the canonically sorted result table."""
    records = None
    if config.trace is not None:
        records = ingest(config.trace)
        if config.transfers_only:
            records = filter_transfers(records)
    cells = [
        _Cell(size, cores, factor)
        for size in config.sizes
        for cores in config.cores
        for factor in config.pool_factors
    ]

    def one_cell(cell: _Cell) -> list[Row]:
        return _cell_rows(config, cell, _cell_workloads(config, cell, records))

    if config.jobs == 1 or len(cells) <= 1:
        gathered = [one_cell(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            gathered = list(pool.map(one_cell, cells))

    rows = [row for cell_rows in gathered for row in cell_rows]
    method_rank = {name: at for at, name in enumerate(config.methods)}
    metric_rank = {name: at for at, name in enumerate(_METRIC_ORDER)}
    rows.sort(
        key=lambda row: (
            row.size,
            row.cores,
            row.pool_factor,
            method_rank[row.method],
            metric_rank.get(row.metric, len(_METRIC_ORDER)),
        )
    )
    return rows


# ---------------------------------------------------------------------------
# Rendering. Both formats are plain ascii and end with a newline, and both go
# through one string so the file writes are byte-identical across reruns.


def _format_mean(metric: str, mean: Fraction | None) -> str:
    if mean is None:
        return ""
    if metric in ("speedup", "percent_of_bound"):
        return f"{float(mean):.2f}"
    if mean.denominator == 1:
        return str(mean.numerator)
    return f"{float(mean):.2f}"


def _format_compact(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{float(value):.2f}"


def _render_csv(rows: Sequence[Row]) -> str:
    sink = io.StringIO()
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.problem,
                row.kind,
                row.size,
                row.cores,
                row.pool_factor,
                row.method,
                row.metric,
                _format_mean(row.metric, row.mean),
                row.n,
                row.timeout_flag,
            ]
        )
    return sink.getvalue()


def _render_text(rows: Sequence[Row]) -> str:
    """Small matrices, one per method: size rows, core columns, value/speedup cells."""
    primary: dict[tuple, dict[tuple[int, int], tuple[Fraction | None, str]]] = {}
    speed: dict[tuple, dict[tuple[int, int], Fraction]] = {}
    for row in rows:
        key = (row.problem, row.kind, row.pool_factor, row.method)
        if row.metric == "speedup" and row.mean is not None:
            speed.setdefault(key, {})[(row.size, row.cores)] = row.mean
        elif row.metric in ("rounds", "makespan", "reward"):
            primary.setdefault(key, {})[(row.size, row.cores)] = (row.mean, row.timeout_flag)

    blocks: list[str] = []
    for key, cells in primary.items():
        problem, kind, factor, method = key
        sizes = sorted({size for size, _ in cells})
        cores = sorted({cores for _, cores in cells})
        axis = "R" if problem == "ordered" and kind == BlockKind.HOMOGENEOUS.value else "B"
        flags: list[str] = []

        def cell_text(size: int, core: int) -> str:
            got = cells.get((size, core))
            if got is None:
                return "-"
            mean, flag = got
            ratio = speed.get(key, {}).get((size, core))
            text = "-" if mean is None else _format_compact(mean)
            if ratio is not None and mean is not None:
                text += f"/{_format_compact(ratio)}"
            if flag:
                if flag not in flags:
                    flags.append(flag)
                text += "*"
            return text

        grid = [[f"{axis}\\p", *(str(c) for c in cores)]]
        for size in sizes:
            grid.append([str(size), *(cell_text(size, core) for core in cores)])
        widths = [max(len(line[col]) for line in grid) for col in range(len(grid[0]))]
        title = f"{problem} {kind} {method}"
        if factor != 1:
            title += f" X={factor}"
        lines = [title]
        for line in grid:
            lines.append("  ".join(text.rjust(widths[col]) for col, text in enumerate(line)))
        for flag in flags:
            lines.append(f"* {flag}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n" if blocks else "\n"


def render_table(rows: Sequence[Row], fmt: str) -> str:
    """Render rows as one string in the given format, csv or text."""
    if fmt == "csv":
        return _render_csv(rows)
    if fmt == "text":
        return _render_text(rows)
    raise ValueError(f"unknown report format {fmt!r}; expected csv or text")


def report(rows: Sequence[Row], fmt: str, destination: str | Path) -> Path:
    """Write the rendered table to a file and return its path."""
    path = Path(destination)
    path.write_text(render_table(rows, fmt), encoding="ascii")
    return path


# ---------------------------------------------------------------------------
# Config files. One JSON object per experiment; see ExperimentConfig for the
# field meanings. "rounds" and "budgets" are two spellings of the sizes axis
# so configs read naturally for either problem.

_CONFIG_KEYS = {
    "problem",
    "kind",
    "methods",
    "cores",
    "rounds",
    "budgets",
    "pool_factors",
    "synth",
    "trace",
    "transfers_only",
    "workloads",
    "seed",
    "time_limit",
    "jobs",
}


def config_from_mapping(payload: Mapping) -> ExperimentConfig:
    unknown = set(payload) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if ("rounds" in payload) == ("budgets" in payload):
        raise ValueError("config needs exactly one of rounds and budgets")
    sizes = payload.get("rounds", payload.get("budgets"))
    try:
        kind = BlockKind(payload.get("kind", "homogeneous"))
    except ValueError:
        raise ValueError(
            f"unknown kind {payload.get('kind')!r}; expected homogeneous or heterogeneous"
        ) from None
    return ExperimentConfig(
        problem=payload.get("problem", "ordered"),
        kind=kind,
        methods=tuple(payload.get("methods", ())),
        cores=tuple(payload.get("cores", ())),
        sizes=tuple(sizes),
        pool_factors=tuple(payload.get("pool_factors", (1,))),
        synth_spec=payload.get("synth"),
        trace=payload.get("trace"),
        transfers_only=bool(payload.get("transfers_only", False)),
        workloads=int(payload.get("workloads", 5)),
        seed=int(payload.get("seed", 0)),
        time_limit=float(payload.get("time_limit", 60.0)),
        jobs=int(payload.get("jobs", 1)),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read one experiment config from a JSON file."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(payload, dict):
        raise ValueError(f"config root must be a JSON object, got {type(payload).__name__}")
    return config_from_mapping(payload)
