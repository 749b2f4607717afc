"""Conflict-aware parallel scheduling of transaction blocks.

Two problems share one model: scheduling a fixed, totally ordered block onto
p cores without changing its observable outcome, and picking a block out of a
candidate pool under a per-core time budget to maximize fees. The package
provides the greedy schedulers, reference exact solvers for small instances,
trace ingestion and synthetic workloads, and a benchmark harness over all of
it. Exact-model utilities live in :mod:`blocksched.exact`.
"""

from .bench import (
    BUILDING_METHODS,
    CSV_COLUMNS,
    ORDERED_METHODS,
    ExperimentConfig,
    Row,
    config_from_mapping,
    load_config,
    render_table,
    report,
    run_experiment,
    speedup,
)
from .builder import PoolOrder, PoolPriority, build_block, pool_priorities, run_builder
from .conflict import (
    ConflictGraph,
    DependencyDag,
    conflict_graph,
    conflicts,
    dependency_dag,
)
from .model import (
    BlockKind,
    BlockParams,
    Placement,
    PoolParams,
    Schedule,
    StateKey,
    Transaction,
    Workload,
    makespan,
    sequential_time,
)
from .ordered import (
    BlockPriority,
    block_priorities,
    run_ordered,
    schedule_block,
    schedule_in_order,
)
from .validate import ScheduleError, check_built_block, check_ordered_schedule
from .workload import (
    GENERATOR_NAMES,
    TRANSFER_GAS,
    SliceError,
    TraceError,
    TraceRecord,
    export,
    filter_transfers,
    ingest,
    parse_synth_spec,
    records_to_transactions,
    slice_blocks,
    slice_pools,
    synth,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BUILDING_METHODS",
    "CSV_COLUMNS",
    "ORDERED_METHODS",
    "ExperimentConfig",
    "Row",
    "config_from_mapping",
    "load_config",
    "render_table",
    "report",
    "run_experiment",
    "speedup",
    "PoolOrder",
    "PoolPriority",
    "build_block",
    "pool_priorities",
    "run_builder",
    "ConflictGraph",
    "DependencyDag",
    "conflict_graph",
    "conflicts",
    "dependency_dag",
    "BlockKind",
    "BlockParams",
    "Placement",
    "PoolParams",
    "Schedule",
    "StateKey",
    "Transaction",
    "Workload",
    "makespan",
    "sequential_time",
    "BlockPriority",
    "block_priorities",
    "run_ordered",
    "schedule_block",
    "schedule_in_order",
    "ScheduleError",
    "check_built_block",
    "check_ordered_schedule",
    "GENERATOR_NAMES",
    "TRANSFER_GAS",
    "SliceError",
    "TraceError",
    "TraceRecord",
    "export",
    "filter_transfers",
    "ingest",
    "parse_synth_spec",
    "records_to_transactions",
    "slice_blocks",
    "slice_pools",
    "synth",
]
