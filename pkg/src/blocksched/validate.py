"""Schedule validity checking shared by tests, the bench harness, and the CLI."""

from __future__ import annotations

from .conflict import conflicts
from .model import Schedule, Workload, makespan

__all__ = ["ScheduleError", "check_ordered_schedule", "check_built_block"]


class ScheduleError(AssertionError):
    """A schedule violated one of the structural validity rules."""


def _check_packing(workload: Workload, schedule: Schedule) -> None:
    """Structural rules common to both problems.

    Verifies placements refer to known transactions with the right duration,
    that no core runs two transactions at once, that conflicting transactions
    never overlap in time on any pair of cores, and that the schedule's
    makespan equals the latest completion. Deliberately quadratic and built on
    the plain pairwise predicate: this is the reference judge, not a fast path.
    """
    txs = workload.txs
    n = len(txs)
    for txid, put in schedule.placements.items():
        if not 0 <= txid < n:
            raise ScheduleError(f"placement for unknown tx id {txid}")
        if put.exec_time != txs[txid].exec_time:
            raise ScheduleError(
                f"tx {txid}: placement duration {put.exec_time} "
                f"!= exec_time {txs[txid].exec_time}"
            )

    by_core: dict[int, list[tuple[int, int, int]]] = {}
    for txid, put in schedule.placements.items():
        by_core.setdefault(put.core, []).append((put.start, put.end, txid))
    for core, spans in by_core.items():
        spans.sort()
        for (s0, e0, a), (s1, e1, b) in zip(spans, spans[1:]):
            if s1 < e0:
                raise ScheduleError(
                    f"core {core}: tx {a} [{s0},{e0}) overlaps tx {b} [{s1},{e1})"
                )

    placed = schedule.sorted_items()
    for pos, (i, pi) in enumerate(placed):
        for j, pj in placed[pos + 1 :]:
            if pj.start >= pi.end:
                break  # sorted by start; nothing later can overlap pi
            if conflicts(txs[i], txs[j]):
                raise ScheduleError(
                    f"conflicting txs {i} and {j} overlap: "
                    f"[{pi.start},{pi.end}) vs [{pj.start},{pj.end})"
                )

    span = makespan(schedule)
    expect = max((put.end for put in schedule.placements.values()), default=0)
    if span != expect:
        raise ScheduleError(f"makespan {span} != latest completion {expect}")


def check_ordered_schedule(workload: Workload, schedule: Schedule) -> None:
    """Validate a schedule of a whole ordered block.

    On top of the packing rules, every transaction must be placed exactly
    once, and each conflicting pair must run in block order without overlap:
    the later transaction starts at or after the earlier one ends.
    """
    _check_packing(workload, schedule)
    if schedule.selected != frozenset(range(len(workload.txs))):
        missing = set(range(len(workload.txs))) - set(schedule.placements)
        raise ScheduleError(f"ordered schedule must place every tx; missing {sorted(missing)}")
    txs = workload.txs
    for i, pi in schedule.placements.items():
        for j in range(i + 1, len(txs)):
            if conflicts(txs[i], txs[j]):
                if schedule.placements[j].start < pi.end:
                    raise ScheduleError(
                        f"txs {i} -> {j} conflict but {j} starts at "
                        f"{schedule.placements[j].start} before {i} ends at {pi.end}"
                    )


def check_built_block(workload: Workload, schedule: Schedule, budget: int) -> None:
    """Validate a block built from a pool under a time budget.

    The selected ids must be a subset of the pool, the packing rules must
    hold, and everything must finish by the budget. Conflicting selected
    pairs may run in either order as long as they do not overlap.
    """
    _check_packing(workload, schedule)
    unknown = set(schedule.placements) - set(range(len(workload.txs)))
    if unknown:
        raise ScheduleError(f"built block selects unknown ids {sorted(unknown)}")
    span = makespan(schedule)
    if span > budget:
        raise ScheduleError(f"built block runs past the budget: makespan {span} > {budget}")
