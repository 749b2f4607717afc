"""Ordered-block scheduling: dispatch priorities, the event-driven list
scheduler, and the block-order baseline dispatcher."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

from .conflict import ConflictGraph, DependencyDag, dependency_dag
from .model import Placement, Schedule, Transaction, Workload

__all__ = [
    "BlockPriority",
    "block_priorities",
    "schedule_block",
    "schedule_in_order",
    "run_ordered",
]


@dataclass(frozen=True, slots=True)
class BlockPriority:
    """Dispatch rank of one transaction within an ordered block.

    ``height`` is the critical-path gas rooted at the transaction
    (inclusive), ``volume`` the gas of the transaction plus its successor
    subtrees summed recursively (a descendant reachable along several paths
    counts once per path; ``dedup_volume`` switches to counting each
    descendant once), ``fanout`` the direct successor count. Lower key
    dispatches first, so taller, heavier, wider nodes lead and the id breaks
    every remaining tie.
    """

    height: int
    volume: int
    fanout: int
    id: int

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (-self.height, -self.volume, -self.fanout, self.id)


def block_priorities(
    txs: Sequence[Transaction],
    dag: DependencyDag,
    dedup_volume: bool = False,
) -> tuple[BlockPriority, ...]:
    """Compute dispatch priorities in one backward pass from the sinks.

    Each node is finalized exactly once, after all of its successors, via a
    worklist on remaining out-degree. ``dedup_volume=True`` computes volume
    over the reachable-descendant set instead of the plain recursion; it
    costs a reachability bitmask per node, so keep it to small studies.
    """
    n = len(txs)
    if n != len(dag):
        raise ValueError(f"dag has {len(dag)} nodes for {n} transactions")
    heights = [0] * n
    volumes = [0] * n
    masks = [0] * n if dedup_volume else None
    remaining = [dag.out_degree(i) for i in range(n)]
    stack = [i for i in range(n) if remaining[i] == 0]
    visited = 0
    while stack:
        i = stack.pop()
        visited += 1
        t = txs[i].exec_time
        succ = dag.successors[i]
        if succ:
            heights[i] = t + max(heights[j] for j in succ)
            volumes[i] = t + sum(volumes[j] for j in succ)
        else:
            heights[i] = t
            volumes[i] = t
        if masks is not None:
            mask = 1 << i
            for j in succ:
                mask |= masks[j]
            masks[i] = mask
            total = 0
            m = mask
            while m:
                low = m & -m
                total += txs[low.bit_length() - 1].exec_time
                m ^= low
            volumes[i] = total
        for j in dag.predecessors[i]:
            remaining[j] -= 1
            if remaining[j] == 0:
                stack.append(j)
    if visited != n:
        raise ValueError("dependency structure is cyclic; ids must order the edges")
    return tuple(
        BlockPriority(heights[i], volumes[i], dag.out_degree(i), i) for i in range(n)
    )


def schedule_block(
    txs: Sequence[Transaction],
    cores: int,
    priorities: Sequence[BlockPriority],
    dag: DependencyDag,
) -> Schedule:
    """Event-driven list scheduling of a whole ordered block.

    At each event time every free core is filled with the minimum-key ready
    transaction; a transaction becomes ready when all of its predecessors
    have finished. Simultaneous completions are drained as one event and
    their cores freed before the next dispatch pass, and the lowest-numbered
    free core is always taken first, so reruns are bit-identical.
    """
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    n = len(txs)
    placements: dict[int, Placement] = {}
    if n == 0:
        return Schedule(cores, placements)
    indegree = [dag.in_degree(i) for i in range(n)]
    ready = [priorities[i].key for i in range(n) if indegree[i] == 0]
    heapq.heapify(ready)
    free = list(range(cores))
    heapq.heapify(free)
    running: list[tuple[int, int, int]] = []  # (finish, id, core)
    successors = dag.successors
    now = 0
    while ready or running:
        while ready and free:
            key = heapq.heappop(ready)
            i = key[3]
            core = heapq.heappop(free)
            t = txs[i].exec_time
            placements[i] = Placement(core, now, t)
            heapq.heappush(running, (now + t, i, core))
        if not running:
            break
        now = running[0][0]
        finished: list[int] = []
        while running and running[0][0] == now:
            _, i, core = heapq.heappop(running)
            heapq.heappush(free, core)
            finished.append(i)
        for i in finished:
            for j in successors[i]:
                indegree[j] -= 1
                if indegree[j] == 0:
                    heapq.heappush(ready, priorities[j].key)
    return Schedule(cores, placements)


def schedule_in_order(
    txs: Sequence[Transaction],
    cores: int,
    graph: ConflictGraph,
    skip_blocked: bool = False,
) -> Schedule:
    """Dispatch strictly by block position, the way an in-order runtime does.

    At each event the pending list is scanned from the front and transactions
    are dispatched onto free cores as long as they conflict with nothing
    currently running. By default the scan stops dead at the first blocked
    transaction (head-of-line blocking): one conflicting early transaction
    stalls everything behind it, which also guarantees conflicting pairs
    finish in block order. With ``skip_blocked=True`` the scan steps over
    blocked transactions and keeps dispatching later ones; anything stepped
    over blocks its own conflicting successors in turn, otherwise a later
    transaction could overtake an earlier conflicting one.
    """
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    n = len(txs)
    placements: dict[int, Placement] = {}
    pending = list(range(n))
    running: dict[int, int] = {}  # id -> core
    free = list(range(cores))
    heapq.heapify(free)
    events: list[tuple[int, int]] = []  # (finish, id)
    adjacency = graph.adjacency
    now = 0
    while pending or running:
        if free:
            dispatched: set[int] = set()
            passed: set[int] = set()
            for i in pending:
                if not free:
                    break
                blocked = any(r in adjacency[i] for r in running) or bool(
                    adjacency[i] & passed
                )
                if blocked:
                    if skip_blocked:
                        passed.add(i)
                        continue
                    break
                core = heapq.heappop(free)
                t = txs[i].exec_time
                placements[i] = Placement(core, now, t)
                running[i] = core
                heapq.heappush(events, (now + t, i))
                dispatched.add(i)
            if dispatched:
                pending = [i for i in pending if i not in dispatched]
        if not running:
            break
        now = events[0][0]
        while events and events[0][0] == now:
            _, i = heapq.heappop(events)
            heapq.heappush(free, running.pop(i))
    return Schedule(cores, placements)


def run_ordered(block: Workload, cores: int, dedup_volume: bool = False) -> Schedule:
    """Full pipeline: dependency DAG, priorities, then the list scheduler."""
    dag = dependency_dag(block.txs)
    priorities = block_priorities(block.txs, dag, dedup_volume=dedup_volume)
    return schedule_block(block.txs, cores, priorities, dag)
