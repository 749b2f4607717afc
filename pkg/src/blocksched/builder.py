"""Budgeted block building: pick a maximum-fee subset of a candidate pool and
pack it onto cores so everything finishes inside the time budget."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .conflict import ConflictGraph, conflict_graph
from .model import Placement, Schedule, Transaction, Workload

__all__ = [
    "PoolPriority",
    "PoolOrder",
    "pool_priorities",
    "build_block",
    "run_builder",
]


@dataclass(frozen=True, slots=True)
class PoolPriority:
    """Selection rank of one pool transaction.

    ``density`` is reward per gas unit as an exact rational (Fraction reduces
    via gcd, so ordering is exact cross-multiplication, never floats). Denser
    first, then fewer conflicts, then higher absolute reward, then id.
    """

    density: Fraction
    degree: int
    reward: int
    id: int

    @property
    def key(self) -> tuple[Fraction, int, int, int]:
        return (-self.density, self.degree, -self.reward, self.id)


class PoolOrder(Enum):
    """Which greedy key drives selection."""

    DENSITY = "density"  # (-density, degree, -reward, id)
    REWARD = "reward"  # (-reward, id): fee-ordered, arrival tie-break


def pool_priorities(
    txs: Sequence[Transaction], graph: ConflictGraph
) -> tuple[PoolPriority, ...]:
    """Score every pool transaction for density-driven selection."""
    if len(txs) != len(graph):
        raise ValueError(f"graph has {len(graph)} nodes for {len(txs)} transactions")
    return tuple(
        PoolPriority(
            density=Fraction(tx.reward, tx.exec_time),
            degree=graph.degree(tx.id),
            reward=tx.reward,
            id=tx.id,
        )
        for tx in txs
    )


def build_block(
    txs: Sequence[Transaction],
    cores: int,
    budget: int,
    graph: ConflictGraph,
    order: PoolOrder = PoolOrder.DENSITY,
    priorities: Sequence[PoolPriority] | None = None,
) -> Schedule:
    """Greedy budgeted selection with conflict deferral.

    Pops candidates in priority order whenever a core is free. A popped
    transaction that conflicts with something currently running is deferred;
    it re-enters contention as soon as any conflicting runner finishes (even
    if another conflicting runner is still going, in which case the next pop
    simply re-defers it). A popped transaction that is not deferred but
    cannot finish by the budget is dropped for good. Time advances only
    through completion events.

    The selected set is exactly the returned schedule's placement keys.
    """
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    if budget < 1:
        raise ValueError(f"budget must be positive, got {budget}")
    n = len(txs)
    if order is PoolOrder.DENSITY:
        if priorities is None:
            priorities = pool_priorities(txs, graph)
        contention = [(pri.key, pri.id) for pri in priorities]
    elif order is PoolOrder.REWARD:
        contention = [((-tx.reward, tx.id), tx.id) for tx in txs]
    else:
        raise ValueError(f"unknown pool order {order!r}")
    heapq.heapify(contention)

    adjacency = graph.adjacency
    placements: dict[int, Placement] = {}
    deferred: dict[int, tuple] = {}  # id -> priority key, parked until a conflict frees
    running: dict[int, int] = {}  # id -> core
    free = list(range(cores))
    heapq.heapify(free)
    events: list[tuple[int, int]] = []  # (finish, id)
    now = 0
    while True:
        while contention and free:
            key, i = heapq.heappop(contention)
            if any(r in adjacency[i] for r in running):
                deferred[i] = key
                continue
            t = txs[i].exec_time
            if now + t > budget:
                continue  # dropped permanently
            core = heapq.heappop(free)
            placements[i] = Placement(core, now, t)
            running[i] = core
            heapq.heappush(events, (now + t, i))
        if not running:
            break
        now = events[0][0]
        finished: list[int] = []
        while events and events[0][0] == now:
            _, i = heapq.heappop(events)
            heapq.heappush(free, running.pop(i))
            finished.append(i)
        for i in finished:
            for j in adjacency[i]:
                key = deferred.pop(j, None)
                if key is not None:
                    heapq.heappush(contention, (key, j))
    # Every deferral names a live runner, and that runner's completion always
    # hands the tx back, so nothing can be parked once the cores drain.
    assert not deferred
    return Schedule(cores, placements)


def run_builder(
    pool: Workload,
    cores: int,
    budget: int,
    order: PoolOrder = PoolOrder.DENSITY,
) -> Schedule:
    """Full pipeline: conflict graph, scores, then greedy budgeted packing."""
    graph = conflict_graph(pool.txs)
    return build_block(pool.txs, cores, budget, graph, order=order)
