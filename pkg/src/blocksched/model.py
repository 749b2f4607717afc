"""Core value types: transactions, workloads, and placement schedules."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

__all__ = [
    "StateKey",
    "Transaction",
    "BlockKind",
    "BlockParams",
    "PoolParams",
    "Placement",
    "Schedule",
    "makespan",
    "sequential_time",
]

# A state key is an opaque account or storage-slot identifier. Canonically a
# lowercase hex string ("address" or "address:slot"); ingestion can intern
# keys to first-seen integers, which is collision-free by construction.
StateKey = str | int


@dataclass(frozen=True, slots=True)
class Transaction:
    """One executable unit: integer cost, integer tip, and its access sets.

    ``exec_time`` is measured in gas units and doubles as the execution-time
    estimate. ``reads`` and ``writes`` hold the state keys the transaction
    touches; read-only overlap between two transactions is harmless, any
    overlap involving a write is not.
    """

    id: int
    exec_time: int
    tip: int
    reads: frozenset[StateKey] = frozenset()
    writes: frozenset[StateKey] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "reads", frozenset(self.reads))
        object.__setattr__(self, "writes", frozenset(self.writes))
        if self.id < 0:
            raise ValueError(f"transaction id must be non-negative, got {self.id}")
        if self.exec_time < 1:
            raise ValueError(
                f"tx {self.id}: exec_time must be a positive integer, got {self.exec_time}"
            )
        if self.tip < 0:
            raise ValueError(f"tx {self.id}: tip must be non-negative, got {self.tip}")

    @property
    def keys(self) -> frozenset[StateKey]:
        """Union of read and written keys."""
        return self.reads | self.writes

    @property
    def reward(self) -> int:
        """Fee earned for including the transaction: exec_time * tip."""
        return self.exec_time * self.tip


class BlockKind(Enum):
    """Whether every transaction in a workload has the same exec_time."""

    HOMOGENEOUS = "homogeneous"
    HETEROGENEOUS = "heterogeneous"


@dataclass(frozen=True, slots=True)
class BlockParams:
    """Sizing of an ordered block: core count and, for uniform costs, rounds."""

    cores: int
    rounds: int | None = None


@dataclass(frozen=True, slots=True)
class PoolParams:
    """Sizing of a candidate pool: cores, time budget, and pool inflation factor."""

    cores: int
    budget: int
    pool_factor: int | None = None


@dataclass(frozen=True, slots=True)
class Workload:
    """An ordered sequence of transactions plus its sizing parameters.

    Transaction ids are dense and equal to the position in ``txs``; that
    position is the total order for ordered blocks and the arrival order for
    candidate pools. Homogeneous workloads must have one shared exec_time.
    """

    txs: tuple[Transaction, ...]
    kind: BlockKind
    params: BlockParams | PoolParams | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "txs", tuple(self.txs))
        for pos, tx in enumerate(self.txs):
            if tx.id != pos:
                raise ValueError(
                    f"transaction ids must be dense positions: found id {tx.id} at {pos}"
                )
        if self.kind is BlockKind.HOMOGENEOUS and self.txs:
            t0 = self.txs[0].exec_time
            for tx in self.txs:
                if tx.exec_time != t0:
                    raise ValueError(
                        f"homogeneous workload mixes exec_times {t0} and {tx.exec_time}"
                    )

    def __len__(self) -> int:
        return len(self.txs)


@dataclass(frozen=True, slots=True)
class Placement:
    """Where and when one transaction runs: core index, start, and duration."""

    core: int
    start: int
    exec_time: int

    def __post_init__(self) -> None:
        if self.core < 0:
            raise ValueError(f"core index must be non-negative, got {self.core}")
        if self.start < 0:
            raise ValueError(f"start time must be non-negative, got {self.start}")
        if self.exec_time < 1:
            raise ValueError(f"placement exec_time must be positive, got {self.exec_time}")

    @property
    def end(self) -> int:
        return self.start + self.exec_time


@dataclass(frozen=True, slots=True)
class Schedule:
    """A placement per scheduled transaction on cores numbered 0..cores-1.

    ``placements`` maps transaction id to its placement; the selected set is
    exactly the mapping's key set, so the two cannot diverge. The mapping is
    wrapped read-only on construction.
    """

    cores: int
    placements: Mapping[int, Placement]

    def __post_init__(self) -> None:
        object.__setattr__(self, "placements", MappingProxyType(dict(self.placements)))
        if self.cores < 1:
            raise ValueError(f"schedule needs at least one core, got {self.cores}")
        for txid, put in self.placements.items():
            if put.core >= self.cores:
                raise ValueError(
                    f"tx {txid} placed on core {put.core} of {self.cores}"
                )

    @property
    def selected(self) -> frozenset[int]:
        """Ids of the scheduled transactions."""
        return frozenset(self.placements)

    @property
    def makespan(self) -> int:
        return makespan(self)

    def sorted_items(self) -> list[tuple[int, Placement]]:
        """Placements ordered by (start, core) for stable serialization."""
        return sorted(self.placements.items(), key=lambda kv: (kv[1].start, kv[1].core, kv[0]))


def makespan(schedule: Schedule) -> int:
    """Latest completion time across all placements; 0 for an empty schedule."""
    if not schedule.placements:
        return 0
    return max(put.end for put in schedule.placements.values())


def sequential_time(workload: Workload, selected: Iterable[int] | None = None) -> int:
    """Total exec_time of the given ids (default: the whole workload).

    This is the single-core baseline used as the speedup numerator; for a
    built block it must cover the selected set only, not the whole pool.
    """
    if selected is None:
        return sum(tx.exec_time for tx in workload.txs)
    txs = workload.txs
    return sum(txs[i].exec_time for i in selected)
