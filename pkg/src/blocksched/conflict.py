"""Conflict predicate and graph construction over transaction access sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

from .model import StateKey, Transaction

__all__ = [
    "conflicts",
    "ConflictGraph",
    "DependencyDag",
    "conflict_graph",
    "dependency_dag",
]

BuildMethod = Literal["indexed", "naive"]


def conflicts(a: Transaction, b: Transaction) -> bool:
    """True iff the two transactions touch a common key and either writes it.

    Write-write, write-read, and read-write overlaps conflict; a purely
    read-read overlap does not. A transaction reading its own written keys is
    legal and irrelevant here; the predicate only compares across the pair.
    """
    return (
        not a.writes.isdisjoint(b.writes)
        or not a.writes.isdisjoint(b.reads)
        or not a.reads.isdisjoint(b.writes)
    )


@dataclass(frozen=True, slots=True)
class ConflictGraph:
    """Undirected conflict relation as per-transaction adjacency sets."""

    adjacency: tuple[frozenset[int], ...]

    def __len__(self) -> int:
        return len(self.adjacency)

    def degree(self, txid: int) -> int:
        return len(self.adjacency[txid])

    def neighbors(self, txid: int) -> frozenset[int]:
        return self.adjacency[txid]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as (i, j) with i < j, ascending."""
        for i, adj in enumerate(self.adjacency):
            for j in sorted(adj):
                if i < j:
                    yield (i, j)

    @property
    def edge_count(self) -> int:
        return sum(len(adj) for adj in self.adjacency) // 2


@dataclass(frozen=True, slots=True)
class DependencyDag:
    """Conflict edges oriented by block position: (i, j) with i < j.

    Successor/predecessor lists are sorted ascending. The graph is acyclic by
    construction because every edge points from a lower id to a higher one.
    """

    successors: tuple[tuple[int, ...], ...]
    predecessors: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.successors)

    def out_degree(self, txid: int) -> int:
        return len(self.successors[txid])

    def in_degree(self, txid: int) -> int:
        return len(self.predecessors[txid])

    def edges(self) -> Iterator[tuple[int, int]]:
        for i, succ in enumerate(self.successors):
            for j in succ:
                yield (i, j)

    @property
    def edge_count(self) -> int:
        return sum(len(succ) for succ in self.successors)


def _adjacency_naive(txs: Sequence[Transaction]) -> list[set[int]]:
    adjacency: list[set[int]] = [set() for _ in txs]
    for i in range(len(txs)):
        for j in range(i + 1, len(txs)):
            if conflicts(txs[i], txs[j]):
                adjacency[i].add(j)
                adjacency[j].add(i)
    return adjacency


def _adjacency_indexed(txs: Sequence[Transaction]) -> list[set[int]]:
    # Every conflicting pair shares a key that at least one side writes, so
    # per key the candidate pairs (writers x writers) and (writers x readers)
    # are exact conflicts; no predicate re-check is needed. Candidates are
    # gathered per node as flat lists and deduplicated in one pass, which is
    # far cheaper than per-pair set inserts when a key is hot.
    readers: dict[StateKey, list[int]] = {}
    writers: dict[StateKey, list[int]] = {}
    for tx in txs:
        for key in tx.reads:
            readers.setdefault(key, []).append(tx.id)
        for key in tx.writes:
            writers.setdefault(key, []).append(tx.id)

    candidates: list[list[int]] = [[] for _ in txs]
    for key, ws in writers.items():
        rs = readers.get(key, ())
        for i in ws:
            candidates[i].extend(ws)
            candidates[i].extend(rs)
        for i in rs:
            candidates[i].extend(ws)

    adjacency: list[set[int]] = []
    for i, cand in enumerate(candidates):
        adj = set(cand)
        adj.discard(i)
        adjacency.append(adj)
    return adjacency


def _adjacency(txs: Sequence[Transaction], method: BuildMethod) -> list[set[int]]:
    if method == "naive":
        return _adjacency_naive(txs)
    if method == "indexed":
        return _adjacency_indexed(txs)
    raise ValueError(f"unknown construction method {method!r}")


def conflict_graph(txs: Sequence[Transaction], method: BuildMethod = "indexed") -> ConflictGraph:
    """Build the undirected conflict graph.

    ``method="naive"`` runs the quadratic pairwise reference loop;
    ``method="indexed"`` uses a key-to-accessors inverted index that emits the
    identical edge set and is fast on sparse access patterns.
    """
    adjacency = _adjacency(txs, method)
    return ConflictGraph(tuple(frozenset(adj) for adj in adjacency))


def dependency_dag(txs: Sequence[Transaction], method: BuildMethod = "indexed") -> DependencyDag:
    """Build the dependency DAG: conflict edges directed by block position."""
    adjacency = _adjacency(txs, method)
    successors = tuple(
        tuple(sorted(j for j in adj if j > i)) for i, adj in enumerate(adjacency)
    )
    predecessors = tuple(
        tuple(sorted(j for j in adj if j < i)) for i, adj in enumerate(adjacency)
    )
    return DependencyDag(successors, predecessors)
