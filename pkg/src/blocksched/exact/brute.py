"""Exhaustive oracles for desk-size instances.

Makespan problems are enumerated with a serial schedule-generation scheme:
every precedence-feasible insertion order is tried and each task placed at
its earliest feasible start, which sweeps exactly the active schedules. For a
regular objective some active schedule is optimal, so the sweep is exact.
Selection problems enumerate candidate subsets in descending reward order and
take the first one that packs inside the budget. Deliberately simple and
slow; this module cross-checks the solver and must share no code with it.
"""

from __future__ import annotations

from typing import Sequence

from .model import Formulation

__all__ = [
    "ORACLE_LIMIT",
    "best_ordered_makespan",
    "best_ordered_rounds",
    "best_selection_reward",
    "best_selection_rounds",
    "brute_force",
]

ORACLE_LIMIT = 10

Span = tuple[int, int]  # [start, end)


def _check_size(n: int) -> None:
    if n > ORACLE_LIMIT:
        raise ValueError(f"oracle handles at most {ORACLE_LIMIT} transactions, got {n}")


def _earliest_start(
    duration: int,
    ready: int,
    spans: Sequence[Span],
    cores: int,
    avoid: Sequence[Span] = (),
) -> int:
    """Earliest t >= ready where [t, t+duration) fits.

    ``spans`` are every occupied interval (capacity check: fewer than
    ``cores`` of them may cover any instant), ``avoid`` the intervals the
    task must not intersect at all. The earliest feasible start is pressed
    against the ready time or some interval's end, so only those candidates
    need checking.
    """
    candidates = {ready}
    for s, e in spans:
        if e > ready:
            candidates.add(e)
    for t in sorted(candidates):
        end = t + duration
        if any(s < end and t < e for s, e in avoid):
            continue
        points = {t}
        for s, e in spans:
            if t < s < end:
                points.add(s)
        if all(sum(1 for s, e in spans if s <= q < e) < cores for q in points):
            return t
    raise AssertionError("unreachable: time past every busy interval is always free")


def best_ordered_makespan(
    exec_times: Sequence[int],
    edges: Sequence[tuple[int, int]],
    cores: int,
) -> int:
    """Minimum makespan scheduling every task, precedence edges (i, j): i first."""
    n = len(exec_times)
    _check_size(n)
    if n == 0:
        return 0
    preds: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        preds[j].append(i)

    best = sum(exec_times)  # serial schedule on one core is always feasible
    starts: dict[int, int] = {}
    spans: list[Span] = []

    def extend(made: int) -> None:
        nonlocal best
        if made >= best and len(starts) < n:
            return
        if len(starts) == n:
            if made < best:
                best = made
            return
        for task in range(n):
            if task in starts:
                continue
            if any(q not in starts for q in preds[task]):
                continue
            ready = max((starts[q] + exec_times[q] for q in preds[task]), default=0)
            t = _earliest_start(exec_times[task], ready, spans, cores)
            end = t + exec_times[task]
            starts[task] = t
            spans.append((t, end))
            extend(max(made, end))
            spans.pop()
            del starts[task]

    extend(0)
    return best


def best_ordered_rounds(
    n: int,
    edges: Sequence[tuple[int, int]],
    cores: int,
    rounds: int,
) -> int | None:
    """Minimum rounds for unit tasks, or None if more than ``rounds`` needed.

    With unit durations every active schedule is round-aligned, so the
    round optimum equals the unit-time makespan optimum.
    """
    _check_size(n)
    need = best_ordered_makespan([1] * n, edges, cores)
    return need if need <= rounds else None


def _can_pack(
    members: Sequence[int],
    exec_times: Sequence[int],
    adjacency: Sequence[frozenset[int]],
    cores: int,
    budget: int,
) -> bool:
    """Can the member set be scheduled on the cores entirely within budget?

    Conflicting members may serialize in either order; a conflict pair is a
    shared unary resource. Tries every insertion order with earliest-feasible
    placement, longest task first, stopping at the first success.
    """
    placed_spans: dict[int, Span] = {}
    spans: list[Span] = []
    order = sorted(members, key=lambda i: (-exec_times[i], i))

    def place(remaining: tuple[int, ...]) -> bool:
        if not remaining:
            return True
        for pick in range(len(remaining)):
            task = remaining[pick]
            avoid = [placed_spans[j] for j in placed_spans if j in adjacency[task]]
            t = _earliest_start(exec_times[task], 0, spans, cores, avoid)
            end = t + exec_times[task]
            if end > budget:
                continue
            placed_spans[task] = (t, end)
            spans.append((t, end))
            if place(remaining[:pick] + remaining[pick + 1 :]):
                return True
            spans.pop()
            del placed_spans[task]
        return False

    return place(tuple(order))


def best_selection_reward(
    exec_times: Sequence[int],
    weights: Sequence[int],
    conflict_pairs: Sequence[tuple[int, int]],
    cores: int,
    budget: int,
) -> int:
    """Maximum total reward over subsets that pack within the budget."""
    n = len(exec_times)
    _check_size(n)
    adjacency = [set() for _ in range(n)]
    for i, j in conflict_pairs:
        adjacency[i].add(j)
        adjacency[j].add(i)
    frozen = [frozenset(adj) for adj in adjacency]

    subsets: list[tuple[int, int, tuple[int, ...]]] = []
    for mask in range(1 << n):
        members = tuple(i for i in range(n) if mask >> i & 1)
        subsets.append((sum(weights[i] for i in members), mask, members))
    subsets.sort(key=lambda item: (-item[0], item[1]))

    for weight, _, members in subsets:
        if sum(exec_times[i] for i in members) > cores * budget:
            continue
        if any(exec_times[i] > budget for i in members):
            continue
        if any(
            exec_times[i] + exec_times[j] > budget
            for i in members
            for j in members
            if i < j and j in frozen[i]
        ):
            continue
        if _can_pack(members, exec_times, frozen, cores, budget):
            return weight
    return 0


def best_selection_rounds(
    weights: Sequence[int],
    conflict_pairs: Sequence[tuple[int, int]],
    cores: int,
    rounds: int,
) -> int:
    """Maximum reward packing unit tasks into ``rounds`` rounds of ``cores``.

    Feasibility of a subset is a proper coloring with round capacities: no
    conflicting pair shares a round and no round holds more than ``cores``.
    """
    n = len(weights)
    _check_size(n)
    adjacency = [set() for _ in range(n)]
    for i, j in conflict_pairs:
        adjacency[i].add(j)
        adjacency[j].add(i)

    def colorable(members: tuple[int, ...]) -> bool:
        loads = [0] * rounds
        color: dict[int, int] = {}

        def assign(pos: int) -> bool:
            if pos == len(members):
                return True
            task = members[pos]
            for r in range(rounds):
                if loads[r] >= cores:
                    continue
                if any(color.get(j) == r for j in adjacency[task]):
                    continue
                loads[r] += 1
                color[task] = r
                if assign(pos + 1):
                    return True
                loads[r] -= 1
                del color[task]
            return False

        return assign(0)

    subsets: list[tuple[int, int, tuple[int, ...]]] = []
    for mask in range(1 << n):
        members = tuple(i for i in range(n) if mask >> i & 1)
        subsets.append((sum(weights[i] for i in members), mask, members))
    subsets.sort(key=lambda item: (-item[0], item[1]))

    for weight, _, members in subsets:
        if len(members) > cores * rounds:
            continue
        if colorable(members):
            return weight
    return 0


def brute_force(
    kind: Formulation,
    exec_times: Sequence[int],
    edges: Sequence[tuple[int, int]],
    cores: int,
    rounds: int | None = None,
    budget: int | None = None,
    weights: Sequence[int] | None = None,
) -> int | None:
    """Dispatch to the oracle for one formulation; returns the true optimum.

    ``edges`` are dependency edges for the ordered kinds and conflicting
    pairs for the building kinds. Returns None when an ordered-rounds
    instance cannot fit in ``rounds``.
    """
    if kind is Formulation.ORDERED_ROUNDS:
        if rounds is None:
            raise ValueError("ordered-rounds oracle needs rounds")
        return best_ordered_rounds(len(exec_times), edges, cores, rounds)
    if kind is Formulation.ORDERED_TIMED:
        return best_ordered_makespan(exec_times, edges, cores)
    if kind is Formulation.BUILDING_ROUNDS:
        if rounds is None or weights is None:
            raise ValueError("building-rounds oracle needs rounds and weights")
        return best_selection_rounds(weights, edges, cores, rounds)
    if kind is Formulation.BUILDING_TIMED:
        if budget is None or weights is None:
            raise ValueError("building-timed oracle needs budget and weights")
        return best_selection_reward(exec_times, weights, edges, cores, budget)
    raise ValueError(f"unknown formulation {kind!r}")
