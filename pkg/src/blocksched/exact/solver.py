"""Embedded branch-and-bound solver for the four exact formulations.

The search works on the combinatorial payload in ``ModelInfo.instance``
rather than on the linear rows, then translates the winning schedule back
into a full variable assignment and verifies it against every row with
``check_assignment``. Children are explored in priority order (critical-path
height for scheduling, reward density for selection), so the first leaf the
depth-first search completes is the greedy heuristic's answer and seeds the
incumbent: the warm start falls out of the child ordering instead of being
bolted on.

Statuses: OPTIMAL when the search closed, INFEASIBLE when it closed empty
(only the round-horizon scheduling model can), TIMED_OUT when the time limit
cut it, FEASIBLE when a node cap cut it with an incumbent in hand.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .formulations import nonconflicting_pairs
from .model import Formulation, LinearModel, check_assignment

__all__ = [
    "SolveStatus",
    "SolveResult",
    "solve",
    "skip_reason",
    "TIMED_NODE_LIMIT",
    "ROUND_CELL_LIMIT",
]

# Documented practical reach of the embedded solver; beyond these, callers
# should expect TIMED_OUT and benchmark drivers skip the run instead.
TIMED_NODE_LIMIT = 14
ROUND_CELL_LIMIT = 400


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"  # node cap hit, incumbent in hand, no optimality proof
    INFEASIBLE = "infeasible"
    TIMED_OUT = "timed-out"


@dataclass(frozen=True, slots=True)
class SolveResult:
    status: SolveStatus
    objective: int | None
    assignment: dict[str, int] | None
    nodes: int
    elapsed: float


def skip_reason(model: LinearModel) -> str | None:
    """Why this model is beyond the solver's practical reach, or None."""
    info = model.info
    if info.formulation in (Formulation.ORDERED_TIMED, Formulation.BUILDING_TIMED):
        if info.n > TIMED_NODE_LIMIT:
            return f"n={info.n} exceeds timed-model limit {TIMED_NODE_LIMIT}"
        return None
    cells = info.n * (info.rounds or 0)
    if cells > ROUND_CELL_LIMIT:
        return f"n*R={cells} exceeds round-model limit {ROUND_CELL_LIMIT}"
    return None


class _Budget:
    """Node counter with a wall-clock deadline and an optional node cap.

    The clock is polled every 64 nodes starting at node 1, so even a
    near-zero time limit trips before any leaf is accepted.
    """

    __slots__ = ("deadline", "max_nodes", "nodes", "timed_out", "node_capped")

    def __init__(self, deadline: float, max_nodes: int | None) -> None:
        self.deadline = deadline
        self.max_nodes = max_nodes
        self.nodes = 0
        self.timed_out = False
        self.node_capped = False

    def tick(self) -> bool:
        if self.timed_out or self.node_capped:
            return False
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            self.node_capped = True
            return False
        if self.nodes % 64 == 1 and time.monotonic() >= self.deadline:
            self.timed_out = True
            return False
        return True

    @property
    def exhausted(self) -> bool:
        return self.timed_out or self.node_capped


def solve(
    model: LinearModel,
    time_limit: float = 60.0,
    max_nodes: int | None = None,
) -> SolveResult:
    """Solve a built model to proven optimality within the given budgets.

    The returned assignment (when present) has been replayed through
    ``check_assignment``, so it satisfies every row and bound and scores
    exactly ``objective``.
    """
    start = time.monotonic()
    budget = _Budget(start + time_limit, max_nodes)
    kind = model.info.formulation
    if kind is Formulation.ORDERED_ROUNDS:
        status, value, assignment = _solve_ordered_rounds(model, budget)
    elif kind is Formulation.ORDERED_TIMED:
        status, value, assignment = _solve_ordered_timed(model, budget)
    elif kind is Formulation.BUILDING_ROUNDS:
        status, value, assignment = _solve_building_rounds(model, budget)
    elif kind is Formulation.BUILDING_TIMED:
        status, value, assignment = _solve_building_timed(model, budget)
    else:
        raise ValueError(f"unknown formulation {kind!r}")

    if assignment is not None:
        scored = check_assignment(model, assignment)
        if scored != value:
            raise AssertionError(
                f"translated assignment scores {scored}, search reported {value}"
            )
    return SolveResult(status, value, assignment, budget.nodes, time.monotonic() - start)


def _cut_status(budget: _Budget, has_incumbent: bool) -> SolveStatus:
    if budget.timed_out:
        return SolveStatus.TIMED_OUT
    if has_incumbent:
        return SolveStatus.FEASIBLE
    return SolveStatus.TIMED_OUT


# ---------------------------------------------------------------------------
# Ordered problems: minimum makespan of the whole set under dependency edges.
# One engine serves both models; the round-horizon model is the unit-time
# case, where every event-aligned schedule is round-aligned and the round
# optimum equals the makespan optimum.


def _solve_ordered_rounds(
    model: LinearModel, budget: _Budget
) -> tuple[SolveStatus, int | None, dict[str, int] | None]:
    info = model.info
    horizon = info.rounds if info.rounds is not None else info.n
    found = _min_ordered_makespan(
        info.instance.exec_times, info.instance.edges, info.cores, horizon + 1, budget
    )
    if found is None:
        if budget.exhausted:
            return _cut_status(budget, False), None, None
        return SolveStatus.INFEASIBLE, None, None
    used, starts = found
    assignment = _assign_ordered_rounds(used, starts)
    if budget.exhausted:
        return _cut_status(budget, True), used, assignment
    return SolveStatus.OPTIMAL, used, assignment


def _solve_ordered_timed(
    model: LinearModel, budget: _Budget
) -> tuple[SolveStatus, int | None, dict[str, int] | None]:
    info = model.info
    times = info.instance.exec_times
    found = _min_ordered_makespan(
        times, info.instance.edges, info.cores, sum(times) + 1, budget
    )
    if found is None:
        # a serial schedule always fits under the cap, so only a budget cut
        # can leave the search empty-handed
        return _cut_status(budget, False), None, None
    makespan, starts = found
    assignment = _assign_ordered_timed(model, makespan, starts)
    if budget.exhausted:
        return _cut_status(budget, True), makespan, assignment
    return SolveStatus.OPTIMAL, makespan, assignment


def _min_ordered_makespan(
    times: Sequence[int],
    edges: Sequence[tuple[int, int]],
    cores: int,
    cap: int,
    budget: _Budget,
) -> tuple[int, dict[int, int]] | None:
    """Minimum-makespan search over event-aligned schedules, exclusive cap.

    Edges (i, j) always have i < j, so ascending id is a topological order.
    Dispatch decisions happen only at time 0 and at completion instants;
    every schedule left-shifts onto that grid without growing, so the sweep
    is exact. Tasks dispatched at one instant are forced into ascending
    priority order, which enumerates each simultaneous set exactly once, and
    a deliberate-wait branch keeps non-greedy optima reachable. Dominance:
    a state revisited no earlier than before in the same relative shape
    cannot improve on the first visit.
    """
    n = len(times)
    full = (1 << n) - 1
    succs: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for i, j in edges:
        succs[i].append(j)
        indeg[j] += 1
    heights = [0] * n
    tails = [0] * n
    for i in range(n - 1, -1, -1):
        tails[i] = max((heights[j] for j in succs[i]), default=0)
        heights[i] = times[i] + tails[i]

    def prio(i: int) -> tuple[int, int, int]:
        return (-heights[i], -times[i], i)

    best_val = cap
    best_starts: dict[int, int] | None = None
    ready = {i for i in range(n) if indeg[i] == 0}
    running: list[tuple[int, int]] = []  # (finish, task)
    starts: dict[int, int] = {}
    state = {"done": 0, "rem_work": sum(times)}
    memo: dict[tuple, int] = {}

    def expand(now: int, peak: int, gate: tuple[int, int, int] | None) -> None:
        nonlocal best_val, best_starts
        if not budget.tick():
            return
        done = state["done"]
        if done == full:
            if peak < best_val:
                best_val = peak
                best_starts = dict(starts)
            return

        bound = peak
        run_work = 0
        for f, task in running:
            run_work += f - now
            anchored = f + tails[task]
            if anchored > bound:
                bound = anchored
        for i in range(n):
            if not (done >> i & 1) and i not in starts:
                reach = now + heights[i]
                if reach > bound:
                    bound = reach
        load = now + -(-(state["rem_work"] + run_work) // cores)
        if load > bound:
            bound = load
        if bound >= best_val:
            return

        key = (done, tuple(sorted((f - now, task) for f, task in running)), gate)
        seen = memo.get(key)
        if seen is not None and seen <= now:
            return
        memo[key] = now

        if len(running) < cores and ready:
            if gate is None:
                cands = sorted(ready, key=prio)
            else:
                cands = sorted((i for i in ready if prio(i) > gate), key=prio)
            for c in cands:
                finish = now + times[c]
                starts[c] = now
                running.append((finish, c))
                ready.discard(c)
                state["rem_work"] -= times[c]
                expand(now, max(peak, finish), prio(c))
                state["rem_work"] += times[c]
                ready.add(c)
                # the wait branch restores membership, not order, so undo by
                # value rather than popping whatever sits at the tail
                running.remove((finish, c))
                del starts[c]

        if running:
            # wait: advance to the next completion instant, releasing every
            # task that finishes there before any new dispatch decision
            fmin = min(f for f, _ in running)
            finishing = [(f, task) for f, task in running if f == fmin]
            released: list[int] = []
            for entry in finishing:
                running.remove(entry)
                state["done"] |= 1 << entry[1]
                for j in succs[entry[1]]:
                    indeg[j] -= 1
                    if indeg[j] == 0:
                        ready.add(j)
                        released.append(j)
            expand(fmin, peak, None)
            for j in released:
                ready.discard(j)
            for entry in finishing:
                state["done"] &= ~(1 << entry[1])
                for j in succs[entry[1]]:
                    indeg[j] += 1
                running.append(entry)

    expand(0, 0, None)
    if best_starts is None:
        return None
    return best_val, best_starts


def _assign_ordered_rounds(used: int, starts: Mapping[int, int]) -> dict[str, int]:
    assignment = {f"x_{i}_{s + 1}": 1 for i, s in starts.items()}
    for r in range(1, used + 1):
        assignment[f"u_{r}"] = 1
    return assignment


def _assign_ordered_timed(
    model: LinearModel, makespan: int, starts: Mapping[int, int]
) -> dict[str, int]:
    info = model.info
    times = info.instance.exec_times
    core_of = _color_cores(starts, times, info.cores)
    assignment: dict[str, int] = {"m": makespan}
    for i, s in starts.items():
        assignment[f"s_{i}"] = s
        assignment[f"e_{i}"] = s + times[i]
        assignment[f"x_{i}_{core_of[i]}"] = 1
    for i, j in nonconflicting_pairs(info.n, info.instance.edges):
        if core_of[i] != core_of[j]:
            continue
        assignment[f"w_{i}_{j}_{core_of[i]}"] = 1
        assignment[f"z_{i}_{j}"] = 1
        if starts[i] + times[i] <= starts[j]:
            assignment[f"o_{i}_{j}"] = 1
    return assignment


def _color_cores(
    starts: Mapping[int, int], times: Sequence[int], cores: int
) -> dict[int, int]:
    """Assign each placed task the lowest core free at its start time."""
    avail = [0] * cores
    core_of: dict[int, int] = {}
    for i in sorted(starts, key=lambda i: (starts[i], i)):
        for c in range(cores):
            if avail[c] <= starts[i]:
                core_of[i] = c
                avail[c] = starts[i] + times[i]
                break
        else:
            raise AssertionError("schedule exceeds core capacity")
    return core_of


# ---------------------------------------------------------------------------
# Building problems: choose a subset to maximize reward under the capacity.
# Tasks are branched in reward order (density order for the timed model);
# the include branch comes first, so the first completed leaf is the greedy
# packing.


def _solve_building_rounds(
    model: LinearModel, budget: _Budget
) -> tuple[SolveStatus, int | None, dict[str, int] | None]:
    info = model.info
    weights = info.instance.weights or ()
    value, color = _max_selection_rounds(
        weights, info.instance.edges, info.cores, info.rounds or 0, budget
    )
    assignment = {f"x_{i}_{r + 1}": 1 for i, r in color.items()}
    if budget.exhausted:
        return _cut_status(budget, True), value, assignment
    return SolveStatus.OPTIMAL, value, assignment


def _max_selection_rounds(
    weights: Sequence[int],
    edges: Sequence[tuple[int, int]],
    cores: int,
    rounds: int,
    budget: _Budget,
) -> tuple[int, dict[int, int]]:
    """Max-weight subset packing into rounds of ``cores``, conflicts apart.

    Rounds are interchangeable, so a new task may only open the first empty
    round; that kills the permutation symmetry without losing any packing.
    """
    n = len(weights)
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    order = sorted(range(n), key=lambda i: (-weights[i], i))
    prefix = [0] * (n + 1)
    for pos, i in enumerate(order):
        prefix[pos + 1] = prefix[pos] + weights[i]

    best_val = 0
    best_color: dict[int, int] = {}
    color: dict[int, int] = {}
    loads = [0] * rounds
    state = {"placed": 0, "used": 0}

    def dfs(pos: int, cur: int) -> None:
        nonlocal best_val, best_color
        if not budget.tick():
            return
        if pos == n:
            if cur > best_val:
                best_val = cur
                best_color = dict(color)
            return
        free = cores * rounds - state["placed"]
        take = min(n - pos, free)
        if cur + prefix[pos + take] - prefix[pos] <= best_val:
            return
        task = order[pos]
        for r in range(min(state["used"] + 1, rounds)):
            if loads[r] >= cores:
                continue
            if any(color.get(peer) == r for peer in adjacency[task]):
                continue
            opened = r == state["used"]
            color[task] = r
            loads[r] += 1
            state["placed"] += 1
            state["used"] += opened
            dfs(pos + 1, cur + weights[task])
            state["used"] -= opened
            state["placed"] -= 1
            loads[r] -= 1
            del color[task]
        dfs(pos + 1, cur)

    dfs(0, 0)
    return best_val, best_color


def _solve_building_timed(
    model: LinearModel, budget: _Budget
) -> tuple[SolveStatus, int | None, dict[str, int] | None]:
    info = model.info
    value, placements = _max_selection_timed(
        info.instance.exec_times,
        info.instance.weights or (),
        info.instance.edges,
        info.cores,
        info.budget or 0,
        budget,
    )
    assignment = _assign_building_timed(model, placements)
    if budget.exhausted:
        return _cut_status(budget, True), value, assignment
    return SolveStatus.OPTIMAL, value, assignment


def _max_selection_timed(
    times: Sequence[int],
    weights: Sequence[int],
    edges: Sequence[tuple[int, int]],
    cores: int,
    horizon: int,
    budget: _Budget,
) -> tuple[int, dict[int, int]]:
    """Max-reward subset that packs on ``cores`` within the time horizon.

    Include/exclude search in density order. Each include keeps a live
    packing: first try slotting the newcomer into the current placement,
    and only on failure repack the whole selection from scratch (complete
    search over insertion orders), so unpackable branches are cut exactly.
    The fractional relaxation over remaining machine-time bounds the rest.
    """
    n = len(times)
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    order = sorted(range(n), key=lambda i: (-Fraction(weights[i], times[i]), i))

    best_val = 0
    best_place: dict[int, int] = {}
    place: dict[int, int] = {}

    def earliest(task: int, placed: Mapping[int, int]) -> int | None:
        duration = times[task]
        spans = [(s, s + times[j]) for j, s in placed.items()]
        avoid = [
            (s, s + times[j]) for j, s in placed.items() if j in adjacency[task]
        ]
        candidates = {0} | {e for _, e in spans}
        for t0 in sorted(candidates):
            end = t0 + duration
            if end > horizon:
                return None  # candidates ascend, later ones only overrun more
            if any(s < end and t0 < e for s, e in avoid):
                continue
            points = {t0} | {s for s, _ in spans if t0 < s < end}
            if all(
                sum(1 for s, e in spans if s <= q < e) < cores for q in points
            ):
                return t0
        return None

    def repack(members: Sequence[int]) -> dict[int, int] | None:
        rebuilt: dict[int, int] = {}

        def insert(remaining: tuple[int, ...]) -> bool:
            if not budget.tick():
                return False
            if not remaining:
                return True
            for pick in range(len(remaining)):
                task = remaining[pick]
                t0 = earliest(task, rebuilt)
                if t0 is None:
                    continue
                rebuilt[task] = t0
                if insert(remaining[:pick] + remaining[pick + 1 :]):
                    return True
                del rebuilt[task]
            return False

        longest_first = tuple(sorted(members, key=lambda i: (-times[i], i)))
        return rebuilt if insert(longest_first) else None

    def dfs(pos: int, cur: int, used_time: int) -> None:
        nonlocal best_val, best_place
        if not budget.tick():
            return
        if pos == n:
            if cur > best_val:
                best_val = cur
                best_place = dict(place)
            return
        room = cores * horizon - used_time
        relaxed = Fraction(cur)
        for q in range(pos, n):
            if room <= 0:
                break
            i = order[q]
            grab = times[i] if times[i] <= room else room
            relaxed += Fraction(weights[i] * grab, times[i])
            room -= grab
        if relaxed.numerator // relaxed.denominator <= best_val:
            return
        task = order[pos]
        if times[task] <= horizon:
            slot = earliest(task, place)
            if slot is not None:
                place[task] = slot
                dfs(pos + 1, cur + weights[task], used_time + times[task])
                del place[task]
            else:
                packed = repack(list(place) + [task])
                if packed is not None:
                    saved = dict(place)
                    place.clear()
                    place.update(packed)
                    dfs(pos + 1, cur + weights[task], used_time + times[task])
                    place.clear()
                    place.update(saved)
        dfs(pos + 1, cur, used_time)

    dfs(0, 0, 0)
    return best_val, best_place


def _assign_building_timed(
    model: LinearModel, placements: Mapping[int, int]
) -> dict[str, int]:
    info = model.info
    times = info.instance.exec_times
    core_of = _color_cores(placements, times, info.cores)
    assignment: dict[str, int] = {}
    ends = {i: s + times[i] for i, s in placements.items()}
    for i, s in placements.items():
        assignment[f"v_{i}"] = 1
        assignment[f"x_{i}_{core_of[i]}"] = 1
        assignment[f"s_{i}"] = s
        assignment[f"e_{i}"] = ends[i]
    for i, j in info.instance.edges:
        # direction flag: 0 means j runs (or sits) no later than i's start
        if not (ends.get(j, 0) <= placements.get(i, 0)):
            assignment[f"o_{i}_{j}"] = 1
    for i, j in nonconflicting_pairs(info.n, info.instance.edges):
        if i not in placements or j not in placements:
            continue
        if core_of[i] != core_of[j]:
            continue
        assignment[f"w_{i}_{j}_{core_of[i]}"] = 1
        assignment[f"z_{i}_{j}"] = 1
        if ends[i] <= placements[j]:
            assignment[f"o_{i}_{j}"] = 1
    return assignment
