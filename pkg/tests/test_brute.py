"""Reference oracles on instances small enough to verify by hand."""

import pytest

from blocksched.exact import ORACLE_LIMIT, Formulation, brute_force
from blocksched.exact.brute import (
    best_ordered_makespan,
    best_ordered_rounds,
    best_selection_reward,
    best_selection_rounds,
)


def test_independent_unit_tasks_pack():
    assert best_ordered_makespan([1, 1, 1, 1], [], 2) == 2
    assert best_ordered_makespan([1, 1, 1], [], 4) == 1


def test_chain_forces_serial_time():
    assert best_ordered_makespan([1, 1, 1], [(0, 1), (1, 2)], 8) == 3


def test_long_task_overlaps_chain():
    # the classic: 3-unit solo vs a unit chain of three on two cores
    assert best_ordered_makespan([3, 1, 1, 1], [(1, 2), (2, 3)], 2) == 3


def test_single_core_is_total_work():
    assert best_ordered_makespan([2, 3, 4], [], 1) == 9


def test_empty_instance_is_zero():
    assert best_ordered_makespan([], [], 3) == 0


def test_ordered_rounds_caps_and_passes():
    assert best_ordered_rounds(4, [], 2, rounds=2) == 2
    assert best_ordered_rounds(4, [], 2, rounds=1) is None
    assert best_ordered_rounds(3, [(0, 1), (1, 2)], 2, rounds=3) == 3


def test_selection_reward_prefers_best_feasible_subset():
    # two conflicting heavies and a cheap filler, one core, budget 2
    assert best_selection_reward([2, 2, 1], [5, 4, 1], [(0, 1)], 1, 2) == 5
    # two cores fit one heavy each in parallel? no: conflict forces serial
    assert best_selection_reward([2, 2, 1], [5, 4, 1], [(0, 1)], 2, 2) == 6


def test_selection_reward_zero_when_nothing_fits():
    assert best_selection_reward([5], [9], [], 2, 4) == 0


def test_selection_rounds_is_capacity_and_coloring_bound():
    # triangle of conflicts: at most one per round
    triangle = [(0, 1), (0, 2), (1, 2)]
    assert best_selection_rounds([4, 3, 2], triangle, 2, 2) == 7
    assert best_selection_rounds([4, 3, 2], triangle, 1, 2) == 7
    assert best_selection_rounds([4, 3, 2], [], 1, 2) == 7
    assert best_selection_rounds([4, 3, 2], [], 2, 2) == 9


def test_dispatcher_routes_and_validates():
    assert brute_force(Formulation.ORDERED_TIMED, [1, 1], [(0, 1)], 2) == 2
    assert brute_force(Formulation.ORDERED_ROUNDS, [1, 1], [], 2, rounds=1) == 1
    assert brute_force(Formulation.BUILDING_ROUNDS, [1, 1], [], 2, rounds=1, weights=[2, 3]) == 5
    assert (
        brute_force(Formulation.BUILDING_TIMED, [1, 2], [(0, 1)], 1, budget=2, weights=[1, 5]) == 5
    )
    with pytest.raises(ValueError):
        brute_force(Formulation.ORDERED_ROUNDS, [1], [], 2)
    with pytest.raises(ValueError):
        brute_force(Formulation.BUILDING_TIMED, [1], [], 2, budget=2)


def test_oracles_refuse_oversized_instances():
    n = ORACLE_LIMIT + 1
    with pytest.raises(ValueError):
        best_ordered_makespan([1] * n, [], 2)
    with pytest.raises(ValueError):
        best_selection_rounds([1] * n, [], 2, 2)
