"""Reward upper bound for budgeted block building."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..model import Transaction

__all__ = ["fractional_reward_bound", "reward_upper_bound"]


def fractional_reward_bound(
    exec_times: Sequence[int], weights: Sequence[int], capacity: int | Fraction
) -> Fraction:
    """Fractional knapsack over (weight, time) items, exact arithmetic.

    Items are taken in descending weight-per-time order and the last one may
    be split. Conflicts and core boundaries are ignored, so the result bounds
    every feasible packing of total capacity ``capacity`` from above: it is
    the LP optimum of the single-resource relaxation.
    """
    order = sorted(
        range(len(exec_times)),
        key=lambda i: (-Fraction(weights[i], exec_times[i]), i),
    )
    room = Fraction(capacity)
    total = Fraction(0)
    for i in order:
        if room <= 0:
            break
        take = min(Fraction(exec_times[i]), room)
        total += Fraction(weights[i]) * take / exec_times[i]
        room -= take
    return total


def reward_upper_bound(txs: Sequence[Transaction], cores: int, budget: int) -> int:
    """Provable cap on the reward any built block can reach.

    Capacity is cores * budget total gas across all cores; the fractional
    optimum is rounded down since rewards are integral.
    """
    if cores < 1 or budget < 0:
        raise ValueError(f"need cores >= 1 and budget >= 0, got {cores}, {budget}")
    bound = fractional_reward_bound(
        [tx.exec_time for tx in txs], [tx.reward for tx in txs], cores * budget
    )
    return bound.numerator // bound.denominator
