"""Linear-model container shared by the formulation builders, the embedded
solver, and the LP writer."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

__all__ = [
    "VarKind",
    "Sense",
    "Formulation",
    "Variable",
    "Constraint",
    "Objective",
    "InstanceData",
    "ModelInfo",
    "LinearModel",
    "AssignmentError",
    "check_assignment",
]


class VarKind(Enum):
    BINARY = "binary"
    INTEGER = "integer"
    CONTINUOUS = "continuous"


class Sense(Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class Formulation(Enum):
    """Which of the four exact models a LinearModel encodes."""

    ORDERED_ROUNDS = "ordered-rounds"  # fixed order, uniform costs, round-indexed
    ORDERED_TIMED = "ordered-timed"  # fixed order, arbitrary costs, integer time
    BUILDING_ROUNDS = "building-rounds"  # pool selection, uniform costs, rounds
    BUILDING_TIMED = "building-timed"  # pool selection, arbitrary costs, time


@dataclass(frozen=True, slots=True)
class Variable:
    name: str
    kind: VarKind
    lower: int = 0
    upper: int | None = 1  # None means unbounded above

    def __post_init__(self) -> None:
        if self.kind is VarKind.BINARY and (self.lower, self.upper) != (0, 1):
            raise ValueError(f"binary variable {self.name} must have bounds [0,1]")


@dataclass(frozen=True, slots=True)
class Constraint:
    """One linear row: sum(coeffs[v] * v) RELATION rhs."""

    name: str
    coeffs: Mapping[str, int]
    relation: str  # "<=", ">=", or "="
    rhs: int

    def __post_init__(self) -> None:
        if self.relation not in ("<=", ">=", "="):
            raise ValueError(f"constraint {self.name}: bad relation {self.relation!r}")


@dataclass(frozen=True, slots=True)
class Objective:
    sense: Sense
    coeffs: Mapping[str, int]


@dataclass(frozen=True, slots=True)
class InstanceData:
    """The combinatorial instance a model was built from.

    ``edges`` are the dependency edges (ordered problems) or the conflicting
    pairs (building problems), always as (i, j) with i < j. The embedded
    solver works on this payload and translates its answer back to the
    model's variables.
    """

    exec_times: tuple[int, ...]
    weights: tuple[int, ...] | None
    edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True, slots=True)
class ModelInfo:
    formulation: Formulation
    n: int
    cores: int
    rounds: int | None
    budget: int | None
    big: int | None
    instance: InstanceData


@dataclass(frozen=True, slots=True)
class LinearModel:
    variables: tuple[Variable, ...]
    objective: Objective
    constraints: tuple[Constraint, ...]
    info: ModelInfo

    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def count_variables(self, kind: VarKind | None = None) -> int:
        if kind is None:
            return len(self.variables)
        return sum(1 for v in self.variables if v.kind is kind)

    def count_constraints(self, prefix: str | None = None) -> int:
        if prefix is None:
            return len(self.constraints)
        return sum(1 for c in self.constraints if c.name.startswith(prefix))


class AssignmentError(ValueError):
    """An assignment violated a variable bound, integrality, or a constraint."""


def check_assignment(
    model: LinearModel, assignment: Mapping[str, int | Fraction]
) -> int | Fraction:
    """Verify an assignment against every row and bound; return its objective.

    Missing variables default to 0 (every builder keeps 0 inside all bounds).
    Raises AssignmentError naming the first violated row, so solver bugs
    surface with a pointer into the model rather than a bare mismatch.
    """
    values: dict[str, int | Fraction] = {}
    known = {v.name for v in model.variables}
    for name in assignment:
        if name not in known:
            raise AssignmentError(f"assignment names unknown variable {name!r}")
    for var in model.variables:
        val = assignment.get(var.name, 0)
        if var.kind in (VarKind.BINARY, VarKind.INTEGER) and val != int(val):
            raise AssignmentError(f"{var.name} = {val} must be integral")
        if val < var.lower:
            raise AssignmentError(f"{var.name} = {val} below lower bound {var.lower}")
        if var.upper is not None and val > var.upper:
            raise AssignmentError(f"{var.name} = {val} above upper bound {var.upper}")
        values[var.name] = val
    for row in model.constraints:
        total = sum(coef * values[name] for name, coef in row.coeffs.items())
        ok = (
            total <= row.rhs
            if row.relation == "<="
            else total >= row.rhs
            if row.relation == ">="
            else total == row.rhs
        )
        if not ok:
            raise AssignmentError(
                f"constraint {row.name}: value {total} violates {row.relation} {row.rhs}"
            )
    return sum(coef * values[name] for name, coef in model.objective.coeffs.items())
