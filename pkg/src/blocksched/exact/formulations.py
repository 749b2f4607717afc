"""Builders for the four exact formulations.

Each builder emits a LinearModel whose rows follow the formulation exactly;
variable and row counts are closed-form in the instance shape and are frozen
in the test suite:

- ordered_rounds_model:  n*R + R binaries; n + R + |E|*R + (R-1) rows
- ordered_timed_model:   n*p + |P|*(p+2) binaries, 2n+1 integers;
                         3n + |E| + |P|*(3p+3) rows
- building_rounds_model: n*R binaries; n + R + |E|*R rows
- building_timed_model:  n + n*p + |P|*(p+2) + |E| binaries, 2n integers;
                         4n + 2|E| + |P|*(3p+3) rows

where E is the edge set (dependencies for ordered, conflicting pairs for
building) and P the non-conflicting unordered pairs.
"""

from __future__ import annotations

from typing import Sequence

from ..conflict import ConflictGraph, DependencyDag
from ..model import Transaction
from .model import (
    Constraint,
    Formulation,
    InstanceData,
    LinearModel,
    ModelInfo,
    Objective,
    Sense,
    Variable,
    VarKind,
)

__all__ = [
    "ordered_rounds_model",
    "ordered_timed_model",
    "building_rounds_model",
    "building_timed_model",
    "nonconflicting_pairs",
]


def nonconflicting_pairs(n: int, edges: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """All unordered pairs (i, j), i < j, that are not in the edge set."""
    edge_set = set(edges)
    return [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in edge_set]


def ordered_rounds_model(dag: DependencyDag, cores: int, rounds: int | None = None) -> LinearModel:
    """Round-indexed model for an ordered block of uniform-cost transactions.

    Minimizes the number of rounds used. ``rounds`` caps the horizon and
    defaults to n, which is always enough (one transaction per round). A
    tighter cap may make the model infeasible; that is the solver's verdict
    to report, not the builder's.
    """
    n = len(dag)
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    if rounds is None:
        rounds = n
    if rounds < 0:
        raise ValueError(f"round horizon must be non-negative, got {rounds}")
    edges = tuple(dag.edges())

    variables: list[Variable] = []
    for i in range(n):
        for r in range(1, rounds + 1):
            variables.append(Variable(f"x_{i}_{r}", VarKind.BINARY))
    for r in range(1, rounds + 1):
        variables.append(Variable(f"u_{r}", VarKind.BINARY))

    objective = Objective(Sense.MINIMIZE, {f"u_{r}": 1 for r in range(1, rounds + 1)})

    constraints: list[Constraint] = []
    for i in range(n):
        constraints.append(
            Constraint(
                f"assign_{i}",
                {f"x_{i}_{r}": 1 for r in range(1, rounds + 1)},
                "=",
                1,
            )
        )
    for r in range(1, rounds + 1):
        coeffs = {f"x_{i}_{r}": 1 for i in range(n)}
        coeffs[f"u_{r}"] = -cores
        constraints.append(Constraint(f"cap_{r}", coeffs, "<=", 0))
    for i, j in edges:
        for r in range(1, rounds + 1):
            coeffs: dict[str, int] = {}
            for t in range(1, r + 1):
                coeffs[f"x_{j}_{t}"] = 1
            for t in range(1, r):
                coeffs[f"x_{i}_{t}"] = coeffs.get(f"x_{i}_{t}", 0) - 1
            constraints.append(Constraint(f"prec_{i}_{j}_{r}", coeffs, "<=", 0))
    for r in range(1, rounds):
        constraints.append(
            Constraint(f"chain_{r}", {f"u_{r}": 1, f"u_{r + 1}": -1}, ">=", 0)
        )

    info = ModelInfo(
        formulation=Formulation.ORDERED_ROUNDS,
        n=n,
        cores=cores,
        rounds=rounds,
        budget=None,
        big=None,
        instance=InstanceData(exec_times=(1,) * n, weights=None, edges=edges),
    )
    return LinearModel(tuple(variables), objective, tuple(constraints), info)


def ordered_timed_model(
    dag: DependencyDag,
    txs: Sequence[Transaction],
    cores: int,
    big: int | None = None,
) -> LinearModel:
    """Integer-time model for an ordered block of arbitrary-cost transactions.

    Minimizes makespan with explicit core binaries. Dependent pairs are
    serialized by precedence rows; non-conflicting pairs sharing a core are
    serialized in either direction through the same-core flag machinery.
    ``big`` is the deactivation constant, defaulting to the total exec time,
    which every feasible makespan is bounded by.
    """
    n = len(txs)
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    if len(dag) != n:
        raise ValueError(f"dag has {len(dag)} nodes for {n} transactions")
    total_time = sum(tx.exec_time for tx in txs)
    if big is None:
        big = total_time
    if big < total_time:
        raise ValueError(f"big constant {big} below total exec time {total_time}")
    edges = tuple(dag.edges())
    pairs = nonconflicting_pairs(n, edges)

    variables: list[Variable] = []
    for i in range(n):
        for c in range(cores):
            variables.append(Variable(f"x_{i}_{c}", VarKind.BINARY))
    for i in range(n):
        variables.append(Variable(f"s_{i}", VarKind.INTEGER, 0, big))
        variables.append(Variable(f"e_{i}", VarKind.INTEGER, 0, big))
    variables.append(Variable("m", VarKind.INTEGER, 0, big))
    for i, j in pairs:
        for c in range(cores):
            variables.append(Variable(f"w_{i}_{j}_{c}", VarKind.BINARY))
        variables.append(Variable(f"z_{i}_{j}", VarKind.BINARY))
        variables.append(Variable(f"o_{i}_{j}", VarKind.BINARY))

    objective = Objective(Sense.MINIMIZE, {"m": 1})

    constraints: list[Constraint] = []
    for i in range(n):
        constraints.append(
            Constraint(f"onecore_{i}", {f"x_{i}_{c}": 1 for c in range(cores)}, "=", 1)
        )
    for i, j in edges:
        constraints.append(
            Constraint(f"prec_{i}_{j}", {f"s_{j}": 1, f"e_{i}": -1}, ">=", 0)
        )
    for i in range(n):
        constraints.append(
            Constraint(f"dur_{i}", {f"e_{i}": 1, f"s_{i}": -1}, "=", txs[i].exec_time)
        )
    for i in range(n):
        constraints.append(Constraint(f"span_{i}", {"m": 1, f"e_{i}": -1}, ">=", 0))
    _same_core_rows(constraints, pairs, cores, big)

    info = ModelInfo(
        formulation=Formulation.ORDERED_TIMED,
        n=n,
        cores=cores,
        rounds=None,
        budget=None,
        big=big,
        instance=InstanceData(
            exec_times=tuple(tx.exec_time for tx in txs), weights=None, edges=edges
        ),
    )
    return LinearModel(tuple(variables), objective, tuple(constraints), info)


def _same_core_rows(
    constraints: list[Constraint],
    pairs: Sequence[tuple[int, int]],
    cores: int,
    big: int,
) -> None:
    """Linearized same-core detection plus either-order serialization.

    w_{ijc} = 1 iff both i and j sit on core c; z_{ij} sums those, so it
    flags a shared core; o_{ij} picks the direction. With z = 1 exactly one
    of the two sequencing rows becomes binding; with z = 0 both relax away.
    """
    for i, j in pairs:
        for c in range(cores):
            constraints.append(
                Constraint(
                    f"wlt1_{i}_{j}_{c}",
                    {f"w_{i}_{j}_{c}": 1, f"x_{i}_{c}": -1},
                    "<=",
                    0,
                )
            )
            constraints.append(
                Constraint(
                    f"wlt2_{i}_{j}_{c}",
                    {f"w_{i}_{j}_{c}": 1, f"x_{j}_{c}": -1},
                    "<=",
                    0,
                )
            )
            constraints.append(
                Constraint(
                    f"wgt_{i}_{j}_{c}",
                    {f"w_{i}_{j}_{c}": 1, f"x_{i}_{c}": -1, f"x_{j}_{c}": -1},
                    ">=",
                    -1,
                )
            )
        coeffs = {f"w_{i}_{j}_{c}": 1 for c in range(cores)}
        coeffs[f"z_{i}_{j}"] = -1
        constraints.append(Constraint(f"zdef_{i}_{j}", coeffs, "=", 0))
        # e_i <= s_j + big*((1 - o) + (1 - z))
        constraints.append(
            Constraint(
                f"seq1_{i}_{j}",
                {f"e_{i}": 1, f"s_{j}": -1, f"o_{i}_{j}": big, f"z_{i}_{j}": big},
                "<=",
                2 * big,
            )
        )
        # e_j <= s_i + big*(o + (1 - z))
        constraints.append(
            Constraint(
                f"seq2_{i}_{j}",
                {f"e_{j}": 1, f"s_{i}": -1, f"o_{i}_{j}": -big, f"z_{i}_{j}": big},
                "<=",
                big,
            )
        )


def building_rounds_model(
    graph: ConflictGraph,
    weights: Sequence[int],
    cores: int,
    rounds: int,
) -> LinearModel:
    """Round-indexed selection model for a uniform-cost candidate pool.

    Maximizes the total weight packed into ``rounds`` rounds of at most
    ``cores`` transactions, no conflicting pair sharing a round. The round
    horizon is budget // exec_time; zero rounds is a legal, empty model.
    """
    n = len(graph)
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    if rounds < 0:
        raise ValueError(f"round horizon must be non-negative, got {rounds}")
    if len(weights) != n:
        raise ValueError(f"{len(weights)} weights for {n} transactions")
    edges = tuple(graph.edges())

    variables: list[Variable] = []
    for i in range(n):
        for r in range(1, rounds + 1):
            variables.append(Variable(f"x_{i}_{r}", VarKind.BINARY))

    objective = Objective(
        Sense.MAXIMIZE,
        {
            f"x_{i}_{r}": weights[i]
            for i in range(n)
            for r in range(1, rounds + 1)
        },
    )

    constraints: list[Constraint] = []
    for i in range(n):
        constraints.append(
            Constraint(
                f"once_{i}",
                {f"x_{i}_{r}": 1 for r in range(1, rounds + 1)},
                "<=",
                1,
            )
        )
    for r in range(1, rounds + 1):
        constraints.append(
            Constraint(f"cap_{r}", {f"x_{i}_{r}": 1 for i in range(n)}, "<=", cores)
        )
    for i, j in edges:
        for r in range(1, rounds + 1):
            constraints.append(
                Constraint(
                    f"pair_{i}_{j}_{r}",
                    {f"x_{i}_{r}": 1, f"x_{j}_{r}": 1},
                    "<=",
                    1,
                )
            )

    info = ModelInfo(
        formulation=Formulation.BUILDING_ROUNDS,
        n=n,
        cores=cores,
        rounds=rounds,
        budget=None,
        big=None,
        instance=InstanceData(
            exec_times=(1,) * n, weights=tuple(weights), edges=edges
        ),
    )
    return LinearModel(tuple(variables), objective, tuple(constraints), info)


def building_timed_model(
    graph: ConflictGraph,
    txs: Sequence[Transaction],
    cores: int,
    budget: int,
) -> LinearModel:
    """Integer-time selection model for an arbitrary-cost candidate pool.

    Maximizes the reward of a selected subset that runs entirely within the
    budget. Selection binaries gate core assignment and the time window;
    conflicting pairs get either-order serialization keyed directly by the
    direction binary, non-conflicting pairs only when they share a core. The
    budget itself is the deactivation constant, since every active window
    lives inside [0, budget].
    """
    n = len(txs)
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    if budget < 1:
        raise ValueError(f"budget must be positive, got {budget}")
    if len(graph) != n:
        raise ValueError(f"graph has {len(graph)} nodes for {n} transactions")
    edges = tuple(graph.edges())
    pairs = nonconflicting_pairs(n, edges)

    variables: list[Variable] = []
    for i in range(n):
        variables.append(Variable(f"v_{i}", VarKind.BINARY))
    for i in range(n):
        for c in range(cores):
            variables.append(Variable(f"x_{i}_{c}", VarKind.BINARY))
    for i in range(n):
        variables.append(Variable(f"s_{i}", VarKind.INTEGER, 0, budget))
        variables.append(Variable(f"e_{i}", VarKind.INTEGER, 0, budget))
    for i, j in edges:
        variables.append(Variable(f"o_{i}_{j}", VarKind.BINARY))
    for i, j in pairs:
        for c in range(cores):
            variables.append(Variable(f"w_{i}_{j}_{c}", VarKind.BINARY))
        variables.append(Variable(f"z_{i}_{j}", VarKind.BINARY))
        variables.append(Variable(f"o_{i}_{j}", VarKind.BINARY))

    objective = Objective(
        Sense.MAXIMIZE, {f"v_{i}": txs[i].reward for i in range(n)}
    )

    constraints: list[Constraint] = []
    for i in range(n):
        coeffs = {f"x_{i}_{c}": 1 for c in range(cores)}
        coeffs[f"v_{i}"] = -1
        constraints.append(Constraint(f"onecore_{i}", coeffs, "=", 0))
    for i in range(n):
        constraints.append(
            Constraint(
                f"dur_{i}",
                {f"e_{i}": 1, f"s_{i}": -1, f"v_{i}": -txs[i].exec_time},
                "=",
                0,
            )
        )
    for i in range(n):
        constraints.append(
            Constraint(f"acts_{i}", {f"s_{i}": 1, f"v_{i}": -budget}, "<=", 0)
        )
        constraints.append(
            Constraint(f"acte_{i}", {f"e_{i}": 1, f"v_{i}": -budget}, "<=", 0)
        )
    for i, j in edges:
        # e_i <= s_j + budget*(1 - o) ; e_j <= s_i + budget*o
        constraints.append(
            Constraint(
                f"conf1_{i}_{j}",
                {f"e_{i}": 1, f"s_{j}": -1, f"o_{i}_{j}": budget},
                "<=",
                budget,
            )
        )
        constraints.append(
            Constraint(
                f"conf2_{i}_{j}",
                {f"e_{j}": 1, f"s_{i}": -1, f"o_{i}_{j}": -budget},
                "<=",
                0,
            )
        )
    _same_core_rows(constraints, pairs, cores, budget)

    info = ModelInfo(
        formulation=Formulation.BUILDING_TIMED,
        n=n,
        cores=cores,
        rounds=None,
        budget=budget,
        big=budget,
        instance=InstanceData(
            exec_times=tuple(tx.exec_time for tx in txs),
            weights=tuple(tx.reward for tx in txs),
            edges=edges,
        ),
    )
    return LinearModel(tuple(variables), objective, tuple(constraints), info)
