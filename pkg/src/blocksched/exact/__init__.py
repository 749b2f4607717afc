"""Exact baselines: model builders, an embedded solver, oracles, bounds."""

from .bounds import fractional_reward_bound, reward_upper_bound
from .brute import ORACLE_LIMIT, brute_force
from .formulations import (
    building_rounds_model,
    building_timed_model,
    nonconflicting_pairs,
    ordered_rounds_model,
    ordered_timed_model,
)
from .lp import ParsedLp, lp_text, parse_lp, write_lp
from .model import (
    AssignmentError,
    Constraint,
    Formulation,
    InstanceData,
    LinearModel,
    ModelInfo,
    Objective,
    Sense,
    Variable,
    VarKind,
    check_assignment,
)
from .solver import (
    ROUND_CELL_LIMIT,
    TIMED_NODE_LIMIT,
    SolveResult,
    SolveStatus,
    skip_reason,
    solve,
)

__all__ = [
    "AssignmentError",
    "Constraint",
    "Formulation",
    "InstanceData",
    "LinearModel",
    "ModelInfo",
    "Objective",
    "ORACLE_LIMIT",
    "ParsedLp",
    "ROUND_CELL_LIMIT",
    "Sense",
    "SolveResult",
    "SolveStatus",
    "TIMED_NODE_LIMIT",
    "Variable",
    "VarKind",
    "brute_force",
    "building_rounds_model",
    "building_timed_model",
    "check_assignment",
    "fractional_reward_bound",
    "lp_text",
    "nonconflicting_pairs",
    "ordered_rounds_model",
    "ordered_timed_model",
    "parse_lp",
    "reward_upper_bound",
    "skip_reason",
    "solve",
    "write_lp",
]
