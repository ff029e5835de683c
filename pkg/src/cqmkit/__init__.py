"""Constrained quadratic models for one-choice-per-group selection problems."""

from cqmkit.catalog import (
    Bound,
    ChoiceCatalog,
    ChoiceSpec,
    build_model,
    load_catalog,
    load_menu,
    parse_bound,
    parse_catalog,
)
from cqmkit.core import (
    Constraint,
    ConstraintKind,
    CqmModel,
    QuadraticExpression,
    Sense,
    VariableId,
    check_constraint,
    evaluate,
    is_feasible,
    normalize,
)
from cqmkit.report import describe_solution, render_table
from cqmkit.solvers import (
    Sample,
    SampleSet,
    SolveParams,
    aggregate,
    solve_exact,
    solve_remote,
    solve_sa,
)
from cqmkit.transform import PenaltyPolicy, QuboModel, auto_penalty, slack_bits, to_qubo

__version__ = "0.1.0"

__all__ = [
    "Bound",
    "ChoiceCatalog",
    "ChoiceSpec",
    "Constraint",
    "ConstraintKind",
    "CqmModel",
    "PenaltyPolicy",
    "QuadraticExpression",
    "QuboModel",
    "Sample",
    "SampleSet",
    "Sense",
    "SolveParams",
    "VariableId",
    "aggregate",
    "auto_penalty",
    "build_model",
    "check_constraint",
    "describe_solution",
    "evaluate",
    "is_feasible",
    "load_catalog",
    "load_menu",
    "normalize",
    "parse_bound",
    "parse_catalog",
    "render_table",
    "slack_bits",
    "solve_exact",
    "solve_remote",
    "solve_sa",
    "to_qubo",
]
