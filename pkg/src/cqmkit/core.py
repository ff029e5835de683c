"""Binary constrained quadratic models.

A model minimises a quadratic objective over binary variables subject to
equality and inequality constraints of the same quadratic form::

    objective:   sum_i a_i x_i + sum_{i<j} b_ij x_i x_j + c
    equality:    sum_i a_i x_i + sum_{i<j} b_ij x_i x_j + c == 0
    inequality:  sum_i a_i x_i + sum_{i<j} b_ij x_i x_j + c <= 0

Expressions are keyed by dense 0-based variable index; labels live on the
model.  ``>=`` constraints are accepted and evaluated through their negated
``<=`` form.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from cqmkit.errors import DimensionMismatchError, ModelValidationError

__all__ = [
    "DEFAULT_EPS",
    "Sense",
    "ConstraintKind",
    "VariableId",
    "QuadraticExpression",
    "Constraint",
    "Verdict",
    "FeasibilityReport",
    "CqmModel",
    "as_assignment",
    "evaluate",
    "normalize",
    "check_constraint",
    "is_feasible",
]

DEFAULT_EPS = 1e-9


class Sense(str, enum.Enum):
    EQ = "EQ"
    LE = "LE"
    GE = "GE"


class ConstraintKind(str, enum.Enum):
    ONE_HOT = "one_hot"
    RESOURCE_BOUND = "resource_bound"
    GENERIC = "generic"


@dataclass(frozen=True)
class VariableId:
    index: int
    label: str


class QuadraticExpression:
    """Sparse quadratic form over binary variables.

    ``linear`` maps variable index to coefficient, ``quadratic`` maps index
    pairs to coefficient, ``offset`` is the constant term.  The constructor
    copies its inputs but does not normalise them; see :func:`normalize`.
    """

    __slots__ = ("linear", "quadratic", "offset")

    def __init__(
        self,
        linear: Mapping[int, float] | None = None,
        quadratic: Mapping[tuple[int, int], float] | None = None,
        offset: float = 0.0,
    ):
        self.linear = {int(i): float(v) for i, v in (linear or {}).items()}
        self.quadratic = {
            (int(i), int(j)): float(v) for (i, j), v in (quadratic or {}).items()
        }
        self.offset = float(offset)

    def __repr__(self):
        return (
            f"QuadraticExpression(linear={self.linear!r}, "
            f"quadratic={self.quadratic!r}, offset={self.offset!r})"
        )

    def __eq__(self, other):
        if not isinstance(other, QuadraticExpression):
            return NotImplemented
        return (
            self.linear == other.linear
            and self.quadratic == other.quadratic
            and self.offset == other.offset
        )

    __hash__ = None

    def variables(self) -> set[int]:
        out = set(self.linear)
        for i, j in self.quadratic:
            out.add(i)
            out.add(j)
        return out

    def is_linear(self) -> bool:
        return not self.quadratic

    def scaled(self, factor: float) -> "QuadraticExpression":
        return QuadraticExpression(
            {i: v * factor for i, v in self.linear.items()},
            {k: v * factor for k, v in self.quadratic.items()},
            self.offset * factor,
        )

    def __neg__(self):
        return self.scaled(-1.0)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return QuadraticExpression(self.linear, self.quadratic, self.offset + other)
        if not isinstance(other, QuadraticExpression):
            return NotImplemented
        linear = dict(self.linear)
        for i, v in other.linear.items():
            linear[i] = linear.get(i, 0.0) + v
        quadratic = dict(self.quadratic)
        for k, v in other.quadratic.items():
            quadratic[k] = quadratic.get(k, 0.0) + v
        return normalize(QuadraticExpression(linear, quadratic, self.offset + other.offset))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def to_dict(self) -> dict:
        return {
            "linear": {str(i): v for i, v in self.linear.items()},
            "quadratic": [[i, j, v] for (i, j), v in self.quadratic.items()],
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "QuadraticExpression":
        try:
            linear = {int(i): float(v) for i, v in doc.get("linear", {}).items()}
            quadratic = {}
            for i, j, v in doc.get("quadratic", []):
                key = (min(int(i), int(j)), max(int(i), int(j)))
                quadratic[key] = quadratic.get(key, 0.0) + float(v)
            offset = float(doc.get("offset", 0.0))
        except (TypeError, ValueError, AttributeError) as exc:
            raise ModelValidationError(f"malformed expression document: {exc}") from exc
        return cls(linear, quadratic, offset)


def normalize(expr: QuadraticExpression) -> QuadraticExpression:
    """Canonical form: pairs as (min, max), x_i*x_i folded into x_i, zeros dropped."""
    linear: dict[int, float] = {}
    for i, v in expr.linear.items():
        linear[i] = linear.get(i, 0.0) + v
    quadratic: dict[tuple[int, int], float] = {}
    for (i, j), v in expr.quadratic.items():
        if i == j:
            linear[i] = linear.get(i, 0.0) + v
            continue
        key = (i, j) if i < j else (j, i)
        quadratic[key] = quadratic.get(key, 0.0) + v
    return QuadraticExpression(
        {i: v for i, v in linear.items() if v != 0.0},
        {k: v for k, v in quadratic.items() if v != 0.0},
        expr.offset,
    )


def as_assignment(x, num_variables: int | None = None) -> tuple[int, ...]:
    """Validate ``x`` as a 0/1 vector and return it as a tuple of ints."""
    bits = []
    for b in x:
        if b == 1:
            bits.append(1)
        elif b == 0:
            bits.append(0)
        else:
            raise ModelValidationError(f"assignment entries must be 0 or 1, got {b!r}")
    if num_variables is not None and len(bits) != num_variables:
        raise DimensionMismatchError(
            f"assignment has {len(bits)} entries, model has {num_variables} variables"
        )
    return tuple(bits)


def _check_index(i: int, n: int):
    if not 0 <= i < n:
        raise DimensionMismatchError(
            f"expression refers to variable {i}, assignment has {n} entries"
        )


def evaluate(expr: QuadraticExpression, x: Sequence[int]) -> float:
    """Value of ``expr`` at the binary assignment ``x``."""
    n = len(x)
    total = 0.0
    for i, a in expr.linear.items():
        _check_index(i, n)
        if x[i]:
            total += a
    for (i, j), b in expr.quadratic.items():
        _check_index(i, n)
        _check_index(j, n)
        if x[i] and x[j]:
            total += b
    return total + expr.offset


@dataclass(frozen=True)
class Constraint:
    """Named constraint ``expr <sense> 0``.

    ``scale`` is the minor-unit factor that makes the coefficients integral
    (100 for cents, 10 for tenths); the QUBO transform relies on it.
    """

    name: str
    expr: QuadraticExpression
    sense: Sense = Sense.LE
    kind: ConstraintKind = ConstraintKind.GENERIC
    scale: int = 1

    def __post_init__(self):
        if not self.name:
            raise ModelValidationError("constraint name must be non-empty")
        object.__setattr__(self, "sense", Sense(self.sense))
        object.__setattr__(self, "kind", ConstraintKind(self.kind))
        if int(self.scale) != self.scale or self.scale < 1:
            raise ModelValidationError(
                f"constraint {self.name!r}: scale must be a positive integer"
            )
        object.__setattr__(self, "scale", int(self.scale))

    @classmethod
    def one_hot(cls, name: str, indices: Iterable[int]) -> "Constraint":
        return cls(
            name,
            QuadraticExpression({i: 1.0 for i in indices}, offset=-1.0),
            Sense.EQ,
            ConstraintKind.ONE_HOT,
        )

    def normalized(self) -> tuple[QuadraticExpression, Sense]:
        """The expression and sense with ``>=`` rewritten as ``<=``."""
        if self.sense is Sense.GE:
            return -self.expr, Sense.LE
        return self.expr, self.sense

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sense": self.sense.value,
            "kind": self.kind.value,
            "scale": self.scale,
            "expr": self.expr.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Constraint":
        try:
            return cls(
                doc["name"],
                QuadraticExpression.from_dict(doc["expr"]),
                Sense(doc["sense"]),
                ConstraintKind(doc.get("kind", "generic")),
                doc.get("scale", 1),
            )
        except (KeyError, ValueError, TypeError) as exc:
            if isinstance(exc, ModelValidationError):
                raise
            raise ModelValidationError(f"malformed constraint document: {exc}") from exc


class Verdict(NamedTuple):
    satisfied: bool
    lhs: float
    violation: float


def check_constraint(con: Constraint, x: Sequence[int], eps: float = DEFAULT_EPS) -> Verdict:
    expr, sense = con.normalized()
    lhs = evaluate(expr, x)
    if sense is Sense.EQ:
        violation = max(abs(lhs) - eps, 0.0)
    else:
        violation = max(lhs - eps, 0.0)
    return Verdict(violation == 0.0, lhs, violation)


class FeasibilityReport(NamedTuple):
    feasible: bool
    per_constraint: list[tuple[str, Verdict]]

    def violations(self) -> list[tuple[str, float]]:
        return [(name, v.violation) for name, v in self.per_constraint if not v.satisfied]


@dataclass(frozen=True, eq=False)
class CqmModel:
    """Immutable binary CQM.

    Expressions are normalised on construction.  ``variables`` may be given
    as :class:`VariableId` objects or plain labels (indexed in order).
    """

    variables: tuple[VariableId, ...]
    objective: QuadraticExpression = field(default_factory=QuadraticExpression)
    constraints: tuple[Constraint, ...] = ()
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        variables = tuple(
            v if isinstance(v, VariableId) else VariableId(k, str(v))
            for k, v in enumerate(self.variables)
        )
        labels = set()
        for k, v in enumerate(variables):
            if v.index != k:
                raise ModelValidationError(
                    f"variable indices must be contiguous from 0; position {k} has index {v.index}"
                )
            if not v.label:
                raise ModelValidationError(f"variable {k} has an empty label")
            if v.label in labels:
                raise ModelValidationError(f"duplicate variable label {v.label!r}")
            labels.add(v.label)
        n = len(variables)

        def checked(expr, owner):
            expr = normalize(expr)
            for i in expr.variables():
                if not 0 <= i < n:
                    raise ModelValidationError(f"{owner} refers to unknown variable {i}")
            for v in (*expr.linear.values(), *expr.quadratic.values(), expr.offset):
                if not math.isfinite(v):
                    raise ModelValidationError(f"{owner} has a non-finite coefficient")
            return expr

        objective = checked(self.objective, "objective")
        constraints = []
        names = set()
        for con in self.constraints:
            if con.name in names:
                raise ModelValidationError(f"duplicate constraint name {con.name!r}")
            names.add(con.name)
            constraints.append(
                Constraint(con.name, checked(con.expr, f"constraint {con.name!r}"),
                           con.sense, con.kind, con.scale)
            )
        if not self.eps >= 0:
            raise ModelValidationError("feasibility tolerance must be non-negative")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "constraints", tuple(constraints))
        object.__setattr__(self, "_by_label", {v.label: v.index for v in variables})
        object.__setattr__(self, "_by_name", {c.name: c for c in constraints})

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def labels(self) -> list[str]:
        return [v.label for v in self.variables]

    def index(self, label: str) -> int:
        try:
            return self._by_label[label]
        except KeyError:
            raise KeyError(f"unknown variable label {label!r}") from None

    def constraint(self, name: str) -> Constraint:
        return self._by_name[name]

    def energy(self, x: Sequence[int]) -> float:
        return evaluate(self.objective, x)

    def check(self, x: Sequence[int]) -> FeasibilityReport:
        return is_feasible(self, x)

    def assignment_from_labels(self, labels: Iterable[str]) -> tuple[int, ...]:
        bits = [0] * self.num_variables
        for label in labels:
            bits[self.index(label)] = 1
        return tuple(bits)

    def to_dict(self) -> dict:
        return {
            "variables": [{"index": v.index, "label": v.label} for v in self.variables],
            "objective": self.objective.to_dict(),
            "constraints": [c.to_dict() for c in self.constraints],
            "feasibility_tolerance": self.eps,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CqmModel":
        try:
            variables = sorted(
                (VariableId(int(v["index"]), str(v["label"])) for v in doc["variables"]),
                key=lambda v: v.index,
            )
            objective = QuadraticExpression.from_dict(doc.get("objective", {}))
            constraints = [Constraint.from_dict(c) for c in doc.get("constraints", [])]
            eps = float(doc.get("feasibility_tolerance", DEFAULT_EPS))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelValidationError):
                raise
            raise ModelValidationError(f"malformed model document: {exc}") from exc
        return cls(tuple(variables), objective, tuple(constraints), eps)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "CqmModel":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelValidationError(f"model document is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def is_feasible(model: CqmModel, x: Sequence[int]) -> FeasibilityReport:
    if len(x) != model.num_variables:
        raise DimensionMismatchError(
            f"assignment has {len(x)} entries, model has {model.num_variables} variables"
        )
    verdicts = [(c.name, check_constraint(c, x, model.eps)) for c in model.constraints]
    return FeasibilityReport(all(v.satisfied for _, v in verdicts), verdicts)
