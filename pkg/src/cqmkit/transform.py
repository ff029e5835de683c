"""Penalty transform from a binary CQM to an unconstrained QUBO.

Each constraint contributes ``P_c * (expr_c(x))**2`` (equalities) or
``P_c * (expr_c(x) + slack_c / scale_c)**2`` (inequalities), where the
integer ``slack_c`` in ``[0, R_c]`` is binary-encoded with weights
``1, 2, 4, ...`` and a trimmed top weight so the representable set is
exactly ``{0, ..., R_c}``.

This is a stand-in for a hybrid solver's native constraint handling: the
penalty weights are a safe default, not a reproduction of any vendor's
internal balancing.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from cqmkit.core import Constraint, CqmModel, QuadraticExpression, Sense, evaluate
from cqmkit.errors import DimensionMismatchError, NonIntegralCoefficientError, TransformError

__all__ = [
    "PenaltyPolicy",
    "SlackEncoding",
    "SlackBit",
    "QuboModel",
    "Decoded",
    "auto_penalty",
    "slack_bits",
    "encode_slack",
    "to_qubo",
]

_INT_TOL = 1e-9


@dataclass(frozen=True)
class PenaltyPolicy:
    mode: str = "auto"
    fixed_weight: float = 1.0
    auto_multiplier: float = 2.0

    def __post_init__(self):
        if self.mode not in ("auto", "fixed"):
            raise ValueError(f"penalty mode must be 'auto' or 'fixed', got {self.mode!r}")
        if self.mode == "fixed" and not self.fixed_weight > 0:
            raise ValueError("fixed penalty weight must be > 0")
        if not self.auto_multiplier >= 1:
            raise ValueError("auto_multiplier must be >= 1")

    @classmethod
    def fixed(cls, weight: float) -> "PenaltyPolicy":
        return cls(mode="fixed", fixed_weight=weight)


class SlackEncoding(NamedTuple):
    range: int
    num_bits: int
    bit_weights: tuple[int, ...]


class SlackBit(NamedTuple):
    constraint: str
    bit: int
    weight: int


class Decoded(NamedTuple):
    cqm_assignment: tuple[int, ...]
    slack_values: dict[str, int]


def auto_penalty(model: CqmModel, multiplier: float = 2.0) -> dict[str, float]:
    """Uniform weight ``multiplier * spread`` for every constraint.

    ``spread`` bounds how far the objective can move over the hypercube, so a
    unit violation always costs more than any objective gain.  A flat
    objective gets the floor weight 1.0.
    """
    if not multiplier >= 1:
        raise ValueError("multiplier must be >= 1")
    obj = model.objective
    spread = sum(abs(v) for v in obj.linear.values()) + sum(
        abs(v) for v in obj.quadratic.values()
    )
    weight = multiplier * spread if spread > 0 else 1.0
    return {c.name: weight for c in model.constraints}


def _scaled_int(value: float, scale: int, constraint: str, term: str) -> int:
    scaled = value * scale
    nearest = round(scaled)
    if abs(scaled - nearest) > _INT_TOL * max(1.0, abs(scaled)):
        raise NonIntegralCoefficientError(constraint, term, value, scale)
    return int(nearest)


def _linear_le(constraint: Constraint) -> QuadraticExpression:
    expr, sense = constraint.normalized()
    if sense is not Sense.LE:
        raise TransformError(f"constraint {constraint.name!r} is not an inequality")
    if not expr.is_linear():
        raise TransformError(
            f"constraint {constraint.name!r} is quadratic; squaring it would need "
            "higher-order terms"
        )
    return expr


def _scaled_bounds(constraint: Constraint, scale: int) -> tuple[int, int]:
    """Integer (min, max) of the scaled expression over the hypercube."""
    expr = _linear_le(constraint)
    offset = _scaled_int(expr.offset, scale, constraint.name, "offset")
    coeffs = [
        _scaled_int(a, scale, constraint.name, f"x{i}") for i, a in expr.linear.items()
    ]
    lo = offset + sum(a for a in coeffs if a < 0)
    hi = offset + sum(a for a in coeffs if a > 0)
    return lo, hi


def _encoding(r: int) -> SlackEncoding:
    if r <= 0:
        return SlackEncoding(0, 0, ())
    k = r.bit_length()
    weights = [1 << b for b in range(k - 1)]
    weights.append(r - ((1 << (k - 1)) - 1))
    return SlackEncoding(r, k, tuple(weights))


def slack_bits(constraint: Constraint, scale: int | None = None) -> SlackEncoding:
    """Binary slack encoding covering ``[0, R]`` for a linear ``<=`` constraint.

    ``R`` is minus the minimum of the scaled expression over the hypercube,
    clamped at zero.
    """
    scale = constraint.scale if scale is None else int(scale)
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    lo, _ = _scaled_bounds(constraint, scale)
    return _encoding(max(-lo, 0))


def encode_slack(weights: Sequence[int], value: int) -> list[int]:
    """Bits for ``value`` under a trimmed-top binary encoding."""
    k = len(weights)
    if k == 0:
        if value != 0:
            raise ValueError("no slack bits to encode a non-zero value")
        return []
    if not 0 <= value <= sum(weights):
        raise ValueError(f"slack value {value} outside [0, {sum(weights)}]")
    bits = [0] * k
    low_cap = (1 << (k - 1)) - 1
    if value > low_cap:
        bits[-1] = 1
        value -= weights[-1]
    for b in range(k - 1):
        bits[b] = (value >> b) & 1
    return bits


@dataclass(frozen=True, eq=False)
class QuboModel:
    """Penalised QUBO over ``num_original`` CQM variables plus slack bits."""

    num_vars: int
    num_original: int
    linear: dict[int, float]
    quadratic: dict[tuple[int, int], float]
    offset: float
    provenance: dict[int, SlackBit]
    penalty_weights: dict[str, float]
    constraint_scales: dict[str, int] = field(default_factory=dict)
    trivial_constraints: tuple[str, ...] = ()

    def slack_indices(self, name: str) -> list[int]:
        return sorted(i for i, p in self.provenance.items() if p.constraint == name)

    def slack_weights(self, name: str) -> list[int]:
        return [self.provenance[i].weight for i in self.slack_indices(name)]

    def energy(self, bits: Sequence[int]) -> float:
        if len(bits) != self.num_vars:
            raise DimensionMismatchError(
                f"QUBO has {self.num_vars} variables, got {len(bits)} bits"
            )
        total = 0.0
        for i, v in self.linear.items():
            if bits[i]:
                total += v
        for (i, j), v in self.quadratic.items():
            if bits[i] and bits[j]:
                total += v
        return total + self.offset

    def energies(self, samples) -> np.ndarray:
        """Vectorised energies of a ``(m, num_vars)`` 0/1 array."""
        X = np.asarray(samples, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.num_vars:
            raise DimensionMismatchError(f"expected shape (m, {self.num_vars}), got {X.shape}")
        h = np.zeros(self.num_vars)
        for i, v in self.linear.items():
            h[i] = v
        out = X @ h + self.offset
        if self.quadratic:
            ij = np.array(list(self.quadratic), dtype=np.int64)
            vals = np.array(list(self.quadratic.values()))
            out += (X[:, ij[:, 0]] * X[:, ij[:, 1]]) @ vals
        return out

    def decode(self, bits: Sequence[int]) -> Decoded:
        if len(bits) != self.num_vars:
            raise DimensionMismatchError(
                f"QUBO has {self.num_vars} variables, got {len(bits)} bits"
            )
        slack = {name: 0 for name in self.constraint_scales if self.slack_indices(name)}
        for i, p in self.provenance.items():
            if bits[i]:
                slack[p.constraint] += p.weight
        x = tuple(int(b) for b in bits[: self.num_original])
        return Decoded(x, slack)

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "num_original": self.num_original,
            "linear": {str(i): v for i, v in sorted(self.linear.items())},
            "quadratic": [[i, j, v] for (i, j), v in sorted(self.quadratic.items())],
            "offset": self.offset,
            "provenance": [
                {"index": i, "constraint": p.constraint, "bit": p.bit, "weight": p.weight}
                for i, p in sorted(self.provenance.items())
            ],
            "penalty_weights": dict(self.penalty_weights),
            "constraint_scales": dict(self.constraint_scales),
            "trivial_constraints": list(self.trivial_constraints),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "QuboModel":
        return cls(
            num_vars=int(doc["num_vars"]),
            num_original=int(doc["num_original"]),
            linear={int(i): float(v) for i, v in doc["linear"].items()},
            quadratic={(int(i), int(j)): float(v) for i, j, v in doc["quadratic"]},
            offset=float(doc["offset"]),
            provenance={
                int(p["index"]): SlackBit(p["constraint"], int(p["bit"]), int(p["weight"]))
                for p in doc["provenance"]
            },
            penalty_weights={k: float(v) for k, v in doc["penalty_weights"].items()},
            constraint_scales={k: int(v) for k, v in doc.get("constraint_scales", {}).items()},
            trivial_constraints=tuple(doc.get("trivial_constraints", ())),
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "QuboModel":
        return cls.from_dict(json.loads(text))

    def to_coo(self) -> str:
        """Upper-triangular ``i j value`` lines; the diagonal holds linear terms."""
        lines = [f"# num_vars {self.num_vars}", f"# offset {self.offset!r}"]
        entries = [((i, i), v) for i, v in self.linear.items()]
        entries += list(self.quadratic.items())
        for (i, j), v in sorted(entries):
            lines.append(f"{i} {j} {v!r}")
        return "\n".join(lines) + "\n"


def _add_square(linear, quadratic, terms, constant, weight) -> float:
    """Accumulate ``weight * (sum_u a_u z_u + constant)**2``; returns its offset."""
    for u, a in terms:
        linear[u] = linear.get(u, 0.0) + weight * (a * a + 2.0 * constant * a)
    for (u, a), (v, b) in itertools.combinations(terms, 2):
        key = (u, v) if u < v else (v, u)
        quadratic[key] = quadratic.get(key, 0.0) + 2.0 * weight * a * b
    return weight * constant * constant


def to_qubo(model: CqmModel, policy: PenaltyPolicy | None = None) -> QuboModel:
    policy = policy or PenaltyPolicy()
    if policy.mode == "fixed":
        weights = {c.name: float(policy.fixed_weight) for c in model.constraints}
    else:
        weights = auto_penalty(model, policy.auto_multiplier)

    n = model.num_variables
    linear = dict(model.objective.linear)
    quadratic = dict(model.objective.quadratic)
    offset = model.objective.offset
    provenance: dict[int, SlackBit] = {}
    scales: dict[str, int] = {}
    trivial = []
    next_index = n

    for con in model.constraints:
        expr, sense = con.normalized()
        if not expr.is_linear():
            raise TransformError(
                f"constraint {con.name!r} is quadratic; squaring it would need "
                "higher-order terms"
            )
        weight = weights[con.name]
        terms = list(expr.linear.items())
        scales[con.name] = con.scale
        if sense is Sense.EQ:
            offset += _add_square(linear, quadratic, terms, expr.offset, weight)
            continue
        lo, hi = _scaled_bounds(con, con.scale)
        if hi <= 0:
            trivial.append(con.name)
            warnings.warn(
                f"constraint {con.name!r} holds for every assignment; no penalty emitted",
                stacklevel=2,
            )
            continue
        enc = _encoding(max(-lo, 0))
        for b, w in enumerate(enc.bit_weights):
            provenance[next_index] = SlackBit(con.name, b, w)
            terms.append((next_index, w / con.scale))
            next_index += 1
        offset += _add_square(linear, quadratic, terms, expr.offset, weight)

    for v in (*linear.values(), *quadratic.values(), offset):
        if not math.isfinite(v):
            raise TransformError("QUBO has a non-finite coefficient")
    return QuboModel(
        num_vars=next_index,
        num_original=n,
        linear={i: v for i, v in sorted(linear.items()) if v != 0.0},
        quadratic={k: v for k, v in sorted(quadratic.items()) if v != 0.0},
        offset=offset,
        provenance=provenance,
        penalty_weights=weights,
        constraint_scales=scales,
        trivial_constraints=tuple(trivial),
    )


def optimal_slack(qubo: QuboModel, model: CqmModel, x: Sequence[int]) -> list[int]:
    """Full QUBO bit vector: ``x`` followed by the energy-minimising slack bits."""
    bits = [int(b) for b in x] + [0] * (qubo.num_vars - qubo.num_original)
    for con in model.constraints:
        idx = qubo.slack_indices(con.name)
        if not idx:
            continue
        expr, _ = con.normalized()
        r = sum(qubo.provenance[i].weight for i in idx)
        target = -evaluate(expr, x) * con.scale
        value = min(max(int(math.floor(target + 0.5)), 0), r)
        for i, b in zip(idx, encode_slack([qubo.provenance[i].weight for i in idx], value)):
            bits[i] = b
    return bits
