"""Exhaustive enumeration backend.

Two search spaces are supported:

* **cartesian** - when the model contains disjoint one-hot equality
  constraints, each such group is enumerated as a single factor (exactly
  one member on) and every remaining variable as a free on/off factor.
  One-hot constraints are then satisfied by construction and only the
  other constraints are checked.
* **full** - plain ``2**n`` enumeration for small models without one-hot
  structure.

Candidates are scored in NumPy chunks; only a bounded pool survives each
chunk, so memory stays flat in the size of the search space.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from cqmkit.core import CqmModel, QuadraticExpression, Sense
from cqmkit.errors import SearchSpaceTooLargeError
from cqmkit.solvers.sampleset import SampleSet, aggregate

__all__ = [
    "MAX_FULL_VARIABLES",
    "MAX_CARTESIAN_COMBINATIONS",
    "SearchPlan",
    "one_hot_groups",
    "plan_search",
    "iter_combinations",
    "solve_exact",
]

MAX_FULL_VARIABLES = 30
MAX_CARTESIAN_COMBINATIONS = 10**8
_CHUNK_CELLS = 1 << 22


def one_hot_groups(model: CqmModel) -> list[tuple[str, tuple[int, ...]]]:
    """Disjoint one-hot constraints, detected from their algebra.

    A constraint qualifies when it is ``sum(x_i for i in G) - 1 == 0`` with
    unit coefficients; its ``kind`` tag is not consulted.  Overlapping
    groups after the first are left as ordinary constraints.
    """
    taken: set[int] = set()
    groups = []
    for con in model.constraints:
        expr = con.expr
        if con.sense is not Sense.EQ or expr.quadratic or not expr.linear:
            continue
        if expr.offset != -1.0 or any(v != 1.0 for v in expr.linear.values()):
            continue
        members = tuple(sorted(expr.linear))
        if taken.intersection(members):
            continue
        taken.update(members)
        groups.append((con.name, members))
    return groups


@dataclass(frozen=True)
class SearchPlan:
    mode: str
    factors: tuple[np.ndarray, ...]
    structural: tuple[str, ...]
    size: int
    num_variables: int

    @property
    def radices(self) -> list[int]:
        return [len(f) for f in self.factors]


def plan_search(model: CqmModel) -> SearchPlan:
    n = model.num_variables
    groups = one_hot_groups(model)
    grouped = {i for _, members in groups for i in members}
    factors = [np.array(members, dtype=np.int64) for _, members in groups]
    factors += [np.array([-1, i], dtype=np.int64) for i in range(n) if i not in grouped]
    size = 1
    for f in factors:
        size *= len(f)
    mode = "cartesian" if groups else "full"
    if not (n <= MAX_FULL_VARIABLES or (groups and size <= MAX_CARTESIAN_COMBINATIONS)):
        raise SearchSpaceTooLargeError(
            f"search space too large: full 2^n mode allows at most {MAX_FULL_VARIABLES} "
            f"variables (model has {n}); cartesian one-hot mode allows at most "
            f"{MAX_CARTESIAN_COMBINATIONS:.0e} combinations (model has {size})"
        )
    return SearchPlan(mode, tuple(factors), tuple(name for name, _ in groups), size, n)


class _Scorer:
    """Vectorised evaluation of one expression over chosen-variable rows."""

    def __init__(self, expr: QuadraticExpression, n: int, factor_of: np.ndarray):
        self.n = n
        self.offset = expr.offset
        self.lin = np.zeros(n + 1)
        for i, v in expr.linear.items():
            self.lin[i] = v
        self.pairs = []
        if expr.quadratic:
            ij = np.array(list(expr.quadratic), dtype=np.int64)
            vals = np.array(list(expr.quadratic.values()))
            keys = ij[:, 0] * (n + 1) + ij[:, 1]
            order = np.argsort(keys)
            self.keys, self.vals = keys[order], vals[order]
            coupled = {
                tuple(sorted((int(factor_of[i]), int(factor_of[j])))) for i, j in ij
            }
            self.pairs = sorted(p for p in coupled if p[0] != p[1])

    def __call__(self, V: np.ndarray) -> np.ndarray:
        out = self.lin[V].sum(axis=1) + self.offset
        for f, g in self.pairs:
            a = np.minimum(V[:, f], V[:, g])
            b = np.maximum(V[:, f], V[:, g])
            key = a * (self.n + 1) + b
            pos = np.minimum(np.searchsorted(self.keys, key), len(self.keys) - 1)
            out += np.where(self.keys[pos] == key, self.vals[pos], 0.0)
        return out


def _choices(plan: SearchPlan, idx: np.ndarray) -> np.ndarray:
    """Chosen variable per factor (``n`` meaning none) for combination indices."""
    n = plan.num_variables
    V = np.empty((len(idx), len(plan.factors)), dtype=np.int64)
    rest = idx.copy()
    for f in range(len(plan.factors) - 1, -1, -1):
        opts = plan.factors[f]
        V[:, f] = opts[rest % len(opts)]
        rest //= len(opts)
    V[V < 0] = n
    return V


def _bits(plan: SearchPlan, idx: np.ndarray) -> np.ndarray:
    V = _choices(plan, idx)
    B = np.zeros((len(idx), plan.num_variables + 1), dtype=np.uint8)
    np.put_along_axis(B, V, 1, axis=1)
    return B[:, :-1]


def iter_combinations(model: CqmModel, chunk_size: int | None = None):
    """Yield ``(combination_indices, bits)`` chunks covering the whole plan."""
    plan = plan_search(model)
    chunk = chunk_size or max(1, _CHUNK_CELLS // max(1, len(plan.factors)))
    for start in range(0, plan.size, chunk):
        idx = np.arange(start, min(start + chunk, plan.size), dtype=np.int64)
        yield idx, _bits(plan, idx)


def _lex_order(plan: SearchPlan, primary: list[np.ndarray], idx: np.ndarray) -> np.ndarray:
    """Argsort by the primary keys (most significant first), then by bits."""
    packed = np.packbits(_bits(plan, idx), axis=1)
    keys = [packed[:, c] for c in range(packed.shape[1] - 1, -1, -1)]
    keys += list(reversed(primary))
    return np.lexsort(keys)


class _Pool:
    """Bounded candidate pool keyed by ``(score..., bits)``."""

    def __init__(self, plan, top_k, keep_ties, max_ties):
        self.plan = plan
        self.top_k = top_k
        self.keep_ties = keep_ties
        self.max_ties = max_ties
        self.scores: list[np.ndarray] | None = None
        self.idx = np.empty(0, dtype=np.int64)
        self.truncated = False

    def offer(self, scores: list[np.ndarray], idx: np.ndarray):
        if len(idx) == 0:
            return
        if self.scores is not None:
            scores = [np.concatenate([a, b]) for a, b in zip(self.scores, scores)]
            idx = np.concatenate([self.idx, idx])
        lead = scores[0]
        keep = np.zeros(len(idx), dtype=bool)
        if len(idx) > self.top_k:
            kth = np.partition(lead, self.top_k - 1)[self.top_k - 1]
            cand = np.flatnonzero(lead <= kth)
        else:
            cand = np.arange(len(idx))
        order = _lex_order(self.plan, [s[cand] for s in scores], idx[cand])
        keep[cand[order[: self.top_k]]] = True
        if self.keep_ties:
            best = lead.min()
            ties = np.flatnonzero(lead <= best + 1e-9 * max(1.0, abs(best)))
            if len(ties) > self.max_ties:
                self.truncated = True
                order = _lex_order(self.plan, [s[ties] for s in scores], idx[ties])
                ties = ties[order[: self.max_ties]]
            keep[ties] = True
        self.scores = [s[keep] for s in scores]
        self.idx = idx[keep]


def solve_exact(
    model: CqmModel,
    top_k: int = 10,
    *,
    all_optimal: bool = True,
    max_optimal: int = 100_000,
    chunk_size: int | None = None,
) -> SampleSet:
    """Enumerate the model and return its best assignments.

    Returns the ``top_k`` best feasible assignments plus, when
    ``all_optimal`` is set, every assignment tied with the optimum (up to
    ``max_optimal``).  When nothing is feasible the ``top_k``
    least-violating assignments are returned instead, violations summed
    unweighted across constraints.  In cartesian mode one-hot groups are
    structural, so "least violating" ranges over one-hot-respecting
    assignments only.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    t0 = time.perf_counter()
    plan = plan_search(model)
    n = model.num_variables
    factor_of = np.full(n + 1, -1, dtype=np.int64)
    for f, opts in enumerate(plan.factors):
        factor_of[opts[opts >= 0]] = f
    objective = _Scorer(model.objective, n, factor_of)
    checks = []
    for con in model.constraints:
        if con.name in plan.structural:
            continue
        expr, sense = con.normalized()
        checks.append((_Scorer(expr, n, factor_of), sense))

    feasible = _Pool(plan, top_k, all_optimal, max_optimal)
    least = _Pool(plan, top_k, False, 0)
    chunk = chunk_size or max(1, _CHUNK_CELLS // max(1, len(plan.factors)))
    visited = 0
    eps = model.eps
    for start in range(0, plan.size, chunk):
        idx = np.arange(start, min(start + chunk, plan.size), dtype=np.int64)
        V = _choices(plan, idx)
        visited += len(idx)
        energy = objective(V)
        total = np.zeros(len(idx))
        for scorer, sense in checks:
            lhs = scorer(V)
            if sense is Sense.EQ:
                total += np.maximum(np.abs(lhs) - eps, 0.0)
            else:
                total += np.maximum(lhs - eps, 0.0)
        ok = total == 0.0
        feasible.offer([energy[ok]], idx[ok])
        if feasible.scores is None:
            least.offer([total, energy], idx)

    pool = feasible if feasible.scores is not None else least
    bits = _bits(plan, pool.idx) if len(pool.idx) else np.zeros((0, n), dtype=np.uint8)
    info = {
        "mode": plan.mode,
        "visited": visited,
        "search_space": plan.size,
        "structural_constraints": list(plan.structural),
        "optimal_truncated": feasible.truncated,
    }
    return aggregate(
        model,
        ((row.tolist(), 1) for row in bits),
        backend_name="exact",
        wall_time=time.perf_counter() - t0,
        info=info,
    )
