"""Shared helpers: random instances, brute-force oracles, schema validators."""

from __future__ import annotations

import itertools
import json
import random
from decimal import Decimal
from importlib import resources

import numpy as np
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from cqmkit import Constraint, ConstraintKind, CqmModel, QuadraticExpression, Sense, evaluate
from cqmkit.core import check_constraint

# Five known cheapest meals under 700 kcal, with exact totals.
REFERENCE_MEALS = [
    (("Sweet Potato", "Orange-Honeycomb", "A chicken cutlet", "Caribbean Calypso",
      "Sautéed Squash & Onions"), Decimal("21.75"), Decimal("620.4")),
    (("Sweet Potato", "Peach-Apricot", "A chicken cutlet", "Caramel & Salted Cashew",
      "Collard Greens (Spicy)"), Decimal("21.75"), Decimal("612.4")),
    (("Sweet Potato", "Baby-Blueberry", "A chicken cutlet", "Caribbean Calypso",
      "Sautéed Squash & Onions"), Decimal("21.75"), Decimal("670.4")),
    (("Sweet Potato", "Peach-Apricot", "A panko-crusted chicken cutlet",
      "Caramel & Salted Cashew", "Collard Greens (Spicy)"), Decimal("21.75"), Decimal("692.4")),
    (("Sweet Potato", "Chocolate-Hazelnut", "A chicken cutlet", "Caramel & Salted Cashew",
      "Fresh-Cut Fruit"), Decimal("21.75"), Decimal("631.4")),
]

MENU_GROUPS = ("waffle", "smear", "chicken", "drizzle", "side")


def meal_bits(catalog, names):
    """0/1 vector selecting ``names[g]`` in group ``g`` (in catalog group order)."""
    bits = [0] * len(catalog.items)
    for group, name in zip(catalog.groups, names):
        (k,) = [k for k in catalog.members(group) if catalog.items[k].name == name]
        bits[k] = 1
    return bits


def random_cqm(rng: random.Random, max_vars=10, max_groups=2, max_ineq=1, quad_cons=False):
    """Small integer-coefficient CQM with disjoint one-hot groups and a few inequalities."""
    n = rng.randint(2, max_vars)
    pool = list(range(n))
    rng.shuffle(pool)
    constraints = []
    for g in range(rng.randint(0, max_groups)):
        size = rng.randint(2, 4)
        if len(pool) < size:
            break
        members, pool = pool[:size], pool[size:]
        constraints.append(Constraint.one_hot(f"oh{g}", members))
    for c in range(rng.randint(0, max_ineq)):
        support = rng.sample(range(n), rng.randint(1, n))
        lin = {i: rng.choice([-1, 1]) * rng.randint(1, 6) for i in support}
        pos = sum(a for a in lin.values() if a > 0)
        quad = {}
        if quad_cons and n > 1 and rng.random() < 0.5:
            i, j = sorted(rng.sample(range(n), 2))
            quad[(i, j)] = rng.randint(-3, 3) or 1
        expr = QuadraticExpression(lin, quad, -rng.randint(0, max(pos, 1)))
        sense = rng.choice([Sense.LE, Sense.GE])
        if sense is Sense.GE:
            expr = -expr
        constraints.append(Constraint(f"c{c}", expr, sense, ConstraintKind.GENERIC))
    obj_lin = {i: rng.randint(-10, 10) for i in range(n)}
    obj_quad = {}
    for _ in range(rng.randint(0, n)):
        i, j = sorted(rng.sample(range(n), 2))
        obj_quad[(i, j)] = obj_quad.get((i, j), 0) + rng.randint(-5, 5)
    labels = [f"x{i}" for i in range(n)]
    return CqmModel(tuple(labels), QuadraticExpression(obj_lin, obj_quad, rng.randint(-3, 3)),
                    tuple(constraints))


def brute_force(model: CqmModel):
    """Plain-Python scan of all ``2**n`` assignments.

    Returns ``(best energy or None, optimal set, least total violation)``.
    """
    best, optimal, least = None, [], None
    for bits in itertools.product((0, 1), repeat=model.num_variables):
        verdicts = [check_constraint(c, bits, model.eps) for c in model.constraints]
        total = sum(v.violation for v in verdicts)
        least = total if least is None else min(least, total)
        if total:
            continue
        e = evaluate(model.objective, bits)
        if best is None or e < best - 1e-9:
            best, optimal = e, [bits]
        elif abs(e - best) <= 1e-9:
            optimal.append(bits)
    return best, optimal, least


def all_bits(n: int) -> np.ndarray:
    """Every 0/1 row of width ``n``, lexicographic."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def _registry() -> Registry:
    pkg = resources.files("cqmkit.schemas")
    resources_ = []
    for entry in pkg.iterdir():
        if entry.name.endswith(".schema.json"):
            doc = json.loads(entry.read_text("utf-8"))
            resources_.append((entry.name, Resource.from_contents(doc)))
    return Registry().with_resources(resources_)


_REGISTRY = None


def validator(name: str) -> Draft202012Validator:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _registry()
    schema = _REGISTRY.contents(f"{name}.schema.json")
    return Draft202012Validator(schema, registry=_REGISTRY)


def assert_valid(name: str, doc):
    errors = sorted(validator(name).iter_errors(doc), key=lambda e: list(e.path))
    assert not errors, "; ".join(f"{list(e.path)}: {e.message}" for e in errors)
