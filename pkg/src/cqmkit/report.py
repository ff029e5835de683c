"""Human-readable views of solutions over a catalog."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Sequence

import numpy as np

from cqmkit.catalog import ChoiceCatalog
from cqmkit.core import CqmModel, is_feasible
from cqmkit.errors import DimensionMismatchError
from cqmkit.solvers.sampleset import Sample

__all__ = [
    "NONE_CHOSEN",
    "CURRENCY_ATTRIBUTES",
    "MealReport",
    "describe_solution",
    "render_table",
    "rank_combinations",
    "write_ranking_csv",
]

NONE_CHOSEN = "—"
CURRENCY_ATTRIBUTES = frozenset({"price", "cost"})


@dataclass
class MealReport:
    choices: list[tuple[str, str]]
    totals: dict[str, int]
    scales: dict[str, int]
    feasible: bool
    violations: list[tuple[str, float]]
    notes: dict[str, str] = field(default_factory=dict)
    energy: float | None = None
    num_occurrences: int | None = None

    def total(self, attribute: str) -> Decimal:
        return Decimal(self.totals[attribute]) / self.scales[attribute]

    def format_total(self, attribute: str, currency_symbol: bool = True) -> str:
        scale = self.scales[attribute]
        digits = len(str(scale)) - 1 if str(scale).rstrip("0") == "1" else 6
        text = f"{self.total(attribute):.{digits}f}"
        if currency_symbol and attribute in CURRENCY_ATTRIBUTES:
            text = "$" + text
        return text

    def to_dict(self) -> dict:
        doc = {
            "choices": {g: name for g, name in self.choices},
            "totals": {a: float(self.total(a)) for a in self.totals},
            "feasible": self.feasible,
            "violations": [{"constraint": n, "violation": v} for n, v in self.violations],
        }
        if self.notes:
            doc["notes"] = dict(self.notes)
        if self.energy is not None:
            doc["energy"] = self.energy
        if self.num_occurrences is not None:
            doc["num_occurrences"] = self.num_occurrences
        return doc


def describe_solution(catalog: ChoiceCatalog, model: CqmModel, sample) -> MealReport:
    """Chosen item per group, exact attribute totals and violated constraints.

    ``sample`` is a :class:`Sample` or a bare 0/1 assignment.
    """
    if isinstance(sample, Sample):
        bits, energy, count = sample.assignment, sample.energy, sample.num_occurrences
    else:
        bits, energy, count = tuple(int(b) for b in sample), None, None
    if len(bits) != len(catalog.items) or len(bits) != model.num_variables:
        raise DimensionMismatchError(
            f"assignment has {len(bits)} entries; catalog has {len(catalog.items)} items, "
            f"model has {model.num_variables} variables"
        )
    choices, notes = [], {}
    for group in catalog.groups:
        chosen = [catalog.items[k].name for k in catalog.members(group) if bits[k]]
        if len(chosen) == 1:
            choices.append((group, chosen[0]))
            continue
        choices.append((group, NONE_CHOSEN))
        notes[group] = (
            "no item selected" if not chosen
            else f"{len(chosen)} items selected: {', '.join(chosen)}"
        )
    totals = {
        a: sum(item.units[a] for k, item in enumerate(catalog.items) if bits[k])
        for a in catalog.attribute_names
    }
    report = is_feasible(model, bits)
    return MealReport(
        choices=choices,
        totals=totals,
        scales=dict(catalog.scales),
        feasible=report.feasible,
        violations=report.violations(),
        notes=notes,
        energy=energy,
        num_occurrences=count,
    )


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = []
    for k, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_table(catalog: ChoiceCatalog, reports: Sequence[MealReport]) -> str:
    """Aligned text table: one column per group, then attribute totals."""
    header = [g.title() for g in catalog.groups]
    header += [f"Total {a.title()}" for a in catalog.attribute_names]
    header += ["Feasible", "Count"]
    rows = [header]
    for rep in reports:
        row = [name for _, name in rep.choices]
        row += [rep.format_total(a) for a in catalog.attribute_names]
        row += ["yes" if rep.feasible else "no"]
        row += ["" if rep.num_occurrences is None else str(rep.num_occurrences)]
        rows.append(row)
    return _align(rows)


def rank_combinations(catalog: ChoiceCatalog, sort_by: Sequence[str] | None = None, descending=()):
    """Every one-per-group combination with exact totals, ranked.

    Returns ``(choices, totals)``: ``choices`` is ``(m, groups)`` item
    indices, ``totals`` maps attribute to ``(m,)`` integer minor units.
    Rows are ordered by ``sort_by`` (default: attribute column order),
    then by position in the Cartesian product.
    """
    groups = [np.array(catalog.members(g), dtype=np.int64) for g in catalog.groups]
    sizes = [len(g) for g in groups]
    m = int(np.prod(sizes, dtype=object))
    idx = np.arange(m, dtype=np.int64)
    choices = np.empty((m, len(groups)), dtype=np.int64)
    rest = idx.copy()
    for f in range(len(groups) - 1, -1, -1):
        choices[:, f] = groups[f][rest % sizes[f]]
        rest //= sizes[f]
    totals = {}
    for a in catalog.attribute_names:
        units = np.array([item.units[a] for item in catalog.items], dtype=np.int64)
        totals[a] = units[choices].sum(axis=1)
    order_attrs = list(sort_by or catalog.attribute_names)
    order_attrs += [a for a in catalog.attribute_names if a not in order_attrs]
    keys = [idx] + [
        -totals[a] if a in descending else totals[a] for a in reversed(order_attrs)
    ]
    order = np.lexsort(keys)
    return choices[order], {a: t[order] for a, t in totals.items()}


def write_ranking_csv(catalog: ChoiceCatalog, choices, totals, out=None, feasible=None) -> str:
    buf = out or io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["rank", *catalog.groups, *catalog.attribute_names]
    if feasible is not None:
        header.append("feasible")
    writer.writerow(header)
    for r in range(len(choices)):
        row = [r + 1] + [catalog.items[k].name for k in choices[r]]
        row += [catalog.format_value(a, int(totals[a][r])) for a in catalog.attribute_names]
        if feasible is not None:
            row.append("yes" if feasible[r] else "no")
        writer.writerow(row)
    return buf.getvalue() if out is None else ""
