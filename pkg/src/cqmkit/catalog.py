"""CSV catalogs of grouped items and the one-choice-per-group model builder.

A catalog is a CSV with ``name`` and ``item_type`` columns plus any number
of numeric attribute columns.  Numeric cells are stored as exact integers
in minor units (cents for ``price``, tenths for ``calories``) so totals can
be compared exactly.  The same builder serves restaurant menus (groups are
courses) and fragment libraries (groups are attachment positions,
attributes are precomputed properties).
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from cqmkit.core import Constraint, ConstraintKind, CqmModel, QuadraticExpression, Sense, VariableId
from cqmkit.errors import CatalogError

__all__ = [
    "DEFAULT_SCALES",
    "DEFAULT_SCALE",
    "CatalogItem",
    "ChoiceCatalog",
    "Bound",
    "ChoiceSpec",
    "parse_catalog",
    "load_catalog",
    "load_menu",
    "parse_bound",
    "build_model",
]

DEFAULT_SCALES = {"price": 100, "calories": 10}
DEFAULT_SCALE = 1000

NAME_COLUMN = "name"
GROUP_COLUMN = "item_type"
_CURRENCY = re.compile(r"^\\?\$")


@dataclass(frozen=True)
class CatalogItem:
    name: str
    group: str
    units: Mapping[str, int]
    scales: Mapping[str, int] = field(repr=False, compare=False)

    @property
    def attributes(self) -> dict[str, float]:
        return {k: u / self.scales[k] for k, u in self.units.items()}

    def value(self, attribute: str) -> Decimal:
        return Decimal(self.units[attribute]) / self.scales[attribute]


@dataclass(frozen=True, eq=False)
class ChoiceCatalog:
    items: tuple[CatalogItem, ...]
    attribute_names: tuple[str, ...]
    scales: Mapping[str, int]

    @property
    def groups(self) -> tuple[str, ...]:
        seen = {}
        for item in self.items:
            seen.setdefault(item.group, None)
        return tuple(seen)

    def members(self, group: str) -> list[int]:
        return [k for k, item in enumerate(self.items) if item.group == group]

    def group_sizes(self) -> dict[str, int]:
        return {g: len(self.members(g)) for g in self.groups}

    def combination_count(self) -> int:
        return math.prod(self.group_sizes().values())

    def labels(self) -> list[str]:
        """Variable labels: the item name, or ``group/name`` when a name repeats."""
        counts: dict[str, int] = {}
        for item in self.items:
            counts[item.name] = counts.get(item.name, 0) + 1
        return [
            item.name if counts[item.name] == 1 else f"{item.group}/{item.name}"
            for item in self.items
        ]

    def __eq__(self, other):
        if not isinstance(other, ChoiceCatalog):
            return NotImplemented
        return (
            self.items == other.items
            and self.attribute_names == other.attribute_names
            and dict(self.scales) == dict(other.scales)
        )

    __hash__ = None

    def format_value(self, attribute: str, units: int) -> str:
        scale = self.scales[attribute]
        digits = len(str(scale)) - 1 if _is_power_of_ten(scale) else 6
        return f"{Decimal(units) / scale:.{digits}f}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([NAME_COLUMN, GROUP_COLUMN, *self.attribute_names])
        for item in self.items:
            writer.writerow(
                [item.name, item.group]
                + [self.format_value(a, item.units[a]) for a in self.attribute_names]
            )
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "attributes": [
                {"name": a, "scale": self.scales[a]} for a in self.attribute_names
            ],
            "groups": list(self.groups),
            "items": [
                {"name": it.name, "group": it.group, "units": dict(it.units)}
                for it in self.items
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ChoiceCatalog":
        scales = {a["name"]: int(a["scale"]) for a in doc["attributes"]}
        items = tuple(
            CatalogItem(it["name"], it["group"], {k: int(v) for k, v in it["units"].items()}, scales)
            for it in doc["items"]
        )
        return cls(items, tuple(scales), scales)


def _is_power_of_ten(n: int) -> bool:
    return n >= 1 and str(n).rstrip("0") == "1"


def _parse_units(text: str, scale: int, row: int, column: str) -> int:
    cell = _CURRENCY.sub("", text.strip()).strip()
    if not cell:
        raise CatalogError("empty numeric cell", row, column)
    try:
        value = Decimal(cell)
    except InvalidOperation:
        raise CatalogError(f"cannot parse {text!r} as a number", row, column) from None
    if not value.is_finite():
        raise CatalogError(f"non-finite value {text!r}", row, column)
    scaled = value * scale
    if scaled != scaled.to_integral_value():
        raise CatalogError(
            f"{text!r} has more precision than the column scale 1/{scale}", row, column
        )
    return int(scaled)


def parse_catalog(csv_text: str, scales: Mapping[str, int] | None = None) -> ChoiceCatalog:
    """Parse catalog CSV text.

    ``scales`` overrides the minor-unit factor per attribute column; unset
    columns use :data:`DEFAULT_SCALES` or :data:`DEFAULT_SCALE`.
    """
    if csv_text.startswith("﻿"):
        csv_text = csv_text[1:]
    reader = csv.reader(io.StringIO(csv_text))
    header = next(reader, None)
    if header is None or not any(h.strip() for h in header):
        raise CatalogError("catalog is empty")
    header = [h.strip() for h in header]
    for required in (NAME_COLUMN, GROUP_COLUMN):
        if required not in header:
            raise CatalogError(f"missing required column {required!r}")
    if len(set(header)) != len(header):
        raise CatalogError("duplicate column names in header")
    attributes = tuple(h for h in header if h not in (NAME_COLUMN, GROUP_COLUMN))
    if not attributes:
        raise CatalogError("catalog needs at least one numeric column")
    table = {**DEFAULT_SCALES, **(scales or {})}
    col_scales = {a: int(table.get(a, DEFAULT_SCALE)) for a in attributes}
    for a, s in col_scales.items():
        if s < 1:
            raise CatalogError(f"scale for {a!r} must be a positive integer")

    items = []
    seen = set()
    for cells in reader:
        row = reader.line_num
        if not any(c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise CatalogError(f"expected {len(header)} cells, got {len(cells)}", row)
        record = dict(zip(header, cells))
        name = record[NAME_COLUMN].strip()
        group = record[GROUP_COLUMN].strip()
        if not name:
            raise CatalogError("empty item name", row, NAME_COLUMN)
        if not group:
            raise CatalogError("empty item type", row, GROUP_COLUMN)
        if (name, group) in seen:
            raise CatalogError(f"duplicate item {name!r} in group {group!r}", row)
        seen.add((name, group))
        units = {a: _parse_units(record[a], col_scales[a], row, a) for a in attributes}
        items.append(CatalogItem(name, group, units, col_scales))
    if not items:
        raise CatalogError("catalog has a header but no items")
    return ChoiceCatalog(tuple(items), attributes, col_scales)


def load_catalog(path: str | Path, scales: Mapping[str, int] | None = None) -> ChoiceCatalog:
    return parse_catalog(Path(path).read_text(encoding="utf-8"), scales)


def load_menu() -> ChoiceCatalog:
    """The bundled 33-item Chicken & Waffle menu."""
    text = resources.files("cqmkit.data").joinpath("chicken_waffle.csv").read_text("utf-8")
    return parse_catalog(text)


@dataclass(frozen=True)
class Bound:
    attribute: str
    sense: Sense
    limit: float

    def __post_init__(self):
        object.__setattr__(self, "sense", Sense(self.sense))
        if self.sense is Sense.EQ:
            raise ValueError("bounds must be <= or >=")
        if not math.isfinite(self.limit):
            raise ValueError("bound limit must be finite")

    def __str__(self):
        op = "<=" if self.sense is Sense.LE else ">="
        return f"{self.attribute}{op}{self.limit:g}"


_BOUND = re.compile(r"^\s*([^<>=]+?)\s*(<=|>=)\s*(\S+)\s*$")


def parse_bound(text: str) -> Bound:
    """Parse ``"calories<=700"`` or ``"protein >= 30"``."""
    m = _BOUND.match(text)
    if not m:
        raise ValueError(f"bound must look like 'attr<=limit' or 'attr>=limit', got {text!r}")
    attr, op, limit = m.groups()
    try:
        value = float(limit)
    except ValueError:
        raise ValueError(f"bound limit {limit!r} is not a number") from None
    return Bound(attr, Sense.LE if op == "<=" else Sense.GE, value)


@dataclass(frozen=True)
class ChoiceSpec:
    objective: str
    direction: str = "minimize"
    bounds: tuple[Bound, ...] = ()

    def __post_init__(self):
        if self.direction not in ("minimize", "maximize"):
            raise ValueError("direction must be 'minimize' or 'maximize'")
        object.__setattr__(self, "bounds", tuple(self.bounds))

    def validate(self, catalog: ChoiceCatalog):
        for attr in (self.objective, *(b.attribute for b in self.bounds)):
            if attr not in catalog.attribute_names:
                raise CatalogError(
                    f"unknown attribute {attr!r}; catalog has {list(catalog.attribute_names)}"
                )


def build_model(catalog: ChoiceCatalog, spec: ChoiceSpec) -> CqmModel:
    """One binary per item, one-hot per group, one ``<=`` row per bound."""
    spec.validate(catalog)
    variables = [VariableId(k, label) for k, label in enumerate(catalog.labels())]
    sign = -1.0 if spec.direction == "maximize" else 1.0
    objective = QuadraticExpression(
        {k: sign * item.attributes[spec.objective] for k, item in enumerate(catalog.items)}
    )
    constraints = []
    for group in catalog.groups:
        members = catalog.members(group)
        if not members:
            raise CatalogError(f"group {group!r} is empty")
        constraints.append(Constraint.one_hot(f"one_hot:{group}", members))
    names = set()
    for bound in spec.bounds:
        name = f"bound:{bound.attribute}"
        k = 2
        while name in names:
            name = f"bound:{bound.attribute}:{k}"
            k += 1
        names.add(name)
        sign = 1.0 if bound.sense is Sense.LE else -1.0
        expr = QuadraticExpression(
            {k: sign * item.attributes[bound.attribute] for k, item in enumerate(catalog.items)},
            offset=-sign * bound.limit,
        )
        constraints.append(
            Constraint(name, expr, Sense.LE, ConstraintKind.RESOURCE_BOUND,
                       catalog.scales[bound.attribute])
        )
    return CqmModel(tuple(variables), objective, tuple(constraints))
