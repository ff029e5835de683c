"""Uniform result container for every backend."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from cqmkit.core import CqmModel, as_assignment, evaluate, is_feasible

__all__ = ["Sample", "SampleSet", "aggregate", "sample_order"]


@dataclass(frozen=True)
class Sample:
    assignment: tuple[int, ...]
    energy: float
    num_occurrences: int
    feasible: bool
    violations: tuple[tuple[str, float], ...] = ()

    @property
    def total_violation(self) -> float:
        return sum(v for _, v in self.violations)

    def to_dict(self) -> dict:
        return {
            "assignment": list(self.assignment),
            "energy": self.energy,
            "num_occurrences": self.num_occurrences,
            "feasible": self.feasible,
            "violations": [{"constraint": n, "violation": v} for n, v in self.violations],
        }


def sample_order(sample: Sample):
    """Feasible first, then ascending energy, then lexicographic bits."""
    return (not sample.feasible, sample.energy, sample.assignment)


@dataclass
class SampleSet:
    samples: list[Sample]
    total_reads: int
    backend_name: str
    wall_time: float = 0.0
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, k):
        return self.samples[k]

    @property
    def first(self) -> Sample | None:
        return self.samples[0] if self.samples else None

    @property
    def any_feasible(self) -> bool:
        return bool(self.samples) and self.samples[0].feasible

    def feasible(self) -> list[Sample]:
        return [s for s in self.samples if s.feasible]

    def best_feasible(self) -> Sample | None:
        return self.samples[0] if self.any_feasible else None

    def optimal(self, rel_tol: float = 1e-9) -> list[Sample]:
        """All feasible samples tied with the best feasible energy."""
        best = self.best_feasible()
        if best is None:
            return []
        cutoff = best.energy + rel_tol * max(1.0, abs(best.energy))
        return [s for s in self.feasible() if s.energy <= cutoff]

    def least_violation(self) -> Sample | None:
        """Sample with the smallest summed violation (ties: energy, then bits)."""
        if not self.samples:
            return None
        return min(self.samples, key=lambda s: (s.total_violation, s.energy, s.assignment))

    def to_dict(self, include_timing: bool = False) -> dict:
        doc = {
            "backend": self.backend_name,
            "total_reads": self.total_reads,
            "samples": [s.to_dict() for s in self.samples],
        }
        if include_timing:
            doc["wall_time"] = self.wall_time
        return doc


def aggregate(
    model: CqmModel,
    raw: Iterable[tuple[Sequence[int], int]],
    backend_name: str = "aggregate",
    wall_time: float = 0.0,
    info: dict | None = None,
) -> SampleSet:
    """Merge duplicate assignments, recompute energy and feasibility, sort canonically.

    Energies and verdicts supplied by a backend are never trusted; every
    sample is re-evaluated against ``model``.
    """
    counts: Counter = Counter()
    for bits, count in raw:
        count = int(count)
        if count < 1:
            raise ValueError(f"occurrence counts must be >= 1, got {count}")
        counts[as_assignment(bits, model.num_variables)] += count
    samples = []
    for bits, count in counts.items():
        report = is_feasible(model, bits)
        samples.append(
            Sample(
                assignment=bits,
                energy=evaluate(model.objective, bits),
                num_occurrences=count,
                feasible=report.feasible,
                violations=tuple(report.violations()),
            )
        )
    samples.sort(key=sample_order)
    return SampleSet(samples, sum(counts.values()), backend_name, wall_time, dict(info or {}))
