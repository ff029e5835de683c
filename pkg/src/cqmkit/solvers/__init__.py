"""Solver backends. Every backend returns a :class:`SampleSet`."""

from cqmkit.solvers.anneal import SolveParams, solve_sa
from cqmkit.solvers.exact import solve_exact
from cqmkit.solvers.remote import solve_remote
from cqmkit.solvers.sampleset import Sample, SampleSet, aggregate

__all__ = [
    "Sample",
    "SampleSet",
    "SolveParams",
    "aggregate",
    "solve_exact",
    "solve_remote",
    "solve_sa",
]
