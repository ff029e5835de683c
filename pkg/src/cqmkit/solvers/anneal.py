"""Seeded simulated-annealing sampler for penalised QUBOs.

Every read is an independent Metropolis chain under a geometric
inverse-temperature schedule.  Read ``r`` draws from its own PCG64 stream
spawned from ``SeedSequence(seed, spawn_key=(r,))``, so the result does not
depend on how reads are spread over worker threads.

Two move sets are available:

``"collapsed"`` (default)
    Proposes single flips of the original CQM variables only.  After each
    proposal the slack bits of every inequality are set to their exact
    minimiser, so the chain walks the QUBO energy minimised over slack.
    Binary slack creates deep barriers between neighbouring assignments of
    the original bits; minimising it out removes them.

``"flip"``
    Textbook single-flip Metropolis over every QUBO bit, slack included.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from cqmkit import _kernels
from cqmkit.core import CqmModel, Sense
from cqmkit.errors import ProvenanceMismatchError
from cqmkit.solvers.sampleset import SampleSet, aggregate
from cqmkit.transform import QuboModel, encode_slack

__all__ = ["SolveParams", "beta_schedule", "read_rng", "solve_sa", "run_read"]

_SEED_MASK = (1 << 64) - 1
_BLOCK = 64


@dataclass(frozen=True)
class SolveParams:
    num_reads: int = 100
    seed: int = 0
    sweeps: int = 1000
    beta_start: float = 0.01
    beta_end: float = 10.0
    time_limit: float = 5.0
    workers: int = 1
    moves: str = "collapsed"

    def __post_init__(self):
        for name in ("num_reads", "sweeps", "workers"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 < self.beta_start < self.beta_end:
            raise ValueError("need 0 < beta_start < beta_end")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be > 0")
        if self.moves not in ("collapsed", "flip"):
            raise ValueError("moves must be 'collapsed' or 'flip'")


def beta_schedule(params: SolveParams) -> np.ndarray:
    return np.geomspace(params.beta_start, params.beta_end, params.sweeps)


def read_rng(seed: int, read: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed & _SEED_MASK, spawn_key=(read,)))
    )


def _csr(n, pairs):
    """Symmetric adjacency ``ptr, nbr, val`` from ``{(i, j): v}``."""
    rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), v in pairs.items():
        rows[i].append((j, v))
        rows[j].append((i, v))
    ptr = np.zeros(n + 1, dtype=np.int64)
    nbr, val = [], []
    for i, row in enumerate(rows):
        row.sort()
        nbr.extend(j for j, _ in row)
        val.extend(v for _, v in row)
        ptr[i + 1] = len(nbr)
    return ptr, np.array(nbr, dtype=np.int64), np.array(val, dtype=np.float64)


def _check_provenance(qubo: QuboModel, model: CqmModel):
    names = [c.name for c in model.constraints]
    if qubo.num_original != model.num_variables:
        raise ProvenanceMismatchError(
            f"QUBO covers {qubo.num_original} original variables, model has {model.num_variables}"
        )
    if set(qubo.penalty_weights) != set(names):
        raise ProvenanceMismatchError("QUBO penalty weights do not match the model's constraints")
    if qubo.num_vars != qubo.num_original + len(qubo.provenance):
        raise ProvenanceMismatchError("QUBO slack count does not match its provenance")
    for idx, bit in qubo.provenance.items():
        if not qubo.num_original <= idx < qubo.num_vars or bit.constraint not in qubo.penalty_weights:
            raise ProvenanceMismatchError(f"slack bit {idx} has inconsistent provenance")
    for name, scale in qubo.constraint_scales.items():
        if model.constraint(name).scale != scale:
            raise ProvenanceMismatchError(f"constraint {name!r} scale differs between QUBO and model")


class _Collapsed:
    """Kernel arrays for the slack-collapsed chain."""

    def __init__(self, qubo: QuboModel, model: CqmModel):
        n = model.num_variables
        obj = model.objective
        self.obj_lin = np.zeros(n)
        for i, v in obj.linear.items():
            self.obj_lin[i] = v
        self.obj_ptr, self.obj_nbr, self.obj_val = _csr(n, obj.quadratic)

        C = len(model.constraints)
        self.exprs = []
        self.offsets = np.zeros(C)
        self.mode = np.zeros(C, dtype=np.int8)
        self.weight = np.zeros(C)
        self.scale = np.ones(C)
        self.range = np.zeros(C)
        self.slack = []
        per_var: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        trivial = set(qubo.trivial_constraints)
        for c, con in enumerate(model.constraints):
            expr, sense = con.normalized()
            self.exprs.append(expr)
            self.offsets[c] = expr.offset
            self.weight[c] = qubo.penalty_weights[con.name]
            self.scale[c] = con.scale
            idx = qubo.slack_indices(con.name)
            weights = [qubo.provenance[k].weight for k in idx]
            self.slack.append((idx, weights))
            self.range[c] = sum(weights)
            if con.name in trivial:
                self.mode[c] = 2
            elif sense is Sense.EQ:
                self.mode[c] = 0
            else:
                self.mode[c] = 1
            for i, a in expr.linear.items():
                per_var[i].append((c, a))
        self.var_ptr = np.zeros(n + 1, dtype=np.int64)
        con_idx, coef = [], []
        for i, entries in enumerate(per_var):
            con_idx.extend(c for c, _ in entries)
            coef.extend(a for _, a in entries)
            self.var_ptr[i + 1] = len(con_idx)
        self.var_con = np.array(con_idx, dtype=np.int64)
        self.var_coef = np.array(coef, dtype=np.float64)
        self.n = n
        self.num_vars = qubo.num_vars

    def activity(self, x: np.ndarray) -> np.ndarray:
        act = self.offsets.copy()
        for i in np.flatnonzero(x):
            for k in range(self.var_ptr[i], self.var_ptr[i + 1]):
                act[self.var_con[k]] += self.var_coef[k]
        return act

    def full_state(self, x: np.ndarray, act: np.ndarray) -> list[int]:
        bits = x.tolist() + [0] * (self.num_vars - self.n)
        for c, (idx, weights) in enumerate(self.slack):
            if not idx or self.mode[c] != 1:
                continue
            t = math.floor(-act[c] * self.scale[c] + 0.5)
            t = int(min(max(t, 0), self.range[c]))
            for k, b in zip(idx, encode_slack(weights, t)):
                bits[k] = b
        return bits

    def run(self, kernels, x, betas, uniforms, act):
        kernels.anneal_collapsed(
            x, betas, uniforms,
            self.obj_lin, self.obj_ptr, self.obj_nbr, self.obj_val,
            self.var_ptr, self.var_con, self.var_coef,
            act, self.mode, self.weight, self.scale, self.range,
        )


class _Flip:
    """Kernel arrays for the plain single-flip chain."""

    def __init__(self, qubo: QuboModel):
        N = qubo.num_vars
        self.lin = np.zeros(N)
        for i, v in qubo.linear.items():
            self.lin[i] = v
        self.ptr, self.nbr, self.val = _csr(N, qubo.quadratic)
        self.num_vars = N

    def run(self, kernels, x, betas, uniforms):
        kernels.anneal_flip(x, betas, uniforms, self.lin, self.ptr, self.nbr, self.val)


def run_read(plan, params: SolveParams, betas: np.ndarray, read: int, kernels=None) -> list[int]:
    """Final QUBO bit vector of one read."""
    kernels = kernels or _kernels.default
    rng = read_rng(params.seed, read)
    width = plan.n if isinstance(plan, _Collapsed) else plan.num_vars
    x = (rng.random(width) < 0.5).astype(np.int8)
    act = plan.activity(x) if isinstance(plan, _Collapsed) else None
    for start in range(0, len(betas), _BLOCK):
        block = betas[start:start + _BLOCK]
        uniforms = rng.random((len(block), width))
        if act is None:
            plan.run(kernels, x, block, uniforms)
        else:
            plan.run(kernels, x, block, uniforms, act)
    if act is None:
        return x.tolist()
    return plan.full_state(x, act)


def solve_sa(
    qubo: QuboModel,
    model: CqmModel,
    params: SolveParams | None = None,
    *,
    kernels: str | None = None,
) -> SampleSet:
    """Anneal ``qubo`` and report the decoded reads against ``model``.

    Feasibility and energy of every sample come from re-evaluating the
    decoded assignment on ``model``; penalised QUBO energies are never
    reported.
    """
    params = params or SolveParams()
    _check_provenance(qubo, model)
    kmod = _kernels.get(kernels)
    t0 = time.perf_counter()
    plan = _Collapsed(qubo, model) if params.moves == "collapsed" else _Flip(qubo)
    betas = beta_schedule(params)

    def one(read):
        return qubo.decode(run_read(plan, params, betas, read, kmod)).cqm_assignment

    reads = range(params.num_reads)
    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            finals = list(pool.map(one, reads))
    else:
        finals = [one(r) for r in reads]
    info = {
        "kernel": _kernels.name_of(kmod),
        "moves": params.moves,
        "sweeps": params.sweeps,
        "seed": params.seed,
    }
    return aggregate(
        model,
        ((bits, 1) for bits in finals),
        backend_name="sa",
        wall_time=time.perf_counter() - t0,
        info=info,
    )
