"""Client for a remote hybrid-solver service.

Wire protocol (version 1)::

    POST {endpoint}/v1/solve
    {"model": <model document>, "time_limit_s": float, "max_samples": int}

    200 {"samples": [{"bits": [0, 1, ...], "count": int}, ...],
         "solver_info": {"name": str}}
    4xx/5xx {"error": {"code": str, "message": str}}

Samples may carry extra fields such as ``energy``; they are ignored and
everything is re-evaluated locally.
"""

from __future__ import annotations

import time

import requests

from cqmkit.core import CqmModel
from cqmkit.errors import (
    AssignmentLengthError,
    MalformedResponseError,
    RemoteConnectionError,
    RemoteStatusError,
    RemoteTimeoutError,
)
from cqmkit.solvers.anneal import SolveParams
from cqmkit.solvers.sampleset import SampleSet, aggregate

__all__ = ["SOLVE_PATH", "TIMEOUT_GRACE", "build_request", "parse_samples", "solve_remote"]

SOLVE_PATH = "/v1/solve"
TIMEOUT_GRACE = 30.0


def build_request(model: CqmModel, params: SolveParams) -> dict:
    return {
        "model": model.to_dict(),
        "time_limit_s": params.time_limit,
        "max_samples": params.num_reads,
    }


def parse_samples(doc, num_variables: int) -> tuple[list[tuple[list[int], int]], str]:
    """Validate a response document; returns ``(raw samples, solver name)``."""
    if not isinstance(doc, dict) or not isinstance(doc.get("samples"), list):
        raise MalformedResponseError("response must be an object with a 'samples' list")
    info = doc.get("solver_info", {})
    name = info.get("name", "unknown") if isinstance(info, dict) else "unknown"
    raw = []
    for k, entry in enumerate(doc["samples"]):
        if not isinstance(entry, dict):
            raise MalformedResponseError(f"sample {k} is not an object")
        bits, count = entry.get("bits"), entry.get("count", 1)
        if not isinstance(bits, list) or any(b not in (0, 1) or isinstance(b, bool) for b in bits):
            raise MalformedResponseError(f"sample {k}: 'bits' must be a list of 0/1")
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise MalformedResponseError(f"sample {k}: 'count' must be a positive integer")
        if len(bits) != num_variables:
            raise AssignmentLengthError(
                f"sample {k} has {len(bits)} bits, model has {num_variables} variables"
            )
        raw.append((bits, count))
    return raw, str(name)


def solve_remote(
    model: CqmModel,
    endpoint: str,
    params: SolveParams | None = None,
    *,
    token: str | None = None,
    session: requests.Session | None = None,
) -> SampleSet:
    params = params or SolveParams()
    url = endpoint.rstrip("/") + SOLVE_PATH
    headers = {"Content-Type": "application/json"}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    http = session or requests
    t0 = time.perf_counter()
    try:
        resp = http.post(
            url,
            json=build_request(model, params),
            headers=headers,
            timeout=params.time_limit + TIMEOUT_GRACE,
        )
    except requests.Timeout as exc:
        raise RemoteTimeoutError(f"no answer from {url} within the time limit: {exc}") from exc
    except requests.ConnectionError as exc:
        raise RemoteConnectionError(f"cannot reach {url}: {exc}") from exc

    if not 200 <= resp.status_code < 300:
        code = message = None
        try:
            err = resp.json().get("error", {})
            code, message = err.get("code"), err.get("message")
        except (ValueError, AttributeError):
            pass
        raise RemoteStatusError(resp.status_code, code, message)
    try:
        doc = resp.json()
    except ValueError as exc:
        raise MalformedResponseError(f"response body is not JSON: {exc}") from exc
    raw, name = parse_samples(doc, model.num_variables)
    return aggregate(
        model,
        raw,
        backend_name=f"remote:{name}",
        wall_time=time.perf_counter() - t0,
        info={"endpoint": endpoint},
    )
