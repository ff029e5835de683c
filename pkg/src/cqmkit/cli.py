"""Command-line interface.

Exit codes: 0 feasible / success, 2 input error, 3 no feasible solution,
4 backend error, 5 search space over the enumerator's caps.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from decimal import Decimal
from pathlib import Path

from cqmkit.catalog import ChoiceCatalog, ChoiceSpec, build_model, load_catalog, parse_bound
from cqmkit.core import CqmModel, Sense, as_assignment, is_feasible
from cqmkit.errors import (
    CatalogError,
    CqmError,
    ModelValidationError,
    SearchSpaceTooLargeError,
    SolverError,
    TransformError,
)
from cqmkit.report import describe_solution, rank_combinations, render_table, write_ranking_csv
from cqmkit.solvers import SolveParams, solve_exact, solve_remote, solve_sa
from cqmkit.solvers.exact import plan_search
from cqmkit.transform import PenaltyPolicy, to_qubo

log = logging.getLogger("cqmkit")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_BACKEND = 4
EXIT_SIZE = 5

TOKEN_ENV = "CQMKIT_TOKEN"


class InputError(Exception):
    pass


def _add_spec_options(p):
    goal = p.add_mutually_exclusive_group()
    goal.add_argument("--minimize", metavar="ATTR", help="attribute to minimise (default: price)")
    goal.add_argument("--maximize", metavar="ATTR", help="attribute to maximise")
    p.add_argument(
        "--bound", action="append", default=[], metavar="EXPR",
        help='resource bound such as "calories<=700"; repeatable',
    )
    p.add_argument(
        "--scale", action="append", default=[], metavar="ATTR=N",
        help="minor-unit factor for a column, e.g. protein=10; repeatable",
    )


def _build_parser():
    parser = argparse.ArgumentParser(prog="cqmkit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a model JSON document from a catalog CSV")
    b.add_argument("input", help="catalog CSV")
    _add_spec_options(b)
    b.add_argument("-o", "--output", help="write the model here instead of stdout")
    b.add_argument("--export-catalog", metavar="PATH", help="also write the parsed catalog as JSON")
    b.add_argument("--qubo", metavar="PATH", help="also write the penalised QUBO as JSON")
    b.add_argument("--coo", metavar="PATH", help="also write the QUBO as 'i j value' text")

    s = sub.add_parser("solve", help="solve a catalog CSV or a model JSON document")
    s.add_argument("input", help="catalog CSV, model JSON, or '-' for model JSON on stdin")
    _add_spec_options(s)
    s.add_argument("--backend", choices=("exact", "sa", "remote"), default="exact")
    s.add_argument("--top-k", type=int, default=10, help="exact backend: samples beyond the optimal set")
    s.add_argument("--reads", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sweeps", type=int, default=1000)
    s.add_argument("--beta-start", type=float, default=0.01)
    s.add_argument("--beta-end", type=float, default=10.0)
    s.add_argument("--moves", choices=("collapsed", "flip"), default="collapsed")
    s.add_argument("--workers", type=int, default=1)
    penalty = s.add_mutually_exclusive_group()
    penalty.add_argument("--penalty-multiplier", type=float, default=2.0)
    penalty.add_argument("--penalty-weight", type=float)
    s.add_argument("--time-limit", type=float, default=5.0, help="remote backend, seconds")
    s.add_argument("--endpoint", help="remote backend base URL")
    s.add_argument("--token", help=f"bearer token for the remote backend (or ${TOKEN_ENV})")
    s.add_argument("--format", choices=("table", "json"), default="table")
    s.add_argument("--show", type=int, default=10, help="rows to print in table format")
    s.add_argument("--timing", action="store_true", help="include wall time in JSON output")

    c = sub.add_parser("check", help="check one assignment against the model")
    c.add_argument("input", help="catalog CSV, model JSON, or '-'")
    _add_spec_options(c)
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--assignment", metavar="FILE",
                     help="item labels one per line, or a 0/1 vector")
    src.add_argument("--items", nargs="+", metavar="LABEL", help="selected item labels")
    c.add_argument("--format", choices=("table", "json"), default="table")

    e = sub.add_parser("enumerate", help="count (and optionally rank) every combination")
    e.add_argument("input", help="catalog CSV")
    _add_spec_options(e)
    e.add_argument("--dump", metavar="PATH", help="write the full ranking as CSV ('-' for stdout)")
    e.add_argument("--format", choices=("table", "json"), default="table")
    return parser


def _spec(args, catalog: ChoiceCatalog) -> ChoiceSpec:
    try:
        bounds = tuple(parse_bound(b) for b in args.bound)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.maximize:
        spec = ChoiceSpec(args.maximize, "maximize", bounds)
    else:
        default = "price" if "price" in catalog.attribute_names else catalog.attribute_names[0]
        spec = ChoiceSpec(args.minimize or default, "minimize", bounds)
    spec.validate(catalog)
    return spec


def _scales(args) -> dict[str, int]:
    out = {}
    for item in args.scale:
        name, _, value = item.partition("=")
        try:
            out[name.strip()] = int(value)
        except ValueError:
            raise InputError(f"--scale expects ATTR=N, got {item!r}") from None
    return out


def _is_model_input(path: str) -> bool:
    return path == "-" or path.lower().endswith(".json")


def _load(args):
    """Returns ``(catalog or None, model, spec or None)``."""
    if _is_model_input(args.input):
        if args.bound or args.minimize or args.maximize:
            raise InputError("--minimize/--maximize/--bound apply to CSV input only")
        try:
            text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text("utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
        return None, CqmModel.from_json(text), None
    try:
        catalog = load_catalog(args.input, _scales(args))
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
    spec = _spec(args, catalog)
    return catalog, build_model(catalog, spec), spec


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def cmd_build(args) -> int:
    catalog, model, _ = _load(args)
    _write(args.output, model.to_json(indent=2, ensure_ascii=False) + "\n")
    if args.export_catalog:
        _write(args.export_catalog, catalog.to_json(indent=2, ensure_ascii=False) + "\n")
    if args.qubo or args.coo:
        qubo = to_qubo(model)
        if args.qubo:
            _write(args.qubo, qubo.to_json(indent=2) + "\n")
        if args.coo:
            _write(args.coo, qubo.to_coo())
    log.info("built model: %d variables, %d constraints",
             model.num_variables, len(model.constraints))
    return EXIT_OK


def _selected(model, bits):
    return [model.labels[i] for i, b in enumerate(bits) if b]


def _sample_doc(model, catalog, sample):
    doc = sample.to_dict()
    doc["selected"] = _selected(model, sample.assignment)
    if catalog is not None:
        doc["report"] = describe_solution(catalog, model, sample).to_dict()
    return doc


def _generic_table(model, samples) -> str:
    rows = [["Selected", "Energy", "Feasible", "Count"]]
    for s in samples:
        rows.append([
            ", ".join(_selected(model, s.assignment)) or "(none)",
            repr(s.energy), "yes" if s.feasible else "no", str(s.num_occurrences),
        ])
    widths = [max(len(r[c]) for r in rows) for c in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _table(model, catalog, samples) -> str:
    if catalog is None:
        return _generic_table(model, samples)
    return render_table(catalog, [describe_solution(catalog, model, s) for s in samples])


def cmd_solve(args) -> int:
    catalog, model, _ = _load(args)
    token = args.token or os.environ.get(TOKEN_ENV)
    if args.backend == "remote" and not args.endpoint:
        raise InputError("--backend remote requires --endpoint")
    try:
        params = SolveParams(
            num_reads=args.reads, seed=args.seed, sweeps=args.sweeps,
            beta_start=args.beta_start, beta_end=args.beta_end,
            time_limit=args.time_limit, workers=args.workers, moves=args.moves,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None

    if args.backend == "exact":
        result = solve_exact(model, top_k=args.top_k)
    elif args.backend == "sa":
        policy = (PenaltyPolicy.fixed(args.penalty_weight) if args.penalty_weight is not None
                  else PenaltyPolicy(auto_multiplier=args.penalty_multiplier))
        result = solve_sa(to_qubo(model, policy), model, params)
    else:
        result = solve_remote(model, args.endpoint, params, token=token)

    feasible = result.any_feasible
    least = None if feasible else result.least_violation()
    if args.format == "json":
        doc = {
            "backend": result.backend_name,
            "total_reads": result.total_reads,
            "feasible": feasible,
            "samples": [_sample_doc(model, catalog, s) for s in result.samples],
        }
        if least is not None:
            doc["least_violation"] = _sample_doc(model, catalog, least)
        if args.timing:
            doc["wall_time"] = result.wall_time
        sys.stdout.write(_dumps(doc))
    else:
        print(f"backend: {result.backend_name}   total reads: {result.total_reads}   "
              f"wall time: {result.wall_time:.3f} s")
        if result.samples:
            print(_table(model, catalog, result.samples[: max(args.show, 1)]))
        if not feasible:
            print("\nNo feasible solution found.")
            if least is not None:
                print("Least-violating sample:")
                print(_table(model, catalog, [least]))
                for name, v in least.violations:
                    print(f"  violated {name}: by {v:.6g}")
    return EXIT_OK if feasible else EXIT_INFEASIBLE


def _read_assignment(args, model) -> tuple[int, ...]:
    if args.items:
        labels = args.items
    else:
        try:
            text = Path(args.assignment).read_text("utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {args.assignment}: {exc.strerror}") from None
        stripped = text.strip()
        if stripped.startswith("["):
            try:
                return as_assignment(json.loads(stripped), model.num_variables)
            except (ValueError, CqmError) as exc:
                raise InputError(f"bad bit vector: {exc}") from None
        tokens = stripped.replace(",", " ").split()
        if tokens and all(t in ("0", "1") for t in tokens) and len(tokens) == model.num_variables:
            return tuple(int(t) for t in tokens)
        labels = [line.strip() for line in text.splitlines() if line.strip()]
    bits = [0] * model.num_variables
    index = {label: i for i, label in enumerate(model.labels)}
    for label in labels:
        if label not in index:
            raise InputError(f"unknown item label {label!r}")
        bits[index[label]] = 1
    return tuple(bits)


def cmd_check(args) -> int:
    catalog, model, _ = _load(args)
    bits = _read_assignment(args, model)
    report = is_feasible(model, bits)
    meal = describe_solution(catalog, model, bits) if catalog is not None else None
    if args.format == "json":
        doc = {
            "feasible": report.feasible,
            "energy": model.energy(bits),
            "selected": _selected(model, bits),
            "constraints": [
                {"name": n, "satisfied": v.satisfied, "lhs": v.lhs, "violation": v.violation}
                for n, v in report.per_constraint
            ],
        }
        if meal is not None:
            doc["report"] = meal.to_dict()
        sys.stdout.write(_dumps(doc))
    else:
        for name, v in report.per_constraint:
            status = "ok" if v.satisfied else f"VIOLATED by {v.violation:.6g}"
            print(f"{name:<28} lhs={v.lhs:<12.6g} {status}")
        if meal is not None:
            for group, note in meal.notes.items():
                print(f"{group}: {note}")
            totals = ", ".join(f"{a}={meal.format_total(a)}" for a in catalog.attribute_names)
            print(f"totals: {totals}")
        else:
            print(f"energy: {model.energy(bits)!r}")
        print("feasible" if report.feasible else "infeasible")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_enumerate(args) -> int:
    if _is_model_input(args.input):
        raise InputError("enumerate expects a catalog CSV")
    catalog, model, spec = _load(args)
    count = plan_search(model).size
    if args.format == "json":
        sys.stdout.write(_dumps({"combinations": count, "groups": catalog.group_sizes()}))
    elif args.dump != "-":
        print(f"combinations: {count}")
    if args.dump:
        choices, totals = rank_combinations(
            catalog,
            sort_by=[spec.objective],
            descending={spec.objective} if spec.direction == "maximize" else (),
        )
        feasible = None
        if spec.bounds:
            feasible = True
            for b in spec.bounds:
                limit = Decimal(repr(b.limit)) * catalog.scales[b.attribute]
                t = totals[b.attribute]
                if b.sense is Sense.LE:
                    feasible = feasible & (t <= int(math.floor(limit)))
                else:
                    feasible = feasible & (t >= int(math.ceil(limit)))
        if args.dump == "-":
            write_ranking_csv(catalog, choices, totals, sys.stdout, feasible)
        else:
            with open(args.dump, "w", encoding="utf-8", newline="") as fh:
                write_ranking_csv(catalog, choices, totals, fh, feasible)
    return EXIT_OK


COMMANDS = {"build": cmd_build, "solve": cmd_solve, "check": cmd_check, "enumerate": cmd_enumerate}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except BrokenPipeError:
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except SearchSpaceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (InputError, CatalogError, ModelValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, TransformError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except CqmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
