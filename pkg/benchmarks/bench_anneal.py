"""Compare the compiled and pure-Python annealing kernels on the menu QUBO.

    python3 benchmarks/bench_anneal.py [--reads 8] [--sweeps 1000]

Both kernels consume the same random streams, so the samples must match
exactly; the script checks that before reporting timings.
"""

import argparse
import time

from cqmkit import ChoiceSpec, SolveParams, build_model, load_menu, parse_bound, solve_sa, to_qubo
from cqmkit import _kernels


def timed(qubo, model, params, kernels, repeat):
    best, result = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = solve_sa(qubo, model, params, kernels=kernels)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reads", type=int, default=8)
    parser.add_argument("--sweeps", type=int, default=1000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    model = build_model(load_menu(), ChoiceSpec("price", bounds=(parse_bound("calories<=700"),)))
    qubo = to_qubo(model)
    if _kernels.compiled is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"menu QUBO: {qubo.num_vars} variables, {args.reads} reads x {args.sweeps} sweeps")
    print(f"{'moves':<10} {'python s':>10} {'cython s':>10} {'speedup':>9}  identical")
    for moves in ("collapsed", "flip"):
        params = SolveParams(num_reads=args.reads, sweeps=args.sweeps, seed=1, moves=moves)
        t_py, r_py = timed(qubo, model, params, "python", 1)
        t_cy, r_cy = timed(qubo, model, params, "cython", args.repeat)
        same = r_py.samples == r_cy.samples
        print(f"{moves:<10} {t_py:>10.3f} {t_cy:>10.4f} {t_py / t_cy:>8.0f}x  {same}")
        if not same:
            raise SystemExit("kernel outputs differ")


if __name__ == "__main__":
    main()
