"""Compare the compiled and pure-Python Rayleigh integrators.

    python benchmarks/bench_core.py [--repeat N]

Prints the wall time per solve for each backend and the speedup.
"""

import argparse
import time

from shearspec import kernel
from shearspec.profile import parse_profile
from shearspec.rayleigh import SolverOptions, solve

CASES = [
    ("couette", "x2", 1.0, 2.0, -0.5 + 0.3j),
    ("tanh a=2", "tanh(2*(x2+1))", 2.0, 1.0, 0.3 + 0.2j),
    ("tanh a=2, critical", "tanh(2*(x2+1))", 2.0, 1.0, 0.3),
    ("tanh a=2, k=60", "tanh(2*(x2+1))", 2.0, 60.0, 0.8 + 0.01j),
    ("cubic", "1 + x2 + ((1+x2)^3)/2", 2.0, 5.0, 0.5 + 0.1j),
]


def bench(profile, k, c, backend, repeat):
    opts = SolverOptions(backend=backend)
    solve(profile, k, c, opts=opts)
    t = time.perf_counter()
    for _ in range(repeat):
        sol = solve(profile, k, c, opts=opts)
    return (time.perf_counter() - t) / repeat, sol.end


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernel._core is None:
        print("compiled extension not built; only the python backend is available")
    print(f"{'case':<22}{'cython [ms]':>14}{'python [ms]':>14}{'speedup':>10}{'max rel diff':>15}")
    for name, expr, h, k, c in CASES:
        p = parse_profile(expr, h)
        tp, ep = bench(p, k, c, "python", max(1, args.repeat // 5))
        if kernel._core is not None:
            tc, ec = bench(p, k, c, "cython", args.repeat)
            diff = max(abs(ec[0] - ep[0]) / abs(ep[0]), abs(ec[1] - ep[1]) / abs(ep[1]))
            print(f"{name:<22}{1e3 * tc:>14.3f}{1e3 * tp:>14.3f}{tp / tc:>10.1f}{diff:>15.2e}")
        else:
            print(f"{name:<22}{'-':>14}{1e3 * tp:>14.3f}{'-':>10}{'-':>15}")


if __name__ == "__main__":
    main()
