"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both variants are imported from the same module, so one process compares
them directly; the first numba call (compilation or cache load) is excluded.
"""

import argparse
import json
import platform
import timeit

import numpy as np

from bandgap_lab import _kernels as k


def cases(rng):
    n = 2000
    diag, off = rng.uniform(-1, 1, n), rng.uniform(0.5, 1.5, n - 1)
    rhs = np.zeros((n, 8), complex)
    rhs[n // 2 : n // 2 + 8, :] = np.eye(8)
    a, b = rng.uniform(0.5, 1.5, 6), rng.uniform(-1, 1, 6)
    lams = rng.uniform(-3, 3, 20_000) + 1e-3j
    dense = rng.standard_normal((200, 200)) + 1j * rng.standard_normal((200, 200))
    hess = k.hessenberg_numpy(dense.copy())
    return {
        "tridiag_solve (n=2000, 8 rhs)": ("tridiag_solve", (diag, off, 0.3 + 0.01j, rhs)),
        "monodromy_grid (period 6, 20k points)": ("monodromy_grid", (a, b, lams)),
        "balance (200x200)": ("balance", (dense,)),
        "hessenberg (200x200)": ("hessenberg", (dense,)),
        "hqr_eigvals (200x200 Hessenberg)": ("hqr_eigvals", (hess, 8000)),
    }


def _copy(args):
    return tuple(x.copy() if isinstance(x, np.ndarray) else x for x in args)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", default=None, help="also write results here")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rows = []
    for label, (name, kargs) in cases(rng).items():
        fast = getattr(k, f"{name}_numba")
        slow = getattr(k, f"{name}_numpy")
        fast(*_copy(kargs))  # warm-up
        t_fast = min(timeit.repeat(lambda: fast(*_copy(kargs)), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*_copy(kargs)), number=1, repeat=args.repeat))
        rows.append({"kernel": label, "numba_s": t_fast, "numpy_s": t_slow, "speedup": t_slow / t_fast})

    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba [s]':>10}  {'numpy [s]':>10}  {'speedup':>8}")
    for r in rows:
        print(f"{r['kernel']:<{width}}  {r['numba_s']:>10.4f}  {r['numpy_s']:>10.4f}  {r['speedup']:>7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"python": platform.python_version(), "machine": platform.machine(), "results": rows},
                      fh, indent=2)


if __name__ == "__main__":
    main()
