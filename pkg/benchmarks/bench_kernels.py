"""Compare the numba kernels against their pure-numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is timed on
representative inputs after a warm-up call (so JIT compilation is excluded),
and the two implementations are checked to agree before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from photonsub import _kernels as K


def _cases(dim, points):
    rng = np.random.Generator(np.random.Philox(0))
    xs = np.linspace(-5.0, 5.0, points)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    w = np.array([0.6, -0.3, 0.7])
    vx = np.array([0.4, 0.9, 1.3])
    vp = np.array([1.1, 0.5, 0.8])
    return {
        "wigner_fock_grid": (rho, xs, xs),
        "hermite_functions": (dim, np.linspace(-8.0, 8.0, 20 * points)),
        "mixture_grid": (w, vx, vp, xs, xs),
    }


def run(dim=40, points=201, repeat=5):
    rows = []
    for name, args in _cases(dim, points).items():
        fn = getattr(K, name)
        ref = fn(*args, use_numba=False)
        if K.HAVE_NUMBA:
            fast = fn(*args, use_numba=True)
            err = float(np.max(np.abs(np.asarray(fast) - np.asarray(ref))))
            t_nb = min(timeit.repeat(lambda: fn(*args, use_numba=True), number=1, repeat=repeat))
        else:
            err, t_nb = float("nan"), float("nan")
        t_np = min(timeit.repeat(lambda: fn(*args, use_numba=False), number=1, repeat=repeat))
        rows.append((name, t_np, t_nb, err))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=40, help="Fock cutoff for the Wigner kernel")
    ap.add_argument("--points", type=int, default=201, help="grid points per axis")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"numba available: {K.HAVE_NUMBA}")
    print(f"{'kernel':<20}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, t_np, t_nb, err in run(args.dim, args.points, args.repeat):
        print(f"{name:<20}{1e3 * t_np:12.2f}{1e3 * t_nb:12.2f}{t_np / t_nb:10.1f}{err:12.1e}")


if __name__ == "__main__":
    main()
