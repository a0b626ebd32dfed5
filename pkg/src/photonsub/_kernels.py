"""Hot inner loops, compiled with numba when available.

Set ``PHOTONSUB_DISABLE_NUMBA=1`` to force the pure-numpy implementations
(useful for debugging and for the kernel benchmark).  Both paths compute
the same quantities and are cross-checked in the test suite.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLED = os.environ.get("PHOTONSUB_DISABLE_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
)

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------


def wigner_fock_grid_numpy(rho, xs, ps):
    """Wigner function of a single-mode density matrix on an ``xs x ps`` grid.

    Uses the Laguerre recursion over ``|m><n|`` components with
    ``alpha = (x + i p)/sqrt(2)``.  Returns an array indexed ``[ix, ip]``.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    X, P = np.meshgrid(np.asarray(xs, float), np.asarray(ps, float), indexing="ij")
    a = (X + 1j * P) / math.sqrt(2.0)
    wlist = [None] * dim
    wlist[0] = np.exp(-2.0 * np.abs(a) ** 2) / math.pi + 0j
    w = rho[0, 0].real * wlist[0].real
    for n in range(1, dim):
        wlist[n] = 2.0 * a * wlist[n - 1] / math.sqrt(n)
        w = w + 2.0 * np.real(rho[0, n] * wlist[n])
    for m in range(1, dim):
        temp = wlist[m].copy()
        wlist[m] = (2.0 * np.conj(a) * temp - math.sqrt(m) * wlist[m - 1]) / math.sqrt(m)
        w = w + np.real(rho[m, m] * wlist[m])
        for n in range(m + 1, dim):
            temp2 = (2.0 * a * wlist[n - 1] - math.sqrt(m) * temp) / math.sqrt(n)
            temp = wlist[n].copy()
            wlist[n] = temp2
            w = w + 2.0 * np.real(rho[m, n] * wlist[n])
    return w


def hermite_functions_numpy(dim, xs):
    """Harmonic-oscillator eigenfunctions ``psi_n(x)`` for ``n < dim``.

    Normalised for vacuum variance 1/2.  Returns shape ``(dim, len(xs))``.
    """
    xs = np.asarray(xs, dtype=float)
    out = np.empty((dim, xs.size))
    out[0] = math.pi**-0.25 * np.exp(-0.5 * xs**2)
    if dim > 1:
        out[1] = math.sqrt(2.0) * xs * out[0]
    for n in range(1, dim - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xs * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def mixture_grid_numpy(weights, var_x, var_p, xs, ps):
    """Signed sum of zero-mean diagonal Gaussians on an ``xs x ps`` grid."""
    xs = np.asarray(xs, float)[:, None]
    ps = np.asarray(ps, float)[None, :]
    w = np.zeros((xs.shape[0], ps.shape[1]))
    for c, a, b in zip(weights, var_x, var_p):
        w += c / (2.0 * math.pi * math.sqrt(a * b)) * np.exp(-0.5 * xs**2 / a - 0.5 * ps**2 / b)
    return w


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _wigner_fock_grid_nb(rho, xs, ps):
        dim = rho.shape[0]
        out = np.empty((xs.size, ps.size))
        wl = np.empty(dim, dtype=np.complex128)
        inv_sqrt = np.empty(dim)
        sq = np.empty(dim)
        for k in range(dim):
            sq[k] = math.sqrt(k)
            inv_sqrt[k] = 1.0 / math.sqrt(k) if k > 0 else 0.0
        for i in range(xs.size):
            for j in range(ps.size):
                a = complex(xs[i], ps[j]) / math.sqrt(2.0)
                ac = a.conjugate()
                wl[0] = math.exp(-2.0 * (a.real * a.real + a.imag * a.imag)) / math.pi
                w = rho[0, 0].real * wl[0].real
                for n in range(1, dim):
                    wl[n] = 2.0 * a * wl[n - 1] * inv_sqrt[n]
                    w += 2.0 * (rho[0, n] * wl[n]).real
                for m in range(1, dim):
                    temp = wl[m]
                    wl[m] = (2.0 * ac * temp - sq[m] * wl[m - 1]) * inv_sqrt[m]
                    w += (rho[m, m] * wl[m]).real
                    for n in range(m + 1, dim):
                        temp2 = (2.0 * a * wl[n - 1] - sq[m] * temp) * inv_sqrt[n]
                        temp = wl[n]
                        wl[n] = temp2
                        w += 2.0 * (rho[m, n] * wl[n]).real
                out[i, j] = w
        return out

    @njit(cache=True)
    def _hermite_functions_nb(dim, xs):
        out = np.empty((dim, xs.size))
        c0 = math.pi**-0.25
        for i in range(xs.size):
            x = xs[i]
            out[0, i] = c0 * math.exp(-0.5 * x * x)
            if dim > 1:
                out[1, i] = math.sqrt(2.0) * x * out[0, i]
            for n in range(1, dim - 1):
                out[n + 1, i] = (
                    math.sqrt(2.0 / (n + 1)) * x * out[n, i]
                    - math.sqrt(n / (n + 1)) * out[n - 1, i]
                )
        return out

    @njit(cache=True)
    def _mixture_grid_nb(weights, var_x, var_p, xs, ps):
        out = np.zeros((xs.size, ps.size))
        for k in range(weights.size):
            pref = weights[k] / (2.0 * math.pi * math.sqrt(var_x[k] * var_p[k]))
            for i in range(xs.size):
                ex = -0.5 * xs[i] * xs[i] / var_x[k]
                for j in range(ps.size):
                    out[i, j] += pref * math.exp(ex - 0.5 * ps[j] * ps[j] / var_p[k])
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _use_numba(use_numba):
    if use_numba is None:
        return HAVE_NUMBA
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba kernels requested but numba is disabled or missing")
    return bool(use_numba)


def wigner_fock_grid(rho, xs, ps, use_numba=None):
    if _use_numba(use_numba):
        return _wigner_fock_grid_nb(
            np.ascontiguousarray(rho, dtype=np.complex128),
            np.ascontiguousarray(xs, dtype=np.float64),
            np.ascontiguousarray(ps, dtype=np.float64),
        )
    return wigner_fock_grid_numpy(rho, xs, ps)


def hermite_functions(dim, xs, use_numba=None):
    xs = np.ascontiguousarray(np.atleast_1d(xs), dtype=np.float64)
    if _use_numba(use_numba):
        return _hermite_functions_nb(int(dim), xs)
    return hermite_functions_numpy(int(dim), xs)


def mixture_grid(weights, var_x, var_p, xs, ps, use_numba=None):
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (weights, var_x, var_p, xs, ps)]
    if _use_numba(use_numba):
        return _mixture_grid_nb(*args)
    return mixture_grid_numpy(*args)
