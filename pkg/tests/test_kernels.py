"""Numba and numpy kernels agree, and the Wigner convention is the standard one."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from photonsub import _kernels
from photonsub.fock_oracle import FockDensityMatrix, quadrature_moments
from photonsub.tomography import quadrature_distribution

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba disabled")


def _random_rho(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@needs_numba
@given(st.integers(1, 12), st.integers(0, 1000))
def test_wigner_kernels_agree(dim, seed):
    rho = _random_rho(dim, seed)
    xs, ps = np.linspace(-4, 4, 9), np.linspace(-3, 3, 7)
    a = _kernels.wigner_fock_grid(rho, xs, ps, use_numba=True)
    b = _kernels.wigner_fock_grid(rho, xs, ps, use_numba=False)
    assert np.allclose(a, b, atol=1e-13)


@needs_numba
def test_hermite_and_mixture_kernels_agree():
    xs = np.linspace(-7, 7, 51)
    assert np.allclose(
        _kernels.hermite_functions(20, xs, use_numba=True),
        _kernels.hermite_functions(20, xs, use_numba=False),
        atol=1e-14,
    )
    args = ((1.5, -0.5), (0.3, 0.8), (1.2, 0.4))
    assert np.allclose(
        _kernels.mixture_grid(*args, xs, xs, use_numba=True),
        _kernels.mixture_grid(*args, xs, xs, use_numba=False),
        atol=1e-14,
    )


def test_use_numba_request_without_numba(monkeypatch):
    monkeypatch.setattr(_kernels, "HAVE_NUMBA", False)
    with pytest.raises(RuntimeError):
        _kernels.hermite_functions(3, [0.0], use_numba=True)


def test_hermite_functions_are_orthonormal():
    xs = np.linspace(-12, 12, 4001)
    psi = _kernels.hermite_functions(15, xs)
    gram = psi @ psi.T * (xs[1] - xs[0])
    assert np.allclose(gram, np.eye(15), atol=1e-10)


def _wigner_direct(psi, x, p):
    """W(x, p) = (1/pi) int dy psi(x - y) psi*(x + y) exp(2 i p y)."""
    def wave(u):
        return psi @ _kernels.hermite_functions(len(psi), np.atleast_1d(u))[:, 0]

    def integrand(y, part):
        val = wave(x - y) * np.conj(wave(x + y)) * np.exp(2j * p * y)
        return val.real if part == 0 else val.imag

    re = integrate.quad(integrand, -10, 10, args=(0,), epsabs=1e-12)[0]
    return re / math.pi


@pytest.mark.parametrize("x,p", [(0.0, 0.0), (0.7, -0.3), (-1.1, 0.9), (0.2, 1.4)])
def test_wigner_matches_direct_integral_for_complex_state(x, p):
    psi = np.array([1.0, 1j]) / math.sqrt(2)
    rho = np.outer(psi, psi.conj())
    w = _kernels.wigner_fock_grid(rho, [x], [p])[0, 0]
    assert math.isclose(w, _wigner_direct(psi, x, p), abs_tol=1e-10)


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 2, 2.0])
def test_marginal_matches_rotated_wigner_projection(theta):
    """The homodyne marginal at phase theta is the Wigner projection onto x cos + p sin."""
    psi = np.array([0.6, 0.48j, 0.64])
    psi = psi / np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    us = np.linspace(-3, 3, 7)
    vs = np.linspace(-8, 8, 801)
    U, V = np.meshgrid(us, vs, indexing="ij")
    X = U * math.cos(theta) - V * math.sin(theta)
    P = U * math.sin(theta) + V * math.cos(theta)
    m = FockDensityMatrix(rho)
    w = np.vectorize(m.__call__)(X, P)
    proj = np.trapezoid(w, vs, axis=1)
    assert np.allclose(proj, quadrature_distribution(rho, theta, us), atol=1e-9)


def test_marginal_mean_matches_operator_mean():
    psi = np.array([1.0, 1j]) / math.sqrt(2)  # <p> = 1/sqrt(2), <x> = 0
    xs = np.linspace(-9, 9, 6001)
    for theta, expected in ((0.0, 0.0), (math.pi / 2, 1 / math.sqrt(2))):
        pdf = quadrature_distribution(np.outer(psi, psi.conj()), theta, xs)
        assert math.isclose(np.trapezoid(xs * pdf, xs), expected, abs_tol=1e-9)
    # second moments agree with operator moments
    x2, p2 = quadrature_moments(np.concatenate([psi, [0, 0]]))  # pad so x^2 is not truncated
    pdf0 = quadrature_distribution(np.outer(psi, psi.conj()), 0.0, xs)
    assert math.isclose(np.trapezoid(xs**2 * pdf0, xs), x2, rel_tol=1e-9)
