"""Brute-force reference model in a truncated photon-number basis.

Everything here is computed from state vectors and Kraus operators, with no
use of the Gaussian closed forms, so it can serve as an independent check
of :mod:`photonsub.heralding`.

Two-mode pure states are stored as amplitude matrices ``psi[n1, n2]``; two
mode density matrices as tensors ``rho[n1, n2, m1, m2]``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .gaussian_core import as_r
from .heralding import ONOFF, PNRD, HeraldError, HeraldSpec, LossBudget, SqueezedFockState

DEFAULT_CUTOFF = 40
NORM_TOL = 1e-8


class TruncationError(ValueError):
    """Raised when a state does not fit in the requested Fock cutoff."""


@dataclass(frozen=True)
class FockDensityMatrix:
    """Single-mode density matrix on photon numbers ``0 .. dim-1``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_ket(cls, psi) -> "FockDensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "FockDensityMatrix":
        return FockDensityMatrix(self.matrix / self.trace)

    def photon_numbers(self) -> np.ndarray:
        return np.diag(self.matrix).real.copy()

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def is_valid(self, tol: float = 1e-10) -> bool:
        herm = np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol
        return bool(herm and self.eigenvalues().min() >= -tol and 0 < self.trace <= 1 + tol)

    def padded(self, dim: int) -> "FockDensityMatrix":
        if dim < self.dim:
            raise ValueError("cannot pad to a smaller dimension")
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.dim, : self.dim] = self.matrix
        return FockDensityMatrix(out)

    def wigner(self, xs, ps, check_boundary=True, use_numba=None) -> np.ndarray:
        return wigner_from_density(self, xs, ps, check_boundary, use_numba)

    def grid(self, xs, ps, use_numba=None) -> np.ndarray:
        return wigner_from_density(self, xs, ps, False, use_numba)

    def __call__(self, x, p) -> float:
        """Wigner value at a single phase-space point."""
        return float(_kernels.wigner_fock_grid(self.matrix, [x], [p])[0, 0])

    def origin(self) -> float:
        return self(0.0, 0.0)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "FockDensityMatrix":
        arr = np.asarray(d["entries"], dtype=float)
        return cls(arr[..., 0] + 1j * arr[..., 1])

    @classmethod
    def from_json(cls, text: str) -> "FockDensityMatrix":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


def _check_norm(vec, what):
    deficit = 1.0 - float(np.vdot(vec, vec).real)
    if deficit > NORM_TOL:
        raise TruncationError(f"{what}: truncated norm deficit {deficit:.2e} exceeds {NORM_TOL:.0e}")
    return vec


def squeezed_vacuum_fock(r, N: int = DEFAULT_CUTOFF, check: bool = True) -> np.ndarray:
    """Amplitudes of ``S(r)|0>`` on photon numbers ``0..N``.

    With ``check`` the truncated norm deficit must stay below ``NORM_TOL``.
    """
    r = as_r(r)
    t = math.tanh(r)
    c = np.zeros(N + 1)
    c[0] = math.cosh(r) ** -0.5
    for m in range(0, N // 2):
        c[2 * m + 2] = c[2 * m] * (-t) * math.sqrt((2 * m + 1) / (2 * m + 2))
    return _check_norm(c, f"squeezed vacuum r={r:.3f}, N={N}") if check else c


def squeezed_single_photon_fock(r, N: int = DEFAULT_CUTOFF, check: bool = True) -> np.ndarray:
    """Amplitudes of ``S(r)|1>`` on photon numbers ``0..N``."""
    r = as_r(r)
    t = math.tanh(r)
    c = np.zeros(N + 1)
    if N >= 1:
        c[1] = math.cosh(r) ** -1.5
    for m in range(0, (N - 1) // 2):
        c[2 * m + 3] = c[2 * m + 1] * (-t) * math.sqrt((2 * m + 3) / (2 * m + 2))
    return _check_norm(c, f"squeezed single photon r={r:.3f}, N={N}") if check else c


def squeezed_fock_state(r, n: int, N: int = DEFAULT_CUTOFF, pad: int = 60) -> np.ndarray:
    """``S(r)|n>`` for any ``n``; exact recurrences for ``n`` in {0, 1}."""
    if n == 0:
        return squeezed_vacuum_fock(r, N)
    if n == 1:
        return squeezed_single_photon_fock(r, N)
    r = as_r(r)
    D = N + 1 + pad
    a = np.diag(np.sqrt(np.arange(1, D)), 1)
    gen = 0.5 * r * (a @ a - a.T @ a.T)
    vec = expm(gen)[:, n][: N + 1]
    return _check_norm(vec, f"squeezed |{n}> r={r:.3f}, N={N}")


def two_mode_input(r1, r2, N: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Product of two squeezed vacua as an amplitude matrix ``psi[n1, n2]``."""
    return np.outer(squeezed_vacuum_fock(r1, N), squeezed_vacuum_fock(r2, N)).astype(complex)


# ---------------------------------------------------------------------------
# beam splitter
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _bs_blocks(T: float, N: int):
    """Per-photon-number blocks of the beam-splitter unitary.

    Block ``K`` acts on ``|k, K-k>``, ``k = 0..K``, and is the exponential of
    ``theta (a1^dag a2 - a1 a2^dag)`` with ``cos(theta) = sqrt(1-T)``.  The
    sign choice reproduces the Heisenberg action
    ``a1 -> sqrt(R) a1 + sqrt(T) a2``, ``a2 -> -sqrt(T) a1 + sqrt(R) a2``.
    """
    theta = math.asin(math.sqrt(T))
    blocks = []
    for K in range(2 * N + 1):
        k = np.arange(K)
        gen = np.zeros((K + 1, K + 1))
        # <k+1, K-k-1| a1^dag a2 |k, K-k>
        gen[k + 1, k] = np.sqrt((k + 1) * (K - k))
        gen = gen - gen.T
        blk = expm(theta * gen)
        blk.setflags(write=False)
        blocks.append(blk)
    return tuple(blocks)


def apply_beamsplitter(psi: np.ndarray, T: float) -> np.ndarray:
    """Send a two-mode pure state through the beam splitter.

    Amplitude leaving the truncated box is dropped; the caller checks the
    norm if it matters.
    """
    T = float(T)
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {T}")
    psi = np.asarray(psi, dtype=complex)
    N = psi.shape[0] - 1
    out = np.zeros_like(psi)
    blocks = _bs_blocks(T, N)
    for K in range(2 * N + 1):
        lo, hi = max(0, K - N), min(K, N)
        k = np.arange(lo, hi + 1)
        vec = psi[k, K - k]
        if not np.any(vec):
            continue
        full = np.zeros(K + 1, dtype=complex)
        full[k] = vec
        res = blocks[K] @ full
        out[k, K - k] = res[k]
    return out


def beamsplitter_fock(T: float, N: int) -> np.ndarray:
    """Dense beam-splitter matrix on the truncated ``(N+1)^2`` space.

    Index ``n1*(N+1) + n2``.  Exactly unitary on the blocks with total
    photon number ``<= N``; higher blocks are cut by the truncation.
    """
    T = float(T)
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {T}")
    d = N + 1
    U = np.zeros((d * d, d * d))
    for K, blk in enumerate(_bs_blocks(T, N)):
        k = np.arange(max(0, K - N), min(K, N) + 1)
        idx = k * d + (K - k)
        U[np.ix_(idx, idx)] = blk[np.ix_(k, k)]
    return U


def gaussian_output_fock(r1, r2, T: float, N: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Two-mode pure state after the beam splitter, ``psi[n1, n2]``."""
    psi = apply_beamsplitter(two_mode_input(r1, r2, N), T)
    return _check_norm(psi.ravel(), f"beam-splitter output (N={N})").reshape(psi.shape)


# ---------------------------------------------------------------------------
# loss
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def loss_kraus(loss: float, N: int) -> np.ndarray:
    """Kraus operators ``K_k`` of a pure-loss channel, shape ``(N+1, N+1, N+1)``.

    ``K_k = sum_n sqrt(C(n,k)) eta^((n-k)/2) loss^(k/2) |n-k><n|``.
    """
    loss = float(loss)
    if not 0.0 <= loss <= 1.0:
        raise ValueError(f"loss must lie in [0, 1], got {loss}")
    eta = 1.0 - loss
    K = np.zeros((N + 1, N + 1, N + 1))
    for k in range(N + 1):
        for n in range(k, N + 1):
            K[k, n - k, n] = math.sqrt(math.comb(n, k) * eta ** (n - k) * loss**k)
    K.setflags(write=False)
    return K


def apply_loss(rho, loss: float):
    """Pure-loss channel on a single-mode density matrix."""
    if not loss:
        return rho
    wrap = isinstance(rho, FockDensityMatrix)
    m = rho.matrix if wrap else np.asarray(rho, dtype=complex)
    K = loss_kraus(float(loss), m.shape[0] - 1)
    out = np.sum(K @ m @ K.transpose(0, 2, 1), axis=0)
    return FockDensityMatrix(out) if wrap else out


# ---------------------------------------------------------------------------
# heralding
# ---------------------------------------------------------------------------


def _projection_rows(detector: str, n: int, N: int) -> np.ndarray:
    if detector == ONOFF:
        return np.arange(1, N + 1)
    if detector == PNRD:
        return np.array([n])
    raise ValueError(f"unknown detector {detector!r}")


def _trigger_branches(psi: np.ndarray, trigger_loss: float) -> np.ndarray:
    """``phi[k, m, n2] = sum_n1 K_k[m, n1] psi[n1, n2]`` (one branch per Kraus op)."""
    if not trigger_loss:
        return psi[None]
    K = loss_kraus(float(trigger_loss), psi.shape[0] - 1)
    return K @ psi


def herald_fock(state, detector: str = ONOFF, losses: LossBudget | None = None, n: int = 1):
    """Herald the signal mode on a trigger-mode detection event.

    Parameters
    ----------
    state:
        Two-mode pure state ``psi[n1, n2]`` or density tensor
        ``rho[n1, n2, m1, m2]``.
    detector:
        ``"onoff"`` projects on ``I - |0><0|``, ``"pnrd"`` on ``|n><n|``.
    losses:
        Trigger loss acts on mode 1 before the projection; signal loss on the
        heralded state; ``fake`` mixes in the unconditioned signal state.

    Returns
    -------
    (FockDensityMatrix, float)
        Normalised heralded state and herald probability.
    """
    losses = losses or LossBudget()
    state = np.asarray(state, dtype=complex)
    N = state.shape[0] - 1
    rows = _projection_rows(detector, n, N)
    if state.ndim == 2:
        phi = _trigger_branches(state, losses.trigger)
        sel = phi[:, rows, :].reshape(-1, N + 1)
        rho2 = sel.T @ sel.conj()
        reduced = state.T @ state.conj()
    elif state.ndim == 4:
        rho = state
        if losses.trigger:
            K = loss_kraus(float(losses.trigger), N)
            rho = np.einsum("kai,ijbl,kcb->ajcl", K, rho, K, optimize=True)
        rho2 = sum(rho[a, :, a, :] for a in rows)
        reduced = np.einsum("ajal->jl", state)
    else:
        raise ValueError("state must be psi[n1, n2] or rho[n1, n2, m1, m2]")
    prob = float(np.trace(rho2).real)
    if prob <= 1e-14:
        raise HeraldError("herald probability is zero")
    out = rho2 / prob
    if losses.signal:
        out = apply_loss(out, losses.signal)
    if losses.fake:
        red = reduced / np.trace(reduced).real
        out = (1 - losses.fake) * out + losses.fake * apply_loss(red, losses.signal)
    return FockDensityMatrix(out), prob


def herald_spec_fock(spec: HeraldSpec, N: int = DEFAULT_CUTOFF):
    """Convenience wrapper: build the state for ``spec`` and herald it."""
    psi = gaussian_output_fock(spec.r1, spec.r2, spec.T, N)
    return herald_fock(psi, spec.detector, spec.losses, spec.n)


def trigger_photon_distribution(state, trigger_loss: float = 0.0) -> np.ndarray:
    """Relative probabilities ``P'_n`` of ``n >= 1`` photons at the detector.

    Index ``i`` of the returned array holds ``P'_{i+1}``.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 2:
        phi = _trigger_branches(state, trigger_loss)
        pn = np.einsum("kmj,kmj->m", phi, phi.conj()).real
    else:
        rho = state
        if trigger_loss:
            K = loss_kraus(float(trigger_loss), state.shape[0] - 1)
            rho = np.einsum("kai,ijbl,kcb->ajcl", K, rho, K, optimize=True)
        pn = np.einsum("ajaj->a", rho).real
    pon = pn[1:].sum()
    if pon <= 0:
        raise HeraldError("no photons reach the detector")
    return pn[1:] / pon


# ---------------------------------------------------------------------------
# phase space and figures of merit
# ---------------------------------------------------------------------------


def wigner_from_density(rho, xs, ps, check_boundary: bool = True, use_numba=None) -> np.ndarray:
    """Wigner function of a single-mode density matrix, indexed ``[ix, ip]``.

    Warns when the grid boundary carries ``|W| > 1e-6`` (grid too small for
    the state).
    """
    m = rho.matrix if isinstance(rho, FockDensityMatrix) else np.asarray(rho, dtype=complex)
    w = _kernels.wigner_fock_grid(m, xs, ps, use_numba=use_numba)
    if check_boundary and w.shape[0] > 2 and w.shape[1] > 2:
        edge = max(
            np.abs(w[0]).max(), np.abs(w[-1]).max(), np.abs(w[:, 0]).max(), np.abs(w[:, -1]).max()
        )
        if edge > 1e-6:
            warnings.warn(
                f"Wigner function reaches {edge:.1e} on the grid boundary", RuntimeWarning, stacklevel=2
            )
    return w


def fidelity(rho, target) -> float:
    """Overlap ``<psi|rho|psi>`` with a pure target.

    ``target`` is a :class:`SqueezedFockState` or a ket.
    """
    m = rho.matrix if isinstance(rho, FockDensityMatrix) else np.asarray(rho, dtype=complex)
    N = m.shape[0] - 1
    if isinstance(target, SqueezedFockState):
        psi = squeezed_fock_state(target.r_out, target.n, N)
    else:
        psi = np.asarray(target, dtype=complex)
        if psi.shape[0] != N + 1:
            raise ValueError("target ket and density matrix have different cutoffs")
    f = float(np.vdot(psi, m @ psi).real)
    return min(max(f, 0.0), 1.0)


def quadrature_moments(psi_or_rho) -> tuple:
    """``(<x^2>, <p^2>)`` of a single-mode ket or density matrix."""
    m = np.asarray(psi_or_rho, dtype=complex)
    if m.ndim == 1:
        m = np.outer(m, m.conj())
    d = m.shape[0]
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    x = (a + a.T) / math.sqrt(2)
    p = (a - a.T) / (1j * math.sqrt(2))
    return float(np.trace(m @ x @ x).real), float(np.trace(m @ p @ p).real)


def two_mode_covariance(psi: np.ndarray) -> np.ndarray:
    """Quadrature covariance (x1, x2, p1, p2) of a zero-mean two-mode ket.

    Mode-1 operators act on the rows of ``psi[n1, n2]`` and mode-2 operators
    on its columns, so no two-mode operator is ever built.
    """
    psi = np.asarray(psi, dtype=complex)
    d = psi.shape[0]
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    x = (a + a.T) / math.sqrt(2)
    p = (a - a.T) / (1j * math.sqrt(2))
    single = [(x, 0), (x, 1), (p, 0), (p, 1)]

    def act(op, mode, v):
        return op @ v if mode == 0 else v @ op.T

    cov = np.empty((4, 4))
    for i, (oi, mi) in enumerate(single):
        for j, (oj, mj) in enumerate(single):
            ij = act(oi, mi, act(oj, mj, psi))
            ji = act(oj, mj, act(oi, mi, psi))
            cov[i, j] = 0.5 * np.vdot(psi, ij + ji).real
    return cov
