"""Two-mode zero-mean Gaussian states in the covariance-matrix picture.

Quadratures are ordered ``(x1, x2, p1, p2)`` with hbar = 1, so the vacuum
covariance is ``I/2``.  Squeezing levels are quoted in dB as
``10*log10(exp(2r))``: positive dB squeezes the x quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

VACUUM_VARIANCE = 0.5
DB_PER_NEPER = 20.0 / math.log(10.0)

# x and p indices inside the 4-vector, per mode
X_IDX = (0, 1)
P_IDX = (2, 3)


@dataclass(frozen=True)
class SqueezingParameter:
    """Natural-log squeezing parameter ``r`` with a dB view."""

    r: float

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise ValueError(f"squeezing parameter must be finite, got {self.r!r}")

    @classmethod
    def from_db(cls, db: float) -> "SqueezingParameter":
        return cls(db_to_r(db))

    @property
    def db(self) -> float:
        return r_to_db(self.r)

    def __float__(self) -> float:
        return float(self.r)


def db_to_r(db: float) -> float:
    """Convert a squeezing level in dB to the parameter ``r``."""
    db = float(db)
    if not math.isfinite(db):
        raise ValueError(f"dB level must be finite, got {db!r}")
    return db / DB_PER_NEPER


def r_to_db(r: float) -> float:
    r = float(r)
    if not math.isfinite(r):
        raise ValueError(f"squeezing parameter must be finite, got {r!r}")
    return r * DB_PER_NEPER


def as_r(value) -> float:
    """Accept a float or a :class:`SqueezingParameter` and return ``r``."""
    if isinstance(value, SqueezingParameter):
        return value.r
    return float(value)


@dataclass(frozen=True)
class SigmaBlocks:
    sigma_x: np.ndarray
    sigma_p: np.ndarray


def input_covariance(r1, r2) -> np.ndarray:
    """Covariance of two independent squeezed vacua."""
    r1, r2 = as_r(r1), as_r(r2)
    return 0.5 * np.diag(
        [math.exp(-2 * r1), math.exp(-2 * r2), math.exp(2 * r1), math.exp(2 * r2)]
    )


def _check_transmissivity(T: float, open_interval: bool = False) -> float:
    T = float(T)
    if open_interval:
        if not 0.0 < T < 1.0:
            raise ValueError(f"transmissivity must lie in (0, 1), got {T}")
    elif not 0.0 <= T <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {T}")
    return T


def beamsplitter_matrix(T: float) -> np.ndarray:
    """4x4 symplectic matrix of a beam splitter with transmissivity ``T``.

    The same 2x2 block ``[[sqrt(R), sqrt(T)], [-sqrt(T), sqrt(R)]]`` acts on
    the x pair and on the p pair.
    """
    T = _check_transmissivity(T)
    R = 1.0 - T
    b = np.array([[math.sqrt(R), math.sqrt(T)], [-math.sqrt(T), math.sqrt(R)]])
    u = np.zeros((4, 4))
    u[:2, :2] = b
    u[2:, 2:] = b
    return u


def symplectic_form() -> np.ndarray:
    """Symplectic form for the ``(x1, x2, p1, p2)`` ordering."""
    return np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


def is_symplectic(u: np.ndarray, atol: float = 1e-12) -> bool:
    omega = symplectic_form()
    return bool(np.allclose(u @ omega @ u.T, omega, atol=atol))


def propagate(v0: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Return ``u @ v0 @ u.T``, symmetrised against round-off."""
    u = np.asarray(u, dtype=float)
    if not is_symplectic(u, atol=1e-10):
        raise ValueError("transformation is not symplectic")
    v = u @ np.asarray(v0, dtype=float) @ u.T
    return 0.5 * (v + v.T)


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix (vacuum gives 1/2)."""
    ev = np.linalg.eigvals(1j * symplectic_form() @ np.asarray(v, dtype=float))
    return np.sort(np.abs(ev.real))[::2]


def is_physical(v: np.ndarray, tol: float = 1e-10) -> bool:
    """Symmetric, positive definite and above the uncertainty bound."""
    v = np.asarray(v, dtype=float)
    if not np.allclose(v, v.T, atol=tol):
        return False
    if np.linalg.eigvalsh(v).min() <= 0:
        return False
    return bool(symplectic_eigenvalues(v).min() >= VACUUM_VARIANCE - tol)


def sigma_blocks(vg: np.ndarray, tol: float = 1e-12) -> SigmaBlocks:
    """Split a covariance without x-p correlations into its x and p blocks."""
    vg = np.asarray(vg, dtype=float)
    cross = vg[:2, 2:]
    if np.max(np.abs(cross)) > tol:
        raise ValueError(
            f"x-p cross covariance {np.max(np.abs(cross)):.3e} exceeds {tol:.1e}; "
            "state is not block diagonal"
        )
    return SigmaBlocks(vg[:2, :2].copy(), vg[2:, 2:].copy())


def gaussian_wigner(v: np.ndarray, q) -> np.ndarray | float:
    """Two-mode Gaussian Wigner function at phase-space point(s) ``q``.

    ``q`` may be a 4-vector or an array of shape ``(..., 4)``.  The
    prefactor ``1/(4 pi^2 sqrt(det V))`` reduces to ``1/pi^2`` for pure
    states.
    """
    v = np.asarray(v, dtype=float)
    det = np.linalg.det(v)
    if det <= 0 or not np.isfinite(det):
        raise np.linalg.LinAlgError("covariance matrix is singular")
    vinv = np.linalg.inv(v)
    q = np.asarray(q, dtype=float)
    quad = np.einsum("...i,ij,...j->...", q, vinv, q)
    out = np.exp(-0.5 * quad) / (4.0 * math.pi**2 * math.sqrt(det))
    return float(out) if out.ndim == 0 else out


def loss_channel(v: np.ndarray, mode: int, loss: float) -> np.ndarray:
    """Pure-loss channel with fractional loss ``loss`` on ``mode`` (0 or 1).

    Variances of the mode contract toward the vacuum value and its
    correlations with the other mode scale by ``sqrt(1 - loss)``.
    """
    loss = float(loss)
    if not 0.0 <= loss <= 1.0:
        raise ValueError(f"loss must lie in [0, 1], got {loss}")
    if mode not in (0, 1):
        raise ValueError(f"mode must be 0 or 1, got {mode}")
    eta = 1.0 - loss
    scale = np.ones(4)
    scale[X_IDX[mode]] = scale[P_IDX[mode]] = math.sqrt(eta)
    out = np.asarray(v, dtype=float) * np.outer(scale, scale)
    for i in (X_IDX[mode], P_IDX[mode]):
        out[i, i] += loss * VACUUM_VARIANCE
    return out


def gaussian_output(r1, r2, T: float) -> np.ndarray:
    """Covariance after mixing two squeezed vacua on a beam splitter."""
    return propagate(input_covariance(r1, r2), beamsplitter_matrix(T))
