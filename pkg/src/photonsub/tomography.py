"""Homodyne measurement chain: temporal mode, synthetic data, MLE, estimators.

Quadrature conventions match the rest of the package (hbar = 1, vacuum
variance 1/2).  The quadrature measured at LO phase ``theta`` is
``x cos(theta) + p sin(theta)``.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import _kernels
from .fock_oracle import FockDensityMatrix, squeezed_single_photon_fock
from .gaussian_core import r_to_db
from .heralding import DEFAULT_GRID, PhaseSpaceGrid, QualityMetric, SqueezedFockState, quality_metric

log = logging.getLogger(__name__)

DEFAULT_PHASES = np.deg2rad(np.arange(12) * 15.0)
DEFAULT_SAMPLES = 5000
DUTY_CYCLE = 0.13
BIN_RANGE = 6.0
N_BINS = 200


class FitError(ValueError):
    """Raised when a squeezing fit has nothing to lock onto."""


# ---------------------------------------------------------------------------
# temporal mode
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TemporalMode:
    """Wave-packet mode ``f(t) ~ exp(2 pi g1 (t-t0)) - exp(2 pi g2 (t-t0))`` for ``t <= t0``."""

    gamma1: float = 2.8e6
    gamma2: float = 80e6
    t0: float = 0.0

    def __post_init__(self):
        if not 0 < self.gamma1 < self.gamma2:
            raise ValueError("need 0 < gamma1 < gamma2")

    @property
    def normalization(self) -> float:
        """Factor that makes ``int f^2 dt = 1``."""
        a, b = 2 * math.pi * self.gamma1, 2 * math.pi * self.gamma2
        norm2 = 1 / (2 * a) + 1 / (2 * b) - 2 / (a + b)
        return 1.0 / math.sqrt(norm2)

    @property
    def peak_time(self) -> float:
        """Maximum of ``f``: solves ``g1 exp(2 pi g1 tau) = g2 exp(2 pi g2 tau)``."""
        g1, g2 = self.gamma1, self.gamma2
        return self.t0 + math.log(g2 / g1) / (2 * math.pi * (g1 - g2))

    def support(self, tail: float = 1e-10) -> tuple:
        """Time window outside of which ``|f|^2`` carries less than ``tail``."""
        return (self.t0 + math.log(tail) / (4 * math.pi * self.gamma1), self.t0)

    def __call__(self, t):
        return temporal_mode_value(self, t)


def temporal_mode_value(mode: TemporalMode, t):
    t = np.asarray(t, dtype=float)
    tau = np.minimum(t - mode.t0, 0.0)
    f = np.exp(2 * math.pi * mode.gamma1 * tau) - np.exp(2 * math.pi * mode.gamma2 * tau)
    out = np.where(t > mode.t0, 0.0, mode.normalization * f)
    return float(out) if out.ndim == 0 else out


def extract_quadrature(waveform, times, mode: TemporalMode) -> np.ndarray | float:
    """Project sampled homodyne waveform(s) onto the temporal mode.

    ``waveform`` has shape ``(..., len(times))``; ``times`` must be evenly
    spaced.  Warns if the sampled window misses part of the mode.
    """
    times = np.asarray(times, dtype=float)
    dt = float(times[1] - times[0])
    f = temporal_mode_value(mode, times)
    covered = float(np.sum(f**2) * dt)
    if covered < 1 - 1e-3:
        warnings.warn(
            f"sampling window covers only {covered:.4f} of the temporal mode", RuntimeWarning, stacklevel=2
        )
    out = np.asarray(waveform, dtype=float) @ f * dt
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# synthetic homodyne data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TomographyDataset:
    phases: np.ndarray
    samples: np.ndarray  # shape (n_phases, n_per_phase)
    seed: int | None = None

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=float)
        sm = np.asarray(self.samples, dtype=float)
        if sm.ndim != 2 or sm.shape[0] != ph.size:
            raise ValueError("samples must have shape (n_phases, n_per_phase)")
        object.__setattr__(self, "phases", ph)
        object.__setattr__(self, "samples", sm)

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    def write_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["phase_rad", "x"])
            for th, row in zip(self.phases, self.samples):
                for x in row:
                    w.writerow([repr(float(th)), repr(float(x))])

    @classmethod
    def read_csv(cls, path) -> "TomographyDataset":
        by_phase: dict = {}
        with open(path, newline="") as fh:
            rows = csv.reader(line for line in fh if not line.startswith("#"))
            header = next(rows)
            if header != ["phase_rad", "x"]:
                raise ValueError(f"unexpected header {header}")
            for th, x in rows:
                by_phase.setdefault(float(th), []).append(float(x))
        lengths = {len(v) for v in by_phase.values()}
        if len(lengths) != 1:
            raise ValueError("ragged dataset: phases have different sample counts")
        phases = np.array(list(by_phase))
        return cls(phases, np.array([by_phase[p] for p in phases]))


def quadrature_distribution(rho, theta: float, xs) -> np.ndarray:
    """Marginal density of the quadrature at LO phase ``theta``."""
    m = rho.matrix if isinstance(rho, FockDensityMatrix) else np.asarray(rho, dtype=complex)
    d = m.shape[0]
    psi = _kernels.hermite_functions(d, xs)
    # <n|x_theta> = exp(i n theta) psi_n(x)
    v = psi * np.exp(1j * np.arange(d) * theta)[:, None]
    return np.einsum("mi,mn,ni->i", v.conj(), m, v).real


def synthesize_homodyne(
    rho,
    phases=DEFAULT_PHASES,
    n_per_phase: int = DEFAULT_SAMPLES,
    seed: int = 0,
    x_max: float = 8.0,
    n_grid: int = 4001,
) -> TomographyDataset:
    """Draw homodyne samples from the exact phase-rotated quadrature marginals.

    Inverse-CDF sampling on a dense grid with a Philox counter-based
    generator, so a given seed always reproduces the dataset.
    """
    m = rho.matrix if isinstance(rho, FockDensityMatrix) else np.asarray(rho, dtype=complex)
    tr = np.trace(m).real
    if abs(tr - 1) > 1e-6:
        raise ValueError(f"state is not normalised (trace {tr:.6f})")
    rng = np.random.Generator(np.random.Philox(seed))
    xs = np.linspace(-x_max, x_max, n_grid)
    out = np.empty((len(phases), n_per_phase))
    for i, th in enumerate(phases):
        pdf = quadrature_distribution(m, float(th), xs)
        if pdf.min() < -1e-8:
            raise ValueError(f"negative quadrature density {pdf.min():.2e}: invalid state")
        pdf = np.clip(pdf, 0.0, None)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(xs))])
        cdf /= cdf[-1]
        u = rng.random(n_per_phase)
        out[i] = np.interp(u, cdf, xs)
    return TomographyDataset(np.asarray(phases, dtype=float), out, seed)


# ---------------------------------------------------------------------------
# maximum likelihood reconstruction
# ---------------------------------------------------------------------------


@dataclass
class MLEResult:
    rho: FockDensityMatrix
    iterations: int
    converged: bool
    loglik: list = field(default_factory=list)


def _projectors(data: TomographyDataset, dim: int, n_bins: int, x_range: float):
    edges = np.linspace(-x_range, x_range, n_bins + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    dx = edges[1] - edges[0]
    psi = _kernels.hermite_functions(dim, centers)  # (dim, n_bins)
    rows, counts = [], []
    for th, xs in zip(data.phases, data.samples):
        c, _ = np.histogram(xs, bins=edges)
        keep = c > 0
        v = (psi[:, keep] * np.exp(1j * np.arange(dim) * th)[:, None]).T
        rows.append(v)
        counts.append(c[keep])
    return np.vstack(rows), np.concatenate(counts).astype(float), dx


def mle_reconstruct(
    data: TomographyDataset,
    N: int = 10,
    max_iter: int = 20000,
    tol: float = 1e-11,
    n_bins: int = N_BINS,
    x_range: float = BIN_RANGE,
) -> MLEResult:
    """Iterative ``R rho R`` maximum-likelihood reconstruction.

    Samples are histogrammed per phase (``n_bins`` over ``[-x_range,
    x_range]``) and each occupied bin becomes a quadrature projector.  The
    loop stops when the mean log-likelihood improves by less than ``tol``.
    """
    if data.n_samples == 0:
        raise ValueError("empty dataset")
    dim = N + 1
    V, counts, dx = _projectors(data, dim, n_bins, x_range)
    freq = counts / counts.sum()
    rho = np.eye(dim, dtype=complex) / dim
    history = []
    prev = -np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        probs = np.einsum("ki,ij,kj->k", V.conj(), rho, V).real * dx
        probs = np.maximum(probs, 1e-300)
        ll = float(freq @ np.log(probs))
        history.append(ll)
        if ll - prev < tol and it > 1:
            converged = True
            break
        prev = ll
        R = (V.T * (freq / probs * dx)) @ V.conj()
        rho = R @ rho @ R
        rho = 0.5 * (rho + rho.conj().T)
        rho /= np.trace(rho).real
    else:
        log.warning("MLE stopped after %d iterations without converging", max_iter)
    return MLEResult(FockDensityMatrix(rho), it, converged, history)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def density_quality(rho: FockDensityMatrix, grid: PhaseSpaceGrid = DEFAULT_GRID) -> QualityMetric:
    """W00 of a density matrix (Wigner minimum if the origin is negative)."""
    return quality_metric(rho, grid)


def squeezed_photon_overlap(rho: FockDensityMatrix, r: float) -> float:
    """``<1|S(r)^dag rho S(r)|1>`` with ``S(r)|1>`` cut to the cutoff of ``rho``."""
    psi = squeezed_single_photon_fock(r, rho.dim - 1, check=False)
    return float(np.vdot(psi, rho.matrix @ psi).real)


def fit_output_squeezing(state, r_bounds=(-1.2, 1.2)) -> float:
    """Squeezing of the pure squeezed single photon closest to ``state``.

    For a density matrix the overlap ``<1|S^dag rho S|1>`` is maximised,
    which is the same as a least-squares fit of the Wigner function on an
    unbounded grid.  A ``(xs, W)`` tuple (square grid, ``W[ix, ip]``) is
    fitted by least squares directly.  Returns ``r``; use
    :func:`photonsub.gaussian_core.r_to_db` for dB.
    """
    if isinstance(state, FockDensityMatrix):
        def cost(r):
            return -squeezed_photon_overlap(state, r)

        grid = np.linspace(*r_bounds, 121)
        vals = np.array([cost(r) for r in grid])
        if -vals.max() < 1e-6 or np.ptp(vals) < 1e-9:
            raise FitError("no single-photon component to fit")
    else:
        xs, W = state
        xs = np.asarray(xs, dtype=float)
        X, P = np.meshgrid(xs, xs, indexing="ij")
        W = np.asarray(W, dtype=float)
        area = (xs[1] - xs[0]) ** 2

        def cost(r):
            return float(np.sum((W - SqueezedFockState(r)(X, P)) ** 2))

        grid = np.linspace(*r_bounds, 121)
        vals = np.array([cost(r) for r in grid])
        # 2 pi * int W W_r is the overlap with S(r)|1>, zero for even states
        overlap = [2 * math.pi * area * np.sum(W * SqueezedFockState(r)(X, P)) for r in grid[::10]]
        if max(overlap) < 1e-6:
            raise FitError("fit landscape is flat: no single-photon component")
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(cost, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return float(res.x)


def fit_output_squeezing_db(state, **kw) -> float:
    return r_to_db(fit_output_squeezing(state, **kw))


def fidelity_from_w00(w00: float) -> float:
    """Single-photon fidelity implied by W(0,0) when three-photon events are negligible."""
    if not -1 / math.pi - 1e-12 <= w00 <= 1 / math.pi + 1e-12:
        raise ValueError(f"W(0,0) = {w00} is outside [-1/pi, 1/pi]")
    return 0.5 * (1.0 - math.pi * w00)


@dataclass(frozen=True)
class CalibrationConstant:
    """Counts per second per unit click probability."""

    C: float

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("calibration constant must be positive")

    def rate(self, p_on: float, duty_corrected: bool = False) -> float:
        r = self.C * p_on
        return r / DUTY_CYCLE if duty_corrected else r


def fit_calibration(pairs) -> CalibrationConstant:
    """Average of measured-rate / ``P_on`` ratios."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one (P_on, rate) pair")
    ratios = []
    for p_on, rate in pairs:
        if p_on <= 0 or rate <= 0:
            raise ValueError("P_on and rates must be positive")
        ratios.append(rate / p_on)
    return CalibrationConstant(math.fsum(ratios) / len(ratios))


def monte_carlo_spread(
    rho,
    n_repeats: int = 10,
    n_per_phase: int = DEFAULT_SAMPLES,
    seed: int = 0,
    N: int = 10,
    phases=DEFAULT_PHASES,
    grid: PhaseSpaceGrid = DEFAULT_GRID,
) -> dict:
    """Spread of the reconstructed W00 over independent synthetic datasets.

    Stands in for Fisher-information error bars.  Dataset ``k`` uses seed
    ``seed + k``.  Returns mean, standard deviation and the raw values.
    """
    if n_repeats < 2:
        raise ValueError("need at least two repeats for a spread")
    vals = []
    for k in range(n_repeats):
        data = synthesize_homodyne(rho, phases, n_per_phase, seed + k)
        vals.append(density_quality(mle_reconstruct(data, N=N).rho, grid).w00)
    vals = np.array(vals)
    return {"mean": float(vals.mean()), "std": float(vals.std(ddof=1)), "values": vals}
