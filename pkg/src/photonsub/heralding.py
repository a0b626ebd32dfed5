"""Heralded states from a detector click on the trigger mode.

The trigger mode (mode 1) of the beam-splitter output goes to either an
on/off detector or a photon-number-resolving detector (PNRD).  With an
on/off detector the heralded Wigner function of the signal mode is a signed
sum of zero-mean Gaussians, which is what :class:`SignedGaussianMixture`
stores.  With an ideal PNRD and no loss, one detected photon heralds a pure
squeezed single photon.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import _kernels
from .gaussian_core import (
    VACUUM_VARIANCE,
    as_r,
    db_to_r,
    gaussian_output,
    loss_channel,
    r_to_db,
    sigma_blocks,
)

ONOFF = "onoff"
PNRD = "pnrd"


class HeraldError(ValueError):
    """Raised when a herald is impossible or numerically degenerate."""


class GridTooCoarseError(ValueError):
    """Raised when the Wigner minimum sits on the edge of the evaluation grid."""


@dataclass(frozen=True)
class LossBudget:
    """Signal and trigger channel losses plus the fake-trigger admixture."""

    signal: float = 0.0
    trigger: float = 0.0
    fake: float = 0.0

    def __post_init__(self):
        for name in ("signal", "trigger"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} loss must lie in [0, 1], got {val}")
        if not 0.0 <= self.fake < 1.0:
            raise ValueError(f"fake trigger fraction must lie in [0, 1), got {self.fake}")

    @classmethod
    def experiment(cls) -> "LossBudget":
        """Loss budget of the reference CW setup.

        About 25% on the signal path in total, of which ~5% are fake
        triggers, and 90% on the trigger path.
        """
        return cls(signal=0.20, trigger=0.90, fake=0.05)

    @property
    def is_lossless(self) -> bool:
        return self.signal == 0.0 and self.trigger == 0.0 and self.fake == 0.0


@dataclass(frozen=True)
class HeraldSpec:
    """Generation parameters: input squeezing, beam splitter, detector, losses.

    ``r1`` is injected into the port that mostly transmits to the signal
    mode when ``T`` is large; ``T`` is the beam-splitter transmissivity.
    """

    r1: float
    r2: float
    T: float
    detector: str = ONOFF
    n: int = 1
    trigger_loss: float = 0.0
    signal_loss: float = 0.0
    fake_trigger_fraction: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r1", as_r(self.r1))
        object.__setattr__(self, "r2", as_r(self.r2))
        if not 0.0 < self.T < 1.0:
            raise ValueError(f"transmissivity must lie in (0, 1), got {self.T}")
        if self.detector not in (ONOFF, PNRD):
            raise ValueError(f"unknown detector {self.detector!r}")
        if self.n < 1:
            raise ValueError("PNRD photon number must be >= 1")
        # delegate range checks
        self.losses

    @classmethod
    def from_db(cls, r1_db: float, r2_db: float, T: float, **kw) -> "HeraldSpec":
        return cls(db_to_r(r1_db), db_to_r(r2_db), T, **kw)

    @property
    def losses(self) -> LossBudget:
        return LossBudget(self.signal_loss, self.trigger_loss, self.fake_trigger_fraction)

    @property
    def is_lossless(self) -> bool:
        return self.losses.is_lossless

    def with_losses(self, losses: LossBudget) -> "HeraldSpec":
        return replace(
            self,
            signal_loss=losses.signal,
            trigger_loss=losses.trigger,
            fake_trigger_fraction=losses.fake,
        )

    def lossless(self) -> "HeraldSpec":
        return self.with_losses(LossBudget())


@dataclass(frozen=True)
class SignedGaussianMixture:
    """Normalised signed sum of zero-mean, x/p-diagonal single-mode Gaussians.

    Component ``k`` has weight ``weights[k]`` and covariance
    ``diag(var_x[k], var_p[k])``.  ``p_on`` optionally records the herald
    probability that produced the state.
    """

    weights: tuple
    var_x: tuple
    var_p: tuple
    p_on: float | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.weights)
        if not (len(self.var_x) == len(self.var_p) == n) or n == 0:
            raise ValueError("mismatched component lists")
        for a, b in zip(self.var_x, self.var_p):
            if not (a > 0 and b > 0):
                raise HeraldError(f"component covariance not positive definite: ({a}, {b})")

    @property
    def components(self):
        """``(weight, 2x2 covariance)`` pairs."""
        return [
            (w, np.diag([a, b])) for w, a, b in zip(self.weights, self.var_x, self.var_p)
        ]

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weights)

    def __call__(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        out = np.zeros(np.broadcast(x, p).shape)
        for w, a, b in zip(self.weights, self.var_x, self.var_p):
            out = out + w / (2 * math.pi * math.sqrt(a * b)) * np.exp(-0.5 * x**2 / a - 0.5 * p**2 / b)
        return float(out) if out.ndim == 0 else out

    def origin(self) -> float:
        return math.fsum(
            w / (2 * math.pi * math.sqrt(a * b))
            for w, a, b in zip(self.weights, self.var_x, self.var_p)
        )

    def grid(self, xs, ps, use_numba=None) -> np.ndarray:
        """Wigner values indexed ``[ix, ip]``."""
        return _kernels.mixture_grid(
            self.weights, self.var_x, self.var_p, xs, ps, use_numba=use_numba
        )

    def with_loss(self, loss: float) -> "SignedGaussianMixture":
        """Apply a pure-loss channel to every component."""
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"loss must lie in [0, 1], got {loss}")
        eta = 1.0 - loss
        return replace(
            self,
            var_x=tuple(eta * a + loss * VACUUM_VARIANCE for a in self.var_x),
            var_p=tuple(eta * b + loss * VACUUM_VARIANCE for b in self.var_p),
        )

    def mixed_with(self, other: "SignedGaussianMixture", fraction: float) -> "SignedGaussianMixture":
        """Return ``(1 - fraction) * self + fraction * other``."""
        if fraction == 0.0:
            return self
        return replace(
            self,
            weights=tuple((1 - fraction) * w for w in self.weights)
            + tuple(fraction * w for w in other.weights),
            var_x=self.var_x + other.var_x,
            var_p=self.var_p + other.var_p,
        )

    def widest_std(self) -> float:
        return math.sqrt(max(max(self.var_x), max(self.var_p)))

    def to_dict(self) -> dict:
        d = {
            "components": [
                {"weight": w, "cov": [[a, 0.0], [0.0, b]]}
                for w, a, b in zip(self.weights, self.var_x, self.var_p)
            ]
        }
        if self.p_on is not None:
            d["p_on"] = self.p_on
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "SignedGaussianMixture":
        ws, ax, bp = [], [], []
        for comp in d["components"]:
            cov = np.asarray(comp["cov"], dtype=float)
            if abs(cov[0, 1]) > 0 or abs(cov[1, 0]) > 0:
                raise ValueError("only x/p-diagonal component covariances are supported")
            ws.append(float(comp["weight"]))
            ax.append(float(cov[0, 0]))
            bp.append(float(cov[1, 1]))
        return cls(tuple(ws), tuple(ax), tuple(bp), p_on=d.get("p_on"))

    @classmethod
    def from_json(cls, text: str) -> "SignedGaussianMixture":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SqueezedFockState:
    """Pure squeezed Fock state ``S(r_out)|n>``; only ``n = 1`` in practice."""

    r_out: float
    n: int = 1
    p_herald: float | None = field(default=None, compare=False)

    @property
    def db(self) -> float:
        return r_to_db(self.r_out)

    def __call__(self, x, p):
        x = np.asarray(x, dtype=float) * math.exp(self.r_out)
        p = np.asarray(p, dtype=float) * math.exp(-self.r_out)
        rr = x**2 + p**2
        # Laguerre L_n(2 rr) by upward recurrence
        u = 2 * rr
        l_prev, l_cur = np.ones_like(u), 1 - u
        if self.n == 0:
            l_cur = l_prev
        for k in range(1, self.n):
            l_prev, l_cur = l_cur, ((2 * k + 1 - u) * l_cur - k * l_prev) / (k + 1)
        out = (-1) ** self.n / math.pi * np.exp(-rr) * l_cur
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class QualityMetric:
    w00: float
    p_on: float
    w_origin: float
    argmin: tuple = (0.0, 0.0)

    @property
    def p_off(self) -> float:
        return 1.0 - self.p_on


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Square ``points x points`` grid over ``[-extent, extent]^2``."""

    extent: float = 5.0
    points: int = 201

    def __post_init__(self):
        if self.extent <= 0 or self.points < 3:
            raise ValueError("grid needs a positive extent and at least 3 points")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.points)

    @property
    def step(self) -> float:
        return 2 * self.extent / (self.points - 1)


DEFAULT_GRID = PhaseSpaceGrid()


# ---------------------------------------------------------------------------
# lossless closed forms
# ---------------------------------------------------------------------------


def output_squeezing(r1, r2, T: float) -> float:
    """Squeezing parameter of the PNRD-heralded single photon."""
    T = float(T)
    if not 0.0 < T < 1.0:
        raise ValueError(f"transmissivity must lie in (0, 1), got {T}")
    r1, r2 = as_r(r1), as_r(r2)
    R = 1.0 - T
    sx11 = 0.5 * (R * math.exp(-2 * r1) + T * math.exp(-2 * r2))
    sp11 = 0.5 * (R * math.exp(2 * r1) + T * math.exp(2 * r2))
    return r1 + r2 + 0.5 * math.log((2 * sx11 + 1) / (2 * sp11 + 1))


def p_off(sigma_x11: float, sigma_p11: float) -> float:
    """No-click probability of a zero-mean, x/p-diagonal trigger mode."""
    if sigma_x11 <= 0 or sigma_p11 <= 0:
        raise ValueError("variances must be positive")
    return 2.0 / math.sqrt((2 * sigma_p11 + 1) * (2 * sigma_x11 + 1))


def p_off_general(sigma1: np.ndarray) -> float:
    """Vacuum projection of a single-mode Gaussian with covariance ``sigma1``."""
    sigma1 = np.asarray(sigma1, dtype=float)
    return 1.0 / math.sqrt(np.linalg.det(sigma1 + VACUUM_VARIANCE * np.eye(2)))


def w_out_origin(sigma_x11: float, sigma_p11: float) -> float:
    """Heralded Wigner value at the origin for a lossless on/off herald."""
    poff = p_off(sigma_x11, sigma_p11)
    if poff >= 1.0 - 1e-15:
        raise HeraldError("no-click probability is 1: nothing to herald")
    return (1.0 / (2 * math.sqrt(sigma_p11 * sigma_x11)) - poff) / (math.pi * (1.0 - poff))


def _trigger_blocks(spec: HeraldSpec):
    vg = gaussian_output(spec.r1, spec.r2, spec.T)
    if spec.trigger_loss:
        vg = loss_channel(vg, 0, spec.trigger_loss)
    return sigma_blocks(vg)


def click_probability(spec: HeraldSpec) -> float:
    """On/off click probability including trigger-path loss."""
    b = _trigger_blocks(spec)
    return 1.0 - p_off(b.sigma_x[0, 0], b.sigma_p[0, 0])


def reduced_signal_state(spec: HeraldSpec) -> SignedGaussianMixture:
    """Unconditioned signal-mode state (what a fake trigger heralds)."""
    b = _trigger_blocks(spec)
    return SignedGaussianMixture((1.0,), (b.sigma_x[1, 1],), (b.sigma_p[1, 1],))


def herald_onoff(spec: HeraldSpec) -> SignedGaussianMixture:
    """Signal-mode Wigner function after an on/off click on the trigger mode.

    ``W = (W_red - P_off W_cond) / (1 - P_off)``, where ``W_cond`` is the
    signal state conditioned on vacuum in the trigger mode.  Signal loss is
    applied to each component and fake triggers mix in the unconditioned
    signal state.
    """
    b = _trigger_blocks(spec)
    out = []
    for s in (b.sigma_x, b.sigma_p):
        a, c, d = s[0, 0], s[0, 1], s[1, 1]
        # 1x1 Schur complement per quadrature block
        out.append((d, d - c * c / (a + VACUUM_VARIANCE)))
    (red_x, cond_x), (red_p, cond_p) = out
    poff = p_off(b.sigma_x[0, 0], b.sigma_p[0, 0])
    pon = 1.0 - poff
    if pon <= 1e-15:
        raise HeraldError("click probability is zero: nothing to herald")
    if cond_x <= 0 or cond_p <= 0:
        raise HeraldError("conditioned covariance is not positive definite")
    mix = SignedGaussianMixture(
        (1.0 / pon, -poff / pon), (red_x, cond_x), (red_p, cond_p), p_on=pon
    )
    if spec.signal_loss:
        mix = mix.with_loss(spec.signal_loss)
    if spec.fake_trigger_fraction:
        fake = SignedGaussianMixture((1.0,), (red_x,), (red_p,)).with_loss(spec.signal_loss)
        mix = mix.mixed_with(fake, spec.fake_trigger_fraction)
    return mix


def herald_pnrd(spec: HeraldSpec) -> SqueezedFockState:
    """Lossless single-photon PNRD herald: a pure squeezed single photon."""
    if not spec.is_lossless:
        raise ValueError(
            "closed-form PNRD herald is lossless only; use fock_oracle.herald_fock for lossy PNRD"
        )
    if spec.n != 1:
        raise ValueError("closed-form PNRD herald is derived for one detected photon")
    return SqueezedFockState(
        output_squeezing(spec.r1, spec.r2, spec.T), 1, p_herald=pnrd_click_probability(spec)
    )


def pnrd_click_probability(spec: HeraldSpec) -> float:
    """Probability that exactly one photon reaches the trigger detector.

    Overlap of the one-photon Wigner function with the (diagonal) trigger
    Gaussian, done in closed form; includes trigger loss.
    """
    b = _trigger_blocks(spec)
    a, bp = b.sigma_x[0, 0], b.sigma_p[0, 0]
    gx, gp = 1.0 / math.sqrt(2 * a + 1), 1.0 / math.sqrt(2 * bp + 1)
    # variances of the product Gaussians N(0,a) * N(0,1/2)
    vx, vp = a / (2 * a + 1), bp / (2 * bp + 1)
    return 2.0 * gx * gp * (2 * vx + 2 * vp - 1.0)


# ---------------------------------------------------------------------------
# quality metric
# ---------------------------------------------------------------------------


def quality_metric(mixture, grid: PhaseSpaceGrid = DEFAULT_GRID, p_on=None) -> QualityMetric:
    """Quality indicator: Wigner minimum if the origin is negative, else W(0,0).

    ``mixture`` is any callable Wigner function ``W(x, p)``; objects with a
    ``grid(xs, ps)`` method are evaluated through it.

    The grid minimum is polished with a local optimiser on the analytic
    mixture.  A minimum on the grid boundary raises
    :class:`GridTooCoarseError`.
    """
    if p_on is None:
        p_on = getattr(mixture, "p_on", None)
    p_on = float("nan") if p_on is None else float(p_on)
    w0 = mixture.origin() if hasattr(mixture, "origin") else float(mixture(0.0, 0.0))
    if w0 >= 0:
        return QualityMetric(w0, p_on, w0)
    axis = grid.axis
    if hasattr(mixture, "grid"):
        values = mixture.grid(axis, axis)
    else:
        X, P = np.meshgrid(axis, axis, indexing="ij")
        values = np.asarray(mixture(X, P))
    i, j = np.unravel_index(np.argmin(values), values.shape)
    last = grid.points - 1
    if i in (0, last) or j in (0, last):
        raise GridTooCoarseError(
            f"Wigner minimum at grid edge ({axis[i]:.3g}, {axis[j]:.3g}); enlarge the grid"
        )
    best = (float(values[i, j]), (float(axis[i]), float(axis[j])))
    if w0 <= best[0]:
        best = (w0, (0.0, 0.0))
    res = optimize.minimize(
        lambda z: mixture(z[0], z[1]),
        x0=np.array(best[1]),
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-14},
    )
    if res.fun < best[0]:
        best = (float(res.fun), (float(res.x[0]), float(res.x[1])))
    return QualityMetric(best[0], p_on, w0, best[1])


def herald_metrics(spec: HeraldSpec, grid: PhaseSpaceGrid = DEFAULT_GRID) -> QualityMetric:
    """``QualityMetric`` of the on/off-heralded state for ``spec``."""
    mix = herald_onoff(spec)
    return quality_metric(mix, grid, p_on=mix.p_on)
