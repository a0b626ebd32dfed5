"""Quality versus rate trade-off for PS and GPS with an on/off detector.

PS fixes ``r2 = 0`` and trades quality for rate through ``T``.  GPS has a
third knob, and for a fixed output squeezing ``r_out`` and click
probability the heralded W(0,0) is lowest when ``s = exp(r_out - r1 - r2)``
equals one, giving ``W00 = -(1/pi)(1 - P_on)/(1 + P_on)`` regardless of
``r_out``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .gaussian_core import as_r, gaussian_output, r_to_db, sigma_blocks
from .heralding import (
    DEFAULT_GRID,
    HeraldError,
    HeraldSpec,
    LossBudget,
    PhaseSpaceGrid,
    herald_metrics,
    output_squeezing,
    p_off,
    w_out_origin,
)

DEFAULT_PON_GRID = np.logspace(-4, math.log10(0.5), 60)
ROOT_XTOL = 1e-13


class InfeasibleTargetError(ValueError):
    """No physical parameter set reaches the requested target."""


class OptimizerBoundaryError(RuntimeError):
    """The optimiser converged onto an end of its search interval."""


@dataclass(frozen=True)
class TradeoffPoint:
    p_on: float
    w00: float
    r1: float
    r2: float
    T: float

    @property
    def r_out(self) -> float:
        return output_squeezing(self.r1, self.r2, self.T)

    @property
    def s(self) -> float:
        return math.exp(self.r_out - self.r1 - self.r2)

    @property
    def spec(self) -> HeraldSpec:
        return HeraldSpec(self.r1, self.r2, self.T)

    def as_row(self) -> dict:
        return {
            "p_on": self.p_on,
            "w00": self.w00,
            "r1_db": r_to_db(self.r1),
            "r2_db": r_to_db(self.r2),
            "T": self.T,
            "s": self.s,
        }


@dataclass(frozen=True)
class TradeoffCurve:
    label: str
    points: tuple
    failures: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points, key=lambda p: p.p_on)))

    @property
    def p_on(self) -> np.ndarray:
        return np.array([p.p_on for p in self.points])

    @property
    def w00(self) -> np.ndarray:
        return np.array([p.w00 for p in self.points])

    def w00_at(self, p_on) -> np.ndarray:
        """Linear interpolation of W00 in ``log(P_on)``."""
        return np.interp(np.log(p_on), np.log(self.p_on), self.w00)

    def rows(self) -> list:
        return [p.as_row() for p in self.points]


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def lossless_point(r1, r2, T: float) -> TradeoffPoint:
    """Closed-form ``(P_on, W(0,0))`` of a lossless on/off herald."""
    r1, r2 = as_r(r1), as_r(r2)
    b = sigma_blocks(gaussian_output(r1, r2, T))
    sx, sp = b.sigma_x[0, 0], b.sigma_p[0, 0]
    return TradeoffPoint(1.0 - p_off(sx, sp), w_out_origin(sx, sp), r1, r2, float(T))


def w00_via_s(p_off: float, s: float) -> float:
    """W(0,0) written through the no-click probability and ``s``."""
    if not 0.0 < p_off < 1.0:
        raise ValueError(f"p_off must lie in (0, 1), got {p_off}")
    if s <= 0:
        raise ValueError("s must be positive")
    disc = p_off**2 - 2 * p_off * (s + 1.0 / s) + 4
    if disc <= 0:
        raise ValueError(f"s = {s} lies outside the admissible range (discriminant {disc:.3g})")
    return (p_off / math.sqrt(disc) - p_off) / (math.pi * (1.0 - p_off))


def admissible_s_range(r_c, p_c: float) -> tuple:
    """Open interval of ``s`` compatible with ``(r_c, p_c)``."""
    r_c = as_r(r_c)
    if not 0.0 < p_c < 1.0:
        raise ValueError(f"p_c must lie in (0, 1), got {p_c}")
    edge = math.acosh(1.0 / (1.0 - p_c))
    if r_c > 0:
        return (0.0, math.exp(edge))
    if r_c < 0:
        return (math.exp(-edge), math.inf)
    return (0.0, math.inf)


def constraint_residual(r1, r2, r_c, p_c: float) -> tuple:
    """``(cosh r1 cosh r2 - cosh r_c / (1 - p_c), (r1 - r_c)(r2 - r_c) < 0)``."""
    r1, r2, r_c = as_r(r1), as_r(r2), as_r(r_c)
    res = math.cosh(r1) * math.cosh(r2) - math.cosh(r_c) / (1.0 - p_c)
    return res, (r1 - r_c) * (r2 - r_c) < 0


def best_tradeoff_w(p_on):
    """Lowest W(0,0) reachable by GPS at click probability ``p_on``."""
    p_on = np.asarray(p_on, dtype=float)
    if np.any(p_on < 0) or np.any(p_on >= 1):
        raise ValueError("p_on must lie in [0, 1)")
    out = -(1.0 - p_on) / (math.pi * (1.0 + p_on))
    return float(out) if out.ndim == 0 else out


def p_on_for_best_w(w00: float) -> float:
    """Inverse of :func:`best_tradeoff_w`."""
    if not -1.0 / math.pi < w00 < 0.0:
        raise InfeasibleTargetError(f"W00 = {w00} is outside (-1/pi, 0)")
    q = -math.pi * w00
    return (1.0 - q) / (1.0 + q)


def transmissivity_for_output(r1, r2, r_out) -> float:
    """Invert the output-squeezing relation for ``T`` at fixed inputs.

    Both quadrature variances of the trigger mode are affine in ``T``, so
    the relation is a Moebius map and inverts exactly.
    """
    r1, r2, r_out = as_r(r1), as_r(r2), as_r(r_out)
    k = math.exp(2 * (r_out - r1 - r2))
    num = k * (1 + math.exp(2 * r1)) - (1 + math.exp(-2 * r1))
    den = (math.exp(-2 * r2) - math.exp(-2 * r1)) - k * (math.exp(2 * r2) - math.exp(2 * r1))
    if den == 0:
        raise InfeasibleTargetError("output squeezing does not depend on T for these inputs")
    T = num / den
    if not 0.0 < T < 1.0:
        raise InfeasibleTargetError(
            f"no transmissivity in (0, 1) gives r_out={r_out:.4f} (got T={T:.4f})"
        )
    return T


def solve_params(r_out, p_on: float, s: float = 1.0, mirrored: bool = False) -> tuple:
    """Inputs ``(r1, r2, T)`` producing ``(r_out, p_on)`` with a given ``s``.

    ``r1 + r2 = r_out - ln s`` together with
    ``cosh r1 cosh r2 = cosh r_out / (1 - p_on)`` pins ``2 r1 - (r1 + r2)``
    up to sign.  The default branch puts the larger squeezing on ``r1``
    with the sign of ``r_out``; ``mirrored`` swaps the roles.
    """
    r_out = as_r(r_out)
    if not 0.0 < p_on < 1.0:
        raise InfeasibleTargetError(f"p_on must lie in (0, 1), got {p_on}")
    if s <= 0:
        raise InfeasibleTargetError("s must be positive")
    total = r_out - math.log(s)
    arg = 2 * math.cosh(r_out) / (1.0 - p_on) - math.cosh(total)
    if arg < 1.0:
        raise InfeasibleTargetError(f"s = {s} is not reachable for p_on = {p_on}")
    spread = math.acosh(arg)
    sign = 1.0 if r_out >= 0 else -1.0
    if mirrored:
        sign = -sign
    r1 = 0.5 * (total + sign * spread)
    r2 = total - r1
    return r1, r2, transmissivity_for_output(r1, r2, r_out)


def solve_gps_params(r_out, p_on: float, mirrored: bool = False) -> tuple:
    """Best-trade-off GPS parameters ``(r1, r2, T)`` for ``(r_out, p_on)``."""
    return solve_params(r_out, p_on, 1.0, mirrored)


# ---------------------------------------------------------------------------
# PS
# ---------------------------------------------------------------------------


def _expand_bracket(f, lo, hi, grow=2.0, max_steps=60):
    flo, fhi = f(lo), f(hi)
    steps = 0
    while flo * fhi > 0:
        if steps >= max_steps:
            raise InfeasibleTargetError("could not bracket a root")
        hi *= grow
        fhi = f(hi)
        steps += 1
    return lo, hi


def ps_input_squeezing(r_out, T: float) -> float:
    """PS input squeezing ``r1`` (with ``r2 = 0``) that yields ``r_out`` at ``T``.

    ``r_out`` is monotone in ``r1`` and saturates at ``ln((1+T)/(1-T))/2``.
    """
    r_out = as_r(r_out)
    if not 0.0 < T < 1.0:
        raise ValueError(f"transmissivity must lie in (0, 1), got {T}")
    limit = 0.5 * math.log((1 + T) / (1 - T))
    if abs(r_out) >= limit:
        raise InfeasibleTargetError(
            f"PS cannot reach r_out={r_to_db(r_out):.2f} dB at T={T:.4f} (limit {r_to_db(limit):.2f} dB)"
        )
    if r_out == 0:
        return 0.0
    sign = 1.0 if r_out > 0 else -1.0

    def f(r1):
        return output_squeezing(sign * r1, 0.0, T) - r_out

    lo, hi = _expand_bracket(lambda r1: sign * f(r1), 0.0, max(2 * abs(r_out), 0.1))
    return sign * optimize.brentq(lambda r1: sign * f(r1), lo, hi, xtol=ROOT_XTOL, rtol=1e-15)


def ps_point(r_out, T: float) -> TradeoffPoint:
    return lossless_point(ps_input_squeezing(r_out, T), 0.0, T)


def ps_curve(r_out, t_grid, label: str | None = None) -> TradeoffCurve:
    """PS trade-off at fixed ``r_out`` over a list of transmissivities.

    Unreachable transmissivities are listed in ``failures`` instead of
    aborting the curve.
    """
    r_out = as_r(r_out)
    pts, bad = [], []
    for T in t_grid:
        try:
            pts.append(ps_point(r_out, float(T)))
        except (InfeasibleTargetError, HeraldError) as exc:
            bad.append((float(T), str(exc)))
    return TradeoffCurve(label or f"PS {r_to_db(r_out):.2f} dB", tuple(pts), tuple(bad))


def _ps_p_on(r_out: float, T: float) -> float:
    r1 = ps_input_squeezing(r_out, T)
    b = sigma_blocks(gaussian_output(r1, 0.0, T))
    return 1.0 - p_off(b.sigma_x[0, 0], b.sigma_p[0, 0])


def ps_transmissivity_for_p_on(r_out, p_on: float) -> float:
    """Transmissivity at which PS with output ``r_out`` clicks with ``p_on``.

    ``P_on`` falls monotonically from near 1 at ``T = tanh|r_out|`` to 0 at
    ``T = 1``.
    """
    r_out = as_r(r_out)
    t_min = math.tanh(abs(r_out))
    lo, hi = t_min + 1e-9 * (1 - t_min), 1.0 - 1e-12

    def g(T):
        return _ps_p_on(r_out, T) - p_on

    glo, ghi = g(lo), g(hi)
    if glo < 0:
        raise InfeasibleTargetError(
            f"PS at r_out={r_to_db(r_out):.2f} dB cannot reach P_on={p_on:.3g} (max {glo + p_on:.3g})"
        )
    if ghi > 0:
        raise InfeasibleTargetError(f"P_on={p_on:.3g} too small to resolve")
    return optimize.brentq(g, lo, hi, xtol=ROOT_XTOL, rtol=1e-15)


def ps_curve_for_p_on(r_out, p_on_grid=DEFAULT_PON_GRID, label: str | None = None) -> TradeoffCurve:
    """PS curve sampled at prescribed click probabilities."""
    r_out = as_r(r_out)
    pts, bad = [], []
    for p in p_on_grid:
        try:
            pts.append(ps_point(r_out, ps_transmissivity_for_p_on(r_out, float(p))))
        except (InfeasibleTargetError, HeraldError) as exc:
            bad.append((float(p), str(exc)))
    return TradeoffCurve(label or f"PS {r_to_db(r_out):.2f} dB", tuple(pts), tuple(bad))


def ps_p_on_for_w00(r_out, w00: float) -> TradeoffPoint:
    """PS point with a prescribed lossless W(0,0)."""
    r_out = as_r(r_out)
    t_min = math.tanh(abs(r_out))

    def g(T):
        return ps_point(r_out, T).w00 - w00

    lo, hi = t_min + 1e-9, 1.0 - 1e-12
    if g(lo) * g(hi) > 0:
        raise InfeasibleTargetError(f"PS at {r_to_db(r_out):.2f} dB cannot reach W00={w00}")
    return ps_point(r_out, optimize.brentq(g, lo, hi, xtol=ROOT_XTOL, rtol=1e-15))


# ---------------------------------------------------------------------------
# GPS
# ---------------------------------------------------------------------------


def gps_point(r_out, p_on: float, s: float = 1.0, mirrored: bool = False) -> TradeoffPoint:
    return lossless_point(*solve_params(r_out, p_on, s, mirrored))


def gps_best_curve(r_out, p_on_grid=DEFAULT_PON_GRID, label: str = "GPS best") -> TradeoffCurve:
    """Best GPS trade-off at ``r_out``, realised by explicit parameter sets."""
    pts, bad = [], []
    for p in p_on_grid:
        try:
            pts.append(gps_point(r_out, float(p)))
        except (InfeasibleTargetError, HeraldError) as exc:
            bad.append((float(p), str(exc)))
    return TradeoffCurve(label, tuple(pts), tuple(bad))


def gps_numeric_best(r_c, p_c: float, xatol: float = 1e-10) -> TradeoffPoint:
    """Minimise W(0,0) over ``s`` numerically and realise the optimum.

    The search runs in ``ln s`` over the admissible interval, further cut to
    where the closed form is real.  Landing on an end of the interval raises
    :class:`OptimizerBoundaryError`; a minimiser away from ``s = 1`` raises
    ``AssertionError``.
    """
    r_c = as_r(r_c)
    lo, hi = admissible_s_range(r_c, p_c)
    poff = 1.0 - p_c
    # keep the discriminant positive: cosh(ln s) < (poff^2 + 4) / (4 poff)
    t_real = math.acosh((poff**2 + 4) / (4 * poff))
    t_lo = max(math.log(lo) if lo > 0 else -math.inf, -t_real)
    t_hi = min(math.log(hi) if math.isfinite(hi) else math.inf, t_real)
    margin = 1e-9 * (t_hi - t_lo)
    t_lo, t_hi = t_lo + margin, t_hi - margin

    res = optimize.minimize_scalar(
        lambda t: w00_via_s(poff, math.exp(t)),
        bounds=(t_lo, t_hi),
        method="bounded",
        options={"xatol": xatol},
    )
    t_star = float(res.x)
    span = t_hi - t_lo
    if min(t_star - t_lo, t_hi - t_star) < 1e-6 * span:
        raise OptimizerBoundaryError(f"minimum at the edge of the s range ({math.exp(t_star):.6g})")
    s_star = math.exp(t_star)
    assert abs(s_star - 1.0) < 1e-6, f"optimum at s={s_star}, expected 1"
    point = gps_point(r_c, p_c, s=1.0)
    assert abs(point.w00 - best_tradeoff_w(p_c)) < 1e-9
    return point


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------


def evaluate_lossy(point: TradeoffPoint, losses: LossBudget, grid: PhaseSpaceGrid = DEFAULT_GRID) -> TradeoffPoint:
    """Re-evaluate a parameter set through the lossy heralding pipeline."""
    spec = HeraldSpec(point.r1, point.r2, point.T).with_losses(losses)
    m = herald_metrics(spec, grid)
    return TradeoffPoint(m.p_on, m.w00, point.r1, point.r2, point.T)


def lossy_tradeoff_curve(
    base: TradeoffCurve, losses: LossBudget, grid: PhaseSpaceGrid = DEFAULT_GRID, label: str | None = None
) -> TradeoffCurve:
    """Shift a curve by pushing each of its parameter sets through the losses.

    Parameters are kept from the lossless optimum.
    """
    if losses.is_lossless:
        return TradeoffCurve(label or base.label, base.points, base.failures)
    pts = tuple(evaluate_lossy(p, losses, grid) for p in base.points)
    return TradeoffCurve(label or f"{base.label} (lossy)", pts, base.failures)


def lossy_s_sweep(
    r_out, p_on: float, losses: LossBudget, s_values, grid: PhaseSpaceGrid = DEFAULT_GRID
) -> list:
    """Lossy metrics of parameter sets sharing ``(r_out, p_on)`` but varying ``s``.

    Lets the caller check how far the lossless ``s = 1`` choice is from the
    best lossy one.  Infeasible ``s`` values are skipped.
    """
    out = []
    for s in s_values:
        try:
            base = gps_point(r_out, p_on, float(s))
        except (InfeasibleTargetError, HeraldError):
            continue
        out.append((float(s), evaluate_lossy(base, losses, grid)))
    return out
