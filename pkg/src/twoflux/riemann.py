"""Riemann solutions for the two-flux problem.

The wave fan is assembled from the positions of the initial states against
the flux extrema theta_l, theta_r: a stationary shadow wave at x = 0, plus
an optional backward rarefaction (left flux, nonpositive speeds) and an
optional forward rarefaction (right flux, nonnegative speeds).  Affine flux
pairs with slopes p_l >= 0 >= p_r have no extrema and no rarefactions; they
collapse to a pure stationary shadow wave and are handled as a special
path with overcompressibility as the only admissibility check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .analysis import (
    Asymptotics,
    FluxProfile,
    ProblemSetup,
    UnsupportedGeometryError,
    affine_slope,
    build_profile,
    geometry_case,
    is_overcompressive,
    rh_deficit,
)
from .fluxlang import FluxExpr
from .shadow import ShadowWaveNet, classify_shadow, sample_net

__all__ = [
    "WaveSide",
    "Rarefaction",
    "WaveFan",
    "RarefactionConstructionError",
    "FanOverlapError",
    "solve_riemann",
    "rarefaction_value",
    "sample_solution",
    "sample_bounded",
    "max_valid_eps",
]

_SPEED_TOL = 1e-12
_EDGE_DROP_TOL = 1e-12


class RarefactionConstructionError(RuntimeError):
    """f' is not strictly monotone on the requested state interval, so a
    simple centered fan does not exist there."""


class FanOverlapError(ValueError):
    """eps is too large: the shadow fan would overlap a rarefaction."""


class WaveSide(enum.Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True)
class Rarefaction:
    """Centered fan u(x/t) with f'(u_edgeslow)=speed_lo, f'(u_edgefast)=speed_hi."""

    side: WaveSide
    flux: FluxExpr
    u_edgeslow: float
    u_edgefast: float
    speed_lo: float
    speed_hi: float


@dataclass(frozen=True)
class WaveFan:
    """Composed solution: optional backward fan + stationary shadow wave +
    optional forward fan."""

    back: Rarefaction | None
    sdw: ShadowWaveNet
    fwd: Rarefaction | None
    case_id: str


def _clamp_speed(s: float) -> float:
    return 0.0 if abs(s) <= _SPEED_TOL else s


def _build_rarefaction(
    side: WaveSide, flux: FluxExpr, u_near_zero: float, u_outer: float
) -> Rarefaction | None:
    """Fan between the state at the x=0 side (speed ~0) and the outer state.

    Returns None for a zero-width fan.  Checks on 256 samples that f' is
    strictly monotone on the state interval; convex/concave *type* fluxes
    need not satisfy this away from their extremum, and composite waves are
    not constructed here.
    """
    if abs(u_near_zero - u_outer) <= _EDGE_DROP_TOL:
        return None
    us = np.linspace(u_near_zero, u_outer, 256)
    ds = np.array([flux.eval_d(u)[1] for u in us])
    span = ds[-1] - ds[0]
    diffs = np.diff(ds)
    tol = 1e-12 * (1.0 + float(np.max(np.abs(ds))))
    increasing = bool(np.all(diffs >= -tol)) and span > tol
    decreasing = bool(np.all(diffs <= tol)) and span < -tol
    if not (increasing or decreasing):
        raise RarefactionConstructionError(
            f"flux derivative is not strictly monotone between u={u_near_zero} and u={u_outer}"
        )
    s_zero = _clamp_speed(float(ds[0]))
    s_outer = _clamp_speed(float(ds[-1]))
    if s_zero <= s_outer:
        fan = Rarefaction(side, flux, u_near_zero, u_outer, s_zero, s_outer)
    else:
        fan = Rarefaction(side, flux, u_outer, u_near_zero, s_outer, s_zero)
    if side is WaveSide.BACKWARD and fan.speed_hi > 0.0:
        raise RarefactionConstructionError("backward fan must not cross x=0")
    if side is WaveSide.FORWARD and fan.speed_lo < 0.0:
        raise RarefactionConstructionError("forward fan must not cross x=0")
    return fan


def _shadow_net(setup: ProblemSetup, pl: FluxProfile, pr: FluxProfile,
                u0: float, u1: float) -> ShadowWaveNet:
    kappa = rh_deficit(setup.f_l, setup.f_r, u0, u1)
    if not is_overcompressive(setup.f_l, setup.f_r, u0, u1):
        raise UnsupportedGeometryError(
            f"shadow-wave states ({u0}, {u1}) are not overcompressive"
        )
    profile = classify_shadow(pl.nu, pr.nu, pr.chi, kappa, pl.c, pr.c)
    return ShadowWaveNet(u0, u1, profile)


def _profiles(setup: ProblemSetup, grid_n: int) -> tuple[FluxProfile, FluxProfile]:
    ov = setup.asymptotics_override
    ov_l = Asymptotics(ov.nu1, ov.c1, 1) if ov is not None else None
    ov_r = Asymptotics(ov.nu2, ov.c2, ov.chi) if ov is not None else None
    pl = build_profile(setup.f_l, setup.domain, grid_n, ov_l)
    pr = build_profile(setup.f_r, setup.domain, grid_n, ov_r)
    return pl, pr


def solve_riemann(
    setup: ProblemSetup,
    profiles: tuple[FluxProfile, FluxProfile] | None = None,
    grid_n: int = 4096,
) -> WaveFan:
    """Compose the wave fan for the given flux pair and Riemann data.

    Case selection against the extrema (>= on the left comparisons, ties
    landing on the shadow-wave side):

        i)   u_l >= theta_l, u_r >= theta_r: pure shadow wave
        ii)  u_l >= theta_l, u_r <  theta_r: shadow wave + forward fan
        iii) u_l <  theta_l, u_r >= theta_r: backward fan + shadow wave
        iv)  both below: backward fan + shadow wave + forward fan

    Requires geometry A (convex-type left, concave-type right) with the
    left flux above the right flux on the whole domain, or an affine pair
    with slopes p_l >= 0 >= p_r.
    """
    pl, pr = profiles if profiles is not None else _profiles(setup, grid_n)

    p_l = affine_slope(setup.f_l, setup.domain)
    p_r = affine_slope(setup.f_r, setup.domain)
    if p_l is not None and p_r is not None:
        if p_l >= -_SPEED_TOL and p_r <= _SPEED_TOL:
            net = _shadow_net(setup, pl, pr, setup.u_l, setup.u_r)
            return WaveFan(back=None, sdw=net, fwd=None, case_id="i")
        raise UnsupportedGeometryError(
            f"affine fluxes need slopes p_l >= 0 >= p_r, got ({p_l}, {p_r})"
        )

    case, separated = geometry_case(setup.f_l, setup.f_r, pl, pr, setup.domain, grid_n)
    if case != "A":
        raise UnsupportedGeometryError(
            f"only geometry A (convex-type left, concave-type right) is composable, got {case}"
        )
    if not separated:
        raise UnsupportedGeometryError("left flux must lie above the right flux on the domain")
    theta_l, theta_r = pl.theta, pr.theta
    assert theta_l is not None and theta_r is not None

    left_high = setup.u_l >= theta_l
    right_high = setup.u_r >= theta_r
    if left_high and right_high:
        case_id, u0, u1 = "i", setup.u_l, setup.u_r
    elif left_high:
        case_id, u0, u1 = "ii", setup.u_l, theta_r
    elif right_high:
        case_id, u0, u1 = "iii", theta_l, setup.u_r
    else:
        case_id, u0, u1 = "iv", theta_l, theta_r

    back = None
    fwd = None
    if not left_high:
        back = _build_rarefaction(WaveSide.BACKWARD, setup.f_l, theta_l, setup.u_l)
    if not right_high:
        fwd = _build_rarefaction(WaveSide.FORWARD, setup.f_r, theta_r, setup.u_r)
    net = _shadow_net(setup, pl, pr, u0, u1)
    return WaveFan(back=back, sdw=net, fwd=fwd, case_id=case_id)


def rarefaction_value(r: Rarefaction, xi: float) -> float:
    """State u with f'(u) = xi inside the fan, by bisection to |du| <= 1e-12.

    Self-similar: depends on (x, t) only through xi = x/t.  Edge values are
    returned at the fan boundary.
    """
    if xi < r.speed_lo - _SPEED_TOL or xi > r.speed_hi + _SPEED_TOL:
        raise ValueError(f"xi={xi} outside fan speeds [{r.speed_lo}, {r.speed_hi}]")
    xi = min(max(xi, r.speed_lo), r.speed_hi)
    a, b = r.u_edgeslow, r.u_edgefast
    ga = r.flux.eval_d(a)[1] - xi  # <= 0 by edge ordering
    while abs(b - a) > 1e-12:
        m = 0.5 * (a + b)
        gm = r.flux.eval_d(m)[1] - xi
        if (gm <= 0.0) == (ga <= 0.0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


def max_valid_eps(fan: WaveFan) -> float:
    """Largest usable fan half-width: half the smallest nonzero edge speed
    of the rarefactions adjacent to the origin (inf when there are none)."""
    bounds = []
    if fan.back is not None:
        bounds.append(abs(fan.back.speed_lo))
    if fan.fwd is not None:
        bounds.append(abs(fan.fwd.speed_hi))
    return min(bounds) / 2.0 if bounds else float("inf")


def sample_solution(fan: WaveFan, x: float, t: float, eps: float) -> float:
    """Exact solution sample at finite fan width eps.

    Pieces left to right: outer left state, backward fan, left plateau,
    shadow fan (|x| <= eps*t), right plateau, forward fan, outer right
    state.  The shadow fan replaces the rarefaction tails adjacent to 0.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if eps >= max_valid_eps(fan):
        raise FanOverlapError(
            f"eps={eps} overlaps a rarefaction; needs eps < {max_valid_eps(fan)}"
        )
    if abs(x) <= eps * t:
        return sample_net(fan.sdw, eps, x, t)
    xi = x / t
    if x < 0.0:
        back = fan.back
        if back is None or xi >= back.speed_hi:
            return fan.sdw.u0
        if xi <= back.speed_lo:
            return back.u_edgeslow
        return rarefaction_value(back, xi)
    fwd = fan.fwd
    if fwd is None or xi <= fwd.speed_lo:
        return fan.sdw.u1
    if xi >= fwd.speed_hi:
        return fwd.u_edgefast
    return rarefaction_value(fwd, xi)


def sample_bounded(fan: WaveFan, x: float, t: float) -> float:
    """Bounded part of the limit solution (the fan region carries the outer
    plateau values; the point mass is excluded)."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    xi = x / t
    if x < 0.0:
        back = fan.back
        if back is None or xi >= back.speed_hi:
            return fan.sdw.u0
        if xi <= back.speed_lo:
            return back.u_edgeslow
        return rarefaction_value(back, xi)
    fwd = fan.fwd
    if fwd is None or xi <= fwd.speed_lo:
        return fan.sdw.u1
    if xi >= fwd.speed_hi:
        return fwd.u_edgefast
    return rarefaction_value(fwd, xi)
