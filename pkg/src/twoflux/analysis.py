"""Flux classification and interface diagnostics.

Classifies each side of the flux jump (convex type / concave type, location
of its unique extremum), estimates the growth behaviour at infinity, labels
the geometry of the (left, right) pair, and evaluates the two interface
quantities every construction downstream depends on: the jump-condition
deficit kappa and the overcompressibility sign check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .fluxlang import FluxError, FluxExpr

__all__ = [
    "FluxKind",
    "FluxProfile",
    "Asymptotics",
    "ProblemSetup",
    "AsymptoticsError",
    "UnsupportedGeometryError",
    "classify_type",
    "estimate_asymptotics",
    "geometry_case",
    "rh_deficit",
    "is_overcompressive",
    "affine_slope",
    "build_profile",
]

DEFAULT_GRID_N = 4096

# Derivative-sign tolerance: the extremum itself satisfies f'(theta)=0 and
# must pass the overcompressibility check.
DERIVATIVE_SIGN_TOL = 1e-12

_ASYMPTOTIC_PROBES = (1e6, 1e8)


class AsymptoticsError(RuntimeError):
    """Growth estimation failed; supply an explicit asymptotics override."""


class UnsupportedGeometryError(RuntimeError):
    """The flux pair is outside the solvable geometry."""


class FluxKind(enum.Enum):
    CONVEX_TYPE = "convex-type"
    CONCAVE_TYPE = "concave-type"
    OTHER = "other"


@dataclass(frozen=True)
class Asymptotics:
    """Growth of f at +infinity: |f(u)| ~ c * u^nu with sign chi."""

    nu: float
    c: float
    chi: int


@dataclass(frozen=True)
class FluxProfile:
    """Classification record for one flux over a u-interval."""

    kind: FluxKind
    theta: float | None
    nu: float
    c: float
    chi: int
    domain: tuple[float, float]


@dataclass(frozen=True)
class AsymptoticsOverride:
    nu1: float
    c1: float
    nu2: float
    c2: float
    chi: int


@dataclass(frozen=True)
class ProblemSetup:
    """A flux pair with Riemann data on a u-domain."""

    f_l: FluxExpr
    f_r: FluxExpr
    u_l: float
    u_r: float
    domain: tuple[float, float]
    asymptotics_override: AsymptoticsOverride | None = None

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"empty u-domain [{lo}, {hi}]")
        for name, v in (("u_l", self.u_l), ("u_r", self.u_r)):
            if not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside domain [{lo}, {hi}]")


def _golden_section(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Shrink a bracket of a unimodal minimum of f to width <= tol."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = f(c)
    fd = f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return a, b


def _polish_extremum(df, a: float, b: float, lo: float, hi: float) -> float:
    """Polish the extremum via the sign change of the increasing derivative.

    [a, b] is the golden-section bracket (it can sit O(sqrt(eps)) off a
    quadratic minimum because value comparisons bottom out in float noise);
    [lo, hi] is the coarse grid bracket that isolates the extremum.  The
    sign-straddling window is grown around the golden bracket so the
    bisection cannot wander to inflection artifacts elsewhere.  Afterwards
    |f'(theta)| sits at roundoff level and theta itself passes the
    overcompressibility gate.
    """
    center = 0.5 * (a + b)
    w = max(b - a, 1e-15 * (hi - lo))
    while True:
        pa = max(lo, center - w)
        pb = min(hi, center + w)
        fa = df(pa)
        fb = df(pb)
        if fa <= 0.0 <= fb:
            break
        if pa == lo and pb == hi:
            return center  # no sign change at this resolution
        w *= 8.0
    if fa == 0.0:
        return pa
    if fb == 0.0:
        return pb
    a, b = pa, pb
    while True:
        m = 0.5 * (a + b)
        if m == a or m == b:
            return m
        fm = df(m)
        if fm == 0.0:
            return m
        if fm < 0.0:
            a = m
        else:
            b = m


def classify_type(
    f: FluxExpr, domain: tuple[float, float], grid_n: int = DEFAULT_GRID_N
) -> tuple[FluxKind, float | None]:
    """Classify f as convex type, concave type, or other on the domain.

    Samples f on a uniform grid, looks at sign changes of the discrete
    derivative, and refines the extremum location by golden-section search
    to |du| <= 1e-10 * (domain width).  Exactly one minus-to-plus change
    (and no plus-to-minus) means convex type; the mirror pattern means
    concave type; anything else is reported as other with theta=None.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    lo, hi = domain
    us = np.linspace(lo, hi, grid_n)
    ys = f.eval_array(us)
    diffs = np.diff(ys)

    # Sequence of nonzero slope signs with the index of the first sample of
    # each difference; zero slopes are transparent.
    signed = [(1 if d > 0 else -1, i) for i, d in enumerate(diffs) if d != 0.0]
    down_up: list[tuple[int, int]] = []
    up_down: list[tuple[int, int]] = []
    for (s_prev, i_prev), (s_next, i_next) in zip(signed, signed[1:]):
        if s_prev < 0 < s_next:
            down_up.append((i_prev, i_next))
        elif s_prev > 0 > s_next:
            up_down.append((i_prev, i_next))

    tol = 1e-10 * (hi - lo)
    if len(down_up) == 1 and not up_down:
        i, j = down_up[0]
        a, b = _golden_section(f.eval, us[i], us[j + 1], tol)
        theta = _polish_extremum(lambda u: f.eval_d(u)[1], a, b, us[i], us[j + 1])
        return FluxKind.CONVEX_TYPE, theta
    if len(up_down) == 1 and not down_up:
        i, j = up_down[0]
        a, b = _golden_section(lambda u: -f.eval(u), us[i], us[j + 1], tol)
        theta = _polish_extremum(lambda u: -f.eval_d(u)[1], a, b, us[i], us[j + 1])
        return FluxKind.CONCAVE_TYPE, theta
    return FluxKind.OTHER, None


def estimate_asymptotics(f: FluxExpr) -> Asymptotics:
    """Estimate the growth of f at +infinity from two large probes.

    nu is the log-log slope between the probes, clamped to [0, inf) and
    rounded to the nearest multiple of 1e-3 so that exact relations such as
    nu=1 are recognized; c is |f| at the far probe scaled by u^-nu; chi is
    the sign of f at the far probe.  Estimation is a convenience: when the
    probes overflow or vanish, callers must supply an explicit override.
    """
    u1, u2 = _ASYMPTOTIC_PROBES
    try:
        f1 = f.eval(u1)
        f2 = f.eval(u2)
    except FluxError as err:
        raise AsymptoticsError(
            f"flux not evaluable at asymptotic probes ({err}); provide an asymptotics override"
        ) from err
    if not (math.isfinite(f1) and math.isfinite(f2)) or f1 == 0.0 or f2 == 0.0:
        raise AsymptoticsError(
            "flux vanishes or overflows at asymptotic probes; provide an asymptotics override"
        )
    chi = 1 if f2 > 0.0 else -1
    nu_raw = (math.log(abs(f2)) - math.log(abs(f1))) / (math.log(u2) - math.log(u1))
    nu = max(0.0, nu_raw)
    nu = round(nu * 1000.0) / 1000.0
    c = abs(f2) if nu == 0.0 else abs(f2) / u2**nu
    return Asymptotics(nu=nu, c=c, chi=chi)


def geometry_case(
    f_l: FluxExpr,
    f_r: FluxExpr,
    pl: FluxProfile,
    pr: FluxProfile,
    domain: tuple[float, float],
    grid_n: int = DEFAULT_GRID_N,
) -> tuple[str, bool]:
    """Label the flux-pair geometry A-D and check the separation ordering.

    A = (convex, concave), B = (convex, convex), C = (concave, convex),
    D = (concave, concave).  The boolean reports whether f_l > f_r holds
    on the whole sampled domain.
    """
    kinds = (pl.kind, pr.kind)
    if FluxKind.OTHER in kinds:
        raise UnsupportedGeometryError(
            "geometry requires convex-type or concave-type fluxes on both sides"
        )
    letter = {
        (FluxKind.CONVEX_TYPE, FluxKind.CONCAVE_TYPE): "A",
        (FluxKind.CONVEX_TYPE, FluxKind.CONVEX_TYPE): "B",
        (FluxKind.CONCAVE_TYPE, FluxKind.CONVEX_TYPE): "C",
        (FluxKind.CONCAVE_TYPE, FluxKind.CONCAVE_TYPE): "D",
    }[kinds]
    us = np.linspace(domain[0], domain[1], grid_n)
    gap = float(np.min(f_l.eval_array(us) - f_r.eval_array(us)))
    return letter, gap > 0.0


def rh_deficit(f_l: FluxExpr, f_r: FluxExpr, u0: float, u1: float) -> float:
    """Jump-condition deficit kappa = f_l(u0) - f_r(u1)."""
    return f_l.eval(u0) - f_r.eval(u1)


def is_overcompressive(f_l: FluxExpr, f_r: FluxExpr, u0: float, u1: float) -> bool:
    """True iff characteristics enter the interface from both sides:
    f_l'(u0) >= 0 >= f_r'(u1), with a +-1e-12 tolerance so extremum states
    (where f' = 0) pass."""
    dl = f_l.eval_d(u0)[1]
    dr = f_r.eval_d(u1)[1]
    return dl >= -DERIVATIVE_SIGN_TOL and dr <= DERIVATIVE_SIGN_TOL


def affine_slope(f: FluxExpr, domain: tuple[float, float]) -> float | None:
    """Slope of f if it is affine on the domain (constant derivative within
    1e-12 at 17 probe points), else None."""
    us = np.linspace(domain[0], domain[1], 17)
    ds = np.array([f.eval_d(u)[1] for u in us])
    scale = 1.0 + float(np.max(np.abs(ds)))
    if float(np.max(ds) - np.min(ds)) <= 1e-12 * scale:
        return float(np.mean(ds))
    return None


def build_profile(
    f: FluxExpr,
    domain: tuple[float, float],
    grid_n: int = DEFAULT_GRID_N,
    override: Asymptotics | None = None,
) -> FluxProfile:
    """Assemble type classification and asymptotics into one record."""
    kind, theta = classify_type(f, domain, grid_n)
    asym = override if override is not None else estimate_asymptotics(f)
    return FluxProfile(kind=kind, theta=theta, nu=asym.nu, c=asym.c, chi=asym.chi, domain=domain)
