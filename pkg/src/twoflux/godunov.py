"""Godunov finite-volume scheme for the augmented (u, h) system.

The flux jump is carried by a frozen discrete Heaviside component h, so the
combined flux is F(u, h) = h*f_r(u) + (1-h)*f_l(u) and the system is solved
with Godunov's wave-propagation update driven by an interface linearization
A = [[gamma, rho], [0, 0]].  The split divided differences

    gamma = [F(uR, hL) - F(uL, hL)] / (uR - uL)
    rho   = [F(uR, hR) - F(uR, hL)] / (hR - hL)

make gamma*du + rho*dh = dF exactly for any flux pair, while degenerate
differences fall back to the exact partial derivatives so the matrix is
consistent with the Jacobian at coincident states.  The second matrix row
is identically zero, so h never changes, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .analysis import ProblemSetup
from .fluxlang import FluxExpr

__all__ = [
    "GridState",
    "RoeMatrix",
    "CFLError",
    "BlowUpError",
    "roe_matrix",
    "split",
    "step",
    "run",
    "write_snapshot_csv",
    "read_snapshot_csv",
]

_DEGENERATE_TOL = 1e-12


class CFLError(RuntimeError):
    """Time step violates the stability bound dt*max|gamma|/dx <= 1."""


class BlowUpError(RuntimeError):
    """Non-finite cell values appeared during time stepping."""


@dataclass(frozen=True)
class GridState:
    """Cell-averaged state on a uniform grid.

    x0 is the left domain edge; cell centers sit at x0 + (j+1/2)*dx.
    h is the frozen discrete Heaviside (values in {0,1}, nondecreasing,
    at most one 0->1 transition).
    """

    x0: float
    dx: float
    u: np.ndarray
    h: np.ndarray
    t: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        h = np.asarray(self.h, dtype=float)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "h", h)
        if self.dx <= 0.0:
            raise ValueError("dx must be positive")
        if u.shape != h.shape or u.ndim != 1 or len(u) < 4:
            raise ValueError("u and h must be equal-length 1-d arrays of length >= 4")
        if not np.all((h == 0.0) | (h == 1.0)):
            raise ValueError("h values must be 0 or 1")
        if np.any(np.diff(h) < 0.0):
            raise ValueError("h must be nondecreasing (single 0->1 transition)")
        if self.t < 0.0:
            raise ValueError("t must be nonnegative")

    @property
    def centers(self) -> np.ndarray:
        return self.x0 + (np.arange(len(self.u)) + 0.5) * self.dx


@dataclass(frozen=True)
class RoeMatrix:
    """Entries of the 2x2 interface matrix [[gamma, rho], [0, 0]]."""

    gamma: float
    rho: float


def _combined_flux(u: float, h: float, f_l: FluxExpr, f_r: FluxExpr) -> float:
    # h is exactly 0 or 1, so only one side is evaluated
    return f_r.eval(u) if h == 1.0 else f_l.eval(u)


def _combined_flux_du(u: float, h: float, f_l: FluxExpr, f_r: FluxExpr) -> float:
    return f_r.eval_d(u)[1] if h == 1.0 else f_l.eval_d(u)[1]


def roe_matrix(
    uL: float, hL: float, uR: float, hR: float, f_l: FluxExpr, f_r: FluxExpr
) -> RoeMatrix:
    """Interface linearization with exact jump consistency.

    gamma*(uR-uL) + rho*(hR-hL) equals the combined-flux jump exactly;
    coincident states fall back to dF/du and f_r - f_l respectively.
    """
    du = uR - uL
    if abs(du) > _DEGENERATE_TOL:
        gamma = (
            _combined_flux(uR, hL, f_l, f_r) - _combined_flux(uL, hL, f_l, f_r)
        ) / du
    else:
        gamma = _combined_flux_du(uL, hL, f_l, f_r)
    dh = hR - hL
    if abs(dh) > _DEGENERATE_TOL:
        rho = (
            _combined_flux(uR, hR, f_l, f_r) - _combined_flux(uR, hL, f_l, f_r)
        ) / dh
    else:
        rho = f_r.eval(uR) - f_l.eval(uR)
    return RoeMatrix(gamma=gamma, rho=rho)


def _split_coeffs(gamma: float, rho: float, entropy_delta: float) -> tuple[float, float, float, float]:
    """(gamma+, c+, gamma-, c-) where each signed matrix is
    [[gamma+-, c+-], [0, 0]]."""
    if entropy_delta == 0.0 or abs(gamma) >= entropy_delta:
        if gamma == 0.0:
            # defective matrix (both eigenvalues 0): no propagating split
            return 0.0, 0.0, 0.0, 0.0
        gp = max(gamma, 0.0)
        gm = min(gamma, 0.0)
        return gp, rho * gp / gamma, gm, rho * gm / gamma
    # Harten-style smoothing of the gamma eigenvalue near zero
    q = (gamma * gamma / entropy_delta + entropy_delta) / 2.0
    gp = (gamma + q) / 2.0
    gm = (gamma - q) / 2.0
    gt = entropy_delta if gamma >= 0.0 else -entropy_delta
    return gp, rho * gp / gt, gm, rho * gm / gt


def split(m: RoeMatrix, entropy_delta: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Signed parts A+ and A- of the interface matrix.

    For |gamma| >= entropy_delta the split is exact and A+ + A- recovers
    the full matrix; inside the smoothing band the eigenvalue is
    regularized, and at gamma = 0 with no smoothing both parts are zero
    (the matrix is defective there).
    """
    if entropy_delta < 0.0:
        raise ValueError("entropy_delta must be nonnegative")
    gp, cp, gm, cm = _split_coeffs(m.gamma, m.rho, entropy_delta)
    aplus = np.array([[gp, cp], [0.0, 0.0]])
    aminus = np.array([[gm, cm], [0.0, 0.0]])
    return aplus, aminus


def _interface_system(
    state: GridState, f_l: FluxExpr, f_r: FluxExpr
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(gamma_i, du_i, dFh_i) for interfaces i = 0..n between cells with
    outflow ghost cells; dFh is the h-jump flux contribution rho*dh,
    computed without the division."""
    u = state.u
    h = state.h
    ue = np.concatenate(([u[0]], u, [u[-1]]))
    he = np.concatenate(([h[0]], h, [h[-1]]))
    n_if = len(u) + 1
    gam = np.empty(n_if)
    du = np.empty(n_if)
    dfh = np.zeros(n_if)
    for i in range(n_if):
        uL, uR = ue[i], ue[i + 1]
        hL, hR = he[i], he[i + 1]
        d = uR - uL
        du[i] = d
        if abs(d) > _DEGENERATE_TOL:
            gam[i] = (
                _combined_flux(uR, hL, f_l, f_r) - _combined_flux(uL, hL, f_l, f_r)
            ) / d
        else:
            gam[i] = _combined_flux_du(uL, hL, f_l, f_r)
        if hR != hL:
            dfh[i] = _combined_flux(uR, hR, f_l, f_r) - _combined_flux(uR, hL, f_l, f_r)
    return gam, du, dfh


def _advance(
    state: GridState,
    dt: float,
    gam: np.ndarray,
    du: np.ndarray,
    dfh: np.ndarray,
    entropy_delta: float,
) -> GridState:
    n = len(state.u)
    wplus = np.empty(n + 1)
    wminus = np.empty(n + 1)
    for i in range(n + 1):
        # coefficients for rho=1 give the split fractions gamma+-/gamma;
        # dfh already carries rho*dh, so no division by dh is needed
        gp, frac_p, gm, frac_m = _split_coeffs(gam[i], 1.0, entropy_delta)
        wplus[i] = gp * du[i] + frac_p * dfh[i]
        wminus[i] = gm * du[i] + frac_m * dfh[i]
    r = dt / state.dx
    u_new = state.u - r * (wminus[1:] + wplus[:-1])
    return GridState(state.x0, state.dx, u_new, state.h.copy(), state.t + dt)


def step(
    state: GridState,
    dt: float,
    f_l: FluxExpr,
    f_r: FluxExpr,
    entropy_delta: float = 0.0,
) -> GridState:
    """One Godunov update with outflow (copy) ghost cells.

    h is returned bit-identical: the second row of every interface matrix
    is zero.  Raises CFLError when dt*max|gamma|/dx exceeds 1.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    gam, du, dfh = _interface_system(state, f_l, f_r)
    gmax = float(np.max(np.abs(gam)))
    if dt * gmax / state.dx > 1.0 + 1e-12:
        raise CFLError(f"dt*max|gamma|/dx = {dt * gmax / state.dx:.6g} > 1 (max|gamma| = {gmax:.6g})")
    return _advance(state, dt, gam, du, dfh, entropy_delta)


def run(
    setup: ProblemSetup,
    dx: float,
    t_end: float,
    cfl: float = 0.9,
    snapshot_times: tuple[float, ...] = (),
    entropy_delta: float = 0.0,
    x_span: tuple[float, float] = (-1.0, 1.0),
) -> list[GridState]:
    """March the Riemann data to t_end and return snapshots in time order.

    The grid covers x_span with cell width dx; u starts at the Riemann
    data, h at the discrete Heaviside (0 for cell centers left of 0).
    dt = cfl*dx/max|gamma| each step, clipped to land exactly on snapshot
    times and t_end.  A t=0 entry in snapshot_times emits the initial
    state; t_end = 0 returns only the initial state.
    """
    if dx <= 0.0:
        raise ValueError("dx must be positive")
    if not 0.0 < cfl <= 1.0:
        raise ValueError("cfl must lie in (0, 1]")
    if t_end < 0.0:
        raise ValueError("t_end must be nonnegative")
    x0, x1 = x_span
    if not x0 < 0.0 < x1:
        raise ValueError("the spatial domain must contain the flux jump at x=0")
    n = int(round((x1 - x0) / dx))
    if n < 4:
        raise ValueError("fewer than 4 cells; shrink dx")

    centers = x0 + (np.arange(n) + 0.5) * dx
    u = np.where(centers < 0.0, setup.u_l, setup.u_r).astype(float)
    h = np.where(centers < 0.0, 0.0, 1.0)
    state = GridState(x0, dx, u, h, 0.0)

    for s in snapshot_times:
        if not 0.0 <= s <= t_end:
            raise ValueError(f"snapshot time {s} outside [0, {t_end}]")
    targets = sorted(set(float(s) for s in snapshot_times) | {float(t_end)})

    snaps: list[GridState] = []
    if targets and targets[0] == 0.0:
        snaps.append(state)
        targets = targets[1:]

    for target in targets:
        while state.t < target:
            gam, du, dfh = _interface_system(state, setup.f_l, setup.f_r)
            gmax = max(float(np.max(np.abs(gam))), 1e-14)
            dt = cfl * dx / gmax
            remaining = target - state.t
            landing = dt >= remaining
            if landing:
                dt = remaining
            state = _advance(state, dt, gam, du, dfh, entropy_delta)
            if landing:
                state = replace(state, t=target)
            if not np.all(np.isfinite(state.u)):
                raise BlowUpError(
                    f"non-finite cell values at t = {state.t:.6g}; "
                    "at fixed dx the spike must stay finite"
                )
        snaps.append(state)
    return snaps


def write_snapshot_csv(state: GridState, path) -> None:
    """Dump one snapshot as CSV `x,u,h,t` with 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,u,h,t\n")
        t = state.t
        for x, u, h in zip(state.centers, state.u, state.h):
            fh.write(f"{x:.17g},{u:.17g},{h:.17g},{t:.17g}\n")


def read_snapshot_csv(path) -> GridState:
    """Rebuild a GridState from a snapshot CSV."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    x = np.atleast_1d(data["x"])
    u = np.atleast_1d(data["u"])
    h = np.atleast_1d(data["h"])
    t = float(np.atleast_1d(data["t"])[0])
    dx = float(x[1] - x[0])
    return GridState(float(x[0]) - dx / 2.0, dx, u, h, t)
