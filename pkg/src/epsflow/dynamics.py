"""Velocity recovery, right-hand sides, CFL control and RK4 time stepping.

Advection is written in convective form u . grad q; the stretching term
(u1^2)_z is differenced in conservative form.  Rows at r = R are held at zero.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import stencils as st
from .elliptic import EllipticWorkspace, solve_array, workspace
from .grid import EVEN, ODD, ModelParams, ScalarField, State

log = logging.getLogger(__name__)

DT_FLOOR_SPEED = 1e-12


class InstabilityError(RuntimeError):
    """A step produced non-finite values.

    ``last_state`` is the final valid state; ``t`` the time at which the
    failing step started; ``field`` names the first non-finite field.
    """

    def __init__(self, t, field, dt, last_state=None):
        super().__init__(f"non-finite {field} in step starting at t={t:.6g} (dt={dt:.3g})")
        self.t = t
        self.field = field
        self.dt = dt
        self.last_state = last_state


@dataclass(frozen=True)
class Velocity:
    ur: ScalarField
    uz: ScalarField

    def speed_max(self) -> float:
        return float(max(np.abs(self.ur.values).max(), np.abs(self.uz.values).max()))


@dataclass(frozen=True)
class StepControl:
    cfl_adv: float = 0.5
    cfl_diff: float = 0.2
    dt_max: float = 1e-2

    def __post_init__(self):
        for name in ("cfl_adv", "cfl_diff"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0,1], got {v}")
        if not self.dt_max > 0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")


def _check_eps(eps):
    if not 0.0 <= eps < 2.0:
        raise ValueError(f"epsilon must lie in [0,2), got {eps}")


def _velocity_arrays(phi, grid, eps):
    r = grid.r[:, None]
    ur = -eps * r * st.d_z(phi, grid.hz)
    uz = eps * (2.0 * phi + r * st.d_r(phi, grid.hr))
    return ur, uz


def biot_savart(phi1: ScalarField, eps: float) -> Velocity:
    """u^r = -eps r phi1_z,  u^z = 2 eps phi1 + eps r phi1_r."""
    _check_eps(eps)
    if phi1.parity != EVEN:
        raise ValueError("phi1 must have even parity")
    ur, uz = _velocity_arrays(phi1.values, phi1.grid, eps)
    return Velocity(ScalarField(phi1.grid, ur, ODD), ScalarField(phi1.grid, uz, EVEN))


def divergence_array(ur, uz, grid):
    r = grid.r
    h = grid.hr
    rur = r[:, None] * ur
    out = np.empty_like(ur)
    out[1:-1] = (rur[2:] - rur[:-2]) / (2 * h * r[1:-1, None])
    out[-1] = (3 * rur[-1] - 4 * rur[-2] + rur[-3]) / (2 * h * r[-1])
    # axis: (1/r)(r u^r)_r -> 2 u^r_r, u^r odd so the ghost row is -u^r(h)
    out[0] = 2.0 * ur[1] / h
    return out + st.d_z(uz, grid.hz)


def divergence(v: Velocity) -> ScalarField:
    g = v.ur.grid
    return ScalarField(g, divergence_array(v.ur.values, v.uz.values, g), EVEN)


def _rhs_arrays(u1, w1, phi, grid, params: ModelParams, workers=1):
    ur, uz = _velocity_arrays(phi, grid, params.epsilon)
    hr, hz, r = grid.hr, grid.hz, grid.r
    nu = params.nu

    def du1():
        out = -ur * st.d_r(u1, hr) - uz * st.d_z(u1, hz) + 2.0 * u1 * st.d_z(phi, hz)
        if nu:
            out += nu * st.lap_cyl(u1, hr, hz, r)
        out[-1] = 0.0
        return out

    def dw1():
        out = -ur * st.d_r(w1, hr) - uz * st.d_z(w1, hz) + st.d_z(u1 * u1, hz)
        if nu:
            out += nu * st.lap_cyl(w1, hr, hz, r)
        out[-1] = 0.0
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            f1, f2 = pool.submit(du1), pool.submit(dw1)
            return f1.result(), f2.result()
    return du1(), dw1()


def rhs(state: State, params: ModelParams, validate: bool = False,
        tol: float = 1e-8) -> tuple[ScalarField, ScalarField]:
    """Time derivatives (du1/dt, domega1/dt).

    With ``validate`` the stored phi1 is checked against omega1 through -L
    and a stale stream function raises ``ValueError``.
    """
    g = state.grid
    if validate:
        lap = st.lap_cyl(state.phi1.values, g.hr, g.hz, g.r)
        scale = max(np.abs(state.omega1.values).max(), 1.0)
        if np.abs(lap[:-1] + state.omega1.values[:-1]).max() > tol * scale:
            raise ValueError("phi1 is stale: -L phi1 != omega1")
    a, b = _rhs_arrays(state.u1.values, state.omega1.values, state.phi1.values, g, params)
    return ScalarField(g, a, EVEN), ScalarField(g, b, EVEN)


def cfl_dt(state: State, params: ModelParams, ctl: StepControl) -> float:
    g = state.grid
    h = min(g.hr, g.hz)
    ur, uz = _velocity_arrays(state.phi1.values, g, params.epsilon)
    speed = max(np.abs(ur).max(), np.abs(uz).max(), DT_FLOOR_SPEED)
    dt = min(ctl.cfl_adv * h / speed, ctl.dt_max)
    if params.nu > 0:
        dt = min(dt, ctl.cfl_diff * h * h / params.nu)
    return float(dt)


def _first_nonfinite(**arrays):
    for name, a in arrays.items():
        if not np.all(np.isfinite(a)):
            return name
    return None


def step_rk4(state: State, params: ModelParams, dt: float,
             ws: Optional[EllipticWorkspace] = None, workers: int = 1) -> State:
    """One classical RK4 step; phi1 is re-solved from omega1 at every stage."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = state.grid
    ws = ws or workspace(g)

    u0, w0, p0 = state.u1.values, state.omega1.values, state.phi1.values
    with np.errstate(all="ignore"):
        k1u, k1w = _rhs_arrays(u0, w0, p0, g, params, workers)
        u, w = u0 + 0.5 * dt * k1u, w0 + 0.5 * dt * k1w
        k2u, k2w = _rhs_arrays(u, w, _phi(w, g, ws, workers), g, params, workers)
        u, w = u0 + 0.5 * dt * k2u, w0 + 0.5 * dt * k2w
        k3u, k3w = _rhs_arrays(u, w, _phi(w, g, ws, workers), g, params, workers)
        u, w = u0 + dt * k3u, w0 + dt * k3w
        k4u, k4w = _rhs_arrays(u, w, _phi(w, g, ws, workers), g, params, workers)
        u1 = u0 + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        w1 = w0 + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    bad = _first_nonfinite(u1=u1, omega1=w1)
    if bad:
        raise InstabilityError(state.t, bad, dt, state)
    phi = _phi(w1, g, ws, workers)
    bad = _first_nonfinite(phi1=phi)
    if bad:
        raise InstabilityError(state.t, bad, dt, state)
    return State(ScalarField(g, u1), ScalarField(g, w1), ScalarField(g, phi), state.t + dt)


def _phi(w, g, ws, workers):
    if not np.all(np.isfinite(w)):
        return np.full_like(w, np.nan)
    return solve_array(w, ws, workers)


def evolve(state0: State, params: ModelParams, T: float, ctl: StepControl = StepControl(),
           observer: Optional[Callable[[State, int], None]] = None, stride: int = 1,
           workers: int = 1, max_steps: Optional[int] = None,
           until: Optional[float] = None) -> State:
    """Advance ``state0`` by a duration ``T``; the last step is clipped to land on t0 + T.

    ``until`` gives the absolute end time instead (``T`` is then ignored), which
    keeps restarted runs landing on exactly the same final time.

    ``observer(state, step)`` sees the initial state, every ``stride``-th state
    and the final state.  Failures raise ``InstabilityError``.
    """
    t_end = state0.t + T if until is None else until
    if not t_end > state0.t:
        raise ValueError(f"end time {t_end} must exceed start time {state0.t}")
    ws = workspace(state0.grid)
    state = state0
    n = 0
    if observer:
        observer(state, 0)
    while state.t < t_end:
        dt = cfl_dt(state, params, ctl)
        last = state.t + dt >= t_end
        if last:
            dt = t_end - state.t
        state = step_rk4(state, params, dt, ws, workers)
        if last:
            state = State(state.u1, state.omega1, state.phi1, t_end)
        n += 1
        if observer and (last or n % stride == 0):
            observer(state, n)
        if max_steps is not None and n >= max_steps and not last:
            raise RuntimeError(f"exceeded {max_steps} steps before reaching t={t_end}")
    log.debug("evolve: %d steps to t=%g", n, state.t)
    return state
