"""Energy, modified circulation, regularity-criterion monitors and scaling checks.

Velocity conventions: ``biot_savart`` returns the eps-scaled velocity that
advects the model.  The energy functional and the rescaled field ``v`` use the
unscaled poloidal velocity (u^r/eps, u^z/eps), which is what the energy
balance dE/dt = -2 nu D is exact for.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import stencils as st
from .dynamics import biot_savart, divergence
from .elliptic import solve_phi
from .grid import EVEN, GridSpec, ModelParams, ScalarField, State, integrate, sup_norm, weighted_lp_norm

EPS_PRIME = 20.0 / 19.0
ESCAPE_RADIUS = 0.9

CSV_COLUMNS = ("t", "E_eps", "D_eps", "gamma_sup", "omega1_l2", "u1_lq",
               "bkm_proxy", "ps_p4", "div_sup", "support_escape")


@dataclass(frozen=True)
class MonitorConfig:
    eps_prime: float = EPS_PRIME
    prodi_serrin_pairs: tuple = ((4.0, 8.0),)
    stride: int = 1

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not 0 < self.eps_prime < 4:
            raise ValueError(f"eps_prime must lie in (0,4), got {self.eps_prime}")
        for p, q in self.prodi_serrin_pairs:
            if not p > 3:
                raise ValueError(f"Prodi-Serrin exponent p must exceed 3, got {p}")
            lhs = (0.0 if math.isinf(p) else 3.0 / p) + 2.0 / q
            if abs(lhs - 1.0) > 1e-12:
                raise ValueError(f"pair (p={p}, q={q}) violates 3/p + 2/q = 1")

    @property
    def q(self) -> float:
        return 4.0 - self.eps_prime


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    E_eps: float
    D_eps: float
    gamma_sup: float
    omega1_l2: float
    u1_lq: float
    bkm_proxy: float
    prodi_serrin: tuple = field(default=())
    div_sup: float = 0.0
    support_escape: float = 0.0

    @property
    def ps_p4(self) -> float:
        for p, val in self.prodi_serrin:
            if p == 4:
                return val
        return float("nan")

    def row(self) -> list[float]:
        return [getattr(self, c) for c in CSV_COLUMNS]


def _check_energy_eps(eps):
    if not eps < 2:
        raise ValueError(f"energy requires epsilon < 2, got {eps}")


def _poloidal(phi, g: GridSpec):
    """Unscaled poloidal velocity -r phi_z, 2 phi + r phi_r and their derivatives."""
    r = g.r[:, None]
    p_r = st.d_r(phi, g.hr)
    p_z = st.d_z(phi, g.hz)
    p_rr = st.d_rr(phi, g.hr)
    p_zz = st.d_zz(phi, g.hz)
    p_rz = st.d_r(p_z, g.hr)
    ur = -r * p_z
    uz = 2.0 * phi + r * p_r
    grad_sq = ((-p_z - r * p_rz) ** 2 + (r * p_zz) ** 2
               + (3.0 * p_r + r * p_rr) ** 2 + (2.0 * p_z + r * p_rz) ** 2)
    return ur, uz, p_z, grad_sq


def energy(state: State, params: ModelParams) -> tuple[float, float]:
    """Modified energy E_eps and dissipation D_eps, so that dE/dt = -2 nu D.

    E = int (u^r)^2 + (u^z)^2 + (u^theta)^2 / (2 - eps)            r dr dz
    D = int |grad u^r|^2 + |grad u^z|^2 + (u^r/r)^2
            + (|grad u^theta|^2 + (u^theta/r)^2) / (2 - eps)       r dr dz
    with the unscaled poloidal velocity and u^theta = r u1.
    """
    eps = params.epsilon
    _check_energy_eps(eps)
    g = state.grid
    c = 1.0 / (2.0 - eps)
    r = g.r[:, None]
    u1 = state.u1.values
    ur, uz, ur_over_r, grad_pol = _poloidal(state.phi1.values, g)
    E = integrate(ur**2 + uz**2 + c * (r * u1) ** 2, g)
    u1_r = st.d_r(u1, g.hr)
    u1_z = st.d_z(u1, g.hz)
    grad_th = (u1 + r * u1_r) ** 2 + (r * u1_z) ** 2
    D = integrate(grad_pol + ur_over_r**2 + c * (grad_th + u1**2), g)
    return E, D


def _uniform_times(t):
    t = np.asarray(t, dtype=float)
    d = np.diff(t)
    if np.any(d <= 0) or np.ptp(d) > 1e-9 * d.mean():
        raise ValueError("samples must have a uniform positive time stride")
    return t


def energy_identity_residual(records: Sequence[DiagnosticsRecord], params: ModelParams) -> float:
    """max_k |(E[k+1] - E[k-1]) / (2 dt) + 2 nu D[k]| / E(0) over interior records."""
    if len(records) < 3:
        raise ValueError("energy identity residual needs at least 3 records")
    t = _uniform_times([rec.t for rec in records])
    E = np.array([rec.E_eps for rec in records])
    D = np.array([rec.D_eps for rec in records])
    if E[0] == 0:
        return 0.0
    dEdt = (E[2:] - E[:-2]) / (t[2:] - t[:-2])
    return float(np.max(np.abs(dEdt + 2.0 * params.nu * D[1:-1])) / E[0])


def gamma_field(u1: ScalarField, eps: float) -> ScalarField:
    """Modified circulation u1 * r^(2/eps); zero on the axis."""
    if not eps > 0:
        raise ValueError(f"gamma_field requires eps > 0, got {eps}")
    g = u1.grid
    return ScalarField(g, u1.values * (g.r ** (2.0 / eps))[:, None], EVEN)


def _gamma_defect(states, params: ModelParams):
    eps, nu = params.epsilon, params.nu
    g = states[0].grid
    s0, s1, s2 = states
    G0, G1, G2 = (gamma_field(s.u1, eps).values for s in states)
    Gt = (G2 - G0) / (s2.t - s0.t)
    v = biot_savart(s1.phi1, eps)
    h, r = g.hr, g.r[:, None]
    Gr = np.zeros_like(G1)
    Grr = np.zeros_like(G1)
    Gr[1:-1] = (G1[2:] - G1[:-2]) / (2 * h)
    Grr[1:-1] = (G1[2:] - 2 * G1[1:-1] + G1[:-2]) / h**2
    a = 2.0 / eps
    with np.errstate(divide="ignore", invalid="ignore"):
        visc = (Grr + Gr / r + st.d_zz(G1, g.hz)
                - (2.0 / r) * (a - 1.0) * Gr + a * (a - 2.0) * G1 / r**2)
    return Gt + v.ur.values * Gr + v.uz.values * st.d_z(G1, g.hz) - nu * visc


def gamma_evolution_residual(samples: Sequence[State], params: ModelParams, r_min: float) -> float:
    """Sup over r >= r_min (interior rows) of the defect of the circulation equation

        G_t + u^r G_r + u^z G_z = nu (Lap - (2/r)(2/eps - 1) d_r + (2/eps)(2/eps - 2)/r^2) G

    evaluated at each interior sample with centered time differences.
    """
    if len(samples) < 3:
        raise ValueError("circulation residual needs at least 3 samples")
    _uniform_times([s.t for s in samples])
    g = samples[0].grid
    if r_min < 4 * g.hr * (1 - 1e-12):
        raise ValueError(f"r_min={r_min} must be at least 4 hr = {4 * g.hr}")
    rows = (g.r >= r_min * (1 - 1e-12))
    rows[-1] = False
    worst = 0.0
    for k in range(1, len(samples) - 1):
        d = _gamma_defect(samples[k - 1:k + 2], params)
        worst = max(worst, float(np.abs(d[rows]).max()) if rows.any() else 0.0)
    return worst


def rescaled_velocity(state: State, eps: float):
    """Components (v^r, v^z, v^theta) of v = u^r/eps e_r + u^z/eps e_z + u^theta/eps^(3/2) e_theta.

    At eps = 0 the rescaling is singular; the unscaled model velocity
    (0, 0, u^theta) is reported instead.
    """
    g = state.grid
    r = g.r[:, None]
    utheta = r * state.u1.values
    if eps == 0:
        z = np.zeros(g.shape)
        return z, z, utheta
    ur, uz, _, _ = _poloidal(state.phi1.values, g)
    return ur, uz, utheta / eps**1.5


def _curl_magnitude(state: State, eps: float) -> np.ndarray:
    g = state.grid
    r = g.r[:, None]
    u1 = state.u1.values
    if eps == 0:
        pol, s = 0.0, 1.0
    else:
        pol, s = 1.0, eps**-1.5
    w_theta = pol * r * state.omega1.values
    w_r = -s * r * st.d_z(u1, g.hz)
    w_z = s * (2.0 * u1 + r * st.d_r(u1, g.hr))
    return np.sqrt(w_r**2 + w_theta**2 + w_z**2)


def support_escape(state: State, frac: float = ESCAPE_RADIUS) -> float:
    g = state.grid
    dens = state.u1.values**2 + state.omega1.values**2
    total = integrate(dens, g)
    if total == 0:
        return 0.0
    outer = np.where((g.r > frac * g.R)[:, None], dens, 0.0)
    return integrate(outer, g) / total


def criteria_monitor(state: State, params: ModelParams, cfg: MonitorConfig = MonitorConfig(),
                     workers: int = 1) -> DiagnosticsRecord:
    eps = params.epsilon
    g = state.grid
    E, D = energy(state, params)
    gamma_sup = sup_norm(gamma_field(state.u1, eps)) if eps > 0 else float("nan")
    vr, vz, vt = rescaled_velocity(state, eps)
    vmag = ScalarField(g, np.sqrt(vr**2 + vz**2 + vt**2))
    ps = tuple((p, sup_norm(vmag) if math.isinf(p) else weighted_lp_norm(vmag, p, workers))
               for p, _ in cfg.prodi_serrin_pairs)
    div = divergence(biot_savart(state.phi1, eps))
    return DiagnosticsRecord(
        t=state.t,
        E_eps=E,
        D_eps=D,
        gamma_sup=gamma_sup,
        omega1_l2=weighted_lp_norm(state.omega1, 2, workers),
        u1_lq=weighted_lp_norm(state.u1, cfg.q, workers),
        bkm_proxy=float(_curl_magnitude(state, eps).max()),
        prodi_serrin=ps,
        div_sup=sup_norm(div),
        support_escape=support_escape(state),
    )


def _bilinear(a: np.ndarray, src: GridSpec, r_pts: np.ndarray, z_pts: np.ndarray) -> np.ndarray:
    """Sample ``a`` at (r_pts[i], z_pts[j]); periodic in z, zero beyond r = R."""
    fr = r_pts / src.hr
    fz = z_pts / src.hz
    # snap coordinates that are integral up to rounding
    fr = np.where(np.abs(fr - np.rint(fr)) < 1e-9, np.rint(fr), fr)
    fz = np.where(np.abs(fz - np.rint(fz)) < 1e-9, np.rint(fz), fz)
    i0 = np.floor(fr).astype(int)
    j0 = np.floor(fz).astype(int)
    tr = (fr - i0)[:, None]
    tz = (fz - j0)[None, :]
    padded = np.vstack([a, np.zeros((2, a.shape[1]))])
    i0c = np.clip(i0, 0, src.Nr)
    i1c = np.clip(i0 + 1, 0, src.Nr)
    j0w = j0 % src.Nz
    j1w = (j0 + 1) % src.Nz
    a00 = padded[np.ix_(i0c, j0w)]
    a01 = padded[np.ix_(i0c, j1w)]
    a10 = padded[np.ix_(i1c, j0w)]
    a11 = padded[np.ix_(i1c, j1w)]
    return ((1 - tr) * (1 - tz) * a00 + (1 - tr) * tz * a01
            + tr * (1 - tz) * a10 + tr * tz * a11)


def _support_extent(a: np.ndarray, g: GridSpec, zc: float, tol: float):
    mask = np.abs(a) > tol * max(np.abs(a).max(), 1e-300)
    if not mask.any():
        return 0.0, 0.0
    rr, zz = g.mesh()
    dz = np.abs((zz - zc + 0.5 * g.Lz) % g.Lz - 0.5 * g.Lz)
    return float(rr[mask].max()), float(dz[mask].max())


def scaling_transform(state: State, tau: float, target: GridSpec | None = None,
                      z_center: float | None = None, support_tol: float = 1e-8) -> State:
    """Apply u1 -> tau^-1 u1(x / tau^1/2), omega1 -> tau^-3/2 omega1(x / tau^1/2), t -> tau t.

    The dilation is centred on the axis and on ``z_center`` (default Lz/2 of
    the source grid).  Values are resampled onto ``target`` by bilinear
    interpolation and phi1 is re-solved.  Values above ``support_tol`` (relative
    to the field maximum) that would land outside ``target`` raise ValueError.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    src = state.grid
    target = target or src
    zc = 0.5 * src.Lz if z_center is None else z_center
    zc_t = zc * target.Lz / src.Lz if z_center is None else z_center
    s = math.sqrt(tau)
    for a in (state.u1.values, state.omega1.values):
        r_ext, z_ext = _support_extent(a, src, zc, support_tol)
        if r_ext * s > target.R * (1 - 1e-12) or z_ext * s >= 0.5 * target.Lz:
            raise ValueError("rescaled support escapes the target grid")
    r_pts = target.r / s
    dz_t = (target.z - zc_t + 0.5 * target.Lz) % target.Lz - 0.5 * target.Lz
    z_pts = (zc + dz_t / s) % src.Lz
    u1 = _bilinear(state.u1.values, src, r_pts, z_pts) / tau
    w1 = _bilinear(state.omega1.values, src, r_pts, z_pts) / tau**1.5
    u1[-1] = 0.0
    w1[-1] = 0.0
    wf = ScalarField(target, w1)
    return State(ScalarField(target, u1), wf, solve_phi(wf), tau * state.t)
