"""The operator L = d_rr + (3/r) d_r + d_zz and the stream-function solve -L phi1 = omega1.

The solver transforms in z (real FFT), then solves one tridiagonal system in r
per Fourier mode with a precomputed Thomas factorization.  Boundary conditions:
even parity at the axis, phi1 = 0 at r = R, periodic in z.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import stencils as st
from .grid import EVEN, ODD, GridSpec, ScalarField, weighted_lp_norm


class SingularSystemError(np.linalg.LinAlgError):
    pass


def apply_L(f: ScalarField) -> ScalarField:
    if f.parity != EVEN:
        raise ValueError("apply_L requires an even-parity field")
    g = f.grid
    return ScalarField(g, st.lap_cyl(f.values, g.hr, g.hz, g.r), EVEN)


def z_symbol(grid: GridSpec) -> np.ndarray:
    """Eigenvalues of -d_zz (discrete) for each rfft mode."""
    m = np.arange(grid.Nz // 2 + 1)
    return (2.0 / grid.hz**2) * (1.0 - np.cos(2.0 * np.pi * m / grid.Nz))


@dataclass(frozen=True)
class EllipticWorkspace:
    """Per-mode Thomas factors for -L on rows 0..Nr-2 (row Nr-1 is the wall)."""

    grid: GridSpec
    sub: np.ndarray = field(repr=False)   # (n,)   coefficient of row i-1
    cprime: np.ndarray = field(repr=False)  # (n, M) modified super-diagonal
    inv: np.ndarray = field(repr=False)     # (n, M) reciprocal pivots

    @classmethod
    def build(cls, grid: GridSpec) -> "EllipticWorkspace":
        n = grid.Nr - 1
        h2 = grid.hr**2
        i = np.arange(n, dtype=np.float64)
        sub = np.zeros(n)
        sup = np.zeros(n)
        diag0 = np.full(n, 2.0 / h2)
        sub[1:] = -(1.0 - 1.5 / i[1:]) / h2
        sup[1:] = -(1.0 + 1.5 / i[1:]) / h2
        # axis row: -4 d_rr with the even ghost, i.e. -8 (f1 - f0) / hr^2
        diag0[0] = 8.0 / h2
        sup[0] = -8.0 / h2
        sup[-1] = 0.0  # couples to the Dirichlet wall value

        lam = z_symbol(grid)
        diag = diag0[:, None] + lam[None, :]
        cprime = np.empty_like(diag)
        inv = np.empty_like(diag)
        prev = np.zeros(lam.shape)
        for k in range(n):
            pivot = diag[k] - sub[k] * prev
            if np.any(np.abs(pivot) < 1e-300) or not np.all(np.isfinite(pivot)):
                raise SingularSystemError(f"zero pivot in row {k}")
            inv[k] = 1.0 / pivot
            prev = sup[k] * inv[k]
            cprime[k] = prev
        return cls(grid, sub, cprime, inv)

    def _solve_modes(self, rhs: np.ndarray, cols: slice) -> np.ndarray:
        n = self.grid.Nr - 1
        d = rhs[:n, cols]
        cp = self.cprime[:, cols]
        inv = self.inv[:, cols]
        x = np.empty_like(d)
        x[0] = d[0] * inv[0]
        for k in range(1, n):
            x[k] = (d[k] - self.sub[k] * x[k - 1]) * inv[k]
        for k in range(n - 2, -1, -1):
            x[k] -= cp[k] * x[k + 1]
        return x

    def solve_hat(self, rhs_hat: np.ndarray, workers: int = 1) -> np.ndarray:
        M = rhs_hat.shape[1]
        out = np.zeros_like(rhs_hat)
        n = self.grid.Nr - 1
        if workers <= 1:
            out[:n] = self._solve_modes(rhs_hat, slice(0, M))
            return out
        bounds = np.linspace(0, M, min(workers, M) + 1).astype(int)
        slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ThreadPoolExecutor(max_workers=len(slices)) as pool:
            for s, x in zip(slices, pool.map(lambda s: self._solve_modes(rhs_hat, s), slices)):
                out[:n, s] = x
        return out


_WS_CACHE: dict = {}


def workspace(grid: GridSpec) -> EllipticWorkspace:
    """Cached workspace for ``grid`` (read-only after construction)."""
    ws = _WS_CACHE.get(grid)
    if ws is None:
        ws = _WS_CACHE[grid] = EllipticWorkspace.build(grid)
    return ws


def solve_phi(omega1: ScalarField, ws: EllipticWorkspace | None = None, workers: int = 1) -> ScalarField:
    if omega1.parity != EVEN:
        raise ValueError("solve_phi requires an even-parity omega1")
    g = omega1.grid
    ws = ws or workspace(g)
    if ws.grid != g:
        raise ValueError("workspace grid does not match field grid")
    return ScalarField(g, solve_array(omega1.values, ws, workers), EVEN)


def solve_array(w: np.ndarray, ws: EllipticWorkspace, workers: int = 1) -> np.ndarray:
    w_hat = np.fft.rfft(w, axis=1)
    phi = np.fft.irfft(ws.solve_hat(w_hat, workers), n=ws.grid.Nz, axis=1)
    phi[-1] = 0.0
    return phi


def grad(f: ScalarField) -> tuple[ScalarField, ScalarField]:
    """Centered (f_r, f_z); f_r inherits the opposite parity of f."""
    g = f.grid
    fr = st.d_r(f.values, g.hr, f.parity)
    fz = st.d_z(f.values, g.hz)
    return ScalarField(g, fr, ODD if f.parity == EVEN else EVEN), ScalarField(g, fz, f.parity)


def hessian_sq(a: np.ndarray, grid: GridSpec) -> np.ndarray:
    """|D^2 g|^2 of an even axisymmetric function viewed in R^3.

    g_rr^2 + 2 g_rz^2 + g_zz^2 + (g_r / r)^2, with g_r / r -> g_rr on the axis.
    """
    ar = st.d_r(a, grid.hr)
    arr = st.d_rr(a, grid.hr)
    arz = st.d_z(ar, grid.hz)
    azz = st.d_zz(a, grid.hz)
    ar_over_r = st.over_r(ar, grid.r, arr[0])
    return arr**2 + 2 * arz**2 + azz**2 + ar_over_r**2


def lemma2_ratios(omega1: ScalarField, ws: EllipticWorkspace | None = None) -> tuple[float, float]:
    """Observed ||D^2 phi1|| / ||omega1|| and ||D^2 phi1_z|| / ||grad omega1|| (weighted L2)."""
    g = omega1.grid
    phi = solve_phi(omega1, ws).values
    phi_z = st.d_z(phi, g.hz)
    w_r, w_z = grad(omega1)
    grad_w = ScalarField(g, np.sqrt(w_r.values**2 + w_z.values**2))
    hess = ScalarField(g, np.sqrt(hessian_sq(phi, g)))
    hess_z = ScalarField(g, np.sqrt(hessian_sq(phi_z, g)))
    return (weighted_lp_norm(hess, 2) / weighted_lp_norm(omega1, 2),
            weighted_lp_norm(hess_z, 2) / weighted_lp_norm(grad_w, 2))
