"""Initial-condition library."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .elliptic import solve_phi
from .grid import GridSpec, ScalarField, State

IC_NAMES = ("gaussian_swirl", "dipole", "random_smooth")
TRUNCATION = 1e-14


class SupportError(ValueError):
    pass


@dataclass(frozen=True)
class ICSpec:
    name: str = "gaussian_swirl"
    amplitude: float = 1.0
    width: float = 0.5
    r0: float = 0.0
    z0: Optional[float] = None       # defaults to Lz / 2
    separation: Optional[float] = None  # dipole spacing, defaults to 2 * width
    modes: int = 3                   # random_smooth: highest z wavenumber
    seed: int = 0


def _bump(rr, zz, r0, zc, w, Lz):
    dz = (zz - zc + 0.5 * Lz) % Lz - 0.5 * Lz
    # mirror image across the axis keeps the profile even in r
    return 0.5 * (np.exp(-((rr - r0) ** 2 + dz**2) / w**2) + np.exp(-((rr + r0) ** 2 + dz**2) / w**2))


def _truncate(a, grid: GridSpec, name: str) -> np.ndarray:
    scale = np.abs(a).max()
    if scale == 0:
        return a
    a = np.where(np.abs(a) < TRUNCATION * scale, 0.0, a)
    outside = grid.r >= 0.5 * grid.R
    if np.any(a[outside] != 0.0):
        raise SupportError(f"{name}: initial data not supported in r < R/2 "
                           f"(reduce the width or enlarge R)")
    return a


def make_ic(spec: ICSpec, grid: GridSpec) -> State:
    rr, zz = grid.mesh()
    z0 = 0.5 * grid.Lz if spec.z0 is None else spec.z0
    A, w = spec.amplitude, spec.width
    if spec.name == "gaussian_swirl":
        u1 = A * _bump(rr, zz, spec.r0, z0, w, grid.Lz)
        w1 = np.zeros(grid.shape)
    elif spec.name == "dipole":
        d = 2.0 * w if spec.separation is None else spec.separation
        u1 = np.zeros(grid.shape)
        w1 = A * (_bump(rr, zz, spec.r0, z0 + 0.5 * d, w, grid.Lz)
                  - _bump(rr, zz, spec.r0, z0 - 0.5 * d, w, grid.Lz))
    elif spec.name == "random_smooth":
        u1, w1 = _random_smooth(rr, zz, grid, spec)
    else:
        raise ValueError(f"unknown initial condition {spec.name!r}; choose from {IC_NAMES}")
    u1 = _truncate(u1, grid, spec.name)
    w1 = _truncate(w1, grid, spec.name)
    w1f = ScalarField(grid, w1)
    return State(ScalarField(grid, u1), w1f, solve_phi(w1f), 0.0)


def _random_smooth(rr, zz, grid, spec: ICSpec):
    """Band-limited in z (wavenumbers 0..modes), Gaussian-profiled in r."""
    rng = np.random.default_rng(spec.seed)
    k = 2.0 * np.pi / grid.Lz
    out = []
    for _ in range(2):
        f = np.zeros(grid.shape)
        for m in range(spec.modes + 1):
            a, b = rng.normal(size=2) / (1.0 + m)
            wm = spec.width * rng.uniform(0.5, 1.0)
            c = rng.uniform(-1.0, 1.0) / wm**2
            radial = (1.0 + c * rr**2) * np.exp(-(rr**2) / wm**2)
            f += (a * np.cos(m * k * zz) + b * np.sin(m * k * zz)) * radial
        out.append(spec.amplitude * f)
    return out[0], out[1]
