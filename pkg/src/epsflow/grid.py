"""Computational grid, axis-parity scalar fields and r-weighted quadrature.

The (r, z) half-plane is truncated to [0, R] x [0, Lz).  Radial nodes include
the axis r = 0; z is periodic.  Every integral uses the measure r dr dz.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

EVEN = "even"
ODD = "odd"


@dataclass(frozen=True)
class GridSpec:
    Nr: int
    Nz: int
    R: float
    Lz: float

    def __post_init__(self):
        if int(self.Nr) != self.Nr or self.Nr < 3:
            raise ValueError(f"Nr must be an integer >= 3, got {self.Nr}")
        if int(self.Nz) != self.Nz or self.Nz < 2:
            raise ValueError(f"Nz must be an integer >= 2, got {self.Nz}")
        if not (np.isfinite(self.R) and self.R > 0):
            raise ValueError(f"R must be positive, got {self.R}")
        if not (np.isfinite(self.Lz) and self.Lz > 0):
            raise ValueError(f"Lz must be positive, got {self.Lz}")

    @property
    def hr(self) -> float:
        return self.R / (self.Nr - 1)

    @property
    def hz(self) -> float:
        return self.Lz / self.Nz

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nr, self.Nz)

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.Nr) * self.hr

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.Nz) * self.hz

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as (Nr, Nz) arrays, r varying along axis 0."""
        return np.meshgrid(self.r, self.z, indexing="ij")

    def quadrature_weights(self) -> np.ndarray:
        """Weights w_i such that sum_ij w_i f_ij approximates the r dr dz integral.

        Trapezoid in r applied to r*f (so the axis node carries zero weight),
        rectangle rule in periodic z.
        """
        w = self.r * self.hr
        w[-1] *= 0.5
        return w * self.hz


def make_grid(Nr: int, Nz: int, R: float, Lz: float) -> GridSpec:
    return GridSpec(int(Nr), int(Nz), float(R), float(Lz))


@dataclass(frozen=True)
class ScalarField:
    """Samples of an axisymmetric scalar, shape (Nr, Nz).

    ``parity`` states how the field extends to r < 0: ``"even"`` for the
    transformed variables u1, omega1, phi1, ``"odd"`` for quantities such
    as u^r or u^theta.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    parity: str = EVEN

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"unknown parity {self.parity!r}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        vals = vals.copy() if vals is self.values else vals
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: GridSpec, parity: str = EVEN) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), parity)

    @classmethod
    def from_function(cls, grid: GridSpec, func, parity: str = EVEN) -> "ScalarField":
        rr, zz = grid.mesh()
        return cls(grid, np.broadcast_to(func(rr, zz), grid.shape).astype(np.float64), parity)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * c, self.parity)

    __rmul__ = __mul__


def ghost_even(f: ScalarField, i: int) -> np.ndarray:
    """Row ``i`` of ``f``, reflecting evenly across the axis for i < 0."""
    if f.parity != EVEN:
        raise ValueError("ghost_even requires an even-parity field")
    Nr = f.grid.Nr
    if not -(Nr - 1) <= i < Nr:
        raise IndexError(f"row {i} outside [-{Nr - 1}, {Nr - 1}]")
    return f.values[abs(i)]


def _weighted_sum(g: np.ndarray, w: np.ndarray, workers: int) -> float:
    if workers <= 1:
        return float(np.dot(w, g.sum(axis=1)))
    chunks = np.array_split(np.arange(g.shape[0]), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda idx: float(np.dot(w[idx], g[idx].sum(axis=1))), chunks)
        return float(sum(parts))


def integrate(values: np.ndarray, grid: GridSpec, workers: int = 1) -> float:
    """Integral of a node-sampled array against r dr dz."""
    return _weighted_sum(np.asarray(values), grid.quadrature_weights(), workers)


def weighted_lp_norm(f: ScalarField, p: float, workers: int = 1) -> float:
    """(integral |f|^p r dr dz)^(1/p)."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    scale = a.max()
    if scale == 0.0:
        return 0.0
    # scale out the maximum so large p does not overflow
    s = integrate((a / scale) ** p, f.grid, workers)
    return float(scale * s ** (1.0 / p))


def sup_norm(f: ScalarField) -> float:
    return float(np.max(np.abs(f.values)))


@dataclass(frozen=True)
class ModelParams:
    epsilon: float = 1.5
    nu: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 2.0:
            raise ValueError(f"epsilon must lie in [0,2), got {self.epsilon}")
        if not self.nu >= 0.0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")


@dataclass(frozen=True)
class State:
    u1: ScalarField
    omega1: ScalarField
    phi1: ScalarField
    t: float = 0.0

    def __post_init__(self):
        g = self.u1.grid
        if self.omega1.grid != g or self.phi1.grid != g:
            raise ValueError("all state fields must share one grid")
        for name in ("u1", "omega1", "phi1"):
            if getattr(self, name).parity != EVEN:
                raise ValueError(f"{name} must have even parity")

    @property
    def grid(self) -> GridSpec:
        return self.u1.grid
