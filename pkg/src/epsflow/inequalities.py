"""Numerical checks of the functional inequalities behind the regularity argument.

* 1D Hardy inequality with power weights,
* the radial cutoff psi and its dilations,
* the weighted cutoff inequality bounding int |u1|^eps' f^2 by a gradient term
  and a far-field term, with constant C1(r1),
* Gagliardo-Nirenberg type interpolation ratios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import stencils as st
from .elliptic import hessian_sq
from .grid import ScalarField, integrate, sup_norm, weighted_lp_norm

# Front constant traced through the proof of the cutoff inequality:
# splitting (a+b)^2 <= 2a^2 + 2b^2 gives 2, Hardy with lambda=2 gives
# (eps/(eps-eps'))^2, |d(f psi)|^2 <= 2|f_r|^2 + 2 f^2 |psi_r|^2 gives 2,
# r^(2-2eps'/eps) <= (2 r1)^(2-2eps'/eps) <= 4 r1^(2-2eps'/eps), |psi_r| <= 2/r1.
# Near field: 2*2*4 = 16 on the gradient term, 2*2*4*4 = 64 on the far term;
# the outer region adds 2 (times ((eps-eps')/eps)^2 <= 1 once the common
# factor (eps/(eps-eps'))^2 is pulled out).  66 covers both coefficients.
C_DEFAULT = 66.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def power_weighted_trapz(r: np.ndarray, g: np.ndarray, s: float) -> float:
    """Integral of r^s * g over [r[0], r[-1]] with g piecewise linear between nodes.

    Exact for the weight (product trapezoid rule), so integrable singular
    weights at r = 0 are handled.  Returns inf for a divergent integral.
    """
    r = np.asarray(r, dtype=float)
    g = np.asarray(g, dtype=float)
    if r.ndim != 1 or r.shape != g.shape or np.any(np.diff(r) <= 0) or r[0] < 0:
        raise ValueError("r must be increasing, nonnegative and match g")
    a, b = r[:-1], r[1:]
    ga, gb = g[:-1], g[1:]
    live = (ga != 0) | (gb != 0)
    a, b, ga, gb = a[live], b[live], ga[live], gb[live]
    if a.size == 0:
        return 0.0
    total = 0.0

    near = (a == 0) | (b >= 1.5 * a)
    if np.any(near):
        an, bn, gan, gbn = a[near], b[near], ga[near], gb[near]
        for ai, bi, gai, gbi in zip(an, bn, gan, gbn):
            total += _linear_moment_exact(ai, bi, gai, gbi, s)

    far = ~near
    if np.any(far):
        af, bf = a[far], b[far]
        half = 0.5 * (bf - af)
        mid = 0.5 * (bf + af)
        x = mid[:, None] + half[:, None] * _GL_X[None, :]
        u = (x - af[:, None]) / (bf - af)[:, None]
        lin = ga[far][:, None] * (1 - u) + gb[far][:, None] * u
        total += float(np.sum(half[:, None] * _GL_W[None, :] * x**s * lin))
    return float(total)


def _power_int(a, b, p):
    """Integral of r^p over [a, b]."""
    if p == -1:
        return math.inf if a == 0 else math.log(b / a)
    if a == 0 and p < -1:
        return math.inf
    return (b ** (p + 1) - a ** (p + 1)) / (p + 1)


def _linear_moment_exact(a, b, ga, gb, s):
    # r^s * (ga (b - r) + gb (r - a)) / (b - a)
    out = 0.0
    if ga != 0:
        out += ga * (b * _power_int(a, b, s) - _power_int(a, b, s + 1)) / (b - a)
    if gb != 0:
        if a == 0:
            out += gb * _power_int(0.0, b, s + 1) / b
        else:
            out += gb * (_power_int(a, b, s + 1) - a * _power_int(a, b, s)) / (b - a)
    return out


def _cumtrapz(r, f):
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(r))
    return out


@dataclass(frozen=True)
class HardyCase:
    lam: float
    sigma: float
    r: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        if not self.lam > 1:
            raise ValueError(f"lambda must exceed 1, got {self.lam}")
        if self.sigma == 1:
            raise ValueError("sigma must differ from 1")
        f = np.asarray(self.f, dtype=float)
        if np.any(f < 0):
            raise ValueError("f must be nonnegative")
        if np.asarray(self.r).shape != f.shape:
            raise ValueError("r and f must have the same shape")


def hardy_sides(case: HardyCase) -> tuple[float, float]:
    """Both sides of  int r^-s F^lam dr <= (lam/|s-1|)^lam int r^-s (r f)^lam dr.

    F(r) = int_0^r f for sigma > 1 and -int_r^oo f for sigma < 1; f vanishes
    outside the sample interval, so the pieces of [0, oo) outside it are added
    in closed form.
    """
    lam, sig = case.lam, case.sigma
    r = np.asarray(case.r, dtype=float)
    f = np.asarray(case.f, dtype=float)
    rhs = (lam / abs(sig - 1)) ** lam * power_weighted_trapz(r, (r * f) ** lam, -sig)
    if not np.any(f > 0):
        return 0.0, 0.0
    if sig > 1:
        F = _cumtrapz(r, f)
        lhs = power_weighted_trapz(r, F**lam, -sig)
        lhs += F[-1] ** lam * r[-1] ** (1 - sig) / (sig - 1)
    else:
        F = _cumtrapz(r, f)
        F = F[-1] - F  # |F| = int_r^end f
        lhs = power_weighted_trapz(r, F**lam, -sig)
        if r[0] > 0:
            lhs += F[0] ** lam * r[0] ** (1 - sig) / (1 - sig)
    return float(lhs), float(rhs)


def hardy_power_family(a: float, sigma: float) -> tuple[float, float]:
    """Closed-form sides for lam = 2, f = r^(beta-1) on [a, 1], beta = (sigma-1)/2, sigma > 1.

    The ratio lhs/rhs stays below 1 and tends to 1 as a -> 0, which is the
    sharpness of the Hardy constant.
    """
    if not sigma > 1:
        raise ValueError("the power family needs sigma > 1")
    beta = 0.5 * (sigma - 1)
    ab = a**beta
    p = beta - sigma + 1
    main = (math.log(1 / a)
            - 2 * ab * (1 - a**p) / p
            + ab**2 * (1 - a ** (1 - sigma)) / (1 - sigma)) / beta**2
    tail = (1 - ab) ** 2 / beta**2 / (sigma - 1)
    rhs = math.log(1 / a) / beta**2
    return main + tail, rhs


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t * t)


def cutoff_psi(r, r1: float = 1.0):
    """psi(r / r1): 1 on [0, r1], 0 on [2 r1, oo), quintic smoothstep in between."""
    if not r1 > 0:
        raise ValueError("r1 must be positive")
    s = np.asarray(r, dtype=float) / r1
    out = 1.0 - smoothstep(s - 1.0)
    return float(out) if out.ndim == 0 else out


def cutoff_psi_prime(r, r1: float = 1.0):
    s = np.asarray(r, dtype=float) / r1
    t = np.clip(s - 1.0, 0.0, 1.0)
    out = -30.0 * t**2 * (1 - t) ** 2 / r1
    return float(out) if out.ndim == 0 else out


def _check_exponents(eps, eps_prime):
    if not 1 < eps_prime < eps < 2:
        raise ValueError(f"need 1 < eps' < eps < 2, got eps'={eps_prime}, eps={eps}")


def lemma3_constant(r1: float, eps: float, eps_prime: float, gamma0_sup: float,
                    C_front: float = C_DEFAULT) -> float:
    """C1(r1) = C ||Gamma_0||^eps' r1^(2 - 2 eps'/eps) (eps / (eps - eps'))^2."""
    _check_exponents(eps, eps_prime)
    return (C_front * gamma0_sup**eps_prime * r1 ** (2 - 2 * eps_prime / eps)
            * (eps / (eps - eps_prime)) ** 2)


def lemma3_sides(u1: ScalarField, f: Union[np.ndarray, Callable], eps: float, eps_prime: float,
                 r1: float, gamma0_sup: float, C_front: float = C_DEFAULT) -> tuple[float, float]:
    """Sides of  int |u1|^eps' f^2  <=  C1(r1) int |f_r|^2 + C_far int_{r >= r1} f^2  (r dr dz).

    ``f`` is radial, given on the grid's r nodes or as a callable.  The far
    coefficient is C_front ||Gamma_0||^eps' (eps/(eps-eps'))^2 r1^(-2 eps'/eps).
    """
    _check_exponents(eps, eps_prime)
    if not r1 > 0:
        raise ValueError("r1 must be positive")
    g = u1.grid
    r = g.r
    fr = np.asarray(f(r) if callable(f) else f, dtype=float)
    if fr.shape != r.shape:
        raise ValueError("f must have one value per radial node")
    u = np.abs(u1.values)
    bound = gamma0_sup * r[1:, None] ** (-2.0 / eps)
    if np.any(u[1:] > bound * (1 + 1e-12) + 1e-300):
        raise ValueError("u1 violates the circulation bound |u1| <= ||Gamma_0|| r^(-2/eps)")
    f2 = np.broadcast_to((fr**2)[:, None], g.shape)
    lhs = integrate(u**eps_prime * f2, g)
    df = np.gradient(fr, g.hr, edge_order=2)
    grad_term = integrate(np.broadcast_to((df**2)[:, None], g.shape), g)
    far = integrate(np.where((r >= r1)[:, None], f2, 0.0), g)
    c1 = lemma3_constant(r1, eps, eps_prime, gamma0_sup, C_front)
    c_far = C_front * gamma0_sup**eps_prime * (eps / (eps - eps_prime)) ** 2 * r1 ** (-2 * eps_prime / eps)
    return float(lhs), float(c1 * grad_term + c_far * far)


def interp_check(g: ScalarField) -> tuple[float, float]:
    """||grad g|| / (||g||^1/2 ||D^2 g||^1/2)  and  ||g||_oo / (||g||^1/4 ||D^2 g||^3/4)."""
    grid = g.grid
    a = g.values
    gr = st.d_r(a, grid.hr)
    gz = st.d_z(a, grid.hz)
    grad_n = weighted_lp_norm(ScalarField(grid, np.sqrt(gr**2 + gz**2)), 2)
    hess_n = weighted_lp_norm(ScalarField(grid, np.sqrt(hessian_sq(a, grid))), 2)
    l2 = weighted_lp_norm(g, 2)
    if grad_n == 0 or hess_n == 0 or l2 == 0:
        raise ValueError("degenerate field: vanishing norm or derivatives")
    return grad_n / (l2**0.5 * hess_n**0.5), sup_norm(g) / (l2**0.25 * hess_n**0.75)
