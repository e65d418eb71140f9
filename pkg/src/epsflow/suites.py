"""Property and convergence suites behind ``epsflow verify``.

Every check is a row ``(suite, case, lhs, rhs, margin, asserted, passed)``
with the contract ``lhs <= rhs * (1 + rtol)``; convergence checks put the
required factor on the left and the observed factor on the right.  Rows with
``asserted = False`` are informational.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .diagnostics import (EPS_PRIME, energy, energy_identity_residual, gamma_evolution_residual,
                          gamma_field, scaling_transform, support_escape, DiagnosticsRecord)
from .dynamics import StepControl, biot_savart, divergence, evolve
from .elliptic import apply_L, solve_phi, workspace
from .grid import ModelParams, ScalarField, make_grid, sup_norm, weighted_lp_norm
from .inequalities import (C_DEFAULT, HardyCase, cutoff_psi, cutoff_psi_prime, hardy_sides,
                           lemma3_constant, lemma3_sides)
from .initial import ICSpec, make_ic

SUITE_NAMES = ("hardy", "lemma3", "elliptic", "scaling", "energy", "maxprinciple")
REPORT_COLUMNS = ("suite", "case", "lhs", "rhs", "margin", "asserted", "passed")

REFERENCE_IC = ICSpec("gaussian_swirl", amplitude=4.0, width=0.5)
REFERENCE_BOX = (8.0, 8.0)  # R, Lz


@dataclass(frozen=True)
class Check:
    suite: str
    case: str
    lhs: float
    rhs: float
    asserted: bool = True
    rtol: float = 0.0

    @property
    def margin(self) -> float:
        return self.rhs * (1.0 + self.rtol) - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.margin >= 0)  # NaN fails

    def row(self) -> list:
        return [self.suite, self.case, repr(float(self.lhs)), repr(float(self.rhs)),
                repr(float(self.margin)), int(self.asserted), int(self.passed)]


def failures(checks: Iterable[Check]) -> list[Check]:
    return [c for c in checks if c.asserted and not c.passed]


def write_report(checks: Sequence[Check], fh) -> None:
    w = csv.writer(fh)
    w.writerow(REPORT_COLUMNS)
    for c in checks:
        w.writerow(c.row())


def _ratio(coarse, fine):
    return coarse / fine if fine > 0 else math.inf


# Hardy ---------------------------------------------------------------------

def random_hardy_case(rng: np.random.Generator, n: int = 2001) -> HardyCase:
    """Nonnegative f made of smooth bumps and a plateau, compactly supported in (0, 4)."""
    lam = rng.uniform(1.1, 4.0)
    sigma = rng.uniform(1.1, 5.0) if rng.random() < 0.5 else rng.uniform(-2.0, 0.9)
    r = np.linspace(0.0, 4.0, n)
    f = np.zeros(n)
    for _ in range(rng.integers(1, 4)):
        a = rng.uniform(0.02, 3.0)
        b = min(a + rng.uniform(0.1, 1.0), 3.9)
        s = np.clip((r - a) / (b - a), 0.0, 1.0)
        f += rng.uniform(0.1, 2.0) * np.sin(np.pi * s) ** rng.choice([1, 2, 4])
    if rng.random() < 0.3:
        a = rng.uniform(0.05, 2.0)
        f += np.where((r >= a) & (r <= a + 0.5), 1.0, 0.0)
    return HardyCase(lam, sigma, r, f)


def hardy_suite(n_cases: int = 100, seed: int = 20240601) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n_cases):
        case = random_hardy_case(rng)
        lhs, rhs = hardy_sides(case)
        out.append(Check("hardy", f"case{k:03d} lam={case.lam:.4f} sigma={case.sigma:.4f}",
                         lhs, rhs, rtol=1e-6))
    return out


# Lemma 3 -------------------------------------------------------------------

LEMMA3_EPS = (1.2, 1.5, 1.9)
LEMMA3_R1 = (0.1, 0.5, 1.0)


def capped_power_u1(grid, eps: float, gamma0: float = 1.0, r_cap: float | None = None) -> ScalarField:
    """gamma0 * max(r, r_cap)^(-2/eps) * cos^2(pi z / Lz): meets the circulation bound."""
    r_cap = 2.0 * grid.hr if r_cap is None else r_cap
    rr, zz = grid.mesh()
    vals = gamma0 * np.maximum(rr, r_cap) ** (-2.0 / eps) * np.cos(np.pi * zz / grid.Lz) ** 2
    vals[-1] = 0.0
    return ScalarField(grid, vals)


def lemma3_suite(eps_values: Sequence[float] = LEMMA3_EPS, r1_values: Sequence[float] = LEMMA3_R1,
                 eps_prime: float = EPS_PRIME, C_front: float = C_DEFAULT) -> list[Check]:
    grid = make_grid(801, 16, 4.0, 1.0)
    out = []
    for eps in eps_values:
        u1 = capped_power_u1(grid, eps)
        for r1 in r1_values:
            tests = {
                "cutoff(r1/2)": lambda r, r1=r1: cutoff_psi(r, 0.5 * r1),
                "cutoff(r1)": lambda r, r1=r1: cutoff_psi(r, r1),
                "cutoff(2r1)": lambda r, r1=r1: cutoff_psi(r, 2.0 * r1),
                "gauss(r1)": lambda r, r1=r1: np.exp(-(r / r1) ** 2) * cutoff_psi(r, 1.5),
            }
            for name, f in tests.items():
                lhs, rhs = lemma3_sides(u1, f, eps, eps_prime, r1, 1.0, C_front)
                out.append(Check("lemma3", f"eps={eps} r1={r1} f={name}", lhs, rhs))
        # closed form, monotonicity and the r1 -> 0 limit of C1
        r1s = np.geomspace(1e-16, 10.0, 80)
        c1 = np.array([lemma3_constant(x, eps, eps_prime, 1.0, C_front) for x in r1s])
        closed = C_front * r1s ** (2 - 2 * eps_prime / eps) * (eps / (eps - eps_prime)) ** 2
        out.append(Check("lemma3", f"eps={eps} C1 closed form (max rel dev)",
                         float(np.max(np.abs(c1 / closed - 1))), 1e-14))
        out.append(Check("lemma3", f"eps={eps} C1 increasing in r1 (min increment)",
                         0.0, float(np.min(np.diff(c1)))))
        out.append(Check("lemma3", f"eps={eps} C1(1e-16)/C1(1)",
                         c1[0] / lemma3_constant(1.0, eps, eps_prime, 1.0, C_front), 1e-2))
    s = np.linspace(0.0, 3.0, 30001)
    psi = cutoff_psi(s)
    out += [
        Check("lemma3", "psi(0.5) = 1", abs(cutoff_psi(0.5) - 1.0), 0.0),
        Check("lemma3", "psi(3) = 0", abs(cutoff_psi(3.0)), 0.0),
        Check("lemma3", "psi(1.5) = 0.5", abs(cutoff_psi(1.5) - 0.5), 1e-15),
        Check("lemma3", "max |psi'| <= 2", float(np.max(np.abs(np.diff(psi) / np.diff(s)))), 2.0),
        Check("lemma3", "psi non-increasing (max increment)", float(np.max(np.diff(psi))), 0.0),
        Check("lemma3", "max |psi'| analytic = 15/8",
              abs(float(np.max(np.abs(cutoff_psi_prime(s)))) - 1.875), 1e-6),
    ]
    return out


# Elliptic and Biot-Savart ----------------------------------------------------

def manufactured_phi(grid) -> tuple[np.ndarray, np.ndarray]:
    """phi = (1 - (r/R)^2)^2 cos(2 pi z / Lz) and omega = -L phi in closed form."""
    rr, zz = grid.mesh()
    s = (rr / grid.R) ** 2
    k = 2.0 * np.pi / grid.Lz
    c = np.cos(k * zz)
    phi = (1 - s) ** 2 * c
    omega = -((24.0 * s - 16.0) / grid.R**2 - k * k * (1 - s) ** 2) * c
    return phi, omega


def random_bandlimited(grid, rng, modes: int = 6) -> ScalarField:
    rr, zz = grid.mesh()
    k = 2.0 * np.pi / grid.Lz
    out = np.zeros(grid.shape)
    for m in range(modes + 1):
        for j in range(3):
            a, b = rng.normal(size=2)
            out += (a * np.cos(m * k * zz) + b * np.sin(m * k * zz)) * np.cos((j + 0.5) * np.pi * rr / grid.R)
    out[-1] = 0.0
    return ScalarField(grid, out)


def elliptic_suite(levels: Sequence[int] = (33, 65, 129), n_random: int = 20,
                   seed: int = 7) -> list[Check]:
    R, Lz = REFERENCE_BOX
    out = []
    errs, divs = [], []
    t0 = time.perf_counter()
    for n in levels:
        g = make_grid(n, n - 1, R, Lz)
        phi, omega = manufactured_phi(g)
        num = solve_phi(ScalarField(g, omega))
        errs.append(float(np.abs(num.values - phi).max()))
        v = biot_savart(ScalarField(g, phi), 1.0)
        divs.append(sup_norm(divergence(v)) / v.speed_max())
    elapsed = time.perf_counter() - t0
    for (n0, e0), (n1, e1) in zip(zip(levels, errs), zip(levels[1:], errs[1:])):
        out.append(Check("elliptic", f"solve_phi error ratio {n0}->{n1} (err {e0:.3e}->{e1:.3e})",
                         3.5, _ratio(e0, e1)))
    for (n0, d0), (n1, d1) in zip(zip(levels, divs), zip(levels[1:], divs[1:])):
        out.append(Check("elliptic", f"relative div_sup ratio {n0}->{n1} ({d0:.3e}->{d1:.3e})",
                         3.5, _ratio(d0, d1)))
    out.append(Check("elliptic", f"relative div_sup at {levels[-1]}", divs[-1], 1e-3))
    out.append(Check("elliptic", "convergence ladder wall time [s]", elapsed, 10.0))
    rng = np.random.default_rng(seed)
    g = make_grid(129, 128, R, Lz)
    ws = workspace(g)
    for k in range(n_random):
        w = random_bandlimited(g, rng)
        # the wall row carries the Dirichlet condition, not the equation
        res = (apply_L(solve_phi(w, ws)).values + w.values)[:-1]
        out.append(Check("elliptic", f"self-consistency random{k:02d}",
                         float(np.abs(res).max()), 1e-10 * sup_norm(w)))
    return out


# Energy --------------------------------------------------------------------

def energy_trajectory(N: int, eps: float, nu: float, dt: float, T: float = 0.5) -> list[DiagnosticsRecord]:
    """(t, E, D) at every step of a fixed-step run on the reference IC."""
    R, Lz = REFERENCE_BOX
    g = make_grid(N, N - 1, R, Lz)
    p = ModelParams(eps, nu)
    recs = []

    def obs(s, n):
        E, D = energy(s, p)
        recs.append(DiagnosticsRecord(s.t, E, D, 0.0, 0.0, 0.0, 0.0))

    evolve(make_ic(REFERENCE_IC, g), p, T, StepControl(cfl_adv=1.0, cfl_diff=1.0, dt_max=dt), obs)
    return recs


def viscous_energy_residual(N: int, eps: float, nu: float = 0.1, dt: float | None = None) -> float:
    if dt is None:
        h = REFERENCE_BOX[0] / (N - 1)
        dt = 0.1 * h * h / nu
    return energy_identity_residual(energy_trajectory(N, eps, nu, dt), ModelParams(eps, nu))


def inviscid_energy_drift(N: int, eps: float, dt: float | None = None) -> float:
    if dt is None:
        dt = 0.25 * REFERENCE_BOX[0] / (N - 1)
    recs = energy_trajectory(N, eps, 0.0, dt)
    return abs(recs[-1].E_eps - recs[0].E_eps) / recs[0].E_eps


def energy_suite(eps_values: Sequence[float] = (0.5, 1.0, 1.5), refine: bool = True,
                 base: int = 129) -> list[Check]:
    out = []
    h = REFERENCE_BOX[0] / (base - 1)
    dt_visc, dt_inv = 0.1 * h * h / 0.1, 0.25 * h
    for eps in eps_values:
        r0 = viscous_energy_residual(base, eps, 0.1, dt_visc)
        out.append(Check("energy", f"eps={eps} nu=0.1 residual at {base}", r0, 1e-2))
        d0 = inviscid_energy_drift(base, eps, dt_inv)
        out.append(Check("energy", f"eps={eps} nu=0 drift at {base}", d0, 1e-2))
        if refine:
            fine = 2 * base - 1
            r1 = viscous_energy_residual(fine, eps, 0.1, 0.5 * dt_visc)
            out.append(Check("energy", f"eps={eps} nu=0.1 residual ratio {base}->{fine} "
                             f"({r0:.3e}->{r1:.3e})", 3.0, _ratio(r0, r1)))
            d1 = inviscid_energy_drift(fine, eps, 0.5 * dt_inv)
            out.append(Check("energy", f"eps={eps} nu=0 drift {base}->{fine} ({d0:.3e}->{d1:.3e})",
                             d1, d0))
    return out


# Maximum principle and circulation equation ---------------------------------

MAXPRINCIPLE_CASES = tuple((e, n) for e in (1.0, 1.5, 1.9) for n in (0.05, 0.5))


def max_principle_run(eps: float, nu: float, N: int = 129, T: float = 0.5) -> tuple[float, float, float]:
    """(Gamma_sup(0), max_t Gamma_sup, max_t support_escape) on the reference IC."""
    R, Lz = REFERENCE_BOX
    g = make_grid(N, N - 1, R, Lz)
    gam, esc = [], []

    def obs(s, n):
        gam.append(sup_norm(gamma_field(s.u1, eps)))
        esc.append(support_escape(s))

    evolve(make_ic(REFERENCE_IC, g), ModelParams(eps, nu), T, StepControl(), obs)
    return gam[0], max(gam), max(esc)


def circulation_residual(N: int, eps: float = 1.5, nu: float = 0.1, t_mid: float = 0.25,
                         r_min: float = 0.25) -> float:
    """Circulation-equation defect at t_mid from samples t_mid -+ hr/2 (fixed-step run)."""
    R, Lz = REFERENCE_BOX
    g = make_grid(N, N - 1, R, Lz)
    p = ModelParams(eps, nu)
    ctl = StepControl(dt_max=0.1 * g.hr**2 / nu)
    delta = 0.5 * g.hr
    a = evolve(make_ic(REFERENCE_IC, g), p, 0.0, ctl, until=t_mid - delta)
    b = evolve(a, p, 0.0, ctl, until=t_mid)
    c = evolve(b, p, 0.0, ctl, until=t_mid + delta)
    return gamma_evolution_residual([a, b, c], p, r_min)


def maxprinciple_suite(cases: Sequence[tuple[float, float]] = MAXPRINCIPLE_CASES,
                       refine: bool = True, base: int = 129) -> list[Check]:
    out = []
    for eps, nu in cases:
        if eps == 0:
            out.append(Check("maxprinciple", f"eps=0 nu={nu}: circulation undefined", 0.0, 0.0, False))
            continue
        g0, gmax, esc = max_principle_run(eps, nu, base)
        hyp = eps >= 1 and nu > 0
        out.append(Check("maxprinciple", f"eps={eps} nu={nu} max Gamma_sup vs Gamma_sup(0)",
                         gmax, g0, asserted=hyp, rtol=1e-3))
        out.append(Check("maxprinciple", f"eps={eps} nu={nu} max support_escape", esc, 1e-6,
                         asserted=hyp))
    if refine:
        fine = 2 * base - 1
        c0, c1 = circulation_residual(base), circulation_residual(fine)
        out.append(Check("maxprinciple", f"circulation residual ratio {base}->{fine} "
                         f"({c0:.3e}->{c1:.3e})", 3.0, _ratio(c0, c1)))
    return out


# Scaling -------------------------------------------------------------------

SCALING_IC = ICSpec("gaussian_swirl", amplitude=16.0, width=0.35)


def _rel_l2(a, b) -> float:
    g = a.grid
    errs = []
    for x, y in ((a.u1, b.u1), (a.omega1, b.omega1)):
        ref = weighted_lp_norm(y, 2)
        errs.append(weighted_lp_norm(ScalarField(g, x.values - y.values), 2) / ref if ref > 0 else 0.0)
    return max(errs)


def scaling_defect(N: int, tau: float = 4.0, eps: float = 1.5, nu: float = 0.1, T: float = 0.5) -> float:
    """Relative L2 gap between evolve-then-scale and scale-then-evolve at matched times."""
    R, Lz = REFERENCE_BOX
    g = make_grid(N, N - 1, R, Lz)
    p = ModelParams(eps, nu)
    ctl = StepControl(dt_max=0.1 * g.hr**2 / nu)
    s = make_ic(SCALING_IC, g)
    a = scaling_transform(evolve(s, p, T / tau, ctl), tau)
    b = evolve(scaling_transform(s, tau), p, T, ctl)
    return _rel_l2(a, b)


def scaling_suite(refine: bool = True, base: int = 129) -> list[Check]:
    d0 = scaling_defect(base)
    out = [Check("scaling", f"tau=4 relative L2 gap at {base}", d0, 2e-2)]
    if refine:
        fine = 2 * base - 1
        d1 = scaling_defect(fine)
        out.append(Check("scaling", f"tau=4 gap {base}->{fine} ({d0:.3e}->{d1:.3e})", d1, d0))
    return out


SUITES: dict[str, Callable[..., list[Check]]] = {
    "hardy": hardy_suite,
    "lemma3": lemma3_suite,
    "elliptic": elliptic_suite,
    "scaling": scaling_suite,
    "energy": energy_suite,
    "maxprinciple": maxprinciple_suite,
}


def run_suite(name: str, refine: bool = True, eps=None, nu=None) -> list[Check]:
    """Run one suite (or ``all``).  ``eps``/``nu`` narrow the dynamic suites."""
    if name == "all":
        return [c for n in SUITE_NAMES for c in run_suite(n, refine, eps, nu)]
    if name not in SUITES:
        raise KeyError(name)
    if name == "maxprinciple":
        if eps is not None or nu is not None:
            es = [eps] if eps is not None else [1.0, 1.5, 1.9]
            ns = [nu] if nu is not None else [0.05, 0.5]
            return maxprinciple_suite([(e, n) for e in es for n in ns], refine=refine)
        return maxprinciple_suite(refine=refine)
    if name == "energy":
        return energy_suite([eps] if eps is not None else (0.5, 1.0, 1.5), refine=refine)
    if name in ("scaling",):
        return scaling_suite(refine=refine)
    return SUITES[name]()
