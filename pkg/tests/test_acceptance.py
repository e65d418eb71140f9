"""Acceptance criteria 1-13, one test each.

Every test prints a single ``CRITERION nn [PASS|FAIL] ...`` line with the
measured numbers, then asserts.  Criterion 13 is exploratory and always
reports ``[INFO]``.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import sys
import time

import numpy as np
import pytest

from epsflow import suites
from epsflow.config import parse_config
from epsflow.diagnostics import CSV_COLUMNS
from epsflow.dynamics import StepControl, biot_savart, evolve
from epsflow.elliptic import solve_phi
from epsflow.grid import ModelParams, ScalarField, make_grid
from epsflow.initial import make_ic
from epsflow.runner import FINAL_SNAPSHOT, read_diagnostics, run, snapshot_name, sweep


@pytest.fixture
def report(capsys):
    def emit(num, ok, text):
        tag = {True: "PASS", False: "FAIL", None: "INFO"}[ok]
        with capsys.disabled():
            print(f"\nCRITERION {num:02d} [{tag}] {text}", flush=True)
    return emit


def _ratios(values):
    return [a / b for a, b in zip(values, values[1:])]


def test_criterion_01_elliptic_convergence(report):
    t0 = time.perf_counter()
    errs = []
    for n in (33, 65, 129):
        g = make_grid(n, n - 1, 8.0, 8.0)
        phi, om = suites.manufactured_phi(g)
        errs.append(float(np.abs(solve_phi(ScalarField(g, om)).values - phi).max()))
    elapsed = time.perf_counter() - t0
    ratios = _ratios(errs)
    ok = min(ratios) >= 3.5 and elapsed < 10.0
    report(1, ok, f"elliptic max-error ratios {ratios[0]:.3f}, {ratios[1]:.3f} (need >= 3.5); "
                  f"{elapsed:.2f} s (need < 10 s)")
    assert ok


def test_criterion_02_elliptic_self_consistency(report):
    checks = [c for c in suites.elliptic_suite(n_random=20) if c.case.startswith("self-consistency")]
    worst = max(c.lhs / c.rhs * 1e-10 for c in checks)
    ok = len(checks) == 20 and not suites.failures(checks)
    report(2, ok, f"max ||L solve(w) + w|| / ||w|| over 20 random inputs = {worst:.2e} (need <= 1e-10)")
    assert ok


def test_criterion_03_divergence_free(report):
    checks = suites.elliptic_suite(n_random=0)
    div = [c for c in checks if "div_sup" in c.case]
    ratios = [c.rhs for c in div if "ratio" in c.case]
    at129 = [c.lhs for c in div if "at 129" in c.case][0]
    ok = not suites.failures(div)
    report(3, ok, f"relative div_sup at 129x128 = {at129:.2e} (need <= 1e-3); "
                  f"refinement ratios {ratios[0]:.2f}, {ratios[1]:.2f} (need >= 3.5)")
    assert ok


@pytest.mark.slow
def test_criterion_04_energy_identity(report):
    h = 8.0 / 128
    dt = 0.1 * h * h / 0.1
    parts, ok = [], True
    for eps in (0.5, 1.0, 1.5):
        r0 = suites.viscous_energy_residual(129, eps, 0.1, dt)
        r1 = suites.viscous_energy_residual(257, eps, 0.1, dt / 2)
        ok &= r0 <= 1e-2 and r0 / r1 >= 3.0
        parts.append(f"eps={eps}: {r0:.2e} -> {r1:.2e} (x{r0 / r1:.2f})")
    report(4, ok, "energy-identity residual 129 -> 257 with dt/2; " + "; ".join(parts)
           + " (need base <= 1e-2, ratio >= 3)")
    assert ok


def test_criterion_05_inviscid_energy(report):
    parts, ok = [], True
    for eps in (0.5, 1.0, 1.5):
        d0 = suites.inviscid_energy_drift(129, eps)
        d1 = suites.inviscid_energy_drift(257, eps)
        ok &= d0 <= 1e-2 and d1 < d0
        parts.append(f"eps={eps}: {d0:.2e} -> {d1:.2e}")
    report(5, ok, "inviscid |E(T)-E(0)|/E(0) at 129 -> 257; " + "; ".join(parts)
           + " (need base <= 1e-2, decreasing)")
    assert ok


def test_criterion_06_maximum_principle(report):
    parts, ok = [], True
    for eps, nu in suites.MAXPRINCIPLE_CASES:
        g0, gmax, esc = suites.max_principle_run(eps, nu)
        ok &= gmax <= g0 * (1 + 1e-3) and esc < 1e-6
        parts.append(f"({eps},{nu}): {gmax / g0 - 1:+.1e}/{esc:.0e}")
    report(6, ok, "max_t Gamma_sup / Gamma_sup(0) - 1 and max support_escape: " + "; ".join(parts)
           + " (need <= 1e-3 and < 1e-6)")
    assert ok


@pytest.mark.slow
def test_criterion_07_circulation_residual(report):
    r0, r1 = suites.circulation_residual(129), suites.circulation_residual(257)
    ok = r0 / r1 >= 3.0
    report(7, ok, f"circulation-equation residual (r >= 0.25 >= 4 hr) {r0:.3e} -> {r1:.3e}, "
                  f"ratio {r0 / r1:.2f} (need >= 3)")
    assert ok


@pytest.mark.slow
def test_criterion_08_scaling_invariance(report):
    d0, d1 = suites.scaling_defect(129), suites.scaling_defect(257)
    ok = d0 <= 2e-2 and d1 < d0
    report(8, ok, f"tau=4 evolve/scale commutation gap {d0:.3e} at 129 -> {d1:.3e} at 257 "
                  f"(need <= 2e-2, decreasing)")
    assert ok


def test_criterion_09_hardy(report):
    t0 = time.perf_counter()
    checks = suites.hardy_suite(100)
    elapsed = time.perf_counter() - t0
    bad = suites.failures(checks)
    worst = max(c.lhs / c.rhs for c in checks if c.rhs > 0)
    ok = len(checks) == 100 and not bad and elapsed < 5.0
    report(9, ok, f"Hardy: {len(bad)} violations in {len(checks)} cases, max lhs/rhs {worst:.3f}, "
                  f"{elapsed:.2f} s (need 0 violations, < 5 s)")
    assert ok


def test_criterion_10_lemma3(report):
    checks = suites.lemma3_suite()
    cases = [c for c in checks if " f=" in c.case]
    bad = suites.failures(checks)
    worst = max(c.lhs / c.rhs for c in cases)
    ok = len(cases) == 36 and not bad
    report(10, ok, f"Lemma-3 weighted inequality with C_front=66: {len(cases)} cases, max lhs/rhs "
                   f"{worst:.2e}; C1 closed form, monotonicity and r1->0 limit: "
                   f"{len(checks) - len(cases) - len(bad)} of {len(checks) - len(cases)} checks pass")
    assert ok


def test_criterion_11_eps_zero(report, tmp_path):
    g = make_grid(129, 128, 8.0, 8.0)
    nonzero = []

    def obs(s, n):
        v = biot_savart(s.phi1, 0.0)
        nonzero.append(bool(v.ur.values.any() or v.uz.values.any()))

    for nu in (0.0, 0.1):
        evolve(make_ic(suites.REFERENCE_IC, g), ModelParams(0.0, nu), 0.5, StepControl(), obs)
    cfg = parse_config("Nr = 65\nNz = 64\nT = 0.5\nepsilon = 0\nnu = 0\n").with_values(output=str(tmp_path))
    status = run(cfg)
    rows = read_diagnostics(tmp_path / "diagnostics.csv")
    ok = not any(nonzero) and status == 0 and all(r["div_sup"] == 0 for r in rows)
    report(11, ok, f"eps=0: {sum(nonzero)} of {len(nonzero)} observed steps with nonzero u^r/u^z; "
                   f"div_sup = 0 in all {len(rows)} CSV rows")
    assert ok


def test_criterion_12_determinism(report, tmp_path):
    base = parse_config("Nr = 65\nNz = 64\nT = 0.5\ndt_max = 0.0078125\nsnapshot_stride = 16\n")
    full, half, mid = tmp_path / "full", tmp_path / "half", tmp_path / "mid"
    run(base.with_values(output=str(full)))
    run(base.with_values(output=str(half), T=0.25))
    run(base.with_values(output=str(half)), resume=half / FINAL_SNAPSHOT)
    run(base.with_values(output=str(mid)), resume=full / snapshot_name(32))
    same = ((full / FINAL_SNAPSHOT).read_bytes() == (half / FINAL_SNAPSHOT).read_bytes()
            and (full / "diagnostics.csv").read_bytes() == (half / "diagnostics.csv").read_bytes()
            and (full / FINAL_SNAPSHOT).read_bytes() == (mid / FINAL_SNAPSHOT).read_bytes())
    par = tmp_path / "par"
    run(base.with_values(output=str(par), threads=4))
    a, b = read_diagnostics(full / "diagnostics.csv"), read_diagnostics(par / "diagnostics.csv")
    dev = max(abs(x[k] - y[k]) / max(abs(x[k]), 1e-300) for x, y in zip(a, b) for k in CSV_COLUMNS)
    ok = same and len(a) == len(b) and dev <= 1e-12
    report(12, ok, f"restart bit-exact: {same}; threads=4 vs sequential max relative deviation "
                   f"{dev:.1e} (need <= 1e-12)")
    assert ok


@pytest.mark.slow
def test_criterion_13_exploratory_sweep(report, tmp_path):
    cfg = parse_config("Nr = 129\nNz = 128\nT = 0.5\nnu = 0\ndiag_stride = 10\n").with_values(
        output=str(tmp_path))
    rows = sweep(cfg, [0.0, 0.5, 1.0, 1.5])
    growth = {r["epsilon"]: r["omega1_growth"] for r in rows}
    text = ", ".join(f"eps={e:g}: {g:.3f}" for e, g in growth.items())
    report(13, None, f"inviscid omega1 growth factors {text}; eps=0 exceeds eps=1.5: "
                     f"{growth[0.0] > growth[1.5]} (exploratory, not gating)")
    assert all(r["status"] in ("ok", "instability") for r in rows)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
