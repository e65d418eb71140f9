import math

import numpy as np
import pytest

from epsflow.diagnostics import (CSV_COLUMNS, DiagnosticsRecord, MonitorConfig, criteria_monitor, energy,
                                 energy_identity_residual, gamma_evolution_residual, gamma_field,
                                 rescaled_velocity, scaling_transform, support_escape)
from epsflow.dynamics import StepControl, evolve
from epsflow.grid import ModelParams, ScalarField, State, make_grid
from epsflow.initial import ICSpec, make_ic

# Gaussian swirl A=4, w=0.5, eps=1.5, omega1=0, integrated symbolically over r>0, z in R:
# E = sqrt(2 pi)/16, D = 5 sqrt(2 pi)/4
E_SWIRL = 0.15666426716443753
D_SWIRL = 3.1332853432887506


def _swirl(n):
    return make_ic(ICSpec(amplitude=4.0, width=0.5), make_grid(n, n - 1, 8.0, 8.0))


def test_energy_matches_symbolic_oracle_second_order():
    p = ModelParams(1.5, 0.1)
    eE, eD = [], []
    for n in (65, 129, 257):
        E, D = energy(_swirl(n), p)
        eE.append(abs(E / E_SWIRL - 1))
        eD.append(abs(D / D_SWIRL - 1))
    assert eE[-1] < 1e-4 and eD[-1] < 1e-3
    assert eD[0] / eD[1] > 3.5 and eD[1] / eD[2] > 3.5


def test_energy_identity_residual_needs_uniform_stride():
    recs = [DiagnosticsRecord(t, 1.0, 0.0, 0, 0, 0, 0) for t in (0.0, 0.1, 0.3)]
    with pytest.raises(ValueError):
        energy_identity_residual(recs, ModelParams())
    with pytest.raises(ValueError):
        energy_identity_residual(recs[:2], ModelParams())


def test_energy_identity_residual_exact_decay():
    # E = exp(-2 nu D0 t / E0)... use E(t) = 1 - 2 nu t with D = 1: centred differences are exact
    nu = 0.1
    recs = [DiagnosticsRecord(k * 0.01, 1 - 2 * nu * k * 0.01, 1.0, 0, 0, 0, 0) for k in range(6)]
    assert energy_identity_residual(recs, ModelParams(1.0, nu)) < 1e-12


def test_gamma_field():
    s = _swirl(33)
    gam = gamma_field(s.u1, 1.5)
    assert not gam.values[0].any()
    r = s.grid.r
    np.testing.assert_allclose(gam.values[5], s.u1.values[5] * r[5] ** (4 / 3))
    with pytest.raises(ValueError):
        gamma_field(s.u1, 0.0)


def test_gamma_residual_rejects_small_rmin():
    s = _swirl(33)
    samples = [State(s.u1, s.omega1, s.phi1, t) for t in (0.0, 0.1, 0.2)]
    with pytest.raises(ValueError, match="4 hr"):
        gamma_evolution_residual(samples, ModelParams(), r_min=0.1)


def test_gamma_residual_small_on_smooth_run():
    g = make_grid(65, 64, 8.0, 8.0)
    p = ModelParams(1.5, 0.1)
    ctl = StepControl(dt_max=0.1 * g.hr**2 / p.nu)
    a = evolve(make_ic(ICSpec(amplitude=4.0, width=0.5), g), p, 0.1, ctl)
    b = evolve(a, p, 0.0, ctl, until=0.1 + g.hr / 2)
    c = evolve(b, p, 0.0, ctl, until=0.1 + g.hr)
    res = gamma_evolution_residual([a, b, c], p, r_min=0.5)
    assert 0 < res < 0.1 * np.abs(gamma_field(b.u1, 1.5).values).max()


def test_rescaled_velocity_degenerate_eps():
    s = make_ic(ICSpec("dipole", amplitude=1.0), make_grid(33, 32, 8.0, 8.0))
    vr, vz, vt = rescaled_velocity(s, 0.0)
    assert not vr.any() and not vz.any()
    vr1, _, _ = rescaled_velocity(s, 1.0)
    vr2, _, _ = rescaled_velocity(s, 1.5)
    np.testing.assert_allclose(vr1, vr2)  # poloidal part is eps-independent


def test_monitor_on_zero_state():
    g = make_grid(17, 16, 8.0, 8.0)
    z = ScalarField.zeros(g)
    rec = criteria_monitor(State(z, z, z), ModelParams(1.5, 0.1))
    assert all(v == 0 for v in rec.row())


def test_monitor_eps_zero_velocity_free():
    rec = criteria_monitor(_swirl(33), ModelParams(0.0, 0.0))
    assert rec.div_sup == 0.0 and math.isnan(rec.gamma_sup)
    assert rec.ps_p4 > 0  # from the swirl alone


def test_monitor_config_validation():
    assert MonitorConfig().q == pytest.approx(4 - 20 / 19)
    with pytest.raises(ValueError):
        MonitorConfig(prodi_serrin_pairs=((4.0, 7.0),))
    with pytest.raises(ValueError):
        MonitorConfig(prodi_serrin_pairs=((3.0, math.inf),))
    MonitorConfig(prodi_serrin_pairs=((math.inf, 2.0), (6.0, 4.0)))


def test_record_row_order():
    rec = DiagnosticsRecord(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, ((4.0, 8.0),), 9.0, 10.0)
    assert rec.row() == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    assert len(CSV_COLUMNS) == 10
    assert math.isnan(DiagnosticsRecord(0, 0, 0, 0, 0, 0, 0, ((6.0, 4.0),)).ps_p4)


def test_support_escape():
    g = make_grid(33, 32, 8.0, 8.0)
    assert support_escape(_swirl(33)) == 0.0
    u = np.zeros(g.shape)
    u[-2] = 1.0
    z = ScalarField.zeros(g)
    assert support_escape(State(ScalarField(g, u), z, z)) == 1.0


def test_scaling_identity_and_time():
    s = make_ic(ICSpec(amplitude=4.0, width=0.35), make_grid(65, 64, 8.0, 8.0))
    same = scaling_transform(s, 1.0)
    np.testing.assert_array_equal(same.u1.values, s.u1.values)
    s2 = scaling_transform(State(s.u1, s.omega1, s.phi1, 0.25), 4.0)
    assert s2.t == 1.0
    assert s2.u1.values.max() == pytest.approx(s.u1.values.max() / 4, rel=1e-12)


def test_scaling_rejects_escaping_support():
    s = make_ic(ICSpec(amplitude=1.0, width=0.6), make_grid(65, 64, 8.0, 8.0))
    with pytest.raises(ValueError, match="escapes"):
        scaling_transform(s, 16.0)
    with pytest.raises(ValueError):
        scaling_transform(s, 0.0)
