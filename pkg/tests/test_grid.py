import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epsflow.grid import (EVEN, ODD, GridSpec, ModelParams, ScalarField, State, ghost_even, integrate,
                          make_grid, sup_norm, weighted_lp_norm)


def test_spacings_and_nodes():
    g = make_grid(5, 4, 2.0, 8.0)
    assert g.hr == 0.5 and g.hz == 2.0
    np.testing.assert_array_equal(g.r, [0, 0.5, 1, 1.5, 2])
    np.testing.assert_array_equal(g.z, [0, 2, 4, 6])


@pytest.mark.parametrize("args", [(2, 4, 1.0, 1.0), (5, 1, 1.0, 1.0), (5, 4, 0.0, 1.0), (5, 4, 1.0, -1.0)])
def test_invalid_grids_rejected(args):
    with pytest.raises(ValueError):
        GridSpec(*args)


def test_field_rejects_nonfinite_and_bad_shape(small_grid):
    bad = np.zeros(small_grid.shape)
    bad[3, 3] = np.nan
    with pytest.raises(ValueError):
        ScalarField(small_grid, bad)
    with pytest.raises(ValueError):
        ScalarField(small_grid, np.zeros((3, 3)))


def test_field_is_immutable(small_grid):
    f = ScalarField.zeros(small_grid)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_ghost_even_reflects(small_grid):
    f = ScalarField.from_function(small_grid, lambda r, z: r**2 + np.cos(z))
    np.testing.assert_array_equal(ghost_even(f, -1), f.values[1])
    with pytest.raises(IndexError):
        ghost_even(f, small_grid.Nr)


def test_integrate_gaussian_second_order():
    # int r exp(-r^2) dr dz over [0, oo) x [0, Lz] = Lz / 2
    errs = []
    for n in (33, 65, 129):
        g = make_grid(n, 8, 8.0, 2.0)
        rr, _ = g.mesh()
        errs.append(abs(integrate(np.exp(-rr**2), g) - 1.0))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_lp_norm_of_constant(small_grid):
    f = ScalarField(small_grid, np.full(small_grid.shape, 2.0))
    vol = 0.5 * small_grid.R**2 * small_grid.Lz
    assert weighted_lp_norm(f, 2) == pytest.approx(2.0 * vol**0.5, rel=1e-12)
    assert sup_norm(f) == 2.0
    with pytest.raises(ValueError):
        weighted_lp_norm(f, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.floats(1.0, 12.0))
def test_parallel_reduction_matches_sequential(workers, p):
    g = make_grid(65, 32, 4.0, 4.0)
    vals = np.random.default_rng(workers).normal(size=g.shape)
    f = ScalarField(g, vals)
    a, b = weighted_lp_norm(f, p), weighted_lp_norm(f, p, workers=workers)
    assert b == pytest.approx(a, rel=1e-12)


def test_model_params_validation():
    with pytest.raises(ValueError, match="epsilon"):
        ModelParams(2.0, 0.1)
    with pytest.raises(ValueError, match="nu"):
        ModelParams(1.0, -1.0)


def test_state_requires_even_parity_and_shared_grid(small_grid):
    z = ScalarField.zeros(small_grid)
    with pytest.raises(ValueError):
        State(z, z, ScalarField.zeros(small_grid, ODD))
    with pytest.raises(ValueError):
        State(z, ScalarField.zeros(make_grid(17, 32, 8.0, 8.0)), z)
    assert State(z, z, z).grid == small_grid
