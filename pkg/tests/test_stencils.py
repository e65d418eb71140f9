import numpy as np
import pytest

from epsflow import stencils as st
from epsflow.grid import ODD, make_grid


def _errors(fn, exact, parity="even"):
    out = []
    for n in (33, 65, 129):
        g = make_grid(n, n - 1, 2.0, 2 * np.pi)
        rr, zz = g.mesh()
        out.append(np.abs(fn(g, rr, zz) - exact(rr, zz)).max())
    return out


@pytest.mark.parametrize("name,fn,exact", [
    ("d_r even", lambda g, r, z: st.d_r(np.cos(r) * np.sin(z), g.hr), lambda r, z: -np.sin(r) * np.sin(z)),
    ("d_r odd", lambda g, r, z: st.d_r(np.sin(r) * np.sin(z), g.hr, ODD), lambda r, z: np.cos(r) * np.sin(z)),
    ("d_rr", lambda g, r, z: st.d_rr(np.cos(r) * np.sin(z), g.hr), lambda r, z: -np.cos(r) * np.sin(z)),
    ("d_z", lambda g, r, z: st.d_z(np.cos(r) * np.sin(z), g.hz), lambda r, z: np.cos(r) * np.cos(z)),
    ("d_zz", lambda g, r, z: st.d_zz(np.cos(r) * np.sin(z), g.hz), lambda r, z: -np.cos(r) * np.sin(z)),
    # L(cos r) = -cos r - 3 sin r / r, axis limit -4
    ("lap_cyl", lambda g, r, z: st.lap_cyl(np.cos(r) * np.sin(z), g.hr, g.hz, g.r),
     lambda r, z: (-np.cos(r) - 3 * np.sinc(r / np.pi) - np.cos(r)) * np.sin(z)),
])
def test_second_order(name, fn, exact):
    e = _errors(fn, exact)
    assert e[0] / e[1] > 3.4 and e[1] / e[2] > 3.4, (name, e)


def test_over_r_axis_limit():
    g = make_grid(9, 4, 1.0, 1.0)
    a = np.tile(g.r[:, None] * 2.0, (1, 4))
    out = st.over_r(a, g.r, np.full(4, 2.0))
    np.testing.assert_allclose(out, 2.0)
