"""Second-order finite-difference stencils on raw (Nr, Nz) arrays.

Radial derivatives take a parity flag to build the ghost row at r = -hr;
the outer row r = R uses one-sided second-order formulas.  z is periodic.
"""
import numpy as np

from .grid import EVEN


def ghost_row(a, parity):
    return a[1] if parity == EVEN else -a[1]


def d_r(a, h, parity=EVEN):
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - a[:-2]) / (2 * h)
    out[0] = (a[1] - ghost_row(a, parity)) / (2 * h)
    out[-1] = (3 * a[-1] - 4 * a[-2] + a[-3]) / (2 * h)
    return out


def d_rr(a, h, parity=EVEN):
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - 2 * a[1:-1] + a[:-2]) / h**2
    out[0] = (a[1] - 2 * a[0] + ghost_row(a, parity)) / h**2
    if a.shape[0] >= 4:
        out[-1] = (2 * a[-1] - 5 * a[-2] + 4 * a[-3] - a[-4]) / h**2
    else:
        out[-1] = (a[-1] - 2 * a[-2] + a[-3]) / h**2
    return out


def d_z(a, h):
    return (np.roll(a, -1, axis=1) - np.roll(a, 1, axis=1)) / (2 * h)


def d_zz(a, h):
    return (np.roll(a, -1, axis=1) - 2 * a + np.roll(a, 1, axis=1)) / h**2


def over_r(a, r, a_r_axis):
    """a / r with the axis row replaced by its limit ``a_r_axis`` (= da/dr at 0)."""
    out = np.empty_like(a)
    out[1:] = a[1:] / r[1:, None]
    out[0] = a_r_axis
    return out


def lap_cyl(a, hr, hz, r, k=3.0):
    """d_rr + (k/r) d_r + d_zz for an even field; axis row uses (1+k) d_rr + d_zz."""
    drr = d_rr(a, hr)
    dr = d_r(a, hr)
    out = drr + d_zz(a, hz)
    out[1:] += k * dr[1:] / r[1:, None]
    out[0] += k * drr[0]
    return out
