import math

import numpy as np
import pytest

from vortibc import DomainKind, DomainSpec, VectorField, boundary_frame, build_grid


@pytest.fixture(scope="session")
def annulus_spec():
    return DomainSpec(DomainKind.ANNULUS, r_inner=1.0, r_outer=2.0)


@pytest.fixture(scope="session")
def annulus_grid(annulus_spec):
    return build_grid(annulus_spec, 32, 64)


@pytest.fixture(scope="session")
def annulus_frame(annulus_grid):
    return boundary_frame(annulus_grid)


@pytest.fixture(scope="session")
def torus_spec():
    return DomainSpec(DomainKind.TORUS, length_x=2 * math.pi, length_y=2 * math.pi)


@pytest.fixture(scope="session")
def torus_grid(torus_spec):
    return build_grid(torus_spec, 32, 32)


@pytest.fixture(scope="session")
def channel_spec():
    return DomainSpec(DomainKind.CHANNEL, length_x=2 * math.pi, length_y=2.0)


@pytest.fixture(scope="session")
def channel_grid(channel_spec):
    return build_grid(channel_spec, 32, 32)


def circulation_field(grid, c=1.0):
    """Stationary harmonic swirl c e_theta / r (exact steady state)."""
    return VectorField(grid, -c * np.sin(grid.theta) / grid.r,
                       c * np.cos(grid.theta) / grid.r)


def taylor_green(grid, amp=1.0):
    return VectorField(grid, amp * np.sin(grid.x) * np.cos(grid.y),
                       -amp * np.cos(grid.x) * np.sin(grid.y))


def shear_field(grid, amp=1.0, moduln=0.0):
    r0, r1 = grid.r_inner_eff, grid.r_outer_eff
    prof = amp * np.sin(math.pi * (grid.r - r0) / (r1 - r0))
    if moduln:
        prof = prof * (1.0 + moduln * np.cos(2 * grid.theta))
    return VectorField(grid, -prof * np.sin(grid.theta), prof * np.cos(grid.theta))


def streamfunction_shear(grid, amp=1.0, moduln=0.3):
    """Divergence-free (to stencil order) swirl with theta modulation and
    nonzero boundary vorticity; psi vanishes on both circles so u_perp = 0
    exactly."""
    from vortibc import ScalarField, curl_scalar

    r0, r1 = grid.r_inner_eff, grid.r_outer_eff
    psi = amp * np.sin(math.pi * (grid.r - r0) / (r1 - r0)) \
        * (1.0 + moduln * np.cos(2 * grid.theta))
    return curl_scalar(ScalarField(grid, psi))


def analytic_streamfunction_shear(r0, r1, amp=1.0, moduln=0.3):
    """Grid-independent closure for the rotated gradient of the windowed
    streamfunction; u_perp vanishes exactly on both circles."""
    k = math.pi / (r1 - r0)

    def fn(x, y):
        r = np.hypot(x, y)
        th = np.arctan2(y, x)
        mod = 1.0 + moduln * np.cos(2 * th)
        psi_r = amp * k * np.cos(k * (r - r0)) * mod
        psi_th = -2.0 * amp * moduln * np.sin(k * (r - r0)) * np.sin(2 * th)
        ux = np.sin(th) * psi_r + np.cos(th) * psi_th / r
        uy = -(np.cos(th) * psi_r - np.sin(th) * psi_th / r)
        return ux, uy
    return fn


def zero_mean(grid, values):
    return values - grid.integrate(values) / float(np.sum(grid.weights))


def observed_orders(residuals):
    r = np.asarray(residuals, dtype=float)
    return [math.log2(a / b) for a, b in zip(r[:-1], r[1:])]


def ls_order(residuals):
    r = np.asarray(residuals, dtype=float)
    x = np.arange(len(r))
    return float(-np.polyfit(x, np.log2(r), 1)[0])
