import math

import numpy as np
import pytest

from mmpoly import equilibrium as eq
from mmpoly.measures import MeasureTable
from mmpoly.toeplitz_symbol import support_constants


def small_t_density(x):
    r = np.sqrt(1 - x * x)
    return np.log((1 + r) / (1 - r)) / (2 * math.pi)


@pytest.fixture(scope="module")
def res1():
    return eq.solve_equilibrium(1.0)


def test_closed_density_examples():
    assert abs(eq.nu1_density_closed(0.6, 1e-6) - math.log(9) / (2 * math.pi)) < 1e-4
    x = np.linspace(0.05, 1.6, 9)
    assert np.allclose(eq.nu1_density_closed(x, 1.0), eq.nu1_density_closed(-x, 1.0), rtol=1e-14)
    assert eq.nu1_density_closed(0.0, 1.0) == math.inf
    assert eq.nu1_density_closed(2.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        eq.nu1_density_closed(0.5, -1.0)


def test_t_to_zero_limit():
    x = np.linspace(-0.95, 0.95, 381)
    x = x[np.abs(x) > 1e-9]
    assert np.max(np.abs(eq.nu1_density_closed(x, 1e-6) - small_t_density(x))) <= 1e-4


@pytest.mark.parametrize("b", [0.1, 1.0, 100.0])
def test_dual_route(b):
    c1, _ = support_constants(b)
    x = c1 * np.linspace(0.02, 0.98, 13)
    closed = eq.nu1_density_closed(x, b)
    avg = np.array([eq.nu1_density_averaged(v, b) for v in x])
    assert np.max(np.abs(closed - avg)) <= 1e-6


def test_averaged_outside_support():
    assert eq.nu1_density_averaged(2.0, 1.0) == 0.0
    assert eq.nu1_density_averaged(-1.7, 1.0) == 0.0


@pytest.mark.parametrize("b", [0.1, 1.0, 100.0])
def test_density_shape(b):
    c1, _ = support_constants(b)
    x = c1 * np.linspace(1e-4, 1 - 1e-9, 400)
    d = eq.nu1_density_closed(x, b)
    assert np.all(np.diff(d) < 0)
    assert eq.nu1_density_closed(c1 * (1 - 1e-12), b) < 1e-3


@pytest.mark.parametrize("b", [0.1, 1.0, 100.0])
def test_nu1_table(b):
    t = eq.nu1_table(b)
    assert abs(t.mass - 1) < 1e-6
    assert abs(t.trapezoid_mass() - t.mass) < 1e-6
    assert t.flags.sum() == 1 and t.grid[t.flags][0] == 0
    assert np.all(np.isfinite(t.density)) and np.all(t.density >= 0)
    assert np.allclose(t.density, t.density[::-1])
    assert abs(t.cdf(0.0) - 0.5) < 1e-6


def test_nu1_table_small_grid():
    t = eq.nu1_table(0.1, 1001)
    assert len(t.grid) == 1001
    assert abs(t.trapezoid_mass() - 1) < 1e-4
    with pytest.raises(ValueError):
        eq.nu1_table(1.0, 3)


@pytest.mark.parametrize("b", [0.1, 1.0, 100.0])
def test_nu2_table(b):
    t = eq.nu2_table(b)
    sigma = 2 * math.atan(b) / math.pi
    _, c2 = support_constants(b)
    assert abs(t.mass + 2 * t.tail / t.grid[-1] - 0.5) < 1e-9
    assert abs(t.trapezoid_mass() - t.mass) < 1e-6
    assert np.all(t.density <= sigma + 1e-9)
    inside = np.abs(t.grid) < c2
    assert np.max(np.abs(t.density[inside] - sigma)) < 1e-6
    outside = np.abs(t.grid) > c2 * 1.01
    assert np.all(t.density[outside] < sigma)


def test_external_field():
    assert eq.external_field(0.0, 0.4) == 0
    assert abs(eq.external_field(1.0, math.pi / 4) - math.pi / 2) < 1e-15
    assert abs(eq.external_field_numeric(1.7, 0.3) / ((math.pi - 0.6) * 1.7) - 1) < 1e-6
    assert eq.external_field_numeric(0.0, 0.3) == 0.0
    with pytest.raises(ValueError):
        eq.external_field(1.0, 2.0)


def test_sigma():
    assert eq.sigma_density(math.pi / 4) == 0.5
    assert eq.sigma_density(1e-12) < 1e-12
    assert abs(eq.sigma_density_numeric(0.3, 0.5) - 1 / math.pi) < 1e-4


def _uniform(n=2001):
    x = np.linspace(-1, 1, n)
    return MeasureTable("real-line", x, np.full(n, 0.5), 1.0, (-1, 1))


def test_log_potential_uniform():
    mu = _uniform()
    assert abs(eq.log_potential(mu, 2.0) - (1 - 1.5 * math.log(3))) < 1e-9
    x = 0.3
    ref = -0.5 * ((1 + x) * math.log(1 + x) - (1 + x) + (1 - x) * math.log(1 - x) - (1 - x))
    assert abs(eq.log_potential(mu, x) - ref) < 1e-9
    # off the real axis: compare with direct quadrature
    from scipy import integrate
    z = 0.4 + 0.7j
    val, _ = integrate.quad(lambda y: -0.5 * math.log(abs(y - z)), -1, 1, epsabs=1e-13)
    assert abs(eq.log_potential(mu, z) - val) < 1e-9
    big = 1e6
    assert abs(eq.log_potential(mu, big) + math.log(big)) < 1e-6


def test_log_potential_atoms():
    mu = MeasureTable.atoms([0.0, 1.0])
    assert abs(eq.log_potential(mu, 3.0) - (-0.5 * math.log(3) - 0.5 * math.log(2))) < 1e-15


def test_log_potential_even(res1):
    for x in (0.2, 0.9, 2.5):
        assert abs(eq.log_potential(res1.nu1, x) - eq.log_potential(res1.nu1, -x)) < 1e-10


def test_el_residuals_b1(res1):
    c1, c2 = res1.c1, res1.c2
    assert abs(eq.el_residuals(0.0, res1)[0]) < 1e-12
    assert abs(eq.el_residuals(c1 / 2, res1)[0]) <= 2e-3
    assert eq.el_residuals(2 * c1, res1)[0] > 0
    assert abs(eq.el_residuals(3j * c2, res1)[1]) <= 2e-3
    assert math.isnan(eq.el_residuals(1j, res1)[0])


def test_r2_inside_has_the_sign_of_the_root_integral(res1):
    # inside (-i c2, i c2) the second residual equals
    # -(1/2) int_0^1 log|z3/z2| ds, which is negative
    for frac in (0.0, 0.3, 0.7):
        y = frac * res1.c2
        r2 = eq.el_residuals(1j * y, res1)[1]
        assert abs(r2 - eq.r2_numeric(y, 1.0)) < 2e-3
        assert r2 < 0
    assert eq.r2_numeric(2 * res1.c2, 1.0) == 0.0


def test_result_fields(res1):
    assert abs(res1.V_slope - math.pi / 2) < 1e-15
    assert res1.sigma_density == 0.5
    assert res1.saturation_gap < 1e-6
