import math

import numpy as np
import pytest

from torusns import scenarios
from torusns.calculus import convect, leray_project
from torusns.spectral import to_physical


def test_taylor_green_pointwise():
    u = scenarios.taylor_green_field(2)
    g = to_physical(u, 8)
    x1, x2 = np.meshgrid(np.arange(8) / 8, np.arange(8) / 8, indexing="ij")
    np.testing.assert_allclose(g.samples[0], np.sin(2 * np.pi * x1) * np.cos(2 * np.pi * x2), atol=1e-15)
    np.testing.assert_allclose(g.samples[1], -np.cos(2 * np.pi * x1) * np.sin(2 * np.pi * x2), atol=1e-15)


def test_taylor_green_nonlinearity_is_gradient():
    u = scenarios.taylor_green_field(4)
    assert np.max(np.abs(leray_project(convect(u)).coeffs)) < 1e-15


def test_taylor_green_exact_decay():
    nu, t = 0.02, 0.3
    u = scenarios.taylor_green_exact(3, nu, t)
    assert np.sum(np.abs(u.coeffs) ** 2) == pytest.approx(0.5 * math.exp(-16 * math.pi ** 2 * nu * t))
    with pytest.raises(ValueError):
        scenarios.taylor_green_field(0)


@pytest.mark.parametrize("n", [2, 3])
def test_random_smooth_energy_and_seed(n):
    a = scenarios.random_smooth_field(n, 3, seed=11, energy=0.2)
    b = scenarios.random_smooth_field(n, 3, seed=11, energy=0.2)
    c = scenarios.random_smooth_field(n, 3, seed=12, energy=0.2)
    assert np.sum(np.abs(a.coeffs) ** 2) == pytest.approx(0.4, rel=1e-14)
    np.testing.assert_array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, c.coeffs)
    assert a.div_free and a.zero_mean


def test_single_stokes_mode():
    sc = scenarios.single_stokes_mode(3, 2, xi=(1, 1, 0))
    assert sc.u0.div_free
    assert np.sum(np.abs(sc.u0.coeffs) ** 2) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        scenarios.single_stokes_mode(2, 1, xi=(1, 1))


def test_registry_and_zero():
    assert set(scenarios.SCENARIOS) == {"taylor_green", "single_stokes_mode", "random_smooth",
                                        "anisotropic_demo", "zero"}
    z = scenarios.zero(3, 2)
    assert not np.any(z.u0.coeffs)
    assert scenarios.anisotropic_demo(2, 3).A.m_A == 1
