import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from torusns.heat import heat_evolve, heat_profile, heat_seminorm_integral, verify_heat_energy_identity
from torusns.spectral import ScalarField, lattice, random_vector, sobolev_norm


def _u(n=2, m=3, seed=0, **kw):
    return random_vector(lattice(n, m), np.random.default_rng(seed), decay=1.0, **kw)


def _mode(xi, amp=1.0, m=3):
    lat = lattice(len(xi), m)
    c = np.zeros(lat.shape, dtype=complex)
    c[lat.index(xi)] = c[lat.index(tuple(-v for v in xi))] = 0.5 * amp
    return ScalarField(lat, c)


def test_single_mode_decay():
    g = _mode((1, 2))
    t = 0.01
    out = heat_evolve(g, t)
    lam = 4 * math.pi ** 2 * 5
    assert out.coeffs[out.lattice.index((1, 2))] == pytest.approx(0.5 * math.exp(-lam * t), rel=1e-14)


def test_semigroup_and_identity():
    u = _u()
    np.testing.assert_array_equal(heat_evolve(u, 0.0).coeffs, u.coeffs)
    a = heat_evolve(heat_evolve(u, 0.013), 0.02).coeffs
    b = heat_evolve(u, 0.033).coeffs
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-16)
    assert heat_evolve(u, 0.1).div_free == u.div_free


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        heat_evolve(_u(), -1e-3)
    with pytest.raises(ValueError):
        heat_profile(_u(), 0.0, 1.0)


@pytest.mark.parametrize("s", [0.0, 1.0, 1.5])
def test_profile_matches_quadrature(s):
    # trapezoid error of the oracle is about (2 lam T / 1e4)^2 / 12, here ~2e-9
    g = _mode((1, 0), 0.7)
    T = 0.02
    ts = np.linspace(0, T, 10_001)
    vals = [sobolev_norm(heat_evolve(g, t), s) ** 2 for t in ts]
    ref = integrate.trapezoid(vals, ts)
    assert heat_profile(g, T, s).value == pytest.approx(ref, rel=1e-8)


def test_profile_below_tail_bound_and_monotone():
    u = _u(3, 2, 4, zero_mean=True)
    vals = [heat_profile(u, T, 1.5).value for T in (0.01, 0.1, 1.0, 10.0)]
    assert vals == sorted(vals)
    assert vals[-1] <= heat_profile(u, 1.0, 1.5).tail_bound


def test_seminorm_integral_drops_mean():
    u = _u(2, 2, 5)
    full = heat_profile(u, 0.5, 1.0).value
    semi = heat_seminorm_integral(u, 0.5, 1.0)
    mean_sq = float(np.sum(np.abs(u.coeffs[(...,) + u.lattice.origin]) ** 2))
    assert full - semi == pytest.approx(mean_sq * (2 * math.pi) ** 2 * 0.5, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.sampled_from([1, 2, 3]),
       r=st.floats(-1, 2), T=st.floats(1e-4, 5.0))
def test_energy_identity(seed, n, r, T):
    u = _u(n, 3, seed)
    scale = sobolev_norm(u, r) ** 2
    assert verify_heat_energy_identity(u, T, r, steps=5) <= 1e-12 * max(scale, 1.0)


def test_identity_steps_validated():
    with pytest.raises(ValueError):
        verify_heat_energy_identity(_u(), 1.0, steps=1)
