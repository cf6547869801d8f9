import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusns import calculus as C
from torusns.spectral import (
    PhysicalGrid, ScalarField, VectorField, dual_pairing, lattice, random_scalar,
    random_vector, resize, sobolev_norm, sobolev_seminorm, to_physical, to_spectral,
)

seeds = st.integers(0, 2 ** 32 - 1)


def _u(n, m, seed, **kw):
    return random_vector(lattice(n, m), np.random.default_rng(seed), decay=1.0, **kw)


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class TestDifferentialOperators:
    def test_gradient_of_sine(self):
        lat = lattice(2, 1)
        c = np.zeros(lat.shape, dtype=complex)
        c[lat.index((1, 0))], c[lat.index((-1, 0))] = -0.5j, 0.5j  # sin 2 pi x1
        g = C.gradient(ScalarField(lat, c)).coeffs
        # d/dx1 sin = 2 pi cos
        assert g[0][lat.index((1, 0))] == pytest.approx(math.pi)
        assert np.all(g[1] == 0)

    @settings(max_examples=30, deadline=None)
    @given(n=st.sampled_from([2, 3]), m=st.integers(1, 3), seed=seeds)
    def test_helmholtz_recombines_orthogonally(self, n, m, seed):
        F = _u(n, m, seed, zero_mean=True)
        g, s = C.helmholtz_decompose(F)
        assert _rel((g + s).coeffs, F.coeffs) <= 1e-12
        assert abs(dual_pairing(g, s)) <= 1e-12 * sobolev_norm(F, 0) ** 2
        assert np.max(np.abs(C.divergence(s).coeffs)) <= 1e-12 * np.max(np.abs(F.coeffs))

    def test_helmholtz_requires_zero_mean(self):
        with pytest.raises(C.NotZeroMeanError):
            C.helmholtz_decompose(_u(2, 2, 0))

    @settings(max_examples=30, deadline=None)
    @given(n=st.sampled_from([1, 2, 3]), m=st.integers(1, 3), seed=seeds)
    def test_div_grad_inverse_pairs(self, n, m, seed):
        q = random_scalar(lattice(n, m), np.random.default_rng(seed), zero_mean=True)
        assert _rel(C.invert_gradient(C.gradient(q)).coeffs, q.coeffs) <= 1e-12
        assert _rel(C.divergence(C.invert_divergence(q)).coeffs, q.coeffs) <= 1e-12

    def test_invert_gradient_names_worst_mode(self):
        lat = lattice(2, 2)
        c = np.zeros((2,) + lat.shape, dtype=complex)
        c[1][lat.index((1, 0))] = c[1][lat.index((-1, 0))] = 1.0  # (0, cos 2 pi x1): curl != 0
        with pytest.raises(C.NotGradientError, match=r"xi=\((-?1), 0\)"):
            C.invert_gradient(VectorField(lat, c, zero_mean=True))

    def test_leray_idempotent(self):
        F = _u(3, 2, 1, zero_mean=True)
        P = C.leray_project(F)
        assert _rel(C.leray_project(P).coeffs, P.coeffs) <= 1e-14


class TestStrain:
    @settings(max_examples=25, deadline=None)
    @given(n=st.sampled_from([2, 3]), m=st.integers(1, 3), seed=seeds)
    def test_korn_identity_for_solenoidal(self, n, m, seed):
        u = _u(n, m, seed, div_free=True)
        e2 = C.strain(u).sobolev_norm(0) ** 2
        assert 2 * e2 == pytest.approx(C.l2_grad_sq(u), rel=1e-12)

    def test_strain_trace_is_divergence(self):
        u = _u(3, 2, 3, zero_mean=True)
        assert _rel(C.strain(u).trace().coeffs, C.divergence(u).coeffs) <= 1e-13

    def test_symmetric_storage(self):
        E = C.strain(_u(2, 2, 4))
        assert set(E.entries) == {(0, 0), (0, 1), (1, 1)}
        assert E.entry(1, 0) is E.entry(0, 1)


class TestProducts:
    @pytest.mark.parametrize("n,m", [(1, 3), (2, 2), (2, 3), (3, 2)])
    @pytest.mark.parametrize("mode", ["exact_pad", "two_thirds"])
    def test_convect_matches_oracle(self, n, m, mode):
        u = _u(n, m, 7)
        assert _rel(C.convect(u, mode).coeffs, C.convect_oracle(u).coeffs) <= 1e-12

    def test_grid_sizes(self):
        assert C.product_grid_size(4, 4, 4, "exact_pad") == 17
        assert C.product_grid_size(4, 4, 4, "two_thirds") == 13
        with pytest.raises(ValueError):
            C.product_grid_size(4, 4, 4, "none")

    def test_too_small_override_rejected(self):
        u = _u(2, 3, 0)
        with pytest.raises(ValueError, match="alias-free"):
            C.advect_coeffs(2, 3, u.coeffs, 3, u.coeffs, 3, "exact_pad", N=8)

    def test_convect_against_pointwise_product(self):
        u = _u(2, 2, 8, div_free=True)
        N = 16  # resolves the full degree-4 product
        ug = to_physical(u, N).samples
        du = np.stack([to_physical(C.gradient(u.component(k)), N).samples for k in range(2)])
        direct = np.einsum("jxy,kjxy->kxy", ug, du)
        ref = to_spectral(PhysicalGrid(2, N, direct), 2)
        assert _rel(C.convect(u).coeffs, ref.coeffs) <= 1e-12

    @settings(max_examples=25, deadline=None)
    @given(n=st.sampled_from([2, 3]), seed=seeds)
    def test_skew_symmetry(self, n, seed):
        rng = np.random.default_rng(seed)
        lat = lattice(n, 2)
        v = random_vector(lat, rng, div_free=True)
        a, b = random_vector(lat, rng), random_vector(lat, rng)
        # <(v.grad) a, b> = -<(v.grad) b, a> for divergence-free v, on the full product band
        lhs = dual_pairing(C.advect(resize(v, 6), resize(a, 6)), resize(b, 6))
        rhs = -dual_pairing(C.advect(resize(v, 6), resize(b, 6)), resize(a, 6))
        scale = sobolev_norm(v, 0) * sobolev_seminorm(a, 1) * sobolev_norm(b, 0)
        assert abs(lhs - rhs) <= 1e-10 * scale
