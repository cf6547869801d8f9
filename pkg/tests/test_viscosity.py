import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusns import viscosity as V
from torusns.calculus import strain
from torusns.spectral import lattice, random_vector, to_physical

seeds = st.integers(0, 2 ** 32 - 1)


def _u(n, m, seed, **kw):
    return random_vector(lattice(n, m), np.random.default_rng(seed), decay=1.0, **kw)


class TestConstruction:
    def test_shape_checks(self):
        with pytest.raises(ValueError, match="shape"):
            V.ViscosityTensor(2, np.zeros((2, 2, 2)))
        with pytest.raises(ValueError, match="real"):
            c = np.zeros((2, 2, 2, 2, 3, 3), dtype=complex)
            c[0, 0, 0, 0, 2, 1] = 1.0
            V.ViscosityTensor(2, c)

    def test_time_table(self):
        A = V.isotropic(2, 0.1, times=(0.0, 1.0), thetas=(1.0, 2.0))
        assert A.theta(0.5) == pytest.approx(1.5)
        assert A.theta(5.0) == 2.0
        assert A.is_time_dependent and A.is_constant
        with pytest.raises(ValueError, match="increasing"):
            V.isotropic(2, 0.1, times=(1.0, 0.0), thetas=(1.0, 1.0))

    def test_demo_is_variable(self):
        A = V.anisotropic_demo(3)
        assert A.m_A == 1 and not A.is_constant


class TestSymmetryAndEllipticity:
    @pytest.mark.parametrize("n", [2, 3])
    def test_demo_and_isotropic_are_symmetric(self, n):
        assert V.verify_symmetry(V.isotropic(n, 0.3)).passed
        assert V.verify_symmetry(V.anisotropic_demo(n)).passed

    def test_broken_symmetry_reported(self):
        t = V.isotropic_table(2, 0.1)
        t[0, 1, 0, 0] += 0.05
        rep = V.verify_symmetry(V.from_table(t))
        assert not rep.passed
        # exchanging j <-> beta maps entry (0, 1, 0, 0) to (0, 0, 0, 1)
        assert {v[:5] for v in rep.violations} == {(0, 1, 0, 0, "j<->beta"), (0, 0, 0, 1, "j<->beta")}
        assert all(v[5] == pytest.approx(0.05) for v in rep.violations)

    def test_symmetrize_projects(self):
        rng = np.random.default_rng(0)
        t = rng.standard_normal((3,) * 4)
        s = V.symmetrize(t)
        assert V.verify_symmetry(V.from_table(s)).passed
        np.testing.assert_allclose(V.symmetrize(s), s, atol=1e-15)

    @pytest.mark.parametrize("n,nu", [(2, 0.01), (3, 0.25)])
    def test_isotropic_ellipticity_constant(self, n, nu):
        # the form is 2 nu |zeta|^2 on symmetric matrices
        assert V.estimate_ellipticity(V.isotropic(n, nu), 500) == pytest.approx(1 / (2 * nu), rel=1e-12)

    def test_demo_ellipticity_bound(self):
        n, nu, eps = 2, 0.05, 0.2
        C_A = V.estimate_ellipticity(V.anisotropic_demo(n, nu, eps=eps))
        assert 0 < C_A <= 1 / (2 * nu * (1 - eps)) * (1 + 1e-12)

    def test_not_elliptic_has_witness(self):
        A = V.isotropic(2, 0.1, times=(0.0, 1.0), thetas=(1.0, -1.0))
        with pytest.raises(V.NotEllipticError) as info:
            V.estimate_ellipticity(A, 200)
        assert info.value.t > 0.5 and info.value.zeta.shape == (2, 2)

    def test_deterministic(self):
        A = V.anisotropic_demo(3)
        assert V.estimate_ellipticity(A, 300, 5) == V.estimate_ellipticity(A, 300, 5)

    def test_trace_free_samples(self):
        z = V.random_trace_free_symmetric(np.random.default_rng(1), 3, 50)
        np.testing.assert_allclose(np.trace(z, axis1=1, axis2=2), 0, atol=1e-14)
        np.testing.assert_allclose(z, np.swapaxes(z, 1, 2))


class TestOperator:
    @pytest.mark.parametrize("n", [2, 3])
    def test_isotropic_is_laplacian(self, n):
        nu = 0.07
        u = _u(n, 3, n, div_free=True)
        Lu = V.apply_operator_L(V.isotropic(n, nu), u).coeffs
        lap = -4 * math.pi ** 2 * u.lattice.norm2 * u.coeffs * nu
        np.testing.assert_allclose(Lu, lap, atol=1e-12 * np.max(np.abs(lap)))

    @pytest.mark.parametrize("dealias", ["exact_pad", "two_thirds"])
    def test_strain_and_gradient_forms_agree(self, dealias):
        A = V.anisotropic_demo(2)
        u = _u(2, 3, 1, div_free=True)
        a = V.apply_operator_L(A, u, 0.0, dealias, "strain").coeffs
        b = V.apply_operator_L(A, u, 0.0, dealias, "gradient").coeffs
        np.testing.assert_allclose(a, b, atol=1e-12 * np.max(np.abs(a)))

    @settings(max_examples=15, deadline=None)
    @given(seed=seeds, n=st.sampled_from([2, 3]))
    def test_form_symmetric_for_demo(self, seed, n):
        A = V.anisotropic_demo(n)
        u, v = _u(n, 2, seed), _u(n, 2, seed + 1)
        assert V.bilinear_form(A, 0.0, u, v) == pytest.approx(V.bilinear_form(A, 0.0, v, u), rel=1e-11)

    def test_form_against_grid_quadrature(self):
        # independent route: sample a and E(u) on a fine grid and average
        A = V.anisotropic_demo(2)
        u = _u(2, 3, 2, div_free=True)
        N = 24
        a = A.sample(N)
        E = to_physical_tensor(strain(u), N)
        direct = np.mean(np.einsum("kjab...,jb...,ka...->...", a, E, E))
        assert V.bilinear_form(A, 0.0, u, u) == pytest.approx(direct, rel=1e-12)

    def test_time_factor_scales_form(self):
        A = V.anisotropic_demo(2)
        At = V.ViscosityTensor(2, A.coeffs, (0.0, 2.0), (1.0, 3.0))
        u = _u(2, 2, 3)
        assert V.bilinear_form(At, 1.0, u, u) == pytest.approx(2 * V.bilinear_form(A, 0.0, u, u), rel=1e-13)


def to_physical_tensor(E, N):
    n = E.n
    return np.stack([np.stack([to_physical(E.entry(j, b), N).samples for b in range(n)])
                     for j in range(n)])


class TestScalars:
    def test_nu_max_isotropic(self):
        assert V.isotropic(3, 0.2).nu_max() == pytest.approx(0.2, rel=1e-14)

    def test_isotropic_projection(self):
        assert V.isotropic(2, 0.3, (0.0, 1.0), (1.0, 3.0)).isotropic_projection() == pytest.approx(0.6)

    def test_norms_constant(self):
        nu, n = 0.1, 2
        A = V.isotropic(n, nu)
        fro = math.sqrt(np.sum(V.isotropic_table(n, nu) ** 2))
        tn = V.tensor_norms(A, 1.5)
        assert tn.sup_norm == pytest.approx(fro)
        assert tn.sobolev_frobenius_norm == pytest.approx((2 * math.pi) ** 1.5 * fro)
        assert tn.sobolev_frobenius_seminorm == 0.0

    def test_demo_sup_norm(self):
        # the time-independent factor peaks at 1 + eps
        A = V.anisotropic_demo(2, eps=0.2)
        mean_fro = math.sqrt(np.sum(A.mean_table() ** 2))
        assert V.tensor_norms(A, 0.0).sup_norm == pytest.approx(1.2 * mean_fro, rel=1e-12)
