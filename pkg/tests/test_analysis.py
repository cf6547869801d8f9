import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusns import analysis as An
from torusns import scenarios, viscosity
from torusns.galerkin import SolverConfig, solve
from torusns.spectral import lattice, random_scalar, rho


# ---------------------------------------------------------------------------
# trajectory diagnostics
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def tg_run():
    sc = scenarios.taylor_green(4, 0.01)
    return sc, solve(sc.u0, None, sc.A, SolverConfig(m=4, dt=1e-3, T=0.2, ellipticity_samples=200))


def test_serrin_norm_closed_form(tg_run):
    _, tr = tg_run
    nu, T = 0.01, 0.2
    k = 16 * math.pi ** 2 * nu
    exact = rho((1, 1)) ** 2 * 0.5 * (1 - math.exp(-k * T)) / k
    assert An.serrin_norm(tr) == pytest.approx(exact, rel=1e-6)
    assert An.serrin_norm(tr) == pytest.approx(tr.diagnostics[-1].serrin_cumulative, rel=1e-13)


def test_energy_residual_matches_running_value(tg_run):
    sc, tr = tg_run
    full = An.energy_residual(tr, None, sc.A, 0.0, 0.2)
    assert full == pytest.approx(tr.diagnostics[-1].energy_residual_cumulative, rel=1e-8)
    # residuals over adjacent windows add up
    parts = An.energy_residual(tr, None, sc.A, 0.0, 0.1) + An.energy_residual(tr, None, sc.A, 0.1, 0.2)
    assert parts == pytest.approx(full, rel=1e-9)


def test_energy_residual_bad_window(tg_run):
    sc, tr = tg_run
    with pytest.raises(ValueError, match="step time"):
        An.energy_residual(tr, None, sc.A, 0.0, 0.1234567)
    with pytest.raises(ValueError):
        An.energy_residual(tr, None, sc.A, 0.1, 0.1)


# ---------------------------------------------------------------------------
# commutator constant
# ---------------------------------------------------------------------------

def _brute_sum(n, R, p):
    total = 0.0
    for xi in itertools.product(range(-R, R + 1), repeat=n):
        if sum(v * v for v in xi) <= R * R:
            total += rho(xi) ** p
    return total


@pytest.mark.parametrize("s,theta,sig,n", [(0.0, 1.0, 2.0, 2), (0.5, 0.5, 3.0, 3), (-1.0, 2.0, 4.0, 2)])
def test_commutator_partial_sum_matches_brute_force(s, theta, sig, n):
    rep = An.commutator_constant(s, theta, sig, n, radius=8)
    assert rep.partial_sum == pytest.approx(_brute_sum(n, 8, rep.exponent), rel=1e-12)
    assert rep.partial_sum_half == pytest.approx(_brute_sum(n, 4, rep.exponent), rel=1e-12)
    pref = 2 ** (abs(s) / 2) / (2 * math.pi) * abs(theta)
    assert rep.value == pytest.approx(pref * math.sqrt(rep.partial_sum + rep.tail), rel=1e-15)


def test_commutator_sigma0_and_divergence():
    rep = An.commutator_constant(0.0, 1.0, 2.0, 2)
    assert rep.sigma0 == 1.0 and rep.exponent == -4.0
    with pytest.raises(An.SumDivergesError):
        An.commutator_constant(0.0, 1.0, 1.0, 2)
    with pytest.raises(ValueError):
        An.commutator_constant(0.0, 1.0, 2.0, 2, radius=1)


def test_commutator_converges_with_radius():
    vals = [An.commutator_constant(0.0, 1.0, 2.0, 2, radius=R).value for R in (16, 32, 64, 128)]
    diffs = [abs(a - b) for a, b in zip(vals, vals[1:])]
    assert diffs == sorted(diffs, reverse=True)
    assert float(An.commutator_constant(0.0, 1.0, 2.0, 2)) == vals[2]


# ---------------------------------------------------------------------------
# multiplication constant
# ---------------------------------------------------------------------------

def test_multiplication_targets():
    assert An.multiplication_target(1.0, 2.0, 2) == 1.0
    assert An.multiplication_target(0.25, 0.5, 2) == pytest.approx(-0.25)
    with pytest.raises(ValueError, match="neither"):
        An.multiplication_target(0.5, 1.0, 2)
    with pytest.raises(ValueError):
        An.multiplication_target(2.0, 1.0, 2)
    with pytest.raises(ValueError):
        An.multiplication_target(-1.0, 0.5, 2)


def test_multiplication_constant_trial_zero():
    # f1 = f2 = 1: ratio (2 pi)^(t - s1 - s2)
    s1, s2, n = 0.5, 2.0, 2
    got = An.estimate_multiplication_constant(s1, s2, n, 3, trials=1)
    assert got == pytest.approx((2 * math.pi) ** (s1 - s1 - s2), rel=1e-14)


def test_multiplication_constant_monotone_and_reproducible():
    vals = [An.estimate_multiplication_constant(0.5, 1.5, 2, 3, k, seed=4) for k in (1, 5, 20, 40)]
    assert vals == sorted(vals)
    assert vals[-1] == An.estimate_multiplication_constant(0.5, 1.5, 2, 3, 40, seed=4)
    assert An.estimate_multiplication_constant(0.5, 1.5, 2, 3, 0) == 0.0


@settings(max_examples=200, deadline=None)
@given(s=st.floats(-3, 3), xi=st.tuples(st.integers(-6, 6), st.integers(-6, 6)),
       eta=st.tuples(st.integers(-6, 6), st.integers(-6, 6)))
def test_peetre(s, xi, eta):
    lhs = rho(xi) ** s
    assert An.peetre_violation(s, xi, eta) <= 1e-12 * lhs


# ---------------------------------------------------------------------------
# threshold
# ---------------------------------------------------------------------------

ONES = {"C_A": 1.0, "A_norm": 1.0}


def test_threshold_zero_data():
    u0 = scenarios.zero(2, 3).u0
    rep = An.existence_threshold(u0, None, None, 2.0, constants_override=ONES)
    assert rep.A3 == pytest.approx(1 / (512 * math.e), abs=1e-15)
    assert rep.lhs == 0.0 and rep.margin == rep.A3 and rep.satisfied
    assert rep.T_star_max == 2.0


def test_threshold_variable_regime_formula():
    u0 = scenarios.zero(3, 2).u0
    over = {"C_A": 2.0, "A_norm": 0.5, "C_bar": 0.3}
    rep = An.existence_threshold(u0, None, None, 1.5, "variable_coeff", over, C_star=1.5,
                                 C_tilde_star=2.0)
    assert rep.A2 == pytest.approx(4.0 * 0.25 + 1.0)
    expected = math.exp(-1 - 20 * 2.0 * 0.09 * 0.25 * 1.5) / (640 * 4.0 * 2.25)
    assert rep.A3 == pytest.approx(expected, rel=1e-14)
    assert rep.sigma_tilde == An.default_sigma_tilde(3) == 2.5
    with pytest.raises(ValueError, match="sigma_tilde"):
        An.existence_threshold(u0, None, None, 1.0, "variable_coeff", over, sigma_tilde=2.0)


def test_threshold_with_tensor_and_force_table():
    u0 = scenarios.random_smooth_field(2, 3, 2, energy=1e-6)
    A = viscosity.isotropic(2, 0.5)
    table = (np.array([0.0, 1.0]), np.array([0.0, 2.0]))  # ||f||^2 = 2t, integral t^2
    rep = An.existence_threshold(u0, table, A, 0.5, samples=500)
    assert rep.C_A == pytest.approx(1.0)
    assert rep.force_integral == pytest.approx(0.25)
    rep2 = An.existence_threshold(u0, lambda t: 2 * t, A, 0.5, samples=500)
    assert rep2.force_integral == pytest.approx(0.25, rel=1e-12)


def test_threshold_rejects_non_elliptic():
    with pytest.raises(viscosity.NotEllipticError):
        An.existence_threshold(scenarios.zero(2, 2).u0, None, viscosity.isotropic(2, -1.0), 1.0)


def test_threshold_bisection_root():
    u0 = scenarios.random_smooth_field(2, 4, 3, energy=0.5)
    rep = An.existence_threshold(u0, None, None, 1.0, constants_override=ONES, rtol=1e-12)
    f = An.threshold_lhs(u0, None, rep.A1, rep.A2, rep.T_star_max)
    assert f == pytest.approx(rep.A3, rel=1e-9)


# ---------------------------------------------------------------------------
# Gronwall
# ---------------------------------------------------------------------------

def test_gronwall_constant_coefficients():
    t = np.linspace(0, 2, 20_001)
    phi, psi, eta0 = 0.7, 0.3, 1.2
    gb = An.gronwall_bound(An.GronwallProblem(t, eta0, phi, psi))
    exact = np.exp(phi * t) * (eta0 + psi * (1 - np.exp(-phi * t)) / phi)
    np.testing.assert_allclose(gb.bound, exact, rtol=1e-8)
    assert np.all(gb.simplified >= gb.bound - 1e-12)


def test_gronwall_negative_phi_has_no_simplified_form():
    t = np.linspace(0, 1, 11)
    assert An.gronwall_bound(An.GronwallProblem(t, 1.0, -0.5, 0.0)).simplified is None
    with pytest.raises(ValueError):
        An.GronwallProblem(np.array([0.0, 0.0, 1.0]), 1.0, 0.0, 0.0)


def test_smallness_variants():
    t = np.linspace(0, 1, 101)
    p = An.GronwallProblem(t, 0.01, 0.5, 0.02, y=np.ones_like(t), b=1.0, c=2.0)
    alt = An.smallness_check(p, "alt")
    assert alt.D == pytest.approx(0.03) and alt.threshold == pytest.approx(1 / (2 * math.e))
    assert alt.admissible and alt.sup_eta_bound == pytest.approx(0.03 * math.e)
    ph = An.smallness_check(p, "phi")
    assert ph.Phi_T == pytest.approx(0.5)
    assert ph.admissible and ph.sup_eta_bound == 0.5
    big = An.GronwallProblem(t, 1.0, 0.5, 0.0, b=1.0, c=2.0)
    assert not An.smallness_check(big, "alt").admissible
    with pytest.raises(ValueError):
        An.smallness_check(An.GronwallProblem(t, 1.0, 0.5, 0.0), "alt")
    with pytest.raises(ValueError):
        An.smallness_check(p, "other")


def test_integral_gronwall():
    t = np.linspace(0, 1, 2001)
    a = np.full_like(t, 0.8)
    np.testing.assert_allclose(An.integral_gronwall_bound(a, np.zeros_like(t), t), a)
    np.testing.assert_allclose(An.integral_gronwall_bound(a, np.full_like(t, 1.5), t),
                               0.8 * np.exp(1.5 * t), rtol=1e-6)
    assert not np.any(An.integral_gronwall_bound(np.zeros_like(t), np.ones_like(t), t))
    with pytest.raises(ValueError):
        An.integral_gronwall_bound(a, -np.ones_like(t), t)


# ---------------------------------------------------------------------------
# inequalities
# ---------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), s1=st.floats(-2, 2), s2=st.floats(-2, 2),
       th=st.floats(0, 1))
def test_interpolation(seed, s1, s2, th):
    g = random_scalar(lattice(2, 3), np.random.default_rng(seed), decay=1.0)
    scale = max(np.sqrt(np.sum(np.abs(g.coeffs) ** 2)), 1e-300) * (2 * math.pi * 5) ** 2
    assert An.verify_interpolation(g, s1, s2, th) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(u=st.lists(st.floats(-10, 10), min_size=1, max_size=12),
       v=st.lists(st.floats(-10, 10), min_size=1, max_size=12),
       q=st.one_of(st.floats(1, 8), st.just(math.inf)))
def test_discrete_young(u, v, q):
    scale = max(sum(abs(x) for x in u) * max(abs(x) for x in v), 1e-300)
    assert An.verify_discrete_young(u, v, q) <= 1e-12 * scale


def test_young_rejects_q_below_one():
    with pytest.raises(ValueError):
        An.verify_discrete_young([1.0], [1.0], 0.5)
    with pytest.raises(ValueError):
        An.verify_interpolation(random_scalar(lattice(1, 1), np.random.default_rng(0)), 0, 1, 1.5)
