"""Seeded property suites over the library's identities and inequalities.

Every check returns the worst residual over its trials, scaled so that the
property holds when ``worst <= tol``.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from . import analysis, calculus, heat, scenarios, spectral, viscosity
from .galerkin import SolverConfig, solve
from .spectral import lattice, random_scalar, random_vector, sobolev_norm

SUITES = ("spectral", "calculus", "inequalities", "solver")
EXACT_RTOL = 1e-12
ADVECTION_TOL = 1e-10


@dataclass
class PropertyResult:
    name: str
    worst: float
    tol: float
    trials: int
    note: str = ""

    @property
    def passed(self):
        return bool(self.worst <= self.tol)


def _setup(rng, max_m2=4, max_m3=3):
    n = int(rng.choice([2, 3]))
    m = int(rng.integers(1, (max_m2 if n == 2 else max_m3) + 1))
    return lattice(n, m)


def _rel(a, b):
    scale = float(np.max(np.abs(b), initial=0.0))
    return float(np.max(np.abs(a - b), initial=0.0)) / max(scale, 1e-300)


def _unit(u):
    nrm = sobolev_norm(u, 0.0)
    return u * (1.0 / nrm) if nrm > 0 else u


# ---------------------------------------------------------------------------
# spectral identities
# ---------------------------------------------------------------------------

def check_lambda_isometry(rng, trials):
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng)
        g = random_vector(lat, rng, decay=rng.uniform(0, 3))
        r, s = rng.uniform(-2, 2, size=2)
        lg = spectral.bessel_potential(g, r)
        a, b = sobolev_norm(lg, s - r), sobolev_norm(g, s)
        worst = max(worst, abs(a - b) / b,
                    _rel(spectral.bessel_potential(lg, -r).coeffs, g.coeffs))
    return worst


def check_parseval(rng, trials):
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng)
        g = random_scalar(lat, rng, decay=rng.uniform(0, 3))
        N = 2 * lat.m + 1 + int(rng.integers(0, 4))
        grid = spectral.to_physical(g, N)
        ms = float(np.mean(grid.samples ** 2))
        ref = float(np.sum(np.abs(g.coeffs) ** 2))
        worst = max(worst, abs(ms - ref) / ref)
    return worst


def check_round_trip(rng, trials):
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng)
        g = random_vector(lat, rng, decay=rng.uniform(0, 3))
        N = 2 * lat.m + 1 + int(rng.integers(0, 4))
        back = spectral.to_spectral(spectral.to_physical(g, N), lat.m)
        worst = max(worst, _rel(back.coeffs, g.coeffs))
    return worst


def check_helmholtz(rng, trials):
    """Recombination, orthogonality in H^s for s in {-1, 0, 1}, solenoidality."""
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng)
        F = random_vector(lat, rng, decay=rng.uniform(0, 3), zero_mean=True)
        Fg, Fs = calculus.helmholtz_decompose(F)
        worst = max(worst, _rel((Fg + Fs).coeffs, F.coeffs))
        for s in (-1.0, 0.0, 1.0):
            nrm = sobolev_norm(F, s) ** 2
            worst = max(worst, abs(spectral.sobolev_inner(Fg, Fs, s)) / nrm)
        worst = max(worst, abs(spectral.dual_pairing(Fg, Fs)) / sobolev_norm(F, 0) ** 2)
        div = calculus.divergence(Fs)
        worst = max(worst, sobolev_norm(div, -1) / sobolev_norm(F, 0))
        worst = max(worst, _rel(calculus.leray_project(Fs).coeffs, Fs.coeffs))
    return worst


def check_div_grad_inverse(rng, trials):
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng)
        q = random_scalar(lat, rng, decay=rng.uniform(0, 3), zero_mean=True)
        worst = max(worst, _rel(calculus.invert_gradient(calculus.gradient(q)).coeffs, q.coeffs))
        w = calculus.invert_divergence(q)
        worst = max(worst, _rel(calculus.divergence(w).coeffs, q.coeffs))
    return worst


def check_rho_band(rng, trials):
    """``rho^2 / 2 <= |2 pi xi|^2 <= rho^2`` on every nonzero lattice point."""
    worst = -math.inf
    for m in (1, 4, 16):
        for n in (1, 2, 3):
            lat = lattice(n, m)
            sel = lat.mask & (lat.norm2 > 0)
            r2 = lat.rho[sel] ** 2
            k2 = (spectral.TWO_PI ** 2) * lat.norm2[sel]
            worst = max(worst, float(np.max((0.5 * r2 - k2) / r2)), float(np.max((k2 - r2) / r2)))
    return worst


def check_duality_bound(rng, trials):
    worst = -math.inf
    for _ in range(trials):
        lat = _setup(rng)
        g = random_scalar(lat, rng, decay=rng.uniform(0, 3))
        f = random_scalar(lat, rng, decay=rng.uniform(0, 3))
        s = rng.uniform(-2, 2)
        bound = sobolev_norm(g, s) * sobolev_norm(f, -s)
        worst = max(worst, (abs(spectral.dual_pairing(g, f)) - bound) / bound)
    return max(worst, 0.0)


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

def check_convect_oracle(rng, trials):
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng, 3, 3)
        u = random_vector(lat, rng, decay=rng.uniform(0, 3))
        a = calculus.convect(u, "exact_pad").coeffs
        b = calculus.convect_oracle(u).coeffs
        worst = max(worst, _rel(a, b))
    return worst


def _advection_terms(lat, rng):
    v1 = _unit(random_vector(lat, rng, decay=rng.uniform(0, 2)))
    v2 = _unit(random_vector(lat, rng, decay=rng.uniform(0, 2)))
    v3 = _unit(random_vector(lat, rng, decay=rng.uniform(0, 2)))
    return v1, v2, v3


def _pair(a, b):
    return spectral.dual_pairing(a, b)


def check_advection_identities(rng, trials):
    """The three advection identities on unit-L2 random fields (absolute)."""
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng)
        v1, v2, v3 = _advection_terms(lat, rng)
        n, m = lat.n, lat.m
        divv1 = calculus.divergence(v1)
        dv3 = calculus.multiply_coeffs(n, m, divv1.coeffs, m, v3.coeffs, m)
        dv3 = spectral.VectorField(lat, 0.5 * (dv3 + np.conj(lat.reflect(dv3))))
        general = (_pair(calculus.advect(v1, v2), v3) + _pair(calculus.advect(v1, v3), v2)
                   + _pair(dv3, v2))
        s1 = _unit(random_vector(lat, rng, decay=rng.uniform(0, 2), div_free=True))
        anti = _pair(calculus.advect(s1, v2), v3) + _pair(calculus.advect(s1, v3), v2)
        skew = _pair(calculus.advect(s1, v2), v2)
        worst = max(worst, abs(general), abs(anti), abs(skew))
    return worst


def check_korn(rng, trials):
    """``||grad u||^2 <= 2 ||E(u)||^2`` (relative violation)."""
    worst = -math.inf
    for _ in range(trials):
        lat = _setup(rng)
        u = random_vector(lat, rng, decay=rng.uniform(0, 3))
        g2 = calculus.l2_grad_sq(u)
        e2 = calculus.strain(u).sobolev_norm(0.0) ** 2
        if g2 > 0:
            worst = max(worst, (g2 - 2.0 * e2) / g2)
    return max(worst, 0.0)


def check_strain_trace(rng, trials):
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng)
        u = random_vector(lat, rng)
        worst = max(worst, _rel(calculus.strain(u).trace().coeffs,
                                calculus.divergence(u).coeffs))
    return worst


# ---------------------------------------------------------------------------
# inequalities
# ---------------------------------------------------------------------------

def check_norm_equivalence(rng, trials):
    """``||g||_s^2 / 2 <= ||grad g||_{s-1}^2 <= ||g||_s^2`` for s in {0, 1, 2}."""
    worst = -math.inf
    for _ in range(trials):
        lat = _setup(rng)
        g = random_scalar(lat, rng, decay=rng.uniform(0, 3), zero_mean=True)
        for s in (0.0, 1.0, 2.0):
            full = sobolev_norm(g, s) ** 2
            grad = sobolev_norm(calculus.gradient(g), s - 1.0) ** 2
            worst = max(worst, (0.5 * full - grad) / full, (grad - full) / full)
    return max(worst, 0.0)


def check_interpolation(rng, trials):
    worst = -math.inf
    for _ in range(trials):
        lat = _setup(rng)
        g = random_vector(lat, rng, decay=rng.uniform(0, 3))
        s1, s2 = rng.uniform(-2, 3, size=2)
        th = rng.uniform(0, 1)
        s = th * s1 + (1 - th) * s2
        worst = max(worst, analysis.verify_interpolation(g, s1, s2, th) / sobolev_norm(g, s))
    return max(worst, 0.0)


def check_discrete_young(rng, trials):
    worst = -math.inf
    for _ in range(trials):
        dim = int(rng.integers(1, 3))
        su = tuple(int(v) for v in rng.integers(1, 7, size=dim))
        sv = tuple(int(v) for v in rng.integers(1, 7, size=dim))
        u = rng.standard_normal(su) * (rng.random(su) < 0.7)
        v = rng.standard_normal(sv)
        q = float(rng.choice([1.0, 1.5, 2.0, 3.0, math.inf]))
        scale = float(np.sum(np.abs(u))) * max(float(np.max(np.abs(v))), 1e-300)
        worst = max(worst, analysis.verify_discrete_young(u, v, q) / max(scale, 1e-300))
    return max(worst, 0.0)


def check_peetre(rng, trials):
    worst = -math.inf
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        xi = rng.integers(-20, 21, size=n)
        eta = rng.integers(-20, 21, size=n)
        for s in (-2.0, -1.0, 1.0, 2.0):
            lhs = spectral.rho(xi) ** s
            worst = max(worst, analysis.peetre_violation(s, xi, eta) / lhs)
    return max(worst, 0.0)


def check_coercivity(rng, trials, A=None, samples=10_000):
    """``C_A^{-1} |w|_1^2 / 4 <= a_T(w, w) <= ||A|| |w|_1^2`` for solenoidal w.

    The band is only claimed under the symmetry conditions, so a tensor that
    fails :func:`verify_symmetry` fails this property outright.
    """
    note = ""
    worst = -math.inf
    tensors = {}
    for _ in range(trials):
        lat = _setup(rng, 4, 2)
        n = lat.n
        if A is not None and A.n != n:
            lat = lattice(A.n, lat.m)
            n = A.n
        if n not in tensors:
            T = A if A is not None else viscosity.anisotropic_demo(n)
            sym = viscosity.verify_symmetry(T)
            if not sym.passed:
                d = max(v[-1] for v in sym.violations)
                return max(d, 1.0), f"symmetry violated at {sym.violations[0][:5]}"
            try:
                C_A = viscosity.estimate_ellipticity(T, samples, 0)
            except viscosity.NotEllipticError as exc:
                return math.inf, str(exc)
            tensors[n] = (T, C_A, viscosity.tensor_norms(T, 0.0).sup_norm)
        T, C_A, sup = tensors[n]
        w = random_vector(lat, rng, decay=rng.uniform(0, 3), div_free=True)
        h1 = spectral.sobolev_seminorm(w, 1.0) ** 2
        a = viscosity.bilinear_form(T, 0.0, w, w)
        worst = max(worst, (0.25 / C_A * h1 - a) / h1, (a - sup * h1) / h1)
    return max(worst, 0.0), note


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def check_nonlinear_orthogonality(rng, trials):
    worst = 0.0
    for _ in range(trials):
        lat = _setup(rng, 4, 3)
        u = _unit(random_vector(lat, rng, decay=rng.uniform(0, 2), div_free=True))
        Pc = calculus.leray_project(spectral.project_zero_mean(calculus.convect(u)))
        worst = max(worst, abs(spectral.dual_pairing(Pc, u)))
    return worst


def check_taylor_green_short():
    sc = scenarios.taylor_green(4, 0.01)
    tr = solve(sc.u0, None, sc.A, SolverConfig(m=4, dt=1e-3, T=0.1, ellipticity_samples=100))
    worst = 0.0
    for t, c in zip(tr.times, tr.coeffs):
        ref = scenarios.taylor_green_exact(4, 0.01, t).coeffs
        worst = max(worst, math.sqrt(np.sum(np.abs(c - ref) ** 2) / np.sum(np.abs(ref) ** 2)))
    return worst


def check_heat_reduction(seed=0):
    u0 = scenarios.random_smooth_field(2, 3, seed, 1.0, energy=0.5)
    A = viscosity.isotropic(2, 1.0)
    tr = solve(u0, None, A, SolverConfig(m=3, dt=1e-3, T=0.1, convection=False,
                                         ellipticity_samples=100))
    ref = heat.heat_evolve(u0, tr.times[-1]).coeffs
    return math.sqrt(float(np.sum(np.abs(tr.coeffs[-1] - ref) ** 2)))


def check_run_divergence(seed=0):
    sc = scenarios.random_smooth(2, 4, seed, 2.0, nu=0.05, energy=0.05)
    tr = solve(sc.u0, None, sc.A, SolverConfig(m=4, dt=1e-3, T=0.05, ellipticity_samples=100))
    lat = tr.lattice
    worst = 0.0
    for d, c in zip(tr.diagnostics, tr.coeffs):
        h1 = math.sqrt(float(np.sum(lat.rho ** 2 * np.abs(c) ** 2)))
        worst = max(worst, d.div_residual / max(h1, 1e-300))
    return worst


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def run_suite(suite, seed=0, trials=200, tensor=None):
    """Run a named suite; returns a list of :class:`PropertyResult`."""
    if suite not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}")
    if trials == 0:
        warnings.warn(f"suite {suite!r} run with trials=0: vacuous pass", RuntimeWarning,
                      stacklevel=2)
        return []
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = []

    def add(name, worst, tol, note=""):
        out.append(PropertyResult(name, float(worst), tol, trials, note))

    if suite == "spectral":
        add("lambda_isometry", check_lambda_isometry(rng, trials), EXACT_RTOL)
        add("parseval", check_parseval(rng, trials), EXACT_RTOL)
        add("round_trip", check_round_trip(rng, trials), EXACT_RTOL)
        add("helmholtz", check_helmholtz(rng, trials), EXACT_RTOL)
        add("div_grad_inverse", check_div_grad_inverse(rng, trials), EXACT_RTOL)
        add("rho_band", check_rho_band(rng, trials), 0.0)
        add("duality_bound", check_duality_bound(rng, trials), EXACT_RTOL)
    elif suite == "calculus":
        add("convect_vs_oracle", check_convect_oracle(rng, min(trials, 50)), EXACT_RTOL)
        add("advection_identities", check_advection_identities(rng, trials), ADVECTION_TOL)
        add("korn", check_korn(rng, trials), EXACT_RTOL)
        add("strain_trace", check_strain_trace(rng, trials), EXACT_RTOL)
    elif suite == "inequalities":
        add("korn", check_korn(rng, trials), EXACT_RTOL)
        add("norm_equivalence", check_norm_equivalence(rng, trials), EXACT_RTOL)
        add("interpolation", check_interpolation(rng, trials), EXACT_RTOL)
        add("discrete_young", check_discrete_young(rng, trials), EXACT_RTOL)
        add("advection_identities", check_advection_identities(rng, trials), ADVECTION_TOL)
        add("peetre", check_peetre(rng, trials), EXACT_RTOL)
        worst, note = check_coercivity(rng, trials, tensor)
        add("coercivity", worst, EXACT_RTOL, note)
    else:
        add("nonlinear_orthogonality", check_nonlinear_orthogonality(rng, trials), ADVECTION_TOL)
        add("taylor_green_short", check_taylor_green_short(), 1e-6)
        add("heat_reduction", check_heat_reduction(seed), 1e-8)
        add("run_divergence", check_run_divergence(seed), 1e-10)
    return out


def format_report(suite, results):
    lines = [f"suite {suite}: {len(results)} properties"]
    if not results:
        lines.append("  (no trials run: vacuous pass)")
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        extra = f"  [{r.note}]" if r.note else ""
        lines.append(f"  {tag} {r.name:<24s} worst={r.worst:.3e} tol={r.tol:.1e}{extra}")
    return "\n".join(lines)
