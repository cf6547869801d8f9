"""Diagnostics, explicit existence-threshold constants, and inequality checks.

All time integrals over trajectories use the trapezoid rule on the step grid;
time integrals of heat quantities are closed form.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate, special

from .galerkin import _force_fn
from .heat import heat_seminorm_integral
from .kernels import convolve_full, lattice_power_sum, nested_gronwall
from .spectral import lattice, random_coeffs, rho, sobolev_norm
from .viscosity import bilinear_form_coeffs, estimate_ellipticity, tensor_norms

REGIMES = ("constant_coeff", "variable_coeff")


# ---------------------------------------------------------------------------
# trajectory diagnostics
# ---------------------------------------------------------------------------

def _index_of(times, t, what):
    times = np.asarray(times)
    tol = 1e-9 * max(1.0, abs(times[-1]))
    i = int(np.argmin(np.abs(times - t)))
    if abs(times[i] - t) > tol:
        raise ValueError(f"{what}={t} is not a step time of the trajectory "
                         f"[{times[0]}, {times[-1]}]")
    return i


def energy_residual(traj, f, A, t0, t1):
    """Energy balance defect over ``[t0, t1]``.

    ``1/2 ||u(t0)||^2 + int <f, u> - 1/2 ||u(t1)||^2 - int a_T(u, u)`` with
    trapezoid quadrature; positive means energy was lost beyond dissipation.
    """
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    i0 = _index_of(traj.times, t0, "t0")
    i1 = _index_of(traj.times, t1, "t1")
    lat = traj.lattice
    force = _force_fn(f, lat.n, lat.m)
    ts = np.asarray(traj.times[i0:i1 + 1])
    diss = np.array([bilinear_form_coeffs(A, t, traj.coeffs[i], lat.m, traj.dealias)
                     for i, t in zip(range(i0, i1 + 1), ts)])
    power = np.array([float(np.sum(force(t) * np.conj(traj.coeffs[i])).real)
                      for i, t in zip(range(i0, i1 + 1), ts)])
    e0 = 0.5 * float(np.sum(np.abs(traj.coeffs[i0]) ** 2))
    e1 = 0.5 * float(np.sum(np.abs(traj.coeffs[i1]) ** 2))
    return e0 + integrate.trapezoid(power, ts) - e1 - integrate.trapezoid(diss, ts)


def serrin_norm(traj, n=None):
    """Trapezoid ``int_0^T ||u||^2_{H^{n/2}} dt``."""
    lat = traj.lattice
    n = lat.n if n is None else n
    w = lat.rho ** float(n)
    vals = [float(np.sum(w * np.abs(c) ** 2)) for c in traj.coeffs]
    return float(integrate.trapezoid(vals, traj.times))


# ---------------------------------------------------------------------------
# commutator constant
# ---------------------------------------------------------------------------

class SumDivergesError(ValueError):
    pass


@dataclass
class CommutatorReport:
    value: float
    sigma0: float
    exponent: float
    radius: int
    partial_sum: float       # raw lattice sum at ``radius``
    partial_sum_half: float  # raw lattice sum at ``radius // 2``
    tail: float              # integral estimate of the sum beyond ``radius``
    value_half: float        # tail-corrected constant at ``radius // 2``

    def __float__(self):
        return self.value

    @property
    def relative_change(self):
        if self.value == 0:
            return 0.0
        return abs(self.value - self.value_half) / abs(self.value)


def _tail_integral(n, radius, p):
    """``int_R^inf (2 pi)^p (1 + r^2)^{p/2} |S^{n-1}| r^{n-1} dr``."""
    area = 2.0 * math.pi ** (0.5 * n) / special.gamma(0.5 * n)
    val, _ = integrate.quad(lambda r: (1.0 + r * r) ** (0.5 * p) * r ** (n - 1),
                            radius, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return (2.0 * math.pi) ** p * area * val


def commutator_constant(s, theta, sigma_tilde, n, radius=64):
    """Constant of the commutator estimate.

    ``(2^{|s|/2} / 2 pi) |theta| [sum_xi rho(xi)^{2 sigma0 - n - 2 sigma_tilde}]^{1/2}``
    with ``sigma0 = max(|s|, |s - theta + 1|) + n/2``. The lattice sum is taken
    over ``|xi| <= radius`` and completed with an integral estimate of the
    remainder; the raw partial sums at ``radius`` and ``radius // 2`` are
    reported alongside.

    Raises
    ------
    SumDivergesError
        if ``sigma_tilde <= sigma0``.
    """
    sigma0 = max(abs(s), abs(s - theta + 1)) + 0.5 * n
    if sigma_tilde <= sigma0:
        raise SumDivergesError(
            f"lattice sum diverges: sigma_tilde={sigma_tilde} must exceed sigma0={sigma0}")
    if radius < 2:
        raise ValueError("radius must be >= 2")
    p = 2.0 * sigma0 - n - 2.0 * sigma_tilde
    pref = 2.0 ** (0.5 * abs(s)) / (2.0 * math.pi) * abs(theta)
    half = radius // 2
    raw = lattice_power_sum(n, radius, p)
    raw_half = lattice_power_sum(n, half, p)
    tail = _tail_integral(n, radius, p)
    tail_half = _tail_integral(n, half, p)
    return CommutatorReport(
        value=pref * math.sqrt(raw + tail),
        sigma0=sigma0,
        exponent=p,
        radius=radius,
        partial_sum=raw,
        partial_sum_half=raw_half,
        tail=tail,
        value_half=pref * math.sqrt(raw_half + tail_half),
    )


# ---------------------------------------------------------------------------
# multiplication constant
# ---------------------------------------------------------------------------

def multiplication_target(s1, s2, n):
    """Target index of the product estimate, or ``ValueError`` outside its cases."""
    if not s1 <= s2:
        raise ValueError("need s1 <= s2")
    if not s1 + s2 > 0:
        raise ValueError("need s1 + s2 > 0")
    if s2 > 0.5 * n:
        return s1
    if s2 < 0.5 * n:
        return s1 + s2 - 0.5 * n
    raise ValueError("s2 = n/2 is covered by neither case of the product estimate")


def product_ratio(c1, c2, n, m, s1, s2, target):
    """``||f1 f2||_target / (||f1||_{s1} ||f2||_{s2})`` for coefficient arrays on radius m."""
    lat = lattice(n, m)
    big = lattice(n, 2 * m, box=True)
    prod = convolve_full(c1, c2)
    num = math.sqrt(float(np.sum(big.rho ** (2.0 * target) * np.abs(prod) ** 2)))
    d1 = math.sqrt(float(np.sum(lat.rho ** (2.0 * s1) * np.abs(c1) ** 2)))
    d2 = math.sqrt(float(np.sum(lat.rho ** (2.0 * s2) * np.abs(c2) ** 2)))
    if d1 == 0 or d2 == 0:
        return 0.0
    return num / (d1 * d2)


def estimate_multiplication_constant(s1, s2, n, m, trials, seed=0):
    """Empirical lower bound for the product-estimate constant.

    Trial ``i`` uses its own child seed, so the running maximum is
    nondecreasing in ``trials``. Trial 0 is the pair ``f1 = f2 = 1``.
    """
    target = multiplication_target(s1, s2, n)
    if trials <= 0:
        return 0.0
    lat = lattice(n, m)
    children = np.random.SeedSequence(seed).spawn(trials)
    best = 0.0
    for i, child in enumerate(children):
        if i == 0:
            c1 = np.zeros(lat.shape, dtype=np.complex128)
            c1[lat.origin] = 1.0
            c2 = c1
        else:
            rng = np.random.default_rng(child)
            d1, d2 = rng.uniform(0.0, 3.0, size=2)
            c1 = random_coeffs(lat, rng, decay=d1)
            c2 = random_coeffs(lat, rng, decay=d2)
        best = max(best, product_ratio(c1, c2, n, m, s1, s2, target))
    return best


def peetre_violation(s, xi, eta):
    """``rho(xi)^s - 2^{|s|/2} (2 pi)^{-|s|} rho(eta)^{|s|} rho(xi - eta)^s`` (should be <= 0)."""
    xi = np.asarray(xi)
    eta = np.asarray(eta)
    rhs = 2.0 ** (0.5 * abs(s)) / (2.0 * math.pi) ** abs(s) * rho(eta) ** abs(s) * rho(xi - eta) ** s
    return rho(xi) ** s - rhs


# ---------------------------------------------------------------------------
# existence threshold
# ---------------------------------------------------------------------------

@dataclass
class ThresholdReport:
    regime: str
    C_A: float
    C_star: float
    C_tilde_star: float
    C_bar: float
    A_norm: float
    A1: float
    A2: float
    A3: float
    u0_norm_sq: float
    T: float
    T_star: float
    force_integral: float
    heat_integral: float
    lhs: float
    margin: float
    T_star_max: float
    sigma_tilde: float | None = None
    notes: list = field(default_factory=list)

    @property
    def satisfied(self):
        return self.margin > 0


def _force_integrator(f_norm):
    """Return ``F(t) = int_0^t ||f||^2`` for a callable or a ``(times, values)`` table."""
    if f_norm is None:
        return lambda t: 0.0
    if callable(f_norm):
        def F(t):
            if t <= 0:
                return 0.0
            return integrate.quad(f_norm, 0.0, t, limit=200)[0]
        return F
    ts, vals = (np.asarray(a, dtype=np.float64) for a in f_norm)
    if ts.ndim != 1 or ts.shape != vals.shape or ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
        raise ValueError("sampled force norm needs increasing times starting at 0")
    cum = integrate.cumulative_trapezoid(vals, ts, initial=0.0)

    def F(t):
        # exact integral of the piecewise-linear interpolant
        if t <= 0:
            return 0.0
        if t >= ts[-1]:
            return float(cum[-1] + vals[-1] * (t - ts[-1]))
        i = int(np.searchsorted(ts, t, side="right") - 1)
        h = t - ts[i]
        slope = (vals[i + 1] - vals[i]) / (ts[i + 1] - ts[i])
        return float(cum[i] + vals[i] * h + 0.5 * slope * h * h)
    return F


def default_sigma_tilde(n):
    """A value strictly above ``max(2, n - 2)``."""
    return max(2.0, n - 2.0) + 0.5


def existence_threshold(u0, f_norm=None, A=None, T=1.0, regime="constant_coeff",
                        constants_override=None, C_star=1.0, C_tilde_star=1.0,
                        sigma_tilde=None, T_star=None, samples=10_000, seed=0,
                        rtol=1e-9):
    """Evaluate the smallness condition for existence on ``[0, T_star]``.

    Parameters
    ----------
    u0 : VectorField
    f_norm : callable, (times, values) pair, or None
        ``t -> ||f(t)||^2_{H^{n/2-2}}``.
    A : ViscosityTensor, optional
        Needed unless ``constants_override`` supplies ``C_A`` and ``A_norm``.
    constants_override : dict, optional
        Any of ``C_A``, ``A_norm``, ``C_bar``.
    T_star : float, optional
        Where the left side is evaluated (default ``T``).

    The multiplication constants ``C_star`` and ``C_tilde_star`` have no known
    numerical value and are configuration inputs; the report is therefore
    heuristic up to them. ``C_A`` is sampled, not proven.
    """
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}")
    if T <= 0:
        raise ValueError("T must be positive")
    over = dict(constants_override or {})
    n = u0.n
    notes = ["heuristic up to C*: multiplication constants are configured, not derived"]
    if "C_A" in over:
        C_A = float(over["C_A"])
    else:
        if A is None:
            raise ValueError("a tensor or an explicit C_A is required")
        C_A = estimate_ellipticity(A, samples, seed)  # raises when not elliptic
        notes.append(f"C_A sampled over {samples} draws (seed {seed})")
    sig = None
    C_bar = 0.0
    if regime == "constant_coeff":
        if "A_norm" in over:
            A_norm = float(over["A_norm"])
        else:
            A_norm = tensor_norms(A, 0.0).sup_norm
        A1 = 8.0 * C_star ** 2
        A2 = A_norm ** 2 + 1.0
        A3 = 1.0 / (512.0 * math.e * C_A ** 2 * C_star ** 2)
    else:
        sig = default_sigma_tilde(n) if sigma_tilde is None else float(sigma_tilde)
        if sig <= max(2.0, n - 2.0):
            raise ValueError(f"sigma_tilde must exceed max(2, n-2) = {max(2.0, n - 2.0)}")
        if "A_norm" in over:
            A_norm = float(over["A_norm"])
        else:
            A_norm = tensor_norms(A, sig + 1.0).sobolev_frobenius_norm
        if "C_bar" in over:
            C_bar = float(over["C_bar"])
        else:
            C_bar = commutator_constant(0.0, 0.5 * n - 1.0, sig, n).value
        A1 = 8.0 * C_star ** 2
        A2 = C_tilde_star ** 2 * A_norm ** 2 + 1.0
        A3 = math.exp(-1.0 - 20.0 * C_A * C_bar ** 2 * A_norm ** 2 * T) / (
            640.0 * C_A ** 2 * C_star ** 2)

    u0_sq = sobolev_norm(u0, 0.5 * n - 1.0) ** 2
    F = _force_integrator(f_norm)
    coef = A1 * u0_sq + A2

    def parts(ts):
        fi = F(ts)
        hi = heat_seminorm_integral(u0, ts, 0.5 * n) if ts > 0 else 0.0
        return fi, hi, fi + coef * hi

    Ts = T if T_star is None else float(T_star)
    fi, hi, lhs = parts(Ts)
    # bisection for the largest admissible T* in [0, T]
    if parts(T)[2] < A3:
        tmax = T
    else:
        lo, hi_t = 0.0, T
        for _ in range(200):
            if hi_t - lo <= rtol * hi_t:
                break
            mid = 0.5 * (lo + hi_t)
            if parts(mid)[2] < A3:
                lo = mid
            else:
                hi_t = mid
        tmax = lo
    return ThresholdReport(
        regime=regime, C_A=C_A, C_star=C_star, C_tilde_star=C_tilde_star, C_bar=C_bar,
        A_norm=A_norm, A1=A1, A2=A2, A3=A3, u0_norm_sq=u0_sq, T=T, T_star=Ts,
        force_integral=fi, heat_integral=hi, lhs=lhs, margin=A3 - lhs,
        T_star_max=tmax, sigma_tilde=sig, notes=notes)


def threshold_lhs(u0, f_norm, A1, A2, T_star):
    """Left side of the smallness condition at ``T_star`` (closed-form heat term)."""
    n = u0.n
    F = _force_integrator(f_norm)
    coef = A1 * sobolev_norm(u0, 0.5 * n - 1.0) ** 2 + A2
    if T_star <= 0:
        return 0.0
    return F(T_star) + coef * heat_seminorm_integral(u0, T_star, 0.5 * n)


# ---------------------------------------------------------------------------
# Gronwall lemmas
# ---------------------------------------------------------------------------

@dataclass
class GronwallProblem:
    grid: np.ndarray
    eta0: float
    phi: np.ndarray
    psi: np.ndarray
    y: np.ndarray | None = None
    b: float | None = None
    c: float | None = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 1 or self.grid.size < 2 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing with at least 2 points")
        self.phi = np.broadcast_to(np.asarray(self.phi, dtype=np.float64), self.grid.shape)
        self.psi = np.broadcast_to(np.asarray(self.psi, dtype=np.float64), self.grid.shape)
        if self.y is not None:
            self.y = np.broadcast_to(np.asarray(self.y, dtype=np.float64), self.grid.shape)


@dataclass
class GronwallBound:
    grid: np.ndarray
    bound: np.ndarray
    simplified: np.ndarray | None


def _cum(v, t):
    return integrate.cumulative_trapezoid(v, t, initial=0.0)


def gronwall_bound(problem):
    """``exp(Phi(t)) [eta0 + int_0^t exp(-Phi) psi]`` with ``Phi = int_0^t phi``.

    ``simplified`` is ``exp(Phi(t)) [eta0 + int_0^t psi]``, valid when
    ``phi, psi >= 0``; ``None`` otherwise.
    """
    p = problem
    Phi = _cum(p.phi, p.grid)
    bound = np.exp(Phi) * (p.eta0 + _cum(np.exp(-Phi) * p.psi, p.grid))
    simple = None
    if np.all(p.phi >= 0) and np.all(p.psi >= 0):
        simple = np.exp(Phi) * (p.eta0 + _cum(p.psi, p.grid))
    return GronwallBound(p.grid, bound, simple)


@dataclass
class SmallnessReport:
    variant: str
    D: float
    threshold: float
    admissible: bool
    sup_eta_bound: float | None
    y_integral_bound: float | None
    Phi_T: float = 0.0


def smallness_check(problem, variant="alt"):
    """Evaluate the smallness condition of the two Gronwall-type lemmas.

    ``alt``: ``D = eta0 + int psi < b / (e c)``; then ``sup eta < D e`` and ``int y < 1/c``.
    ``phi``: ``D = eta0 + int exp(-Phi) psi < (b/c) exp(-1 - Phi(T))``; then
    ``sup eta < b/c`` and ``int y < 1/c``.
    """
    p = problem
    if p.b is None or p.c is None or p.b <= 0 or p.c <= 0:
        raise ValueError("b and c must be positive")
    if p.eta0 < 0 or np.any(p.psi < 0) or (p.y is not None and np.any(p.y < 0)):
        raise ValueError("eta0, psi and y must be nonnegative")
    if variant == "alt":
        D = p.eta0 + float(integrate.trapezoid(p.psi, p.grid))
        thr = p.b / (math.e * p.c)
        ok = D < thr
        return SmallnessReport("alt", D, thr, ok, D * math.e if ok else None,
                               1.0 / p.c if ok else None)
    if variant == "phi":
        if np.any(p.phi < 0):
            raise ValueError("phi must be nonnegative")
        Phi = _cum(p.phi, p.grid)
        D = p.eta0 + float(integrate.trapezoid(np.exp(-Phi) * p.psi, p.grid))
        thr = p.b / p.c * math.exp(-1.0 - Phi[-1])
        ok = D < thr
        return SmallnessReport("phi", D, thr, ok, p.b / p.c if ok else None,
                               1.0 / p.c if ok else None, float(Phi[-1]))
    raise ValueError("variant must be 'alt' or 'phi'")


def integral_gronwall_bound(a_samples, b_samples, grid):
    """``a(t) + int_0^t a(s) b(s) exp(int_s^t b) ds`` by nested trapezoid."""
    b = np.asarray(b_samples, dtype=np.float64)
    if np.any(b < 0):
        raise ValueError("b must be nonnegative")
    return nested_gronwall(grid, a_samples, b)


# ---------------------------------------------------------------------------
# inequality residuals
# ---------------------------------------------------------------------------

def verify_interpolation(g, s1, s2, theta1):
    """``||g||_s - ||g||_{s1}^theta1 ||g||_{s2}^theta2`` with ``s = theta1 s1 + theta2 s2``."""
    if not 0.0 <= theta1 <= 1.0:
        raise ValueError("theta1 must lie in [0, 1]")
    theta2 = 1.0 - theta1
    s = theta1 * s1 + theta2 * s2
    return sobolev_norm(g, s) - sobolev_norm(g, s1) ** theta1 * sobolev_norm(g, s2) ** theta2


def _lq(a, q):
    a = np.abs(np.asarray(a))
    if math.isinf(q):
        return float(a.max(initial=0.0))
    return float(np.sum(a ** q) ** (1.0 / q))


def verify_discrete_young(u_seq, v_seq, q):
    """``||u * v||_q - ||u||_1 ||v||_q`` for finitely supported sequences."""
    if q < 1:
        raise ValueError("q must be >= 1")
    u = np.atleast_1d(np.asarray(u_seq, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v_seq, dtype=np.float64))
    return _lq(convolve_full(u, v), q) - _lq(u, 1.0) * _lq(v, q)
