"""Galerkin approximation on the truncated divergence-free space.

The state ``u_m`` is stored by its Fourier coefficients on the radius-m ball;
this spans exactly the same space as the real trigonometric basis of
:class:`GalerkinBasis`, and ``P_m P_sigma`` of a field's coefficients are its
basis coordinates. The time derivative is

    du/dt = P_m P_sigma [ f + L u - (u . grad) u ].

Two explicit schemes are provided: classical RK4 and an integrating-factor
(Lawson) RK4 that integrates ``nu0 Laplacian`` exactly.
"""

from collections import deque
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .calculus import (
    DEALIAS_MODES,
    advect_coeffs,
    helmholtz_decompose,
    invert_gradient,
    leray,
    product_grid_size,
)
from .spectral import (
    FLAG_RTOL,
    TWO_PI,
    VectorField,
    divergence_defect,
    lattice,
    resize,
    rho,
)
from .viscosity import (
    bilinear_form_coeffs,
    estimate_ellipticity,
    operator_L_coeffs,
    verify_symmetry,
)

SCHEMES = ("rk4", "ifrk4")
BLOWUP_LIMIT = 1e100


class BlowUpError(RuntimeError):
    """Non-finite or runaway coefficients; carries the time and norm history."""

    def __init__(self, t, history):
        self.t = t
        self.history = list(history)
        tail = ", ".join(f"{v:.3e}" for v in self.history[-5:])
        super().__init__(f"numerical blow-up at t={t:.6g}; recent max|u_hat|: [{tail}]")


class StabilityError(ValueError):
    pass


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# basis
# ---------------------------------------------------------------------------

def _polarizations(xi):
    """``n - 1`` orthonormal vectors perpendicular to ``xi`` (Gram-Schmidt on e_i)."""
    xi = np.asarray(xi, dtype=np.float64)
    n = xi.size
    k = xi / np.linalg.norm(xi)
    basis = []
    for i in range(n):
        v = np.zeros(n)
        v[i] = 1.0
        v -= k * k[i]
        for b in basis:
            v -= b * np.dot(b, v)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
        if len(basis) == n - 1:
            break
    return basis


def _representative(xi):
    """True when the first nonzero component is positive."""
    for v in xi:
        if v:
            return v > 0
    return False


@dataclass(frozen=True, eq=False)
class GalerkinBasis:
    """Orthonormal real divergence-free trigonometric fields.

    Each field is ``sqrt(2) p cos(2 pi xi.x)`` or ``sqrt(2) p sin(2 pi xi.x)``
    with ``p`` a unit polarization perpendicular to ``xi``; ``Lambda w = rho(xi) w``.
    """

    n: int
    m: int
    modes: tuple          # (xi, polarization index, phase) with phase 0=cos, 1=sin
    polarizations: tuple  # unit vectors, one per mode
    eigenvalues: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)  # (L, n) + box

    @property
    def lattice(self):
        return lattice(self.n, self.m)

    def __len__(self):
        return len(self.modes)

    def field(self, ell):
        return VectorField(self.lattice, self.coeffs[ell].copy(), zero_mean=True, div_free=True)

    def coordinates(self, u):
        """``eta_l = <u, w_l>``."""
        u = resize(u, self.m) if u.m != self.m else u
        B = self.coeffs.reshape(len(self), -1)
        return (np.conj(B) @ u.coeffs.ravel()).real

    def synthesize(self, eta):
        c = np.tensordot(np.asarray(eta, dtype=np.float64), self.coeffs, axes=1)
        return VectorField(self.lattice, c, zero_mean=True, div_free=True)

    def gram(self):
        B = self.coeffs.reshape(len(self), -1)
        return (np.conj(B) @ B.T).real


def build_basis(n, m):
    """Enumerate the basis ordered by ``(|xi|^2, xi, polarization, phase)``."""
    if n < 2 or m < 1:
        raise ValueError("basis needs n >= 2 and m >= 1")
    lat = lattice(n, m)
    reps = [xi for xi in lat.frequencies() if _representative(xi)]
    reps.sort(key=lambda xi: (sum(v * v for v in xi), xi))
    modes, pols, lams, blocks = [], [], [], []
    amp = 1.0 / math.sqrt(2.0)
    for xi in reps:
        ip = lat.index(xi)
        im = lat.index([-v for v in xi])
        for pi, p in enumerate(_polarizations(xi)):
            for phase in (0, 1):
                c = np.zeros((n,) + lat.shape, dtype=np.complex128)
                if phase == 0:
                    c[(slice(None),) + ip] = amp * p
                    c[(slice(None),) + im] = amp * p
                else:
                    c[(slice(None),) + ip] = -1j * amp * p
                    c[(slice(None),) + im] = 1j * amp * p
                modes.append((xi, pi, phase))
                pols.append(p)
                lams.append(rho(xi))
                blocks.append(c)
    coeffs = np.stack(blocks) if blocks else np.zeros((0, n) + lat.shape, dtype=np.complex128)
    return GalerkinBasis(n, m, tuple(modes), tuple(pols), np.array(lams), coeffs)


# ---------------------------------------------------------------------------
# right-hand side
# ---------------------------------------------------------------------------

def _force_fn(f, n, m):
    """Normalise a force (None, field, or callable of t) to coefficient arrays."""
    lat = lattice(n, m)
    if f is None:
        zero = np.zeros((n,) + lat.shape, dtype=np.complex128)
        return lambda t: zero

    def coeffs_of(g):
        if g.n != n:
            raise ValueError("force dimension differs from the state")
        g = resize(g, m) if g.m != m else g
        c = g.coeffs
        scale = float(np.max(np.abs(c), initial=0.0))
        if np.max(np.abs(c[(...,) + lat.origin])) > FLAG_RTOL * max(scale, 1e-300):
            raise ValueError("force must have zero mean")
        return c

    if callable(f):
        return lambda t: coeffs_of(f(t))
    fixed = coeffs_of(f)
    return lambda t: fixed


class _System:
    """Precomputed pieces of the Galerkin right-hand side on one lattice."""

    def __init__(self, n, m, f, A, dealias="exact_pad", convection=True, grid=None):
        if dealias not in DEALIAS_MODES:
            raise ConfigError(f"dealias must be one of {DEALIAS_MODES}")
        if A.n != n:
            raise ConfigError("tensor dimension differs from the state")
        self.n, self.m = n, m
        self.lat = lattice(n, m)
        self.lam = (TWO_PI ** 2) * self.lat.norm2
        self.force = _force_fn(f, n, m)
        self.A = A
        self.dealias = dealias
        self.convection = convection
        need = max(product_grid_size(m, m, m, dealias),
                   product_grid_size(A.m_A, m, m, dealias) if A.m_A else 0)
        if grid is not None and grid < need:
            raise ConfigError(f"grid N={grid} too small for m={m}, m_A={A.m_A} "
                              f"with {dealias} (needs N >= {need})")
        self.grid = None if grid is None else int(grid)

    def conv(self, c):
        return advect_coeffs(self.n, self.m, c, self.m, c, self.m, self.dealias, self.grid)

    def total(self, t, c):
        """``f + L u - (u . grad) u`` before projection."""
        F = self.force(t) + operator_L_coeffs(self.A, c, self.m, t, self.dealias, N=self.grid)
        if self.convection:
            F = F - self.conv(c)
        return F

    def rhs(self, t, c):
        return leray(self.total(t, c), self.lat)

    def dissipation(self, t, c):
        return bilinear_form_coeffs(self.A, t, c, self.m, self.dealias, self.grid)

    def force_power(self, t, c):
        return float(np.sum(self.force(t) * np.conj(c)).real)


def galerkin_rhs(u, f, A, m=None, t=0.0, dealias="exact_pad", convection=True):
    """``P_m P_sigma [f(t) + L u - (u . grad) u]``.

    ``f`` may be ``None``, a field, or a callable returning a field at time t.
    """
    m = u.m if m is None else m
    u = resize(u, m) if u.m != m else u
    sys = _System(u.n, m, f, A, dealias, convection)
    return VectorField(sys.lat, sys.rhs(t, u.coeffs), zero_mean=True, div_free=True)


def recover_pressure(u, f, A, t=0.0, dealias="exact_pad"):
    """Zero-mean ``p`` with ``grad p = P_g F``, ``F = f + L u - (u . grad) u``.

    The mean of ``F`` (roundoff only, for divergence-free ``u``) is dropped
    before splitting.
    """
    sys = _System(u.n, u.m, f, A, dealias)
    F = sys.total(t, u.coeffs)
    F[(...,) + sys.lat.origin] = 0.0
    F = 0.5 * (F + np.conj(sys.lat.reflect(F)))
    Fg, _ = helmholtz_decompose(VectorField(sys.lat, F))
    return invert_gradient(Fg)


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

@dataclass
class SolverState:
    t: float
    u: VectorField
    step_index: int = 0


def stability_cap(A, m):
    """``0.5 / (nu_max (2 pi m)^2)`` for explicit RK4."""
    nu = A.nu_max()
    if nu <= 0:
        return math.inf
    return 0.5 / (nu * (TWO_PI * m) ** 2)


def _rk4(sys, t, c, dt):
    k1 = sys.rhs(t, c)
    k2 = sys.rhs(t + 0.5 * dt, c + 0.5 * dt * k1)
    k3 = sys.rhs(t + 0.5 * dt, c + 0.5 * dt * k2)
    k4 = sys.rhs(t + dt, c + dt * k3)
    return c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _ifrk4(sys, t, c, dt, nu0):
    # Lawson RK4 on v = exp(nu0 lam t) u; N(u) = rhs(u) + nu0 lam u
    lam = nu0 * sys.lam
    E2 = np.exp(-0.5 * dt * lam)
    E = E2 * E2

    def N(tt, cc):
        return sys.rhs(tt, cc) + lam * cc

    k1 = N(t, c)
    k2 = N(t + 0.5 * dt, E2 * (c + 0.5 * dt * k1))
    k3 = N(t + 0.5 * dt, E2 * c + 0.5 * dt * k2)
    k4 = N(t + dt, E * c + dt * E2 * k3)
    return E * c + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)


def _advance(sys, t, c, dt, scheme, nu0):
    if scheme == "rk4":
        new = _rk4(sys, t, c, dt)
    elif scheme == "ifrk4":
        new = _ifrk4(sys, t, c, dt, nu0)
    else:
        raise ConfigError(f"scheme must be one of {SCHEMES}")
    proj = leray(new, sys.lat)
    proj = 0.5 * (proj + np.conj(sys.lat.reflect(proj)))
    correction = math.sqrt(float(np.sum(np.abs(proj - new) ** 2)))
    return proj, correction


def _check_finite(c, t, history):
    peak = float(np.max(np.abs(c), initial=0.0)) if np.all(np.isfinite(c)) else math.inf
    history.append(peak)
    if not math.isfinite(peak) or peak > BLOWUP_LIMIT:
        raise BlowUpError(t, history)


def step(state, dt, scheme="rk4", f=None, A=None, dealias="exact_pad", nu0=None,
         convection=True):
    """Advance one step and re-project onto the divergence-free space."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    u = state.u
    sys = _System(u.n, u.m, f, A, dealias, convection)
    _check_dt(A, u.m, dt, scheme)
    nu0 = A.isotropic_projection() if nu0 is None else nu0
    c, _ = _advance(sys, state.t, u.coeffs, dt, scheme, nu0)
    t = state.t + dt
    _check_finite(c, t, [])
    return SolverState(t, VectorField(u.lattice, c, zero_mean=True, div_free=True),
                       state.step_index + 1)


def _check_dt(A, m, dt, scheme):
    cap = stability_cap(A, m)
    if dt > cap:
        msg = f"dt={dt:g} exceeds the explicit stability cap {cap:.3e} for m={m}"
        if scheme == "rk4":
            raise StabilityError(msg)
        warnings.warn(msg + " (advisory for ifrk4)", RuntimeWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# whole runs
# ---------------------------------------------------------------------------

@dataclass
class SolverConfig:
    m: int
    dt: float
    T: float
    scheme: str = "rk4"
    dealias: str = "exact_pad"
    nu0: float | None = None
    convection: bool = True
    grid: int | None = None
    ellipticity_samples: int = 10_000
    seed: int = 0


@dataclass
class DiagnosticsRecord:
    t: float
    l2_sq: float
    hs_sq: dict
    dissipation: float
    force_power: float
    serrin_cumulative: float
    energy_residual_cumulative: float
    div_residual: float
    projection_correction: float = 0.0

    @property
    def h_half_n_sq(self):
        return self.hs_sq["n/2"]


@dataclass
class Trajectory:
    lattice: object
    times: list
    coeffs: list
    diagnostics: list
    scheme: str
    dealias: str
    nu0: float

    def __len__(self):
        return len(self.times)

    def field(self, i):
        return VectorField(self.lattice, self.coeffs[i], zero_mean=True, div_free=True)

    @property
    def final(self):
        return self.field(-1)


def _hs_sq(lat, c, s):
    return float(np.sum(lat.rho ** (2.0 * s) * np.abs(c) ** 2))


def _div_l2(lat, c):
    d = (TWO_PI * lat.xi * c).sum(axis=0)
    return math.sqrt(float(np.sum(np.abs(d) ** 2)))


def solve(u0, f, A, config, on_step=None):
    """Integrate from ``t = 0`` to ``config.T`` and record diagnostics every step.

    The initial snapshot is ``P_m P_sigma u0``. ``on_step(i, t, coeffs)`` is
    called after every recorded state (used for periodic snapshots).
    """
    cfg = config
    n, m = u0.n, cfg.m
    if cfg.dt <= 0 or cfg.T <= 0:
        raise ConfigError("dt and T must be positive")
    if cfg.scheme not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}")
    sym = verify_symmetry(A)
    if not sym.passed:
        raise ConfigError(f"viscosity tensor violates symmetry: {sym.violations[:3]}")
    estimate_ellipticity(A, cfg.ellipticity_samples, cfg.seed)
    sys = _System(n, m, f, A, cfg.dealias, cfg.convection, cfg.grid)
    u0 = resize(u0, m) if u0.m != m else u0
    scale = float(np.max(np.abs(u0.coeffs), initial=0.0))
    if np.max(np.abs(u0.mean())) > FLAG_RTOL * max(scale, 1e-300):
        raise ConfigError("initial data must have zero mean")
    if divergence_defect(u0.lattice, u0.coeffs) > 1e-8:
        raise ConfigError("initial data must be divergence-free")
    _check_dt(A, m, cfg.dt, cfg.scheme)
    nu0 = A.isotropic_projection() if cfg.nu0 is None else float(cfg.nu0)

    lat = sys.lat
    nsteps = int(round(cfg.T / cfg.dt))
    if nsteps < 1 or abs(nsteps * cfg.dt - cfg.T) > 1e-9 * cfg.T:
        raise ConfigError(f"T={cfg.T} is not a whole number of steps dt={cfg.dt}")
    half_n = 0.5 * n

    c = leray(u0.coeffs, lat)
    c = 0.5 * (c + np.conj(lat.reflect(c)))
    times, states, diags = [], [], []
    history = deque(maxlen=64)
    prev = None
    e0 = 0.0
    for i in range(nsteps + 1):
        t = i * cfg.dt
        correction = 0.0
        if i:
            c, correction = _advance(sys, times[-1], c, cfg.dt, cfg.scheme, nu0)
            _check_finite(c, t, history)
        l2 = float(np.sum(np.abs(c) ** 2))
        diss = sys.dissipation(t, c)
        power = sys.force_power(t, c)
        hs = {"n/2": _hs_sq(lat, c, half_n)}
        if prev is None:
            e0 = 0.5 * l2
            serrin = resid = 0.0
            work = diss_int = 0.0
        else:
            h = t - prev.t
            serrin = prev.serrin_cumulative + 0.5 * h * (prev.hs_sq["n/2"] + hs["n/2"])
            work += 0.5 * h * (prev.force_power + power)
            diss_int += 0.5 * h * (prev.dissipation + diss)
            resid = e0 + work - 0.5 * l2 - diss_int
        rec = DiagnosticsRecord(t, l2, hs, diss, power, serrin, resid, _div_l2(lat, c), correction)
        times.append(t)
        states.append(c)
        diags.append(rec)
        prev = rec
        if on_step is not None:
            on_step(i, t, c)
    return Trajectory(lat, times, states, diags, cfg.scheme, cfg.dealias, nu0)
