"""The viscosity tensor ``a[k, j, al, be] = a_{kj}^{al be}(x, t)``.

Time dependence is separable, ``a(x, t) = theta(t) a0(x)``, with ``theta``
given by a piecewise-linear table. The spatial part ``a0`` is band-limited:
each entry is a real Fourier series on the ball of radius ``m_A`` (``m_A = 0``
for constant coefficients).

The two symmetry conditions are invariance of ``a`` under exchanging
``k <-> al`` and under exchanging ``j <-> be``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .calculus import _grid, product_grid_size, strain_coeffs
from .kernels import quadratic_forms
from .spectral import (
    ScalarField,
    VectorField,
    coeffs_to_grid,
    grid_to_coeffs,
    lattice,
)

# the two index exchanges of the symmetry conditions, as axis permutations
_SWAP_K_AL = (2, 1, 0, 3)
_SWAP_J_BE = (0, 3, 2, 1)
SYMMETRY_TOL = 1e-12


class NotEllipticError(ValueError):
    """A sampled symmetric trace-free ``zeta`` gave a nonpositive form."""

    def __init__(self, msg, zeta=None, x=None, t=None):
        super().__init__(msg)
        self.zeta, self.x, self.t = zeta, x, t


def _perm(a, p):
    return np.transpose(a, p + tuple(range(4, a.ndim)))


@dataclass(frozen=True, eq=False)
class ViscosityTensor:
    """Band-limited anisotropic viscosity tensor.

    Parameters
    ----------
    n : int
    coeffs : ndarray, shape ``(n, n, n, n) + (2 m_A + 1,)*n``
        Fourier coefficients of every entry of ``a0``.
    times, thetas : sequences, optional
        Table of the time factor; constant 1 when omitted.
    """

    n: int
    coeffs: np.ndarray = field(repr=False)
    times: tuple = (0.0,)
    thetas: tuple = (1.0,)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        n = self.n
        if c.ndim != 4 + n or c.shape[:4] != (n,) * 4:
            raise ValueError(f"tensor coefficients must have shape (n,n,n,n)+box, got {c.shape}")
        side = c.shape[4]
        if side % 2 != 1 or c.shape[4:] != (side,) * n:
            raise ValueError("tensor coefficient box must be (2 m_A + 1)^n")
        lat = lattice(n, (side - 1) // 2)
        if np.any(c[..., ~lat.mask] != 0):
            raise ValueError("tensor coefficients outside the |xi| <= m_A ball")
        herm = np.conj(np.flip(c, axis=tuple(range(4, 4 + n))))
        if np.max(np.abs(c - herm), initial=0.0) > 1e-12 * max(np.max(np.abs(c), initial=0.0), 1e-300):
            raise ValueError("tensor entries must be real fields")
        object.__setattr__(self, "coeffs", c)
        t = np.asarray(self.times, dtype=np.float64)
        th = np.asarray(self.thetas, dtype=np.float64)
        if t.shape != th.shape or t.ndim != 1 or t.size == 0:
            raise ValueError("time-factor table needs matching 1-d times and thetas")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time-factor table times must be strictly increasing")
        object.__setattr__(self, "times", tuple(t.tolist()))
        object.__setattr__(self, "thetas", tuple(th.tolist()))
        object.__setattr__(self, "_cache", {})

    # -- structure --------------------------------------------------------
    @property
    def m_A(self):
        return (self.coeffs.shape[4] - 1) // 2

    @property
    def lattice(self):
        return lattice(self.n, self.m_A)

    @property
    def is_constant(self):
        lat = self.lattice
        c = self.coeffs.copy()
        c[(...,) + lat.origin] = 0.0
        return not np.any(c)

    @property
    def is_time_dependent(self):
        return len(set(self.thetas)) > 1

    def theta(self, t):
        return float(np.interp(t, self.times, self.thetas))

    def theta_sup(self):
        return max(abs(v) for v in self.thetas)

    def mean_table(self):
        """Spatial mean of every entry, real ``(n, n, n, n)`` array."""
        return self.coeffs[(...,) + self.lattice.origin].real.copy()

    def entry_field(self, k, j, al, be):
        return ScalarField(self.lattice, self.coeffs[k, j, al, be].copy())

    def sample(self, N):
        """``a0`` on an N-point grid, shape ``(n, n, n, n) + (N,)*n``."""
        key = ("grid", N)
        if key not in self._cache:
            if self.m_A == 0:
                self._cache[key] = np.broadcast_to(
                    self.mean_table().reshape((self.n,) * 4 + (1,) * self.n),
                    (self.n,) * 4 + (N,) * self.n)
            else:
                self._cache[key] = coeffs_to_grid(self.coeffs, self.n, self.m_A, N)
        return self._cache[key]

    def with_coeffs(self, coeffs):
        return ViscosityTensor(self.n, coeffs, self.times, self.thetas)

    # -- derived scalars --------------------------------------------------
    def ellipticity(self, samples=10_000, seed=0):
        key = ("C_A", samples, seed)
        if key not in self._cache:
            self._cache[key] = estimate_ellipticity(self, samples, seed)
        return self._cache[key]

    def nu_max(self, N=None):
        """Half the largest eigenvalue of ``a`` read as an ``n^2 x n^2`` matrix."""
        N = N or max(2 * self.m_A + 1, 8 if self.m_A else 1)
        n = self.n
        grid = self.sample(N).reshape((n,) * 4 + (-1,))
        # M[(k, al), (j, be)] = a[k, j, al, be]
        M = np.transpose(grid, (4, 0, 2, 1, 3)).reshape(-1, n * n, n * n)
        M = 0.5 * (M + np.swapaxes(M, 1, 2))
        lam = np.linalg.eigvalsh(M).max()
        return 0.5 * float(lam) * self.theta_sup()

    def isotropic_projection(self):
        """Best isotropic fit ``nu0`` of the mean tensor, times the mean time factor."""
        n = self.n
        iso = isotropic_table(n, 1.0)
        a = self.mean_table()
        nu0 = float(np.sum(a * iso) / np.sum(iso * iso))
        return nu0 * float(np.mean(self.thetas))


def isotropic_table(n, nu):
    d = np.eye(n)
    return nu * (np.einsum("kj,ab->kjab", d, d) + np.einsum("kb,aj->kjab", d, d))


def from_table(table, times=(0.0,), thetas=(1.0,)):
    """Constant-coefficient tensor from a real ``(n, n, n, n)`` table."""
    table = np.asarray(table, dtype=np.float64)
    n = table.shape[0]
    return ViscosityTensor(n, table.reshape(table.shape + (1,) * n).astype(np.complex128),
                           times, thetas)


def isotropic(n, nu, times=(0.0,), thetas=(1.0,)):
    """``nu (delta_kj delta_ab + delta_kb delta_aj)``; its form is ``2 nu |zeta|^2``."""
    return from_table(isotropic_table(n, nu), times, thetas)


def symmetrize(coeffs):
    """Average over the group generated by the two index exchanges.

    Done as two pairwise averages; the exchanges commute, so the result is
    symmetric to the last bit, not just up to roundoff.
    """
    c = np.asarray(coeffs)
    c = 0.5 * (c + _perm(c, _SWAP_K_AL))
    return 0.5 * (c + _perm(c, _SWAP_J_BE))


def anisotropic_demo(n, nu=0.05, gamma=0.03, eps=0.2, direction=None):
    """A fixed non-isotropic, symmetric, relaxed-elliptic tensor.

    ``a(x) = (1 + eps cos 2 pi x_1) (nu I + gamma M (x) M)`` with ``M`` a
    symmetric matrix built from ``direction``; the quadratic form is at least
    ``2 nu (1 - eps) |zeta|^2``.
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    d = np.ones(n) if direction is None else np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    M = np.outer(d, d) + 0.5 * np.diag(np.arange(1, n + 1) / n)
    table = isotropic_table(n, nu) + gamma * np.einsum("ka,jb->kjab", M, M)
    lat = lattice(n, 1)
    c = np.zeros((n,) * 4 + lat.shape, dtype=np.complex128)
    c[(...,) + lat.origin] = table
    if n >= 1:
        e1 = [0] * n
        e1[0] = 1
        for sgn in (1, -1):
            idx = lat.index([sgn * v for v in e1])
            c[(...,) + idx] = 0.5 * eps * table
    return ViscosityTensor(n, c)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class SymmetryReport:
    passed: bool
    violations: list  # (k, j, al, be, which, defect)

    def __bool__(self):
        return self.passed


def verify_symmetry(A, tol=SYMMETRY_TOL):
    """Check both exchange symmetries entry by entry.

    Constant tables are compared exactly; nonconstant entries coefficientwise
    to ``tol`` relative to the largest coefficient.
    """
    c = A.coeffs
    scale = max(float(np.max(np.abs(c), initial=0.0)), 1e-300)
    thresh = 0.0 if A.is_constant else tol * scale
    violations = []
    for name, p in (("k<->alpha", _SWAP_K_AL), ("j<->beta", _SWAP_J_BE)):
        d = np.abs(c - _perm(c, p))
        per_entry = d.reshape((A.n,) * 4 + (-1,)).max(axis=-1)
        for idx in zip(*np.nonzero(per_entry > thresh)):
            violations.append(tuple(int(i) for i in idx) + (name, float(per_entry[idx])))
    return SymmetryReport(not violations, violations)


def random_trace_free_symmetric(rng, n, count):
    """``count`` symmetric trace-free matrices with unit Frobenius norm."""
    z = rng.standard_normal((count, n, n))
    z = 0.5 * (z + np.swapaxes(z, 1, 2))
    tr = np.trace(z, axis1=1, axis2=2) / n
    z -= tr[:, None, None] * np.eye(n)
    z /= np.linalg.norm(z.reshape(count, -1), axis=1)[:, None, None]
    return z


def estimate_ellipticity(A, samples=10_000, seed=0, grid=None):
    """Empirical ``C_A = max |zeta|^2 / a(zeta, zeta)`` over random samples.

    Each sample draws a unit symmetric trace-free ``zeta``, a grid point and a
    time inside the time-factor table. Deterministic for a given seed.

    Raises
    ------
    NotEllipticError
        if a sample gives ``a(zeta, zeta) <= 0``; carries the witness.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    n = A.n
    N = grid or max(2 * A.m_A + 1, 8 if A.m_A else 1)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    zeta = random_trace_free_symmetric(rng, n, samples)
    pts = rng.integers(0, N, size=(samples, n))
    t0, t1 = A.times[0], A.times[-1]
    ts = rng.uniform(t0, t1, size=samples) if t1 > t0 else np.full(samples, t0)
    thetas = np.interp(ts, A.times, A.thetas)
    a_grid = A.sample(N)
    a_s = np.moveaxis(a_grid[(slice(None),) * 4 + tuple(pts.T)], -1, 0)
    q = quadratic_forms(a_s, zeta) * thetas
    bad = np.flatnonzero(q <= 0)
    if bad.size:
        i = int(bad[0])
        raise NotEllipticError(
            f"tensor is not relaxed-elliptic: a(zeta, zeta) = {q[i]:.3e} <= 0 at "
            f"x = {tuple((pts[i] / N).tolist())}, t = {ts[i]:.6g}",
            zeta=zeta[i], x=pts[i] / N, t=float(ts[i]))
    return float(np.max(1.0 / q))


# ---------------------------------------------------------------------------
# operator and bilinear form
# ---------------------------------------------------------------------------

def stress_coeffs(A, u_coeffs, m_u, t, m_out, dealias="exact_pad", form="strain", N=None):
    """Coefficients of ``S[k, al] = a_{kj}^{al be} D[j, be]`` on the ``m_out`` ball.

    ``D`` is the strain ``E(u)`` (``form="strain"``) or the gradient
    ``d_be u_j`` (``form="gradient"``).
    """
    n = A.n
    lat_u = lattice(n, m_u)
    if form == "strain":
        D = strain_coeffs(lat_u, u_coeffs)
    elif form == "gradient":
        # D[j, be] = d_be u_j
        D = 2j * math.pi * u_coeffs[:, None] * lat_u.xi[None, :]
    else:
        raise ValueError("form must be 'strain' or 'gradient'")
    th = A.theta(t)
    if A.m_A == 0:
        S = np.einsum("kjab,jb...->ka...", A.mean_table(), D) * th
        return _crop(S, n, m_u, m_out)
    N = _grid(product_grid_size(A.m_A, m_u, m_out, dealias), N)
    Dg = coeffs_to_grid(D, n, m_u, N)
    Sg = np.einsum("kjab...,jb...->ka...", A.sample(N), Dg) * th
    S = grid_to_coeffs(Sg, n, m_out, N, lattice(n, m_out).mask)
    return 0.5 * (S + np.conj(np.flip(S, axis=tuple(range(2, 2 + n)))))


def _crop(c, n, m, m_out):
    out_lat = lattice(n, m_out)
    lead = c.shape[: c.ndim - n]
    out = np.zeros(lead + out_lat.shape, dtype=np.complex128)
    k = min(m, m_out)
    src = (...,) + tuple(slice(m - k, m + k + 1) for _ in range(n))
    dst = (...,) + tuple(slice(m_out - k, m_out + k + 1) for _ in range(n))
    out[dst] = c[src]
    out[..., ~out_lat.mask] = 0.0
    return out


def operator_L_coeffs(A, u_coeffs, m, t, dealias="exact_pad", form="strain", N=None):
    lat = lattice(A.n, m)
    S = stress_coeffs(A, u_coeffs, m, t, m, dealias, form, N)
    return (2j * math.pi * lat.xi[None, :] * S).sum(axis=1)


def apply_operator_L(A, u, t=0.0, dealias="exact_pad", form="strain"):
    """``(L u)_k = d_al (a_{kj}^{al be} E_{j be}(u))`` truncated to the lattice of ``u``.

    ``form="gradient"`` assembles ``d_al (a_{kj}^{al be} d_be u_j)`` instead,
    which agrees under the symmetry conditions.
    """
    if u.n != A.n:
        raise ValueError("tensor and field dimensions differ")
    c = operator_L_coeffs(A, u.coeffs, u.m, t, dealias, form)
    return VectorField(u.lattice, c, zero_mean=True)


def bilinear_form(A, t, u, v, dealias="exact_pad"):
    """``a_T(t; u, v) = < a_{ij}^{al be} E_{j be}(u), E_{i al}(v) >``."""
    if u.n != A.n or v.n != A.n:
        raise ValueError("tensor and field dimensions differ")
    S = stress_coeffs(A, u.coeffs, u.m, t, v.m, dealias)
    Ev = strain_coeffs(v.lattice, v.coeffs)
    return float(np.sum(S * np.conj(Ev)).real)


def bilinear_form_coeffs(A, t, c, m, dealias="exact_pad", N=None):
    """``a_T(t; u, u)`` for a coefficient array ``c`` on the radius-m ball."""
    S = stress_coeffs(A, c, m, t, m, dealias, N=N)
    E = strain_coeffs(lattice(A.n, m), c)
    return float(np.sum(S * np.conj(E)).real)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@dataclass
class TensorNorms:
    sup_norm: float
    sobolev_frobenius_norm: float
    sobolev_frobenius_seminorm: float


def tensor_norms(A, sigma, grid=None):
    """Frobenius aggregates of per-entry sup norms and H^sigma norms.

    The sup of each entry is taken over an ``N``-point grid (default at
    least 8 points per wavelength of the top mode) times ``sup |theta|``.
    """
    n = A.n
    th = A.theta_sup()
    if A.m_A == 0:
        sup = np.abs(A.mean_table())
    else:
        N = grid or max(8 * A.m_A + 1, 32)
        sup = np.abs(A.sample(N)).reshape((n,) * 4 + (-1,)).max(axis=-1)
    lat = A.lattice
    w = lat.rho ** (2.0 * sigma)
    hs = np.sum(w * np.abs(A.coeffs) ** 2, axis=tuple(range(4, 4 + n)))
    w0 = w.copy()
    w0[lat.origin] = 0.0
    semi = np.sum(w0 * np.abs(A.coeffs) ** 2, axis=tuple(range(4, 4 + n)))
    return TensorNorms(
        sup_norm=th * math.sqrt(float(np.sum(sup ** 2))),
        sobolev_frobenius_norm=th * math.sqrt(float(np.sum(hs))),
        sobolev_frobenius_seminorm=th * math.sqrt(float(np.sum(semi))),
    )

