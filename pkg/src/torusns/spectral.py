"""Periodic Fourier calculus on the unit torus ``T^n = [0, 1)^n``.

A field is stored as its Fourier coefficients on the box ``{-m..m}^n``; only
modes inside the Euclidean ball ``|xi| <= m`` may be nonzero (a ``box``
lattice lifts that restriction and is meant for padding work only). Fields
are real, so coefficients satisfy ``c(-xi) = conj(c(xi))``.

Coefficient arrays keep any leading component axes in front of the ``n``
lattice axes: a scalar field has shape ``(2m+1,)*n`` and a vector field
``(n,) + (2m+1,)*n``.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import math

import numpy as np

TWO_PI = 2.0 * math.pi

#: relative tolerance for the real-field (Hermitian) check at construction
HERMITIAN_RTOL = 1e-9
#: relative tolerance for the advisory zero-mean / divergence-free flags
FLAG_RTOL = 1e-9


class AliasingError(ValueError):
    """Raised when a physical grid is too coarse for a lossless transform."""


@dataclass(frozen=True)
class FrequencyLattice:
    """Frequencies ``xi in Z^n`` with ``|xi| <= m`` stored in a ``(2m+1)^n`` box."""

    n: int
    m: int
    box: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension n must be a positive integer, got {self.n}")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"truncation radius m must be >= 0, got {self.m}")

    @property
    def shape(self):
        return (2 * self.m + 1,) * self.n

    @property
    def axes(self):
        """The trailing lattice axes of a coefficient array."""
        return tuple(range(-self.n, 0))

    @cached_property
    def xi(self):
        """Integer frequencies, shape ``(n,) + shape``."""
        r = np.arange(-self.m, self.m + 1)
        return np.stack(np.meshgrid(*([r] * self.n), indexing="ij"))

    @cached_property
    def norm2(self):
        return (self.xi ** 2).sum(axis=0)

    @cached_property
    def mask(self):
        if self.box:
            return np.ones(self.shape, dtype=bool)
        return self.norm2 <= self.m * self.m

    @cached_property
    def rho(self):
        return TWO_PI * np.sqrt(1.0 + self.norm2)

    @property
    def origin(self):
        return (self.m,) * self.n

    @property
    def size(self):
        """Number of stored (in-ball) modes."""
        return int(self.mask.sum())

    def index(self, xi):
        xi = tuple(int(v) for v in xi)
        if len(xi) != self.n or not self.contains(xi):
            raise KeyError(f"frequency {xi} not stored on {self}")
        return tuple(v + self.m for v in xi)

    def contains(self, xi):
        if any(abs(v) > self.m for v in xi):
            return False
        return self.box or sum(v * v for v in xi) <= self.m * self.m

    def frequencies(self):
        """Stored frequencies in lexicographic box order."""
        pts = self.xi.reshape(self.n, -1).T
        return [tuple(int(v) for v in p) for p, keep in zip(pts, self.mask.ravel()) if keep]

    def reflect(self, coeffs):
        """Coefficients at ``-xi``: flip every lattice axis."""
        return np.flip(coeffs, axis=self.axes)


@lru_cache(maxsize=None)
def lattice(n, m, box=False):
    """Shared lattice instance (keeps cached index arrays alive)."""
    return FrequencyLattice(n, m, box)


def _hermitian_defect(lat, coeffs):
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(coeffs - np.conj(lat.reflect(coeffs))))) / scale


class _FieldOps:
    """Arithmetic shared by scalar and vector fields."""

    def _check(self, ncomp_axes):
        lat = self.lattice
        expected = ((lat.n,) if ncomp_axes else ()) + lat.shape
        c = np.asarray(self.coeffs)
        if c.shape != expected:
            raise ValueError(f"coefficient shape {c.shape} does not match lattice {expected}")
        c = c.astype(np.complex128, copy=False)
        object.__setattr__(self, "coeffs", c)
        if np.any(c[..., ~lat.mask] != 0):
            raise ValueError("nonzero coefficient outside the lattice ball |xi| <= m")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite Fourier coefficient")
        if _hermitian_defect(lat, c) > HERMITIAN_RTOL:
            raise ValueError("coefficients violate Hermitian symmetry (field is not real)")
        scale = max(float(np.max(np.abs(c))), 1e-300) if c.size else 1.0
        if self.zero_mean and np.max(np.abs(c[(...,) + lat.origin])) > FLAG_RTOL * scale:
            raise ValueError("zero-mean flag set but the xi=0 coefficient is nonzero")

    @property
    def n(self):
        return self.lattice.n

    @property
    def m(self):
        return self.lattice.m

    def mean(self):
        return self.coeffs[(...,) + self.lattice.origin].real.copy()

    def _new(self, coeffs, **flags):
        return type(self)(self.lattice, coeffs, **flags)

    def __add__(self, other):
        a, b = _common(self, other)
        return a._new(a.coeffs + b.coeffs, **_and_flags(a, b))

    def __sub__(self, other):
        a, b = _common(self, other)
        return a._new(a.coeffs - b.coeffs, **_and_flags(a, b))

    def __mul__(self, scalar):
        if not np.isscalar(scalar) or np.iscomplexobj(scalar):
            return NotImplemented
        return self._new(self.coeffs * float(scalar), **self._flags())

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.coeffs, **self._flags())

    def copy(self):
        return self._new(self.coeffs.copy(), **self._flags())


@dataclass(frozen=True, eq=False)
class ScalarField(_FieldOps):
    """A real scalar field given by Fourier coefficients on a lattice."""

    lattice: FrequencyLattice
    coeffs: np.ndarray
    zero_mean: bool = False

    def __post_init__(self):
        self._check(ncomp_axes=False)

    def _flags(self):
        return {"zero_mean": self.zero_mean}


@dataclass(frozen=True, eq=False)
class VectorField(_FieldOps):
    """A real n-component vector field; the flags are advisory and re-checked."""

    lattice: FrequencyLattice
    coeffs: np.ndarray
    zero_mean: bool = False
    div_free: bool = False

    def __post_init__(self):
        self._check(ncomp_axes=True)
        if self.div_free and divergence_defect(self.lattice, self.coeffs) > FLAG_RTOL:
            raise ValueError("divergence-free flag set but xi . u(xi) != 0")

    def _flags(self):
        return {"zero_mean": self.zero_mean, "div_free": self.div_free}

    def component(self, k):
        return ScalarField(self.lattice, self.coeffs[k].copy())

    @classmethod
    def from_components(cls, comps, **flags):
        lat = comps[0].lattice
        if any(c.lattice != lat for c in comps):
            raise ValueError("components must share one lattice")
        return cls(lat, np.stack([c.coeffs for c in comps]), **flags)


def divergence_defect(lat, coeffs):
    """``max |xi . u(xi)| / (|xi| max|u|)`` over stored modes."""
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if scale == 0.0:
        return 0.0
    dot = np.abs((lat.xi * coeffs).sum(axis=0))
    norm = np.sqrt(np.maximum(lat.norm2, 1))
    return float(np.max(dot / norm)) / scale


def _and_flags(a, b):
    flags = {"zero_mean": a.zero_mean and b.zero_mean}
    if isinstance(a, VectorField):
        flags["div_free"] = a.div_free and b.div_free
    return flags


def _common(a, b):
    if type(a) is not type(b):
        raise TypeError("cannot combine scalar and vector fields")
    if a.n != b.n:
        raise ValueError("fields live in different dimensions")
    if a.lattice == b.lattice:
        return a, b
    m = max(a.m, b.m)
    return resize(a, m), resize(b, m)


def zeros_like(g):
    return g._new(np.zeros_like(g.coeffs), **g._flags())


def scalar_zeros(lat):
    return ScalarField(lat, np.zeros(lat.shape, dtype=np.complex128), zero_mean=True)


def vector_zeros(lat):
    return VectorField(lat, np.zeros((lat.n,) + lat.shape, dtype=np.complex128),
                       zero_mean=True, div_free=True)


def resize(g, m):
    """Embed into a larger lattice or crop (and ball-truncate) into a smaller one."""
    old = g.lattice
    new = lattice(old.n, m, old.box)
    lead = g.coeffs.shape[: g.coeffs.ndim - old.n]
    out = np.zeros(lead + new.shape, dtype=np.complex128)
    k = min(old.m, m)
    src = (...,) + tuple(slice(old.m - k, old.m + k + 1) for _ in range(old.n))
    dst = (...,) + tuple(slice(m - k, m + k + 1) for _ in range(old.n))
    out[dst] = g.coeffs[src]
    out[..., ~new.mask] = 0.0
    return type(g)(new, out, **g._flags())


# ---------------------------------------------------------------------------
# weights, norms, pairings
# ---------------------------------------------------------------------------

def rho(xi):
    """``2 pi (1 + |xi|^2)^(1/2)``."""
    xi = np.asarray(xi, dtype=np.float64)
    return TWO_PI * math.sqrt(1.0 + float(np.dot(xi, xi)))


def _weights(lat, s):
    return lat.rho ** (2.0 * s)


def sobolev_norm(g, s):
    """H^s norm ``(sum rho^{2s} |c|^2)^{1/2}``; components are summed for vectors."""
    w = _weights(g.lattice, s)
    return math.sqrt(float(np.sum(w * np.abs(g.coeffs) ** 2)))


def sobolev_seminorm(g, s):
    """As :func:`sobolev_norm` but without the ``xi = 0`` term."""
    w = _weights(g.lattice, s).copy()
    w[g.lattice.origin] = 0.0
    return math.sqrt(float(np.sum(w * np.abs(g.coeffs) ** 2)))


def sobolev_inner(g, f, s):
    """H^s inner product ``sum rho^{2s} g(xi) conj(f(xi))`` (real part)."""
    g, f = _common(g, f)
    return float(np.sum(_weights(g.lattice, s) * g.coeffs * np.conj(f.coeffs)).real)


def dual_pairing(g, f):
    """``<g, f> = sum_xi g(xi) f(-xi)``; equals the L2 integral for real fields."""
    g, f = _common(g, f)
    return float(np.sum(g.coeffs * g.lattice.reflect(f.coeffs)).real)


def bessel_potential(g, r):
    """Apply ``Lambda^r``: multiply each coefficient by ``rho(xi)^r``."""
    return g._new(g.coeffs * g.lattice.rho ** float(r), **g._flags())


def truncate_modes(g, m):
    """Zero every coefficient with ``|xi| > m`` (the lattice is kept)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    keep = g.lattice.norm2 <= m * m
    return g._new(np.where(keep, g.coeffs, 0.0), **g._flags())


def project_zero_mean(g):
    c = g.coeffs.copy()
    c[(...,) + g.lattice.origin] = 0.0
    flags = g._flags()
    flags["zero_mean"] = True
    return g._new(c, **flags)


# ---------------------------------------------------------------------------
# physical grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PhysicalGrid:
    """Samples at ``x_j = j / N`` on every axis; leading axes are components."""

    n: int
    N: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim < self.n or s.shape[s.ndim - self.n:] != (self.N,) * self.n:
            raise ValueError(f"samples shape {s.shape} is not (..., {self.N}^{self.n})")
        object.__setattr__(self, "samples", s)

    def coordinates(self):
        x = np.arange(self.N) / self.N
        return np.meshgrid(*([x] * self.n), indexing="ij")


@lru_cache(maxsize=None)
def _embed_index(n, m, N):
    idx = np.arange(-m, m + 1) % N
    return (Ellipsis,) + np.ix_(*([idx] * n))


def coeffs_to_grid(coeffs, n, m, N):
    """Array-level synthesis ``sum_xi c(xi) exp(2 pi i x.xi)`` on an N-point grid."""
    lead = coeffs.shape[: coeffs.ndim - n]
    big = np.zeros(lead + (N,) * n, dtype=np.complex128)
    big[_embed_index(n, m, N)] = coeffs
    axes = tuple(range(-n, 0))
    return np.fft.ifftn(big, axes=axes).real * float(N) ** n


def grid_to_coeffs(values, n, m, N, mask=None):
    """Array-level analysis: Fourier coefficients with ``|xi_i| <= m`` (box)."""
    axes = tuple(range(-n, 0))
    c = np.fft.fftn(values, axes=axes)[_embed_index(n, m, N)] / float(N) ** n
    if mask is not None:
        c = np.where(mask, c, 0.0)
    return c


def to_physical(g, N, force=False):
    """Sample a field on the uniform N-point grid."""
    if N < 2 * g.m + 1 and not force:
        raise AliasingError(f"grid N={N} < 2m+1={2 * g.m + 1}: round trip would alias")
    N_eff = max(N, 2 * g.m + 1)
    vals = coeffs_to_grid(g.coeffs, g.n, g.m, N_eff) if N_eff == N else None
    if N_eff != N:
        # forced coarse sampling: evaluate directly at the coarse points
        vals = _direct_eval(g, np.arange(N) / N)
    return PhysicalGrid(g.n, N, vals)


def _direct_eval(g, x):
    lat = g.lattice
    grids = np.meshgrid(*([x] * lat.n), indexing="ij")
    pts = np.stack([gr.ravel() for gr in grids], axis=1)
    freqs = lat.xi.reshape(lat.n, -1)
    phase = np.exp(2j * math.pi * pts @ freqs)
    lead = g.coeffs.shape[: g.coeffs.ndim - lat.n]
    flat = g.coeffs.reshape(lead + (-1,))
    out = (flat @ phase.T).real
    return out.reshape(lead + (len(x),) * lat.n)


def to_spectral(grid, m, force=False):
    """Fourier coefficients of grid samples on the radius-m ball lattice.

    A grid with ``N < 2m + 1`` cannot resolve the lattice; this raises
    :class:`AliasingError` unless ``force`` is set, in which case the aliased
    coefficients of the coarse grid are returned.
    """
    if grid.N < 2 * m + 1 and not force:
        raise AliasingError(f"grid N={grid.N} < 2m+1={2 * m + 1}: coefficients would alias")
    lat = lattice(grid.n, m)
    c = grid_to_coeffs(grid.samples, grid.n, m, grid.N, lat.mask)
    if force and grid.N < 2 * m + 1:
        # periodic index wrap duplicates modes; keep one representative each
        keep = np.all(np.abs(lat.xi) <= (grid.N - 1) // 2, axis=0)
        c = np.where(keep & lat.mask, c, 0.0)
    c = 0.5 * (c + np.conj(lat.reflect(c)))
    lead = grid.samples.ndim - grid.n
    if lead == 0:
        return ScalarField(lat, c)
    if lead == 1 and grid.samples.shape[0] == grid.n:
        return VectorField(lat, c)
    raise ValueError("grid samples must be scalar or n-component")


# ---------------------------------------------------------------------------
# random band-limited data
# ---------------------------------------------------------------------------

def random_coeffs(lat, rng, ncomp=None, decay=0.0):
    """Hermitian random coefficients with amplitude ``(1+|xi|^2)^(-decay/2)``."""
    shape = ((ncomp,) if ncomp else ()) + lat.shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    c *= (1.0 + lat.norm2) ** (-0.5 * decay)
    c = 0.5 * (c + np.conj(lat.reflect(c)))
    c[..., ~lat.mask] = 0.0
    return c


def random_scalar(lat, rng, decay=0.0, zero_mean=False):
    c = random_coeffs(lat, rng, decay=decay)
    if zero_mean:
        c[lat.origin] = 0.0
    return ScalarField(lat, c, zero_mean=zero_mean)


def random_vector(lat, rng, decay=0.0, zero_mean=False, div_free=False):
    c = random_coeffs(lat, rng, ncomp=lat.n, decay=decay)
    if zero_mean or div_free:
        c[(...,) + lat.origin] = 0.0
    if div_free:
        c = leray_coeffs(lat, c)
    return VectorField(lat, c, zero_mean=zero_mean or div_free, div_free=div_free)


def leray_coeffs(lat, coeffs):
    """Array-level ``u - xi (xi . u) / |xi|^2`` (mean mode untouched)."""
    xi = lat.xi
    k2 = np.where(lat.norm2 == 0, 1, lat.norm2)
    dot = (xi * coeffs).sum(axis=0)
    return coeffs - xi * (dot / k2)
