"""Vector calculus on spectral fields.

Derivatives are Fourier multipliers (``d/dx_k -> 2 pi i xi_k``). Quadratic
terms are formed on a padded physical grid and transformed back; the padding
policy is chosen per call:

``exact_pad``
    ``N = 2 (m1 + m2) + 1``: the full product is resolved.
``two_thirds``
    ``N = m1 + m2 + m_out + 1``: only the retained output modes are alias
    free, which is all a truncated product needs.
"""

from dataclasses import dataclass
import math

import numpy as np

from .kernels import convolve_full
from .spectral import (
    TWO_PI,
    ScalarField,
    VectorField,
    coeffs_to_grid,
    grid_to_coeffs,
    lattice,
    leray_coeffs,
)

DEALIAS_MODES = ("exact_pad", "two_thirds")
#: relative off-parallel residual tolerated by :func:`invert_gradient`
CURL_FREE_RTOL = 1e-8
#: relative size of a mean coefficient treated as zero
MEAN_RTOL = 1e-12


class NotZeroMeanError(ValueError):
    pass


class NotGradientError(ValueError):
    pass


def product_grid_size(m1, m2, m_out, mode="exact_pad"):
    """Grid points per axis for an alias-controlled product of two band limits."""
    if mode == "exact_pad":
        return 2 * (m1 + m2) + 1
    if mode == "two_thirds":
        return m1 + m2 + m_out + 1
    raise ValueError(f"dealias mode must be one of {DEALIAS_MODES}, got {mode!r}")


def _grid(need, N):
    if N is None:
        return need
    if N < need:
        raise ValueError(f"product grid N={N} below the alias-free minimum {need}")
    return int(N)


def _require_zero_mean(F, what):
    c = F.coeffs
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    mean = float(np.max(np.abs(c[(...,) + F.lattice.origin])))
    if mean > MEAN_RTOL * max(scale, 1e-300):
        raise NotZeroMeanError(f"{what} requires a zero-mean field (|mean| = {mean:.3e})")


def _inv_norm2(lat):
    k2 = lat.norm2.astype(np.float64)
    out = np.zeros_like(k2)
    np.divide(1.0, k2, out=out, where=k2 > 0)
    return out


# ---------------------------------------------------------------------------
# first-order operators
# ---------------------------------------------------------------------------

def divergence(u):
    lat = u.lattice
    c = (2j * math.pi * lat.xi * u.coeffs).sum(axis=0)
    return ScalarField(lat, c, zero_mean=True)


def gradient(q):
    lat = q.lattice
    return VectorField(lat, 2j * math.pi * lat.xi * q.coeffs, zero_mean=True)


def gradient_tensor_coeffs(u):
    """``G[k, j] = d_j u_k`` as coefficient arrays, shape ``(n, n) + box``."""
    lat = u.lattice
    return 2j * math.pi * u.coeffs[:, None] * lat.xi[None, :]


def helmholtz_decompose(F):
    """Split a zero-mean field into gradient and divergence-free parts.

    Returns
    -------
    (F_g, F_sigma)
        ``F_g(xi) = xi (xi . F(xi)) / |xi|^2`` and ``F_sigma = F - F_g``.
    """
    _require_zero_mean(F, "helmholtz_decompose")
    lat = F.lattice
    c = F.coeffs.copy()
    c[(...,) + lat.origin] = 0.0
    dot = (lat.xi * c).sum(axis=0)
    cg = lat.xi * (dot * _inv_norm2(lat))
    cs = c - cg
    return (VectorField(lat, cg, zero_mean=True),
            VectorField(lat, cs, zero_mean=True, div_free=True))


def leray_project(F):
    return helmholtz_decompose(F)[1]


def invert_gradient(w, rtol=CURL_FREE_RTOL):
    """The zero-mean potential ``q`` with ``grad q = w``.

    Raises
    ------
    NotGradientError
        if some mode of ``w`` is not parallel to its frequency; the message
        names the worst mode.
    """
    _require_zero_mean(w, "invert_gradient")
    lat = w.lattice
    c = w.coeffs
    dot = (lat.xi * c).sum(axis=0)
    inv = _inv_norm2(lat)
    off = c - lat.xi * (dot * inv)
    off[(...,) + lat.origin] = 0.0
    resid = np.sqrt((np.abs(off) ** 2).sum(axis=0))
    scale = float(np.sqrt((np.abs(c) ** 2).sum(axis=0)).max()) if c.size else 0.0
    if scale > 0 and resid.max() > rtol * scale:
        worst = np.unravel_index(int(np.argmax(resid)), resid.shape)
        xi = tuple(int(i) - lat.m for i in worst)
        raise NotGradientError(
            f"field is not a gradient: off-parallel residual {resid.max() / scale:.3e} "
            f"(relative) at mode xi={xi}")
    q = dot * inv / (2j * math.pi)
    q[lat.origin] = 0.0
    return ScalarField(lat, q, zero_mean=True)


def invert_divergence(g):
    """The gradient field ``w = grad q`` with ``div w = g`` (``g`` zero-mean)."""
    _require_zero_mean(g, "invert_divergence")
    lat = g.lattice
    q = -g.coeffs * _inv_norm2(lat) / (4.0 * math.pi ** 2)
    q[lat.origin] = 0.0
    return gradient(ScalarField(lat, q, zero_mean=True))


# ---------------------------------------------------------------------------
# strain
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymmetricTensorField:
    """Symmetric ``n x n`` field; only entries with ``j <= b`` are stored."""

    lattice: object
    entries: dict

    @property
    def n(self):
        return self.lattice.n

    def entry(self, j, b):
        return self.entries[(j, b) if j <= b else (b, j)]

    def coeffs(self):
        """Full ``(n, n) + box`` coefficient array."""
        n = self.n
        out = np.empty((n, n) + self.lattice.shape, dtype=np.complex128)
        for j in range(n):
            for b in range(n):
                out[j, b] = self.entry(j, b).coeffs
        return out

    def trace(self):
        c = sum(self.entry(j, j).coeffs for j in range(self.n))
        return ScalarField(self.lattice, c)

    def sobolev_norm(self, s):
        """Entrywise (Frobenius) H^s norm."""
        w = self.lattice.rho ** (2.0 * s)
        return math.sqrt(float(np.sum(w * np.abs(self.coeffs()) ** 2)))


def strain_coeffs(lat, c):
    """``E[j, b] = (d_j u_b + d_b u_j) / 2`` as a full coefficient array."""
    G = 2j * math.pi * c[:, None] * lat.xi[None, :]  # G[k, j] = d_j u_k
    return 0.5 * (G + np.swapaxes(G, 0, 1))


def strain(u):
    lat = u.lattice
    E = strain_coeffs(lat, u.coeffs)
    n = lat.n
    entries = {(j, b): ScalarField(lat, E[j, b]) for j in range(n) for b in range(j, n)}
    return SymmetricTensorField(lat, entries)


# ---------------------------------------------------------------------------
# advection
# ---------------------------------------------------------------------------

def advect_coeffs(n, m1, c1, m2, c2, m_out, mode="exact_pad", N=None):
    """Coefficients of ``(v1 . grad) v2`` on the radius ``m_out`` ball.

    ``N`` overrides the grid size; it must not be below the policy minimum.
    """
    N = _grid(product_grid_size(m1, m2, m_out, mode), N)
    lat2 = lattice(n, m2)
    v1 = coeffs_to_grid(c1, n, m1, N)
    G = coeffs_to_grid(2j * math.pi * c2[:, None] * lat2.xi[None, :], n, m2, N)
    prod = np.einsum("j...,kj...->k...", v1, G)
    return grid_to_coeffs(prod, n, m_out, N, lattice(n, m_out).mask)


def multiply_coeffs(n, m1, c1, m2, c2, m_out, mode="exact_pad"):
    """Coefficients of the pointwise product of a scalar ``c1`` with ``c2``.

    ``c2`` may carry leading component axes; the result is truncated to the
    radius ``m_out`` ball.
    """
    N = product_grid_size(m1, m2, m_out, mode)
    prod = coeffs_to_grid(c1, n, m1, N) * coeffs_to_grid(c2, n, m2, N)
    return grid_to_coeffs(prod, n, m_out, N, lattice(n, m_out).mask)


def _symmetrize(lat, c):
    return 0.5 * (c + np.conj(lat.reflect(c)))


def advect(v1, v2, mode="exact_pad"):
    """``(v1 . grad) v2`` truncated to the larger of the two lattices."""
    n = v1.n
    m_out = max(v1.m, v2.m)
    c = advect_coeffs(n, v1.m, v1.coeffs, v2.m, v2.coeffs, m_out, mode)
    return VectorField(lattice(n, m_out), _symmetrize(lattice(n, m_out), c))


def convect(u, mode="exact_pad"):
    """``(u . grad) u`` pseudo-spectrally, truncated to the lattice of ``u``."""
    return advect(u, u, mode)


def convect_oracle(u):
    """``(u . grad) u`` by direct convolution over all lattice pairs."""
    lat = u.lattice
    n, m = lat.n, lat.m
    out = np.zeros((n,) + lat.shape, dtype=np.complex128)
    crop = tuple(slice(m, 3 * m + 1) for _ in range(n))
    for k in range(n):
        acc = np.zeros((4 * m + 1,) * n, dtype=np.complex128)
        for j in range(n):
            dj = 2j * math.pi * lat.xi[j] * u.coeffs[k]
            acc += convolve_full(u.coeffs[j], dj)
        out[k] = acc[crop]
    out[..., ~lat.mask] = 0.0
    return VectorField(lat, out)


def leray(u_coeffs, lat):
    """Array-level Leray projection that also removes the mean."""
    c = leray_coeffs(lat, u_coeffs)
    c[(...,) + lat.origin] = 0.0
    return c


def l2_grad_sq(u):
    """``||grad u||_{L2}^2`` summed over all entries."""
    lat = u.lattice
    return float(np.sum((TWO_PI ** 2) * lat.norm2 * np.abs(u.coeffs) ** 2))
