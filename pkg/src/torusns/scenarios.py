"""Named initial-value problems: initial data, force and viscosity tensor."""

from dataclasses import dataclass
import math

import numpy as np

from .spectral import VectorField, lattice, random_coeffs, leray_coeffs
from . import viscosity

SCENARIOS = ("taylor_green", "single_stokes_mode", "random_smooth", "anisotropic_demo", "zero")


@dataclass
class Scenario:
    name: str
    u0: VectorField
    f: object  # None, field, or callable of t
    A: viscosity.ViscosityTensor


def taylor_green_field(m, amplitude=1.0):
    """``(sin 2 pi x1 cos 2 pi x2, -cos 2 pi x1 sin 2 pi x2)`` on ``T^2``."""
    if m < 1:
        raise ValueError("Taylor-Green needs m >= 1 (uses the (1, 1) modes)")
    lat = lattice(2, m)
    c = np.zeros((2,) + lat.shape, dtype=np.complex128)
    q = 0.25 * amplitude
    # sin(a) cos(b) = (e^{i(a+b)} + e^{i(a-b)} - e^{-i(a-b)} - e^{-i(a+b)}) / 4i
    for s1 in (1, -1):
        for s2 in (1, -1):
            idx = lat.index((s1, s2))
            c[(0,) + idx] = -1j * q * s1
            c[(1,) + idx] = 1j * q * s2
    return VectorField(lat, c, zero_mean=True, div_free=True)


def taylor_green_exact(m, nu, t):
    return taylor_green_field(m, math.exp(-8.0 * math.pi ** 2 * nu * t))


def taylor_green(m=4, nu=0.01):
    return Scenario("taylor_green", taylor_green_field(m), None, viscosity.isotropic(2, nu))


def single_stokes_mode(n=2, m=2, nu=0.05, xi=None, amplitude=1.0):
    """One real mode ``p cos(2 pi xi.x)`` with ``p`` perpendicular to ``xi``."""
    xi = tuple(xi) if xi is not None else (1,) + (0,) * (n - 1)
    lat = lattice(n, m)
    if len(xi) != n or not any(xi) or not lat.contains(xi):
        raise ValueError(f"mode {xi} not a nonzero frequency of the lattice")
    p = np.zeros(n)
    p[1 if xi[0] else 0] = 1.0
    k = np.asarray(xi, dtype=float)
    p -= k * np.dot(k, p) / np.dot(k, k)
    p /= np.linalg.norm(p)
    c = np.zeros((n,) + lat.shape, dtype=np.complex128)
    c[(slice(None),) + lat.index(xi)] = 0.5 * amplitude * p
    c[(slice(None),) + lat.index([-v for v in xi])] = 0.5 * amplitude * p
    return Scenario("single_stokes_mode", VectorField(lat, c, zero_mean=True, div_free=True),
                    None, viscosity.isotropic(n, nu))


def random_smooth_field(n, m, seed=0, decay_exponent=2.0, energy=0.5):
    """Random divergence-free zero-mean field with ``||u||^2_{L2} = 2 energy``."""
    lat = lattice(n, m)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    c = random_coeffs(lat, rng, ncomp=n, decay=decay_exponent)
    c[(...,) + lat.origin] = 0.0
    c = leray_coeffs(lat, c)
    norm2 = float(np.sum(np.abs(c) ** 2))
    if norm2 > 0:
        c *= math.sqrt(2.0 * energy / norm2)
    return VectorField(lat, c, zero_mean=True, div_free=True)


def random_smooth(n=2, m=4, seed=0, decay_exponent=2.0, nu=0.05, energy=0.05):
    return Scenario("random_smooth", random_smooth_field(n, m, seed, decay_exponent, energy),
                    None, viscosity.isotropic(n, nu))


def anisotropic_demo(n=2, m=4, seed=0, nu=0.05, energy=0.05):
    return Scenario("anisotropic_demo", random_smooth_field(n, m, seed, 2.0, energy),
                    None, viscosity.anisotropic_demo(n, nu=nu))


def zero(n=2, m=4, nu=0.05):
    lat = lattice(n, m)
    u0 = VectorField(lat, np.zeros((n,) + lat.shape, dtype=np.complex128),
                     zero_mean=True, div_free=True)
    return Scenario("zero", u0, None, viscosity.isotropic(n, nu))
