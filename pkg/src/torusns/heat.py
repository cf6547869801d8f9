"""The periodic heat semigroup ``K(t)``: each mode decays as ``exp(-(2 pi |xi|)^2 t)``.

Time integrals of heat quantities are evaluated in closed form, mode by mode.
"""

from dataclasses import dataclass
import math

import numpy as np

from .spectral import TWO_PI


def _lam(lat):
    return (TWO_PI ** 2) * lat.norm2


def heat_evolve(u0, t):
    """``K(t) u0``."""
    if t < 0:
        raise ValueError(f"heat evolution needs t >= 0, got {t}")
    lat = u0.lattice
    return u0._new(u0.coeffs * np.exp(-_lam(lat) * t), **u0._flags())


def _decay_integral(lam, T, rate):
    """``int_0^T exp(-rate * lam * t) dt``, finite at ``lam = 0``."""
    x = rate * lam * T
    out = np.empty_like(lam, dtype=np.float64)
    small = x < 1e-8
    out[small] = T * (1.0 - 0.5 * x[small])
    big = ~small
    out[big] = -np.expm1(-x[big]) / (rate * lam[big])
    return out


@dataclass
class HeatProfile:
    s: float
    T: float
    value: float
    tail_bound: float


def heat_profile(u0, T, s):
    """``int_0^T ||K(t) u0||^2_{H^s} dt`` in closed form.

    ``tail_bound`` is ``||u0||^2_{H^{s-1}}``, the cap on the integral over
    ``(0, inf)`` for zero-mean data.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    lat = u0.lattice
    amp = np.abs(u0.coeffs) ** 2
    if amp.ndim > lat.n:
        amp = amp.sum(axis=0)
    w = lat.rho ** (2.0 * s)
    integ = _decay_integral(_lam(lat), T, 2.0)
    value = math.fsum((w * amp * integ).ravel())
    tail = math.fsum((lat.rho ** (2.0 * (s - 1)) * amp).ravel())
    return HeatProfile(s=s, T=T, value=value, tail_bound=tail)


def heat_seminorm_integral(u0, T, s):
    """As :func:`heat_profile` but without the mean mode (dotted norm)."""
    lat = u0.lattice
    c = u0.coeffs.copy()
    c[(...,) + lat.origin] = 0.0
    return heat_profile(u0._new(c, **{**u0._flags(), "zero_mean": True}), T, s).value


def verify_heat_energy_identity(u0, T, r=0.0, steps=2):
    """Largest absolute residual of the heat energy equality on a time grid.

    At each of ``steps`` equispaced times ``t`` in ``(0, T]`` evaluates
    ``1/2 ||v(t)||^2_{H^r} + int_0^t ||grad v||^2_{H^r} - 1/2 ||u0||^2_{H^r}``
    with ``v = K u0`` and the integral in closed form.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    lat = u0.lattice
    amp = np.abs(u0.coeffs) ** 2
    if amp.ndim > lat.n:
        amp = amp.sum(axis=0)
    w = lat.rho ** (2.0 * r) * amp
    lam = _lam(lat)
    e0 = 0.5 * math.fsum(w.ravel())
    worst = 0.0
    for t in np.linspace(0.0, T, steps)[1:]:
        et = 0.5 * math.fsum((w * np.exp(-2.0 * lam * t)).ravel())
        diss = math.fsum((w * lam * _decay_integral(lam, t, 2.0)).ravel())
        worst = max(worst, abs(et + diss - e0))
    return worst

