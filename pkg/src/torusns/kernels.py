"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public functions dispatch on :func:`torusns._accel.get_backend` at call
time. Both implementations accumulate in the same order wherever that is
cheap to arrange, so results agree to roundoff (usually bitwise).
"""

import math

import numpy as np

from ._accel import get_backend, njit


def _c_strides(shape):
    strides = np.ones(len(shape), dtype=np.int64)
    for d in range(len(shape) - 2, -1, -1):
        strides[d] = strides[d + 1] * shape[d + 1]
    return strides


def _flat_offsets(shape, strides):
    coords = np.indices(shape).reshape(len(shape), -1)
    return (coords * strides[:, None]).sum(axis=0).astype(np.int64)


# ---------------------------------------------------------------------------
# full n-dimensional discrete convolution
# ---------------------------------------------------------------------------

@njit(cache=True)
def _convolve_numba(av, aoff, bv, boff, out):
    for i in range(av.size):
        ai = av[i]
        if ai == 0:
            continue
        base = aoff[i]
        for j in range(bv.size):
            out[base + boff[j]] += ai * bv[j]


def _convolve_numpy(a, b, out):
    flat = a.ravel()
    coords = np.indices(a.shape).reshape(a.ndim, -1)
    for i in np.flatnonzero(flat):
        sl = tuple(slice(coords[d, i], coords[d, i] + b.shape[d]) for d in range(a.ndim))
        out[sl] += flat[i] * b


def convolve_full(a, b):
    """Full linear convolution ``(a * b)[k] = sum_i a[i] b[k - i]`` in n dims.

    Output shape is ``a.shape + b.shape - 1`` per axis. Zero entries of `a` are
    skipped, so put the sparser operand first.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != b.ndim:
        raise ValueError("operands must have the same number of dimensions")
    dtype = np.result_type(a.dtype, b.dtype, np.float64)
    a = np.ascontiguousarray(a, dtype=dtype)
    b = np.ascontiguousarray(b, dtype=dtype)
    out_shape = tuple(sa + sb - 1 for sa, sb in zip(a.shape, b.shape))
    if get_backend() == "numba":
        strides = _c_strides(out_shape)
        out = np.zeros(int(np.prod(out_shape)), dtype=dtype)
        _convolve_numba(a.ravel(), _flat_offsets(a.shape, strides),
                        b.ravel(), _flat_offsets(b.shape, strides), out)
        return out.reshape(out_shape)
    out = np.zeros(out_shape, dtype=dtype)
    _convolve_numpy(a, b, out)
    return out


# ---------------------------------------------------------------------------
# lattice sums of powers of rho(xi) = 2 pi (1 + |xi|^2)^(1/2)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _shell_counts_numba(n, radius):
    # add one axis at a time: counts_d[k] = sum_x counts_{d-1}[k - x^2]
    r2max = radius * radius
    counts = np.zeros(r2max + 1, dtype=np.int64)
    counts[0] = 1
    for _ in range(n):
        nxt = np.zeros_like(counts)
        for x in range(-radius, radius + 1):
            sq = x * x
            for k in range(sq, r2max + 1):
                nxt[k] += counts[k - sq]
        counts = nxt
    return counts


def _shell_counts_numpy(n, radius):
    r2max = radius * radius
    counts = np.zeros(r2max + 1, dtype=np.int64)
    counts[0] = 1
    for _ in range(n):
        nxt = np.zeros_like(counts)
        for x in range(-radius, radius + 1):
            sq = x * x
            if sq > r2max:
                continue
            nxt[sq:] += counts[: r2max + 1 - sq]
        counts = nxt
    return counts


def shell_counts(n, radius):
    """Number of lattice points ``xi in Z^n`` with ``|xi|^2 = k`` for k <= radius^2."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if get_backend() == "numba":
        return _shell_counts_numba(int(n), int(radius))
    return _shell_counts_numpy(int(n), int(radius))


def lattice_power_sum(n, radius, power):
    """``sum_{|xi| <= radius} rho(xi)^power`` accumulated shell by shell."""
    counts = shell_counts(n, radius)
    k = np.arange(counts.size, dtype=np.float64)
    terms = counts * (1.0 + k) ** (0.5 * power)
    # small terms first
    order = slice(None, None, -1) if power < 0 else slice(None)
    return (2.0 * math.pi) ** power * math.fsum(terms[order])


# ---------------------------------------------------------------------------
# quadratic forms a_{kj}^{ab} z_{ka} z_{jb} over many samples
# ---------------------------------------------------------------------------

@njit(cache=True)
def _quadratic_forms_numba(a, z):
    ns = a.shape[0]
    n = a.shape[1]
    out = np.zeros(ns)
    for s in range(ns):
        acc = 0.0
        for k in range(n):
            for j in range(n):
                for al in range(n):
                    zka = z[s, k, al]
                    for be in range(n):
                        acc += a[s, k, j, al, be] * zka * z[s, j, be]
        out[s] = acc
    return out


def quadratic_forms(a, z):
    """Evaluate ``a[s,k,j,al,be] z[s,k,al] z[s,j,be]`` for every sample ``s``."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    if get_backend() == "numba":
        return _quadratic_forms_numba(a, z)
    return np.einsum("skjab,ska,sjb->s", a, z, z)


# ---------------------------------------------------------------------------
# nested trapezoid for the integral Gronwall bound
# ---------------------------------------------------------------------------

@njit(cache=True)
def _nested_gronwall_numba(t, a, b, B):
    N = t.size
    out = np.empty(N)
    for i in range(N):
        acc = 0.0
        for j in range(i):
            h = t[j + 1] - t[j]
            g0 = a[j] * b[j] * math.exp(B[i] - B[j])
            g1 = a[j + 1] * b[j + 1] * math.exp(B[i] - B[j + 1])
            acc += 0.5 * h * (g0 + g1)
        out[i] = a[i] + acc
    return out


def _nested_gronwall_numpy(t, a, b, B, chunk=512):
    N = t.size
    out = a.copy()
    h = np.diff(t)
    ab = a * b
    for start in range(0, N, chunk):
        rows = np.arange(start, min(start + chunk, N))
        g = ab[None, :] * np.exp(B[rows, None] - B[None, :])
        seg = 0.5 * h[None, :] * (g[:, :-1] + g[:, 1:])
        mask = np.arange(N - 1)[None, :] < rows[:, None]
        seg = np.where(mask, seg, 0.0)
        # same left-to-right order as the loop kernel
        out[rows] = a[rows] + np.cumsum(seg, axis=1)[:, -1] if N > 1 else a[rows]
    return out


def nested_gronwall(t, a, b):
    """``a(t_i) + int_0^{t_i} a(s) b(s) exp(int_s^{t_i} b) ds`` by nested trapezoid."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    B = np.zeros_like(t)
    if t.size > 1:
        B[1:] = np.cumsum(0.5 * np.diff(t) * (b[1:] + b[:-1]))
    if get_backend() == "numba":
        return _nested_gronwall_numba(t, a, b, B)
    return _nested_gronwall_numpy(t, a, b, B)
