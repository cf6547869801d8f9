import itertools

import numpy as np
import pytest
from scipy import signal

from torusns import _accel, kernels


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    old = _accel.get_backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(old)


def _both(fn):
    old = _accel.get_backend()
    try:
        out = []
        for name in ("numba", "numpy"):
            _accel.set_backend(name)
            out.append(fn())
        return out
    finally:
        _accel.set_backend(old)


def test_backend_switch_validates():
    with pytest.raises(ValueError):
        _accel.set_backend("cuda")


@pytest.mark.parametrize("shapes", [((5,), (7,)), ((3, 4), (5, 2)), ((3, 3, 3), (2, 3, 4))])
def test_convolve_matches_scipy(backend, shapes):
    rng = np.random.default_rng(0)
    a = rng.standard_normal(shapes[0]) + 1j * rng.standard_normal(shapes[0])
    b = rng.standard_normal(shapes[1]) + 1j * rng.standard_normal(shapes[1])
    a.flat[::3] = 0  # exercise the zero-skipping path
    np.testing.assert_allclose(kernels.convolve_full(a, b), signal.convolve(a, b, method="direct"),
                               atol=1e-13)


def test_convolve_rank_mismatch(backend):
    with pytest.raises(ValueError):
        kernels.convolve_full(np.ones(3), np.ones((2, 2)))


@pytest.mark.parametrize("n,R", [(1, 5), (2, 7), (3, 4)])
def test_shell_counts_brute_force(backend, n, R):
    ref = np.zeros(R * R + 1, dtype=np.int64)
    for xi in itertools.product(range(-R, R + 1), repeat=n):
        k = sum(v * v for v in xi)
        if k <= R * R:
            ref[k] += 1
    np.testing.assert_array_equal(kernels.shell_counts(n, R), ref)


def test_lattice_power_sum_backends_agree():
    vals = _both(lambda: kernels.lattice_power_sum(2, 40, -4.0))
    assert vals[0] == vals[1]


def test_quadratic_forms(backend):
    rng = np.random.default_rng(1)
    a = rng.standard_normal((50, 3, 3, 3, 3))
    z = rng.standard_normal((50, 3, 3))
    ref = np.array([np.einsum("kjab,ka,jb->", a[s], z[s], z[s]) for s in range(50)])
    np.testing.assert_allclose(kernels.quadratic_forms(a, z), ref, rtol=1e-13)


def test_nested_gronwall_backends_agree():
    t = np.sort(np.random.default_rng(2).uniform(0, 1, 300))
    t[0] = 0.0
    a, b = np.cos(3 * t) + 2, t ** 2
    out = _both(lambda: kernels.nested_gronwall(t, a, b))
    np.testing.assert_allclose(out[0], out[1], rtol=1e-13)
