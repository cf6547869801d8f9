"""Time the numba and numpy backends of the hot kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call of each kernel compiles it; that warm-up is excluded.
"""

import argparse
import time

import numpy as np

from torusns import _accel, kernels
from torusns.spectral import lattice, random_coeffs


def _cases():
    rng = np.random.default_rng(0)
    lat = lattice(3, 4)
    a = random_coeffs(lat, rng)
    b = random_coeffs(lat, rng)
    A = rng.standard_normal((20_000, 3, 3, 3, 3))
    z = rng.standard_normal((20_000, 3, 3))
    t = np.linspace(0.0, 1.0, 2_000)
    return {
        "convolve_full 3d m=4": lambda: kernels.convolve_full(a, b),
        "shell_counts n=3 R=64": lambda: kernels.shell_counts(3, 64),
        "quadratic_forms 20k x 3d": lambda: kernels.quadratic_forms(A, z),
        "nested_gronwall 2000 pts": lambda: kernels.nested_gronwall(t, np.cos(t) + 2, t * t),
    }


def _best(fn, repeat):
    fn()  # warm-up (JIT compile for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = ["numpy"] + (["numba"] if _accel.HAS_NUMBA else [])
    old = _accel.get_backend()
    rows = []
    try:
        for name, fn in _cases().items():
            timing = {}
            for be in backends:
                _accel.set_backend(be)
                timing[be] = _best(fn, args.repeat)
            rows.append((name, timing))
    finally:
        _accel.set_backend(old)
    print(f"{'kernel':28s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>9s}")
    for name, timing in rows:
        np_ms = 1e3 * timing["numpy"]
        nb_ms = 1e3 * timing.get("numba", float("nan"))
        print(f"{name:28s} {np_ms:12.3f} {nb_ms:12.3f} {np_ms / nb_ms:8.1f}x")


if __name__ == "__main__":
    main()
