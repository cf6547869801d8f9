"""Run configuration: a line-oriented ``key = value`` format.

Blank lines and ``#`` comments are ignored. Required keys: ``scenario``,
``m``, ``dt``, ``t_final``. Everything else has a default (see ``FIELDS``).
"""

from dataclasses import dataclass, fields
import math

import numpy as np

from .calculus import DEALIAS_MODES
from .galerkin import SCHEMES, ConfigError as _SolverConfigError
from .scenarios import SCENARIOS
from .spectral import lattice
from . import viscosity


class ConfigError(_SolverConfigError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


def _positive_int(v):
    x = int(v)
    if x <= 0:
        raise ValueError("must be a positive integer")
    return x


def _nonneg_int(v):
    x = int(v)
    if x < 0:
        raise ValueError("must be a nonnegative integer")
    return x


def _positive_float(v):
    x = float(v)
    if not (x > 0 and math.isfinite(x)):
        raise ValueError("must be a positive number")
    return x


def _nonneg_float(v):
    x = float(v)
    if not (x >= 0 and math.isfinite(x)):
        raise ValueError("must be a nonnegative number")
    return x


def _choice(options):
    def parse(v):
        if v not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return v
    return parse


def _bool(v):
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be a boolean")


def _opt(parse):
    def inner(v):
        return None if v.lower() in ("", "none", "auto") else parse(v)
    return inner


@dataclass
class RunConfig:
    scenario: str
    m: int
    dt: float
    t_final: float
    n: int = 2
    nu: float = 0.01
    grid_factor: float | None = None
    scheme: str = "rk4"
    dealias: str = "exact_pad"
    tensor: str | None = None
    seed: int = 0
    decay_exponent: float = 2.0
    energy: float = 0.05
    u0_scale: float = 1.0
    force_amplitude: float = 0.0
    convection: bool = True
    nu0: float | None = None
    ellipticity_samples: int = 10_000
    output: str = "diagnostics.csv"
    snapshot_dir: str | None = None
    snapshot_every: int = 0
    regime: str = "constant_coeff"
    C_star: float = 1.0
    C_tilde_star: float = 1.0
    sigma_tilde: float | None = None

    def grid(self):
        """Grid points per axis requested by ``grid_factor`` (``None`` = automatic)."""
        if self.grid_factor is None:
            return None
        return int(math.ceil(self.grid_factor * self.m)) + 1


PARSERS = {
    "scenario": _choice(SCENARIOS),
    "m": _positive_int,
    "dt": _positive_float,
    "t_final": _positive_float,
    "n": _positive_int,
    "nu": _positive_float,
    "grid_factor": _opt(_positive_float),
    "scheme": _choice(SCHEMES),
    "dealias": _choice(DEALIAS_MODES),
    "tensor": _opt(str),
    "seed": _nonneg_int,
    "decay_exponent": _nonneg_float,
    "energy": _nonneg_float,
    "u0_scale": _nonneg_float,
    "force_amplitude": float,
    "convection": _bool,
    "nu0": _opt(_nonneg_float),
    "ellipticity_samples": _positive_int,
    "output": str,
    "snapshot_dir": _opt(str),
    "snapshot_every": _nonneg_int,
    "regime": _choice(("constant_coeff", "variable_coeff")),
    "C_star": _positive_float,
    "C_tilde_star": _positive_float,
    "sigma_tilde": _opt(_positive_float),
}
REQUIRED = ("scenario", "m", "dt", "t_final")
FIELDS = tuple(f.name for f in fields(RunConfig))


def parse_config(text):
    """Parse configuration text into a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        for unknown or repeated keys, malformed values, missing required keys
        or a grid too small for ``m`` (with the offending line number).
    """
    values, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {val!r} ({exc})", lineno) from None
        where[key] = lineno
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    cfg = RunConfig(**values)
    if cfg.scenario == "taylor_green" and cfg.n != 2:
        raise ConfigError("taylor_green is two-dimensional (n = 2)", where.get("n"))
    if cfg.grid_factor is not None:
        need = 2 * (2 * cfg.m) + 1 if cfg.dealias == "exact_pad" else 3 * cfg.m + 1
        if cfg.grid() < need:
            raise ConfigError(
                f"grid_factor={cfg.grid_factor} gives N={cfg.grid()} < {need} needed "
                f"for m={cfg.m} with {cfg.dealias}", where["grid_factor"])
    steps = cfg.t_final / cfg.dt
    if abs(steps - round(steps)) > 1e-9 * steps:
        raise ConfigError("t_final must be a whole number of steps dt", where["t_final"])
    return cfg


# ---------------------------------------------------------------------------
# tensor specification
# ---------------------------------------------------------------------------

def _parse_mode(tok, n, lineno):
    try:
        xi = tuple(int(v) for v in tok.split(","))
    except ValueError:
        raise ConfigError(f"bad mode {tok!r}", lineno) from None
    if len(xi) != n or not any(xi):
        raise ConfigError(f"mode {tok!r} must be a nonzero {n}-vector", lineno)
    return xi


def parse_tensor_spec(text, n):
    """Build a :class:`ViscosityTensor` from a tensor specification.

    Lines (indices are 1-based)::

        isotropic nu=<v>
        k j alpha beta constant <v>
        k j alpha beta field mean=<v> cos:1,0=<v> sin:0,1=<v>
        symmetrize
        time <t> <theta>
    """
    entries, times, thetas = [], [], []
    iso = None
    sym = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "isotropic":
                if len(tok) != 2 or not tok[1].startswith("nu="):
                    raise ConfigError("expected 'isotropic nu=<value>'", lineno)
                iso = _positive_float(tok[1][3:])
            elif tok[0] == "symmetrize":
                sym = True
            elif tok[0] == "time":
                times.append(float(tok[1]))
                thetas.append(float(tok[2]))
            else:
                idx = tuple(int(v) - 1 for v in tok[:4])
                if len(idx) != 4 or any(not 0 <= i < n for i in idx):
                    raise ConfigError(f"tensor indices must lie in 1..{n}", lineno)
                kind = tok[4]
                if kind == "constant":
                    entries.append((idx, float(tok[5]), []))
                elif kind == "field":
                    mean, modes = 0.0, []
                    for part in tok[5:]:
                        key, val = part.split("=")
                        if key == "mean":
                            mean = float(val)
                        elif key.startswith(("cos:", "sin:")):
                            modes.append((key[:3], _parse_mode(key[4:], n, lineno), float(val)))
                        else:
                            raise ConfigError(f"bad field term {part!r}", lineno)
                    entries.append((idx, mean, modes))
                else:
                    raise ConfigError(f"unknown entry kind {kind!r}", lineno)
        except (IndexError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed tensor line {raw.strip()!r}", lineno) from None
    if iso is not None:
        if entries:
            raise ConfigError("isotropic spec cannot be combined with entries")
        A = viscosity.isotropic(n, iso)
    else:
        if not entries:
            raise ConfigError("tensor spec has no entries")
        mA = 0
        for _, _, modes in entries:
            for _, xi, _ in modes:
                mA = max(mA, int(math.ceil(math.sqrt(sum(v * v for v in xi)))))
        lat = lattice(n, mA)
        c = np.zeros((n,) * 4 + lat.shape, dtype=np.complex128)
        for idx, mean, modes in entries:
            c[idx + lat.origin] += mean
            for kind, xi, amp in modes:
                p = lat.index(xi)
                q = lat.index(tuple(-v for v in xi))
                if kind == "cos":
                    c[idx + p] += 0.5 * amp
                    c[idx + q] += 0.5 * amp
                else:
                    c[idx + p] += -0.5j * amp
                    c[idx + q] += 0.5j * amp
        if sym:
            c = viscosity.symmetrize(c)
        A = viscosity.ViscosityTensor(n, c)
    if times:
        order = np.argsort(times)
        A = viscosity.ViscosityTensor(n, A.coeffs, tuple(np.asarray(times)[order]),
                                      tuple(np.asarray(thetas)[order]))
    return A
