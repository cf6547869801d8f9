"""Command-line front end: ``torusns {run,verify,threshold,heat,constants}``.

Exit status: 0 clean, 1 property violation, 2 configuration error,
3 numerical blow-up.
"""

import argparse
import csv
import os
import sys

import numpy as np

from . import analysis, heat, scenarios, verify, viscosity
from .config import FIELDS, ConfigError, parse_config, parse_tensor_spec
from .galerkin import BlowUpError, ConfigError as SolverConfigError, SolverConfig, StabilityError, solve
from .snapshot import SnapshotError, save_snapshot
from .spectral import VectorField, lattice, sobolev_norm

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3

CSV_COLUMNS = ("t", "l2_sq", "h_half_n_sq", "dissipation", "force_power",
               "serrin_cumulative", "energy_residual_cumulative", "div_residual")


def _fmt(v):
    return "%.17g" % v


# ---------------------------------------------------------------------------
# config -> problem
# ---------------------------------------------------------------------------

def load_config(path, overrides=()):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    if overrides:
        # later keys replace earlier ones
        keys = {o.split("=", 1)[0].strip() for o in overrides}
        kept = [ln for ln in text.splitlines()
                if ln.split("#", 1)[0].split("=", 1)[0].strip() not in keys]
        text = "\n".join(kept + list(overrides))
    return parse_config(text)


def build_tensor(cfg, default):
    spec = cfg.tensor
    if spec is None:
        return default
    if spec == "anisotropic_demo":
        return viscosity.anisotropic_demo(cfg.n, nu=cfg.nu)
    if spec.startswith("isotropic"):
        return parse_tensor_spec(spec, cfg.n)
    try:
        with open(spec) as fh:
            return parse_tensor_spec(fh.read(), cfg.n)
    except OSError as exc:
        raise ConfigError(f"cannot read tensor spec {spec}: {exc.strerror}") from None


def build_problem(cfg):
    """Initial data, force and tensor described by a :class:`RunConfig`."""
    name = cfg.scenario
    if name == "taylor_green":
        sc = scenarios.taylor_green(cfg.m, cfg.nu)
    elif name == "single_stokes_mode":
        sc = scenarios.single_stokes_mode(cfg.n, cfg.m, cfg.nu)
    elif name == "random_smooth":
        sc = scenarios.random_smooth(cfg.n, cfg.m, cfg.seed, cfg.decay_exponent, cfg.nu, cfg.energy)
    elif name == "anisotropic_demo":
        sc = scenarios.anisotropic_demo(cfg.n, cfg.m, cfg.seed, cfg.nu, cfg.energy)
    else:
        sc = scenarios.zero(cfg.n, cfg.m, cfg.nu)
    u0 = sc.u0 * cfg.u0_scale if cfg.u0_scale != 1.0 else sc.u0
    f = None
    if cfg.force_amplitude:
        f = scenarios.single_stokes_mode(cfg.n, cfg.m, amplitude=cfg.force_amplitude).u0
    return u0, f, build_tensor(cfg, sc.A)


def solver_config(cfg):
    return SolverConfig(m=cfg.m, dt=cfg.dt, T=cfg.t_final, scheme=cfg.scheme,
                        dealias=cfg.dealias, nu0=cfg.nu0, convection=cfg.convection,
                        grid=cfg.grid(), ellipticity_samples=cfg.ellipticity_samples,
                        seed=cfg.seed)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def write_csv(path, traj):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for d in traj.diagnostics:
            w.writerow([_fmt(v) for v in (d.t, d.l2_sq, d.h_half_n_sq, d.dissipation,
                                          d.force_power, d.serrin_cumulative,
                                          d.energy_residual_cumulative, d.div_residual)])


def cmd_run(cfg, out=None):
    out = out or sys.stdout
    u0, f, A = build_problem(cfg)
    last = {}
    snap_dir = cfg.snapshot_dir
    if snap_dir:
        os.makedirs(snap_dir, exist_ok=True)

    def on_step(i, t, c):
        last["i"], last["t"], last["c"] = i, t, c
        if snap_dir and cfg.snapshot_every and i % cfg.snapshot_every == 0:
            save_snapshot(_field(u0, c), t, os.path.join(snap_dir, f"snap_{i:06d}.tns"))

    try:
        # overflow on the way to blow-up is reported through BlowUpError
        with np.errstate(over="ignore", invalid="ignore"):
            traj = solve(u0, f, A, solver_config(cfg), on_step=on_step)
    except BlowUpError as exc:
        path = (os.path.join(snap_dir, "last_good.tns") if snap_dir
                else cfg.output + ".last_good.tns")
        if "c" in last:
            save_snapshot(_field(u0, last["c"]), last["t"], path)
            print(f"blow-up: {exc}; last good state (t={last['t']:.6g}) in {path}", file=out)
        else:
            print(f"blow-up: {exc}", file=out)
        return EXIT_BLOWUP
    write_csv(cfg.output, traj)
    print(f"wrote {len(traj)} rows to {cfg.output}", file=out)
    return EXIT_OK


def _field(u0, c):
    return VectorField(lattice(u0.n, (c.shape[-1] - 1) // 2), c, zero_mean=True)


def cmd_verify(suite, seed=0, trials=200, tensor=None, out=None):
    out = out or sys.stdout
    suites = verify.SUITES if suite == "all" else (suite,)
    ok = True
    for s in suites:
        results = verify.run_suite(s, seed, trials, tensor)
        print(verify.format_report(s, results), file=out)
        ok &= all(r.passed for r in results)
    if trials == 0:
        print("warning: trials=0, nothing was checked", file=out)
    return EXIT_OK if ok else EXIT_VIOLATION


def _force_norm(f, n):
    if f is None:
        return None
    val = sobolev_norm(f, 0.5 * n - 2.0) ** 2
    return lambda t: val


def cmd_threshold(cfg, sweep=0, out=None):
    out = out or sys.stdout
    u0, f, A = build_problem(cfg)
    try:
        rep = analysis.existence_threshold(
            u0, _force_norm(f, u0.n), A, cfg.t_final, cfg.regime,
            C_star=cfg.C_star, C_tilde_star=cfg.C_tilde_star, sigma_tilde=cfg.sigma_tilde,
            samples=cfg.ellipticity_samples, seed=cfg.seed)
    except viscosity.NotEllipticError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_VIOLATION
    for key in ("regime", "C_A", "C_star", "C_tilde_star", "C_bar", "A_norm", "A1", "A2",
                "A3", "u0_norm_sq", "T", "force_integral", "heat_integral", "lhs",
                "margin", "T_star_max"):
        val = getattr(rep, key)
        print(f"{key} = {val if isinstance(val, str) else _fmt(val)}", file=out)
    print(f"satisfied = {rep.satisfied}", file=out)
    for note in rep.notes:
        print(f"note: {note}", file=out)
    for k in range(sweep):
        scale = 2.0 ** k
        r = analysis.existence_threshold(
            u0 * scale, _force_norm(f, u0.n), A, cfg.t_final, cfg.regime,
            constants_override={"C_A": rep.C_A, "A_norm": rep.A_norm, "C_bar": rep.C_bar},
            C_star=cfg.C_star, C_tilde_star=cfg.C_tilde_star, sigma_tilde=cfg.sigma_tilde)
        print(f"sweep scale={_fmt(scale)} T_star_max={_fmt(r.T_star_max)}", file=out)
    return EXIT_OK


def cmd_heat(n, m, seed, T, s, r, steps, out=None):
    out = out or sys.stdout
    u0 = scenarios.random_smooth_field(n, m, seed)
    prof = heat.heat_profile(u0, T, s)
    resid = heat.verify_heat_energy_identity(u0, T, r, steps)
    print(f"heat_profile(s={_fmt(s)}, T={_fmt(T)}) = {_fmt(prof.value)}", file=out)
    print(f"tail_bound = {_fmt(prof.tail_bound)}", file=out)
    print(f"energy_identity_residual(r={_fmt(r)}) = {_fmt(resid)}", file=out)
    return EXIT_OK


def cmd_constants(args, out=None):
    out = out or sys.stdout
    try:
        rep = analysis.commutator_constant(args.s, args.theta, args.sigma_tilde, args.n,
                                           args.radius)
    except analysis.SumDivergesError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_CONFIG
    print(f"commutator_constant = {_fmt(rep.value)}", file=out)
    print(f"sigma0 = {_fmt(rep.sigma0)}", file=out)
    print(f"raw_sum(radius={rep.radius}) = {_fmt(rep.partial_sum)}", file=out)
    print(f"raw_sum(radius={rep.radius // 2}) = {_fmt(rep.partial_sum_half)}", file=out)
    print(f"tail_estimate = {_fmt(rep.tail)}", file=out)
    print(f"relative_change = {_fmt(rep.relative_change)}", file=out)
    if args.mult:
        s1, s2 = args.mult
        try:
            c = analysis.estimate_multiplication_constant(s1, s2, args.n, args.m,
                                                          args.trials, args.seed)
        except ValueError as exc:
            print(f"error: {exc}", file=out)
            return EXIT_CONFIG
        print(f"C_star_lower_bound(s1={_fmt(s1)}, s2={_fmt(s2)}) = {_fmt(c)}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _config_flags(p):
    g = p.add_argument_group("config overrides")
    for key in FIELDS:
        g.add_argument("--" + key.replace("_", "-"), dest="cfg_" + key, metavar="VALUE")


def _overrides(args):
    return [f"{k[4:]} = {v}" for k, v in vars(args).items()
            if k.startswith("cfg_") and v is not None]


def build_parser():
    p = argparse.ArgumentParser(prog="torusns", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate a configured scenario and write diagnostics")
    r.add_argument("config")
    _config_flags(r)

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--tensor", help="tensor spec file used by the coercivity check")
    v.add_argument("--n", type=int, default=2, help="dimension for --tensor")

    t = sub.add_parser("threshold", help="evaluate the existence threshold")
    t.add_argument("config")
    _config_flags(t)
    t.add_argument("--sweep", type=int, default=0, help="also scan u0 scaled by 2^k, k < SWEEP")

    h = sub.add_parser("heat", help="heat profile and energy identity for random data")
    h.add_argument("--n", type=int, default=2)
    h.add_argument("--m", type=int, default=4)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--T", type=float, default=1.0)
    h.add_argument("--s", type=float, default=1.0)
    h.add_argument("--r", type=float, default=0.0)
    h.add_argument("--steps", type=int, default=16)

    c = sub.add_parser("constants", help="commutator constant and product-constant estimate")
    c.add_argument("--s", type=float, default=0.0)
    c.add_argument("--theta", type=float, default=1.0)
    c.add_argument("--sigma-tilde", type=float, default=2.0)
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--radius", type=int, default=64)
    c.add_argument("--mult", type=float, nargs=2, metavar=("S1", "S2"))
    c.add_argument("--m", type=int, default=4)
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(load_config(args.config, _overrides(args)))
        if args.command == "threshold":
            return cmd_threshold(load_config(args.config, _overrides(args)), args.sweep)
        if args.command == "verify":
            tensor = None
            if args.tensor:
                with open(args.tensor) as fh:
                    tensor = parse_tensor_spec(fh.read(), args.n)
            return cmd_verify(args.suite, args.seed, args.trials, tensor)
        if args.command == "heat":
            return cmd_heat(args.n, args.m, args.seed, args.T, args.s, args.r, args.steps)
        return cmd_constants(args)
    except viscosity.NotEllipticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (ConfigError, SolverConfigError, StabilityError, SnapshotError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
