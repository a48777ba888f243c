"""Command-line entry point.

Exit codes: 0 success, 1 failed check, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._orbits import derive_seed
from .acim import ConvergenceError, birkhoff_histogram, markov_exact_density, ulam_density
from .config import ConfigError, load_config, resolve
from .inverse_limit import CylinderSet, random_cylinder_set
from .stability import (BasinSpec, SweepReport, acim_sweep, cylinder_continuity, offset_grid,
                        physicality_test, psi_pushforward_continuity, psi_suite)
from .tent_map import DomainError, NotMarkovError, TentMap

#: config keys read by each subcommand
KEYS = {
    "acim": ["t", "bins", "method", "tol", "maxiter", "orbit", "burnin", "seed", "out_dir"],
    "sweep": ["t_star", "kmin", "kmax", "bins", "birkhoff_n", "burnin", "seed", "tol",
              "maxiter", "out_dir", "workers"],
    "cylinder": ["t_star", "kmin", "kmax", "bins", "threads", "burnin", "seed", "sets",
                 "out_dir", "workers"],
    "physicality": ["t", "basin", "samples", "orbit", "eps", "seed", "reference_n", "s_min",
                    "s_max", "out_dir", "workers"],
    "psi-check": ["samples", "depth", "seed", "t_star", "kmin", "kmax", "out_dir", "workers"],
    "render": ["t", "t_star", "kmin", "kmax", "bins", "threads", "burnin", "seed", "tol",
               "maxiter", "out_dir", "workers"],
}
DEFAULTS = {
    "psi-check": {"samples": 10_000},
    "render": {"threads": 200_000},
}
#: keys that never change numeric output and stay out of file headers
NOT_HEADED = {"out_dir", "workers"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--out", help="output CSV path (default: <out-dir>/<command>.csv)")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tentlab", description="Tent-map inverse limit experiments.")
    parser.add_argument("--version", action="version", version=f"tentlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("acim", help="invariant density of f_t")
    _common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--bins", type=int)
    p.add_argument("--method", choices=["ulam", "birkhoff", "markov"])
    p.add_argument("--tol", type=float)
    p.add_argument("--maxiter", type=int)
    p.add_argument("--orbit", type=int, help="orbit length for the birkhoff method")
    p.add_argument("--burnin", type=int)

    p = sub.add_parser("sweep", help="acim distances across t* ± 2^-k")
    _common(p)
    p.add_argument("--t-star", dest="t_star", type=float)
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--birkhoff-n", dest="birkhoff_n", type=int,
                   help="also estimate by orbits of this length (0: Ulam only)")
    p.add_argument("--burnin", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--maxiter", type=int)

    p = sub.add_parser("cylinder", help="induced measures of cylinder sets across t* ± 2^-k")
    _common(p)
    p.add_argument("--spec", action="append", default=[],
                   help="cylinder set TOML file (repeatable); default: random sets")
    p.add_argument("--t-star", dest="t_star", type=float)
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--threads", type=int, help="orbit length for thread sampling")
    p.add_argument("--burnin", type=int)
    p.add_argument("--sets", type=int, help="number of random sets when no --spec is given")

    p = sub.add_parser("physicality", help="Birkhoff averages from a basin against the induced measure")
    _common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--basin", choices=["interval", "collar", "annulus"])
    p.add_argument("--samples", type=int)
    p.add_argument("--orbit", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--reference-n", dest="reference_n", type=int)
    p.add_argument("--restrict", action="store_true",
                   help="annulus basin: keep samples with s in [s-min, s-max]")
    p.add_argument("--s-min", dest="s_min", type=float)
    p.add_argument("--s-max", dest="s_max", type=float)

    p = sub.add_parser("psi-check", help="roundtrip and conjugacy residuals of Psi_t")
    _common(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--t", type=float, help="fixed slope (default: random slopes)")
    p.add_argument("--pushforward", action="store_true",
                   help="also sweep integrals of observables over Psi_t images")
    p.add_argument("--t-star", dest="t_star", type=float)
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)

    p = sub.add_parser("render", help="figures with companion CSV")
    _common(p)
    p.add_argument("--what", required=True, choices=["acim", "delay", "disk_orbit", "sweep_curves"])
    p.add_argument("--t", type=float)
    p.add_argument("--t-star", dest="t_star", type=float)
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--burnin", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--maxiter", type=int)
    p.add_argument("--y0", type=float, default=0.7)
    p.add_argument("--s0", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=40)
    return parser


def header(command: str, cfg: dict, extra: dict | None = None) -> str:
    params = {k: v for k, v in cfg.items() if k not in NOT_HEADED and k != "seed"}
    params.update(extra or {})
    kv = " ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                  for k, v in sorted(params.items()))
    return f"tentlab {__version__} {command}\nseed={cfg.get('seed')}\n{kv}"


def _out_path(args, cfg, stem: str) -> Path:
    if args.out:
        path = Path(args.out)
    else:
        path = Path(cfg["out_dir"]) / f"{stem}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _finish(rep: SweepReport, path: Path, head: str) -> int:
    rep.to_csv(path, head)
    path.with_suffix(".txt").write_text(rep.to_text(runtime=False), encoding="utf-8", newline="")
    print(rep.to_text(), end="")
    print(f"wrote {path}")
    if rep.passed:
        return 0
    for k in rep.failed_checks():
        print(f"FAILED check {k}", file=sys.stderr)
    return 1


def cmd_acim(args, cfg) -> int:
    tent = TentMap(cfg["t"])
    method = cfg["method"]
    try:
        if method == "ulam":
            dens = ulam_density(tent, cfg["bins"], cfg["tol"], cfg["maxiter"])
        elif method == "birkhoff":
            dens = birkhoff_histogram(tent, None, cfg["orbit"], cfg["bins"], cfg["burnin"], cfg["seed"])
        else:
            dens = markov_exact_density(tent, cfg["bins"])
    except ConvergenceError as exc:
        print(f"FAILED check stationary_residual_le_tol: observed {exc.residual:.3e} "
              f"> tol {cfg['tol']:g}", file=sys.stderr)
        return 1
    path = _out_path(args, cfg, "acim")
    dens.to_csv(path, header("acim", cfg))
    print(f"acim t={tent.t!r} method={method} bins={dens.nbins} "
          f"min={dens.weights.min():.6g} max={dens.weights.max():.6g}")
    print(f"wrote {path}")
    return 0


def _grid(cfg):
    return offset_grid(cfg["t_star"], range(cfg["kmin"], cfg["kmax"] + 1))


def cmd_sweep(args, cfg) -> int:
    rep = acim_sweep(_grid(cfg), cfg["t_star"], cfg["bins"], cfg["birkhoff_n"], cfg["burnin"],
                     cfg["seed"], cfg["tol"], cfg["maxiter"], cfg["workers"])
    return _finish(rep, _out_path(args, cfg, "sweep"), header("sweep", cfg))


def cmd_cylinder(args, cfg) -> int:
    if args.spec:
        sets = [CylinderSet.load(p) for p in args.spec]
        extra = {"specs": ";".join(args.spec)}
    else:
        rng = np.random.default_rng(derive_seed(cfg["seed"], 11))
        sets = [random_cylinder_set(rng, cfg["t_star"], nondegenerate=True)
                for _ in range(cfg["sets"])]
        extra = {}
    rep = cylinder_continuity(sets, _grid(cfg), cfg["t_star"], cfg["bins"], cfg["threads"],
                              cfg["burnin"], cfg["seed"], workers=cfg["workers"])
    return _finish(rep, _out_path(args, cfg, "cylinder"), header("cylinder", cfg, extra))


def cmd_physicality(args, cfg) -> int:
    restrict = args.restrict and cfg["basin"] == "annulus"
    basin = BasinSpec(cfg["basin"], (cfg["s_min"], cfg["s_max"]) if restrict else None)
    if not restrict:
        cfg = {k: v for k, v in cfg.items() if k not in ("s_min", "s_max")}
    rep = physicality_test(TentMap(cfg["t"]), basin, cfg["samples"], cfg["orbit"], cfg["eps"],
                           seed=cfg["seed"], reference_n=cfg["reference_n"],
                           workers=cfg["workers"])
    return _finish(rep, _out_path(args, cfg, "physicality"), header("physicality", cfg))


def cmd_psi_check(args, cfg) -> int:
    if args.t is not None:
        TentMap(args.t)
    extra = {"t": "random" if args.t is None else args.t}
    rep = psi_suite(cfg["samples"], cfg["depth"], cfg["seed"], args.t)
    path = _out_path(args, cfg, "psi_check")
    code = _finish(rep, path, header("psi-check", cfg, extra))
    if args.pushforward:
        push = psi_pushforward_continuity(_grid(cfg), cfg["t_star"], cfg["depth"],
                                          samples=cfg["samples"], seed=cfg["seed"],
                                          workers=cfg["workers"])
        ppath = path.with_name(path.stem + "_pushforward.csv")
        push.to_csv(ppath, header("psi-check pushforward", cfg, extra))
        print(push.to_text(), end="")
        print(f"wrote {ppath}")
    return code


def cmd_render(args, cfg) -> int:
    from . import render

    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    head = header("render", cfg, {"what": args.what})
    if args.what == "acim":
        png, csv = render.render_acim(ulam_density(TentMap(cfg["t"]), cfg["bins"], cfg["tol"],
                                                   cfg["maxiter"]), cfg["t"], out, header=head)
    elif args.what == "delay":
        png, csv = render.render_delay(TentMap(cfg["t"]), out, cfg["threads"], cfg["burnin"],
                                       cfg["seed"], header=head)
    elif args.what == "disk_orbit":
        if not 0.0 <= args.s0 <= 1.0 or args.steps < 1:
            raise UsageError("--s0 must lie in [0, 1] and --steps must be positive")
        head = header("render", cfg, {"what": args.what, "y0": args.y0, "s0": args.s0,
                                      "steps": args.steps})
        png, csv = render.render_disk_orbit(TentMap(cfg["t"]), args.y0, args.s0, args.steps,
                                            out, header=head)
    else:
        rep = acim_sweep(_grid(cfg), cfg["t_star"], cfg["bins"], tol=cfg["tol"],
                         maxiter=cfg["maxiter"], workers=cfg["workers"])
        png, csv = render.render_sweep_curves(rep, out, header=head)
    print(f"wrote {png}")
    print(f"wrote {csv}")
    return 0


COMMANDS = {
    "acim": cmd_acim,
    "sweep": cmd_sweep,
    "cylinder": cmd_cylinder,
    "physicality": cmd_physicality,
    "psi-check": cmd_psi_check,
    "render": cmd_render,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        file_values = load_config(args.config) if args.config else {}
        flags = {k: v for k, v in vars(args).items() if k in KEYS[args.command]}
        cfg = resolve(KEYS[args.command], file_values, flags, DEFAULTS.get(args.command))
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, DomainError, NotMarkovError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return run_command(argv)


if __name__ == "__main__":
    raise SystemExit(main())
