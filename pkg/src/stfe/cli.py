"""Command-line entry point: ``stfe {simulate,ensemble,region,validate,version}``.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 acceptance failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from . import io as stio
from .config import DEFAULTS, OUT_DIR_ENV, ConfigError, RunConfig, load_config
from .ensemble import EnsembleFailure, mass_scaling_report, run_ensemble
from .exponents import region_scan, windows
from .functionals import diagnostics_callback
from .initial import regularize
from .stepper import SimulationError, run_path

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 2, 3, 4

log = logging.getLogger("stfe")


def _manifest(command: str, cfg: dict, **extra) -> dict:
    return {"command": command, "version": __version__, "config": cfg, **extra}


def _out_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.set)
    rc = RunConfig.from_dict(cfg)
    try:
        u0 = regularize(rc.ic, rc.eps, rc.grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(rc.out_dir)
    stio.write_json(out / "manifest.json", _manifest("simulate", cfg, seed=rc.seed))
    try:
        res = run_path(rc.grid, u0, rc.sim, rc.noise, rc.seed,
                       diagnostics=diagnostics_callback(rc.grid, rc.alphas), diag_every=rc.diagnostics_every,
                       snapshot_every=rc.snapshot_every, noise_substeps=rc.noise_substeps)
    except SimulationError as exc:
        stio.write_json(out / "failure.json", exc.record())
        raise
    stio.write_diagnostics(out / "diagnostics.csv", res.diagnostics, len(rc.alphas))
    if res.snapshots is not None:
        for i, u in enumerate(res.snapshots):
            stio.write_snapshot(out / f"snapshot_{i:05d}.csv", rc.grid.nodes, u)
    stio.write_snapshot(out / "final.csv", rc.grid.nodes, res.final.u)
    print(f"simulate: {res.n_steps} steps of dt={res.dt:.3e}; min u = {res.min_u_so_far:.4g}; output in {out}")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    cfg = load_config(args.config, args.set)
    if args.jobs is not None:
        cfg["ensemble"]["jobs"] = args.jobs
    rc = RunConfig.from_dict(cfg)
    ecfg = rc.ensemble()
    try:
        ecfg.initial_field()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(rc.out_dir)
    stio.write_json(out / "manifest.json", _manifest("ensemble", cfg, base_seed=ecfg.base_seed))
    res = run_ensemble(ecfg)
    stio.write_ensemble_report(out / "ensemble.ndjson", res.estimates)
    if res.failures:
        stio.write_json(out / "failures.json", {"failures": [p.failure for p in res.failures]})
    print(f"ensemble: {ecfg.replicates} replicates, {len(res.failures)} failed, "
          f"{res.negative_paths} with negative values; output in {out}")
    if ecfg.mass_scalings:
        rep = mass_scaling_report(ecfg)
        stio.write_scaling_report(out / "scaling.csv", rep.rows)
        for name, s in rep.slopes.items():
            print(f"  slope {name}: {s:.4f}")
    return EXIT_OK


def cmd_region(args) -> int:
    try:
        w = windows(args.n)
        scan = region_scan(args.n, args.resolution)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULTS["output"]["dir"]))
    stio.write_region(out / "region.csv", scan.rows())
    stio.write_json(out / "windows.json", {"n": args.n, **w.as_dict()})
    stio.write_json(out / "manifest.json", _manifest("region", {"n": args.n, "resolution": args.resolution}))
    ext = scan.admissible_alpha_extent()
    print(f"region: n={args.n:g}; scanned admissible alpha extent {ext}; output in {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import SUITES

    names = list(SUITES) if args.suite == "all" else [args.suite]
    if any(n not in SUITES for n in names):
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)} or 'all'")
    ok = True
    for name in names:
        for check in SUITES[name]:
            res = check()
            print(res.line(), flush=True)
            ok &= res.passed
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_version(args) -> int:
    print(f"stfe {__version__}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stfe", description="Stochastic thin-film equation laboratory.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("config", nargs="?", help="JSON config file (defaults apply when omitted)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted override, e.g. --set sim.dt=1e-6 (repeatable)")

    sp = sub.add_parser("simulate", help="run one path")
    with_config(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("ensemble", help="run replicated paths and report moments")
    with_config(sp)
    sp.add_argument("--jobs", type=int, help="worker processes (overrides ensemble.jobs)")
    sp.set_defaults(func=cmd_ensemble)

    sp = sub.add_parser("region", help="scan the (alpha, theta) admissibility region")
    sp.add_argument("--n", type=float, default=8.0 / 3.0)
    sp.add_argument("--resolution", type=float, default=1e-3, help="alpha step")
    sp.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or stfe_out)")
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("validate", help="run an acceptance suite")
    sp.add_argument("suite", help="suite name or 'all'")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("version", help="print the version")
    sp.set_defaults(func=cmd_version)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, EnsembleFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
