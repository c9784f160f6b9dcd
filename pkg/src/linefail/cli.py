"""Command-line front end: ``linefail run|uq|compare <config>``.

Exit codes: 0 success (including runs that end in line failure), 1 invalid
input, 2 solver failure, 3 file-system error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

from . import ensemble
from .config import ConfigError, ConfigFile, load_config, to_dict
from .output import BundleError, compare_bundles, versions, write_csv, write_ensemble, write_manifest, write_run
from .simulator import SimulationError, run
from .stochastic import relative_error

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="YAML config file")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--workers", type=int, help="parallel worker processes for ensembles")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (overrides stochastic.seed)")

    p = argparse.ArgumentParser(prog="linefail", description="Conductor damage and failure-probability runs.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="single deterministic run")
    sub.add_parser("uq", parents=[common], help="collocation or Monte Carlo ensemble")
    cmp = sub.add_parser("compare", parents=[common], help="ensemble error against a reference bundle")
    cmp.add_argument("--reference", required=True, help="directory written by an earlier uq run")
    return p


def _resolve(args) -> ConfigFile:
    cfg = load_config(args.config)
    if args.out:
        cfg = replace(cfg, output=replace(cfg.output, directory=args.out))
    if cfg.stochastic is not None:
        over = {}
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            over["seed"] = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            over["workers"] = args.workers
        if over:
            cfg = replace(cfg, stochastic=replace(cfg.stochastic, **over))
    return cfg


def _manifest(cfg: ConfigFile, args, started: float, **extra) -> dict:
    return {
        "command": args.command,
        "config_path": str(Path(args.config).resolve()),
        "config_sha256": cfg.sha256,
        "versions": versions(),
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": time.time() - started,
        **extra,
        "resolved_config": to_dict(cfg),
    }


def _out_dir(cfg: ConfigFile) -> Path:
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(cfg: ConfigFile, args, started: float) -> int:
    res = run(cfg.run)
    out = _out_dir(cfg)
    files = write_run(res, out) if "csv" in cfg.output.formats else []
    status = "completed-with-failure" if res.failed else "completed-no-failure"
    if "json" in cfg.output.formats:
        write_manifest(
            out,
            _manifest(
                cfg,
                args,
                started,
                status=status,
                failed=res.failed,
                failure_time=res.failure_time,
                failure_step=res.failure_step,
                steps_run=res.steps_run,
                max_damage_overshoot=res.max_overshoot,
                files=files,
            ),
        )
    when = f" at t = {res.failure_time:.2f} yr" if res.failed else ""
    print(f"{status}{when}; {res.steps_run} steps; max theta {res.max_theta.max():.2f} K; output in {out}")
    return EXIT_OK


def _ensemble(cfg: ConfigFile):
    if cfg.stochastic is None:
        raise ConfigError("this command needs a stochastic block in the config")
    s = cfg.stochastic
    params = cfg.random_params()
    if s.mode == "PCM":
        return ensemble.run_pcm(cfg.run, params, s.n_per_dim, s.workers)
    return ensemble.run_mc(cfg.run, params, s.mc_samples, s.seed, s.workers)


def _write_uq(cfg: ConfigFile, args, started: float, ens, out: Path, **extra) -> None:
    node_x = cfg.run.mesh.build().node_x
    files = write_ensemble(ens, node_x, out) if "csv" in cfg.output.formats else []
    fails = [f for f in ens.failure_steps() if f is not None]
    if "json" in cfg.output.formats:
        write_manifest(
            out,
            _manifest(
                cfg,
                args,
                started,
                status="completed",
                mode=ens.mode,
                n_realizations=ens.size,
                n_failed=len(fails),
                horizon_steps=ens.horizon,
                horizon_time=ens.horizon * ens.dt,
                final_pf=float(ens.stats["pf"][-1]),
                files=files,
                **extra,
            ),
        )


def cmd_uq(cfg: ConfigFile, args, started: float) -> int:
    ens = _ensemble(cfg)
    out = _out_dir(cfg)
    _write_uq(cfg, args, started, ens, out)
    print(
        f"{ens.mode}: {ens.size} realizations, common horizon {ens.horizon * ens.dt:.2f} yr, "
        f"final p_f {ens.stats['pf'][-1]:.4f}; output in {out}"
    )
    return EXIT_OK


def cmd_compare(cfg: ConfigFile, args, started: float) -> int:
    ref = Path(args.reference)
    if not ref.is_dir():
        raise FileNotFoundError(f"reference bundle {ref} is not a directory")
    ens = _ensemble(cfg)
    out = _out_dir(cfg)
    if out.resolve() == ref.resolve():
        raise ConfigError("--out must differ from --reference")
    _write_uq(cfg, args, started, ens, out, reference=str(ref.resolve()))
    rows = compare_bundles(out, ref, relative_error)
    write_csv(out / "compare.csv", [("year", "yr"), ("eps_E_theta", "-"), ("eps_std_theta", "-")], list(zip(*rows)))
    print(f"{'year':>8}  {'eps(E)':>12}  {'eps(std)':>12}")
    for year, e, s in rows:
        print(f"{year:8.3g}  {e:12.4e}  {s:12.4e}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "uq": cmd_uq, "compare": cmd_compare}


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    started = time.time()
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg, args, started)
    except SimulationError as exc:
        print(f"error: solver failed at {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, BundleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
