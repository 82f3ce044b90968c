"""Command-line entry point.

Exit codes: 0 success, 1 an asserted check failed, 2 configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import CliConfig, dump_config, load_config
from .errors import ConfigurationError, InvalidScheduleError
from .optimizer import run, tracking_windows
from .problems import FAMILIES, builtin_catalog
from .schedules import validate

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
CONVERGENCE_FRACTION = 0.9

COMMANDS = ("run", "bias", "moment", "converge", "sweep", "compare-baseline", "validate-schedule", "catalog")


def _default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zosub", description="Two time-scale zeroth-order subgradient experiments")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="INI configuration file")
    ap.add_argument("--out", type=Path, help="output directory")
    ap.add_argument("--seed", type=int, help="override the configured seed")
    ap.add_argument("--jobs", type=int, default=_default_jobs(), help="worker processes for multi-seed runs")
    ap.add_argument("--force", action="store_true", help="allow writing into a non-empty --out directory")
    return ap


class _Outputs:
    def __init__(self, out: Path | None, force: bool):
        self.out = out
        if out is not None:
            if out.exists() and not out.is_dir():
                raise ConfigurationError(f"--out {out} exists and is not a directory")
            if out.is_dir() and any(out.iterdir()) and not force:
                raise ConfigurationError(f"--out {out} is not empty; pass --force to overwrite")
            out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.out is not None:
            (self.out / name).write_text(text)


def _meta_text(meta: dict, prefix: str = "") -> str:
    lines = []
    for k, v in meta.items():
        if isinstance(v, dict):
            lines.append(_meta_text(v, f"{prefix}{k}."))
        else:
            lines.append(f"{prefix}{k} = {v}")
    return "\n".join(lines) + ("\n" if not prefix else "")


def _points(cfg: CliConfig, seed: int):
    entry = cfg.run.entry()
    if cfg.experiment.points is not None:
        pts = np.array(cfg.experiment.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != entry.problem.dim:
            raise ConfigurationError(f"points must have dimension {entry.problem.dim}")
        return pts
    return entry.constraint.sample(np.random.default_rng(seed), cfg.experiment.n_points)


def _seeds(cfg: CliConfig, override):
    seeds = list(cfg.experiment.seeds)
    if override is not None:
        seeds = [override + i for i in range(len(seeds))]
    return seeds


def _emit(lines) -> None:
    for line in lines:
        print(line)


def _dispatch(args, cfg: CliConfig, outs: _Outputs) -> int:
    rc = cfg.run if args.seed is None else dataclasses.replace(cfg.run, seed=args.seed)
    cfg = dataclasses.replace(cfg, run=rc)
    ex = cfg.experiment
    cmd = args.command

    if cmd == "catalog":
        print(f"families: {', '.join(FAMILIES)}")
        for e in builtin_catalog():
            p = e.problem
            print(f"{e.label:16s} L={p.lipschitz_L:<8.4g} X={e.constraint.kind:<8s} {e.description}")
        return EXIT_OK

    if cmd == "validate-schedule":
        report = validate(rc.schedule, ex.horizon or max(1000, rc.iterations))
        _emit(report.lines())
        print("schedule OK")
        return EXIT_OK if report.monotone_ok else EXIT_FAIL

    outs.write("config.ini", dump_config(cfg))

    if cmd == "run":
        trace = run(rc)
        outs.write("trace.csv", trace.to_csv())
        outs.write("trace.meta", _meta_text(trace.metadata))
        head, tail = (float("nan"),) * 2
        if np.any(~np.isnan(trace.track_err)):
            head, tail = tracking_windows(trace)
        print(f"{trace.metadata['problem']} seed={rc.seed} N={rc.iterations} final gap={trace.gap[-1]:.6g} "
              f"tracking head/tail={head:.4g}/{tail:.4g}")
        return EXIT_OK

    if cmd == "bias":
        problem = rc.entry().problem
        lambdas = tuple(sorted(ex.lambdas, reverse=True))
        rep = analysis.bias_experiment(problem, _points(cfg, ex.point_seed), lambdas, ex.reps, rc.seed)
        outs.write("bias.csv", rep.to_csv())
        _emit(rep.summary())
        return EXIT_OK if rep.passed else EXIT_FAIL

    if cmd == "moment":
        problem = rc.entry().problem
        rep = analysis.moment_experiment(problem, _points(cfg, ex.point_seed), ex.lambdas, ex.reps, rc.sigma, rc.seed)
        outs.write("moment.csv", rep.to_csv())
        _emit(rep.summary())
        return EXIT_OK if rep.passed else EXIT_FAIL

    seeds = _seeds(cfg, args.seed)
    if cmd == "converge":
        rep = analysis.convergence_experiment(rc, seeds, ex.eps_gap, args.jobs)
        outs.write("converge.csv", rep.to_csv())
        _emit(rep.summary(CONVERGENCE_FRACTION))
        return EXIT_OK if rep.pass_fraction >= CONVERGENCE_FRACTION else EXIT_FAIL

    if cmd == "sweep":
        rep = analysis.lambda_sweep(rc, ex.lambdas, seeds, ex.eps_gap, args.jobs)
        outs.write("sweep.csv", rep.to_csv())
        for lam, r in zip(rep.lambdas, rep.reports):
            outs.write(f"converge_lambda_{lam:g}.csv", r.to_csv())
        _emit(rep.summary())
        return EXIT_FAIL if rep.trend_ok is False else EXIT_OK

    # compare-baseline reports paired statistics without asserting on them
    rep = analysis.baseline_comparison(rc, seeds, ex.eps_gap, args.jobs)
    outs.write("baseline.csv", rep.to_csv())
    _emit(rep.summary())
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config is not None else CliConfig()
        outs = _Outputs(args.out, args.force) if args.command not in ("catalog", "validate-schedule") else _Outputs(None, True)
        return _dispatch(args, cfg, outs)
    except InvalidScheduleError as exc:
        print(f"error: invalid schedule {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
