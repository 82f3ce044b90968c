"""INI experiment configuration.

Grammar (standard :mod:`configparser` syntax, ``#`` comments)::

    [problem]     name, dim, sigma
    [constraint]  kind = default | box | ball | simplex
                  lower, upper        (box; vectors)
                  center, radius      (ball)
                  scale               (simplex; dimension from the problem)
    [schedule]    a, p, b, q, offset
    [smoothing]   lam, mc_samples, reference_seed
    [run]         iterations, seed, stride, probe_stride, baseline,
                  x0, y0, use_updated_y, gap_tol
    [experiment]  seeds, eps_gap, lambdas, reps, points, n_points,
                  point_seed, horizon

Vectors are whitespace separated; point lists separate points with ``;``.
``seeds`` accepts integers and half-open ranges ``start:stop``.  Empty
values mean "use the default".  Unknown sections or keys are errors.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ConfigurationError
from .geometry import ConstraintSet
from .optimizer import RunConfig
from .schedules import StepSchedule


@dataclass(frozen=True)
class ExperimentConfig:
    seeds: tuple = tuple(range(20))
    eps_gap: float = 0.1
    lambdas: tuple = (0.4, 0.1, 0.05)
    reps: int = 10_000
    points: Optional[tuple] = None
    n_points: int = 10
    point_seed: int = 0
    horizon: Optional[int] = None


@dataclass(frozen=True)
class CliConfig:
    run: RunConfig = RunConfig()
    experiment: ExperimentConfig = ExperimentConfig()


# ---------------------------------------------------------------------------
# value codecs


def _vec(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split())
    except ValueError as exc:
        raise ConfigurationError(f"bad vector {text!r}") from exc


def _vec_str(v) -> str:
    return " ".join(repr(float(c)) for c in v)


def _points(text: str) -> tuple:
    return tuple(_vec(p) for p in text.split(";") if p.strip())


def _seeds(text: str) -> tuple:
    out = []
    for tok in text.replace(",", " ").split():
        if ":" in tok:
            lo, hi = tok.split(":", 1)
            out.extend(range(int(lo), int(hi)))
        else:
            out.append(int(tok))
    return tuple(out)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"bad boolean {text!r}")


_INT, _FLOAT = int, float

# section -> key -> (target, field, decoder, encoder)
_FIELDS = {
    "problem": {"name": ("run", "problem", str, str), "dim": ("run", "dim", _INT, str), "sigma": ("run", "sigma", _FLOAT, repr)},
    "schedule": {k: ("schedule", k, _INT if k == "offset" else _FLOAT, repr) for k in ("a", "p", "b", "q", "offset")},
    "smoothing": {
        "lam": ("run", "lam", _FLOAT, repr),
        "mc_samples": ("run", "mc_samples", _INT, str),
        "reference_seed": ("run", "reference_seed", _INT, str),
    },
    "run": {
        "iterations": ("run", "iterations", _INT, str),
        "seed": ("run", "seed", _INT, str),
        "stride": ("run", "stride", _INT, str),
        "probe_stride": ("run", "probe_stride", _INT, str),
        "baseline": ("run", "baseline", _bool, str),
        "x0": ("run", "x0", _vec, _vec_str),
        "y0": ("run", "y0", _vec, _vec_str),
        "use_updated_y": ("run", "use_updated_y", _bool, str),
        "gap_tol": ("run", "gap_tol", _FLOAT, repr),
    },
    "experiment": {
        "seeds": ("experiment", "seeds", _seeds, lambda s: " ".join(map(str, s))),
        "eps_gap": ("experiment", "eps_gap", _FLOAT, repr),
        "lambdas": ("experiment", "lambdas", _vec, _vec_str),
        "reps": ("experiment", "reps", _INT, str),
        "points": ("experiment", "points", _points, lambda ps: "; ".join(_vec_str(p) for p in ps)),
        "n_points": ("experiment", "n_points", _INT, str),
        "point_seed": ("experiment", "point_seed", _INT, str),
        "horizon": ("experiment", "horizon", _INT, str),
    },
}
_CONSTRAINT_KEYS = {"kind", "lower", "upper", "center", "radius", "scale"}


def _constraint(sec, problem_dim: int) -> Optional[ConstraintSet]:
    kind = sec.get("kind", "default").strip().lower() or "default"
    allowed = {"default": set(), "box": {"lower", "upper"}, "ball": {"center", "radius"}, "simplex": {"scale"}}
    if kind not in allowed:
        raise ConfigurationError(f"unknown constraint kind {kind!r}")
    extra = {k for k in sec if k != "kind" and sec[k].strip()} - allowed[kind]
    if extra:
        raise ConfigurationError(f"keys {sorted(extra)} do not apply to constraint kind {kind!r}")
    try:
        if kind == "default":
            return None
        if kind == "box":
            lo, hi = _vec(sec["lower"]), _vec(sec["upper"])
            if len(lo) == 1:
                lo = lo * problem_dim
            if len(hi) == 1:
                hi = hi * problem_dim
            return ConstraintSet.box(lo, hi)
        if kind == "ball":
            c = _vec(sec.get("center", "0"))
            if len(c) == 1:
                c = c * problem_dim
            return ConstraintSet.ball(c, float(sec["radius"]))
        return ConstraintSet.simplex(problem_dim, float(sec.get("scale", "1")))
    except KeyError as exc:
        raise ConfigurationError(f"constraint kind {kind!r} needs key {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def parse_config(text: str) -> CliConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    values = {"run": {}, "schedule": {}, "experiment": {}}
    for section in parser.sections():
        if section == "constraint":
            unknown = set(parser[section]) - _CONSTRAINT_KEYS
        elif section in _FIELDS:
            unknown = set(parser[section]) - set(_FIELDS[section])
        else:
            raise ConfigurationError(f"unknown section [{section}]")
        if unknown:
            raise ConfigurationError(f"unknown key(s) {sorted(unknown)} in [{section}]")
        if section == "constraint":
            continue
        for key, raw in parser[section].items():
            if not raw.strip():
                continue
            target, fld, dec, _ = _FIELDS[section][key]
            try:
                values[target][fld] = dec(raw.strip())
            except ValueError as exc:
                raise ConfigurationError(f"[{section}] {key}: {exc}") from exc
    run = RunConfig(**values["run"], schedule=StepSchedule(**values["schedule"]))
    if parser.has_section("constraint"):
        dim = run.entry().problem.dim
        run = dataclasses.replace(run, constraint=_constraint(parser["constraint"], dim))
    return CliConfig(run, ExperimentConfig(**values["experiment"]))


def load_config(path) -> CliConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    return parse_config(path.read_text())


def dump_config(cfg: CliConfig) -> str:
    """Canonical INI text; ``parse_config(dump_config(c)) == c``."""
    sources = {"run": cfg.run, "schedule": cfg.run.schedule, "experiment": cfg.experiment}
    lines = []
    for section, keys in _FIELDS.items():
        lines.append(f"[{section}]")
        for key, (target, fld, _, enc) in keys.items():
            val = getattr(sources[target], fld)
            lines.append(f"{key} = {'' if val is None else enc(val)}")
        lines.append("")
        if section == "problem":
            lines.append("[constraint]")
            c = cfg.run.constraint
            if c is None:
                lines.append("kind = default")
            elif c.kind == "box":
                lines += ["kind = box", f"lower = {_vec_str(c.lower)}", f"upper = {_vec_str(c.upper)}"]
            elif c.kind == "ball":
                lines += ["kind = ball", f"center = {_vec_str(c.center)}", f"radius = {c.radius!r}"]
            else:
                lines += ["kind = simplex", f"scale = {c.scale!r}"]
            lines.append("")
    return "\n".join(lines)
