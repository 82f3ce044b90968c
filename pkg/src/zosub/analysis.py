"""Experiment drivers that turn the estimator and convergence claims into reports.

Statistical slack is declared once here: bound checks allow
:data:`BOUND_SE` standard errors (one-sided); monotonicity checks allow
:data:`MONOTONE_SE` combined standard errors between neighbouring cells.
Tail statistics use the last :data:`TAIL_FRACTION` of iterations.
"""
from __future__ import annotations

import dataclasses
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .optimizer import IterateTrace, RunConfig, run_many
from .problems import ObjectiveProblem
from .smoothing import SmoothingParams, decompose_estimate, estimate_batch, reference_smoothed_gradient

BOUND_SE = 3.0
MONOTONE_SE = 2.0
TAIL_FRACTION = 0.1


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(format(v, ".17g") if isinstance(v, float) else str(v) for v in row) + "\n")
    return buf.getvalue()


def _point_str(p, fmt: str = ".17g") -> str:
    return " ".join(format(float(v), fmt) for v in np.atleast_1d(p))


def cell_seed(seed: int, *index: int) -> np.random.SeedSequence:
    """Stream for one experiment cell; the cell index is appended to the master seed."""
    return np.random.SeedSequence([int(seed), *map(int, index)])


def moment_bound(L: float, K: float, d: int, lam: float) -> float:
    """``2 L^2 (d^2 + d) + K d / lam^2`` with ``K`` the noise variance bound.

    The noise term is the squared noise scale times ``d / lam^2``; the
    variance bound ``K`` is that squared scale.
    """
    return 2.0 * L**2 * (d**2 + d) + K * d / lam**2


def nonincreasing_within(values, stderrs, n_se: float = MONOTONE_SE) -> bool:
    values, stderrs = np.asarray(values, dtype=float), np.asarray(stderrs, dtype=float)
    slack = n_se * np.sqrt(stderrs[1:] ** 2 + stderrs[:-1] ** 2)
    return bool(np.all(values[1:] <= values[:-1] + slack))


# ---------------------------------------------------------------------------
# bias


@dataclass
class BiasReport:
    problem: str
    points: np.ndarray
    lambdas: np.ndarray
    bias: np.ndarray  # (P, L)
    stderr: np.ndarray  # (P, L)
    reference: np.ndarray  # (P, L, d)
    monotone: np.ndarray  # (P,)

    @property
    def r_bar(self) -> np.ndarray:
        return self.bias.max(axis=0)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.monotone))

    def to_csv(self) -> str:
        rows = []
        for i, p in enumerate(self.points):
            for j, lam in enumerate(self.lambdas):
                rows.append(
                    [i, _point_str(p), float(lam), float(self.bias[i, j]), float(self.stderr[i, j]),
                     _point_str(self.reference[i, j]), int(self.monotone[i])]
                )
        return _csv(["point_index", "point", "lambda", "bias", "stderr", "reference_grad", "monotone"], rows)

    def summary(self) -> list[str]:
        lines = [f"bias experiment on {self.problem}"]
        for j, lam in enumerate(self.lambdas):
            lines.append(f"  lambda={lam:g}  r_bar={self.r_bar[j]:.6g}")
        for i, p in enumerate(self.points):
            lines.append(f"  {'PASS' if self.monotone[i] else 'FAIL'} monotone bias decay at x=({_point_str(p, '.4g')})")
        return lines


def bias_experiment(problem: ObjectiveProblem, points, lambdas, reps: int, seed: int) -> BiasReport:
    """Noise-free bias ``dist(E g~, hull)`` per point and lambda.

    All lambdas at one point share the same directions, so differences across
    the grid are not sampling noise.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(np.diff(lambdas) >= 0):
        raise ValueError("lambdas must be strictly descending")
    if reps < 10_000:
        raise ValueError("reps must be at least 10^4")
    clean = problem.with_noise(dataclasses.replace(problem.noise, kind="none", sigma=0.0, variance_bound_K=0.0))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    P, L, d = len(points), len(lambdas), problem.dim
    bias = np.empty((P, L))
    se = np.empty((P, L))
    ref = np.empty((P, L, d))
    for i, x in enumerate(points):
        for j, lam in enumerate(lambdas):
            rng = np.random.default_rng(cell_seed(seed, i))
            dec = decompose_estimate(clean, x, SmoothingParams(lam), reps, rng)
            bias[i, j], se[i, j] = dec.bias_norm, dec.stderr
            ref[i, j] = reference_smoothed_gradient(clean, x, SmoothingParams(lam, mc_samples=reps, seed=seed)).grad
    monotone = np.array([nonincreasing_within(bias[i], se[i]) for i in range(P)])
    return BiasReport(problem.name, points, lambdas, bias, se, ref, monotone)


# ---------------------------------------------------------------------------
# second moment


@dataclass
class MomentReport:
    problem: str
    points: np.ndarray
    lambdas: np.ndarray
    sigma: float
    K: float
    L: float
    second_moment: np.ndarray  # (P, L)
    stderr: np.ndarray
    bound: np.ndarray  # (L,)

    @property
    def cell_passed(self) -> np.ndarray:
        return self.second_moment <= self.bound[None, :] + BOUND_SE * self.stderr

    @property
    def passed(self) -> bool:
        return bool(np.all(self.cell_passed))

    def to_csv(self) -> str:
        rows = []
        for i, p in enumerate(self.points):
            for j, lam in enumerate(self.lambdas):
                rows.append(
                    [i, _point_str(p), float(lam), float(self.second_moment[i, j]), float(self.stderr[i, j]),
                     float(self.bound[j]), int(self.cell_passed[i, j])]
                )
        return _csv(["point_index", "point", "lambda", "second_moment", "stderr", "bound", "pass"], rows)

    def summary(self) -> list[str]:
        lines = [f"second-moment experiment on {self.problem} (sigma={self.sigma:g}, L={self.L:.6g})"]
        for j, lam in enumerate(self.lambdas):
            ok = bool(np.all(self.cell_passed[:, j]))
            worst = float(np.max(self.second_moment[:, j]))
            lines.append(f"  {'PASS' if ok else 'FAIL'} lambda={lam:g}: max E|g|^2={worst:.6g} <= bound {self.bound[j]:.6g}")
        return lines


def moment_experiment(problem: ObjectiveProblem, points, lambdas, reps: int, sigma: float, seed: int) -> MomentReport:
    noisy = problem.with_noise(type(problem.noise).gaussian(sigma))
    K = noisy.noise.variance_bound_K
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lambdas = np.asarray(lambdas, dtype=float)
    P, Lg = len(points), len(lambdas)
    m2 = np.empty((P, Lg))
    se = np.empty((P, Lg))
    for i, x in enumerate(points):
        for j, lam in enumerate(lambdas):
            rng = np.random.default_rng(cell_seed(seed, i, j))
            sq = np.sum(estimate_batch(noisy, x, lam, reps, rng) ** 2, axis=1)
            m2[i, j] = sq.mean()
            se[i, j] = sq.std(ddof=1) / np.sqrt(reps)
    bound = np.array([moment_bound(problem.lipschitz_L, K, problem.dim, lam) for lam in lambdas])
    return MomentReport(problem.name, points, lambdas, float(sigma), K, problem.lipschitz_L, m2, se, bound)


# ---------------------------------------------------------------------------
# convergence


@dataclass
class SeedRow:
    seed: int
    final_gap: float
    tail_min_gap: float
    tail_median_gap: float
    tail_min_dist: Optional[float]
    tail_max_dist: Optional[float]
    tail_std: float


def _seed_row(trace: IterateTrace, problem: ObjectiveProblem) -> SeedRow:
    tail = trace.tail_mask(TAIL_FRACTION)
    xs = trace.x[tail]
    dmin = dmax = None
    S = problem.known_stationary_set
    if S is not None:
        dist = np.array([S.distance(x) for x in xs])
        dmin, dmax = float(dist.min()), float(dist.max())
    spread = float(np.sqrt(np.mean(np.sum((xs - xs.mean(axis=0)) ** 2, axis=1))))
    return SeedRow(
        seed=int(trace.metadata["seed"]),
        final_gap=float(trace.gap[-1]),
        tail_min_gap=float(trace.gap[tail].min()),
        tail_median_gap=float(np.median(trace.gap[tail])),
        tail_min_dist=dmin,
        tail_max_dist=dmax,
        tail_std=spread,
    )


def _opt(v) -> str:
    return "" if v is None else format(v, ".17g")


@dataclass
class ConvergenceReport:
    problem: str
    lam: float
    iterations: int
    eps_gap: float
    rows: list[SeedRow] = field(default_factory=list)

    @property
    def pass_fraction(self) -> float:
        return float(np.mean([r.tail_min_gap <= self.eps_gap for r in self.rows]))

    def distance_fraction(self, eps_dist: float) -> Optional[float]:
        if not self.rows or self.rows[0].tail_max_dist is None:
            return None
        return float(np.mean([r.tail_max_dist <= eps_dist for r in self.rows]))

    @property
    def median_tail_gap(self) -> float:
        return float(np.median([r.tail_median_gap for r in self.rows]))

    def to_csv(self) -> str:
        header = ["seed", "lambda", "final_gap", "tail_min_gap", "tail_median_gap", "tail_min_dist", "tail_max_dist", "tail_std"]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for r in self.rows:
            vals = [str(r.seed), format(self.lam, ".17g"), format(r.final_gap, ".17g"), format(r.tail_min_gap, ".17g"),
                    format(r.tail_median_gap, ".17g"), _opt(r.tail_min_dist), _opt(r.tail_max_dist), format(r.tail_std, ".17g")]
            buf.write(",".join(vals) + "\n")
        return buf.getvalue()

    def summary(self, required_fraction: float = 0.9) -> list[str]:
        frac = self.pass_fraction
        ok = frac >= required_fraction
        return [
            f"{'PASS' if ok else 'FAIL'} {self.problem} lambda={self.lam:g} N={self.iterations}: "
            f"tail-min gap <= {self.eps_gap:g} in {frac:.0%} of {len(self.rows)} seeds"
        ]


def convergence_from_traces(config: RunConfig, traces: Sequence[IterateTrace], eps_gap: float) -> ConvergenceReport:
    problem = config.entry().problem
    rows = [_seed_row(tr, problem) for tr in traces]
    return ConvergenceReport(problem.name, config.lam, config.iterations, eps_gap, rows)


def _check_seeds(seeds):
    seeds = [int(s) for s in seeds]
    if len(seeds) < 10:
        raise ValueError("at least 10 seeds are required")
    return seeds


def convergence_experiment(config: RunConfig, seeds: Sequence[int], eps_gap: float = 0.1, jobs: int = 1) -> ConvergenceReport:
    seeds = _check_seeds(seeds)
    return convergence_from_traces(config, run_many(config, seeds, jobs), eps_gap)


@dataclass
class SweepReport:
    lambdas: list[float]
    reports: list[ConvergenceReport]
    slack: float = 0.02

    @property
    def medians(self) -> list[float]:
        return [r.median_tail_gap for r in self.reports]

    @property
    def trend_ok(self) -> Optional[bool]:
        """Median tail gap non-increasing (within ``slack``) as lambda decreases."""
        if len(self.lambdas) < 2:
            return None
        order = np.argsort(self.lambdas)[::-1]
        med = np.asarray(self.medians)[order]
        return bool(np.all(med[1:] <= med[:-1] + self.slack))

    def to_csv(self) -> str:
        rows = [[float(lam), r.median_tail_gap, r.pass_fraction, len(r.rows)] for lam, r in zip(self.lambdas, self.reports)]
        return _csv(["lambda", "median_tail_gap", "pass_fraction", "seeds"], rows)

    def summary(self) -> list[str]:
        lines = [f"  lambda={lam:g}: median tail gap {m:.6g}" for lam, m in zip(self.lambdas, self.medians)]
        t = self.trend_ok
        if t is not None:
            lines.append(f"{'PASS' if t else 'FAIL'} median tail gap non-increasing as lambda decreases (slack {self.slack:g})")
        return lines


def lambda_sweep(config: RunConfig, lambdas, seeds, eps_gap: float = 0.1, jobs: int = 1) -> SweepReport:
    seeds = _check_seeds(seeds)
    lambdas = [float(lam) for lam in lambdas]
    reports = [
        convergence_experiment(dataclasses.replace(config, lam=lam), seeds, eps_gap, jobs) for lam in lambdas
    ]
    return SweepReport(lambdas, reports)


@dataclass
class BaselineReport:
    two_timescale: ConvergenceReport
    baseline: ConvergenceReport

    @property
    def std_win_fraction(self) -> float:
        """Fraction of seeds whose two-timescale tail spread is <= the baseline's."""
        wins = [a.tail_std <= b.tail_std for a, b in zip(self.two_timescale.rows, self.baseline.rows)]
        return float(np.mean(wins))

    def to_csv(self) -> str:
        rows = []
        for a, b in zip(self.two_timescale.rows, self.baseline.rows):
            rows.append([a.seed, a.tail_median_gap, b.tail_median_gap, a.tail_std, b.tail_std,
                         a.tail_median_gap - b.tail_median_gap, a.tail_std - b.tail_std])
        header = ["seed", "ts_tail_gap", "baseline_tail_gap", "ts_tail_std", "baseline_tail_std", "gap_delta", "std_delta"]
        return _csv(header, rows)

    def summary(self) -> list[str]:
        return [
            f"two-timescale tail spread <= baseline in {self.std_win_fraction:.0%} of {len(self.baseline.rows)} seeds",
            f"median tail gap: two-timescale {self.two_timescale.median_tail_gap:.6g}, baseline {self.baseline.median_tail_gap:.6g}",
        ]


def baseline_comparison(config: RunConfig, seeds, eps_gap: float = 0.1, jobs: int = 1) -> BaselineReport:
    """Paired runs of both methods on identical seeds (hence identical draws)."""
    seeds = [int(s) for s in seeds]
    ts_cfg = dataclasses.replace(config, baseline=False)
    bl_cfg = dataclasses.replace(config, baseline=True)
    ts = convergence_from_traces(ts_cfg, run_many(ts_cfg, seeds, jobs), eps_gap)
    bl = convergence_from_traces(bl_cfg, run_many(bl_cfg, seeds, jobs), eps_gap)
    return BaselineReport(ts, bl)
