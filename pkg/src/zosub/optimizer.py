"""Two time-scale zeroth-order projected stochastic subgradient iteration.

One step at ``(x_n, y_n)``::

    g~    = two-point Gaussian estimate at x_n
    y_n+1 = y_n + beta(n) (g~ - y_n)
    x_n+1 = P_X(x_n - alpha(n) y_n)          # pre-update tracker

The single time-scale baseline replaces ``y_n`` by a fresh ``g~`` in the
x-update and never touches ``y``.

Random streams: each run seed spawns two child streams with
``np.random.SeedSequence(seed).spawn(2)``; child 0 produces the directions
``U_n`` and child 1 the noise pairs ``(zeta1_n, zeta2_n)``.  Both methods
therefore see identical draws for identical seeds, and draws do not depend
on how runs are batched.
"""
from __future__ import annotations

import dataclasses
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InvalidScheduleError, TraceRangeError
from .geometry import ConstraintSet, stationarity_gap
from .problems import ObjectiveProblem, ProblemCatalogEntry, make_problem
from .schedules import StepSchedule, validate
from .smoothing import SmoothingParams, reference_smoothed_gradient, two_point_from_draws

X0_FILL = 0.8
DRAW_BLOCK = 4096


@dataclass(frozen=True)
class RunConfig:
    problem: str = "ABS"
    dim: Optional[int] = None
    sigma: float = 0.1
    constraint: Optional[ConstraintSet] = None
    schedule: StepSchedule = StepSchedule()
    lam: float = 0.05
    iterations: int = 200_000
    seed: int = 0
    stride: int = 100
    probe_stride: int = 1000
    baseline: bool = False
    x0: Optional[tuple] = None
    y0: Optional[tuple] = None
    use_updated_y: bool = False
    gap_tol: float = 5e-2
    mc_samples: int = 2000
    reference_seed: int = 0

    def entry(self) -> ProblemCatalogEntry:
        try:
            entry = make_problem(self.problem, self.dim, self.sigma)
        except (KeyError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from exc
        if self.constraint is not None:
            if self.constraint.dim != entry.problem.dim:
                raise ConfigurationError(
                    f"constraint dimension {self.constraint.dim} != problem dimension {entry.problem.dim}"
                )
            entry = dataclasses.replace(entry, constraint=self.constraint)
        return entry

    def validate(self) -> None:
        """Raise :class:`ConfigurationError` (or :class:`InvalidScheduleError`) before any step."""
        report = validate(self.schedule, max(1000, self.iterations))
        if not report.monotone_ok:
            raise InvalidScheduleError("monotone", "step sizes must strictly decrease")
        if not self.lam > 0:
            raise ConfigurationError("lambda must be positive")
        if self.iterations < 0:
            raise ConfigurationError("iterations must be nonnegative")
        if self.stride < 1 or self.probe_stride < 1:
            raise ConfigurationError("stride and probe_stride must be positive")
        if self.probe_stride % self.stride:
            raise ConfigurationError("probe_stride must be a multiple of stride")
        if self.sigma < 0:
            raise ConfigurationError("sigma must be nonnegative")
        if self.gap_tol < 0:
            raise ConfigurationError("gap_tol must be nonnegative")
        entry = self.entry()
        d = entry.problem.dim
        for name in ("x0", "y0"):
            val = getattr(self, name)
            if val is not None and len(val) != d:
                raise ConfigurationError(f"{name} must have length {d}")

    def initial_point(self, entry: ProblemCatalogEntry) -> np.ndarray:
        d = entry.problem.dim
        raw = np.full(d, X0_FILL) if self.x0 is None else np.asarray(self.x0, dtype=float)
        return entry.constraint.project(raw)

    def initial_tracker(self, entry: ProblemCatalogEntry) -> np.ndarray:
        d = entry.problem.dim
        return np.zeros(d) if self.y0 is None else np.asarray(self.y0, dtype=float)

    def snapshot(self) -> dict:
        out = dataclasses.asdict(self)
        out["constraint"] = self.entry().constraint.describe()
        out["schedule"] = dataclasses.asdict(self.schedule)
        return out


class EstimatorStreams:
    """Direction and noise streams of one run."""

    def __init__(self, seed: int, dim: int, noise_sigma: float):
        dir_seq, noise_seq = np.random.SeedSequence(seed).spawn(2)
        self.direction = np.random.default_rng(dir_seq)
        self.noise = np.random.default_rng(noise_seq)
        self.dim = dim
        self.noise_sigma = noise_sigma

    def take(self, count: int):
        u = self.direction.standard_normal((count, self.dim))
        if self.noise_sigma > 0:
            return u, self.noise_sigma * self.noise.standard_normal((count, 2))
        return u, None


@dataclass
class TwoTimescaleState:
    n: int
    x: np.ndarray
    y: np.ndarray
    streams: EstimatorStreams
    last_estimate: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, config: RunConfig, seed: Optional[int] = None) -> "TwoTimescaleState":
        entry = config.entry()
        streams = EstimatorStreams(config.seed if seed is None else seed, entry.problem.dim, entry.problem.noise.sigma)
        return cls(0, config.initial_point(entry), config.initial_tracker(entry), streams)


def _ts_update(x, y, g, alpha, beta, cset, use_updated_y=False):
    y_next = y + beta * (g - y)
    x_next = cset.project(x - alpha * (y_next if use_updated_y else y))
    return x_next, y_next


def _estimate(problem, state, lam):
    u, noise = state.streams.take(1)
    return two_point_from_draws(problem, state.x, lam, u[0], None if noise is None else noise[0])


def ts_step(
    state: TwoTimescaleState,
    problem: ObjectiveProblem,
    cset: ConstraintSet,
    sched: StepSchedule,
    lam: float,
    use_updated_y: bool = False,
) -> TwoTimescaleState:
    """Advance the coupled iteration by one step (the streams are shared, not copied)."""
    g = _estimate(problem, state, lam)
    x, y = _ts_update(state.x, state.y, g, sched.alpha(state.n), sched.beta(state.n), cset, use_updated_y)
    return TwoTimescaleState(state.n + 1, x, y, state.streams, g)


def baseline_step(
    state: TwoTimescaleState, problem: ObjectiveProblem, cset: ConstraintSet, sched: StepSchedule, lam: float
) -> TwoTimescaleState:
    g = _estimate(problem, state, lam)
    x = cset.project(state.x - sched.alpha(state.n) * g)
    return TwoTimescaleState(state.n + 1, x, state.y, state.streams, g)


# ---------------------------------------------------------------------------
# traces


def _fmt(v) -> str:
    return "" if np.isnan(v) else format(float(v), ".17g")


@dataclass
class IterateTrace:
    """Records every ``stride`` iterations, starting at ``n = 0``.

    ``noise_cumsum[r]`` is ``sum_{m < n_r} alpha(m) (g~_m - y_m)`` and feeds
    :func:`noise_summability_diagnostic`.  ``track_err`` is NaN at records
    that are not probes.
    """

    n: np.ndarray
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    gap: np.ndarray
    track_err: np.ndarray
    f: np.ndarray
    noise_cumsum: np.ndarray
    stride: int
    iterations: int
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def tail_mask(self, fraction: float = 0.1) -> np.ndarray:
        return self.n >= (1.0 - fraction) * self.iterations

    def head_mask(self, fraction: float = 0.1) -> np.ndarray:
        return self.n <= fraction * self.iterations

    def to_csv(self) -> str:
        d = self.dim
        header = ["n", "t"] + [f"x_{i}" for i in range(d)] + [f"y_{i}" for i in range(d)] + ["gap", "track_err", "f"]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for r in range(len(self.n)):
            row = [str(int(self.n[r])), _fmt(self.t[r])]
            row += [_fmt(v) for v in self.x[r]] + [_fmt(v) for v in self.y[r]]
            row += [_fmt(self.gap[r]), _fmt(self.track_err[r]), _fmt(self.f[r])]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def _cumulative_time(sched: StepSchedule, n_max: int) -> np.ndarray:
    """``t(n) = sum_{m<n} alpha(m)`` for ``n = 0..n_max``."""
    return np.concatenate([[0.0], np.cumsum(sched.alpha(np.arange(n_max)))])


def _simulate(config: RunConfig, seeds: Sequence[int]) -> list[IterateTrace]:
    """Run ``len(seeds)`` independent copies of one config, vectorised over seeds."""
    config.validate()
    entry = config.entry()
    prob, cset = entry.problem, entry.constraint
    sched, lam, N = config.schedule, config.lam, config.iterations
    S, d = len(seeds), prob.dim
    streams = [EstimatorStreams(s, d, prob.noise.sigma) for s in seeds]
    x = np.tile(config.initial_point(entry), (S, 1))
    y = np.tile(config.initial_tracker(entry), (S, 1))
    noise_cum = np.zeros((S, d))
    alphas = sched.alpha(np.arange(N))
    betas = sched.beta(np.arange(N))
    times = _cumulative_time(sched, N)
    ref_params = SmoothingParams(lam, config.mc_samples, config.reference_seed)

    n_rec = N // config.stride + 1
    rec = {
        "x": np.empty((n_rec, S, d)),
        "y": np.empty((n_rec, S, d)),
        "gap": np.empty((n_rec, S)),
        "track": np.full((n_rec, S), np.nan),
        "f": np.empty((n_rec, S)),
        "noise": np.empty((n_rec, S, d)),
    }

    def record(r, n):
        rec["x"][r], rec["y"][r], rec["noise"][r] = x, y, noise_cum
        rec["f"][r] = prob.eval_clean(x)
        for s in range(S):
            rec["gap"][r, s] = stationarity_gap(cset, prob, x[s], config.gap_tol).gap
        if n % config.probe_stride == 0 and not config.baseline:
            ref = reference_smoothed_gradient(prob, x, ref_params).grad
            rec["track"][r] = np.linalg.norm(y - ref, axis=1)

    record(0, 0)
    r = 1
    U = Z = None
    for n in range(N):
        j = n % DRAW_BLOCK
        if j == 0:
            count = min(DRAW_BLOCK, N - n)
            draws = [st.take(count) for st in streams]
            U = np.stack([u for u, _ in draws])
            Z = None if draws[0][1] is None else np.stack([z for _, z in draws])
        g = two_point_from_draws(prob, x, lam, U[:, j], None if Z is None else Z[:, j])
        noise_cum = noise_cum + alphas[n] * (g - y)
        if config.baseline:
            x = cset.project(x - alphas[n] * g)
        else:
            x, y = _ts_update(x, y, g, alphas[n], betas[n], cset, config.use_updated_y)
        if (n + 1) % config.stride == 0:
            record(r, n + 1)
            r += 1

    n_idx = np.arange(n_rec) * config.stride
    traces = []
    for s, seed in enumerate(seeds):
        meta = {
            "problem": prob.name,
            "dim": d,
            "constraint": cset.kind,
            "seed": int(seed),
            "method": "baseline" if config.baseline else "two-timescale",
            "config": config.snapshot(),
        }
        traces.append(
            IterateTrace(
                n=n_idx,
                t=times[n_idx],
                x=rec["x"][:, s].copy(),
                y=rec["y"][:, s].copy(),
                gap=rec["gap"][:, s].copy(),
                track_err=rec["track"][:, s].copy(),
                f=rec["f"][:, s].copy(),
                noise_cumsum=rec["noise"][:, s].copy(),
                stride=config.stride,
                iterations=N,
                metadata=meta,
            )
        )
    return traces


def run(config: RunConfig) -> IterateTrace:
    return _simulate(config, [config.seed])[0]


def _simulate_chunk(args):
    config, seeds = args
    return _simulate(config, seeds)


def run_many(config: RunConfig, seeds: Sequence[int], jobs: int = 1) -> list[IterateTrace]:
    """Traces for each seed, in the order of ``seeds``, regardless of ``jobs``."""
    seeds = [int(s) for s in seeds]
    config.validate()
    if not seeds:
        return []
    jobs = max(1, min(int(jobs), len(seeds)))
    if jobs == 1:
        return _simulate(config, seeds)
    chunks = [list(c) for c in np.array_split(seeds, jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_simulate_chunk, [(config, c) for c in chunks]))
    return [tr for part in parts for tr in part]


# ---------------------------------------------------------------------------
# diagnostics on traces


def interpolate(trace: IterateTrace, t: float) -> tuple[np.ndarray, bool]:
    """Piecewise-linear interpolation of ``x`` in algorithmic time ``t``.

    Returns ``(x_bar(t), exact)``; ``exact`` is False when the trace was not
    recorded at every iteration, in which case the interpolation runs between
    recorded iterates only.
    """
    if t < 0 or t > trace.t[-1]:
        raise TraceRangeError(f"t={t} outside [0, {trace.t[-1]}]")
    exact = trace.stride == 1
    r = int(np.searchsorted(trace.t, t, side="right")) - 1
    if r >= len(trace.t) - 1:
        return trace.x[-1].copy(), exact
    t0, t1 = trace.t[r], trace.t[r + 1]
    w = (t - t0) / (t1 - t0)
    return trace.x[r] + (trace.x[r + 1] - trace.x[r]) * w, exact


def noise_summability_diagnostic(
    trace: IterateTrace, sched: StepSchedule, T: float = 1.0, fractions=(0.1, 0.5, 0.9)
) -> tuple[float, ...]:
    """Windowed weighted noise sums ``max_k || sum_{m=n}^{k} alpha(m) M_{m+1} ||``.

    For each starting fraction of the horizon, ``k`` runs over
    ``[n, tau(n, T)]`` where ``tau(n, T)`` is the first ``m >= n`` with
    ``sum_{k=n}^{m+1} alpha(k) >= T``; the window is cut at the end of the
    trace.  The increment ``M`` is the estimator residual ``g~ - y``.  Only
    recorded iterations are visited, so the result is exact for stride 1.
    """
    N = trace.iterations
    out = []
    for frac in fractions:
        if T <= 0 or N == 0:
            out.append(0.0)
            continue
        start = int(np.searchsorted(trace.n, frac * N, side="right")) - 1
        n0 = int(trace.n[start])
        m = np.arange(n0, N + 1)
        partial = np.cumsum(sched.alpha(m))  # partial[j] = sum_{k=n0}^{n0+j} alpha(k)
        hit = np.flatnonzero(partial >= T)
        tau = n0 + int(hit[0]) - 1 if hit.size else N - 1
        tau = min(max(tau, n0), N - 1)
        window = (trace.n >= n0 + 1) & (trace.n <= tau + 1)
        if not np.any(window):
            out.append(0.0)
            continue
        sums = trace.noise_cumsum[window] - trace.noise_cumsum[start]
        out.append(float(np.max(np.linalg.norm(sums, axis=1))))
    return tuple(out)


def tracking_windows(trace: IterateTrace, fraction: float = 0.1) -> tuple[float, float]:
    """Mean tracking error over the first and the last ``fraction`` of probes."""
    probed = ~np.isnan(trace.track_err)
    head = probed & trace.head_mask(fraction)
    tail = probed & trace.tail_mask(fraction)
    return float(np.mean(trace.track_err[head])), float(np.mean(trace.track_err[tail]))
