"""Gaussian-smoothing two-point subgradient estimator and reference gradients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EvaluationError
from .geometry import minimize_over_hull
from .problems import HULL_TOL, ObjectiveProblem

# composite Gauss-Legendre on [0, U_MAX] against the standard normal density;
# the two-point integrand is even in u so the half line suffices
QUAD_PANELS = 1024
QUAD_ORDER = 8
QUAD_U_MAX = 12.0


@dataclass(frozen=True)
class SmoothingParams:
    lam: float
    mc_samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("smoothing parameter must be positive")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be positive")


def sample_direction(d: int, rng: np.random.Generator) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return rng.standard_normal(d)


def two_point_from_draws(problem: ObjectiveProblem, x, lam: float, u, noise=None) -> np.ndarray:
    """Estimator for given directions ``u`` and noise pairs, batched on leading axes.

    ``x`` and ``u`` broadcast against each other with shape ``(..., d)``;
    ``noise`` has shape ``(..., 2)`` holding already-scaled ``(zeta1, zeta2)``.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    step = lam * u
    f_plus = problem.eval_clean(x + step)
    f_minus = problem.eval_clean(x - step)
    if noise is not None:
        f_plus = f_plus + noise[..., 0]
        f_minus = f_minus + noise[..., 1]
    if not (np.all(np.isfinite(f_plus)) and np.all(np.isfinite(f_minus))):
        raise EvaluationError(f"{problem.name} returned a non-finite value")
    coef = (f_plus - f_minus) / (2.0 * lam)
    return coef[..., None] * u


def draw_noise(problem: ObjectiveProblem, rng: np.random.Generator, shape=()) -> np.ndarray | None:
    if not problem.noise.active:
        return None
    return problem.noise.sigma * rng.standard_normal(tuple(shape) + (2,))


def two_point_estimate(problem: ObjectiveProblem, x, lam: float, rng: np.random.Generator) -> np.ndarray:
    """One draw of ``((F(x+lam U) - F(x-lam U)) / (2 lam)) U``.

    The stream is consumed as: ``d`` normals for ``U``, then (if the problem
    is noisy) two normals for the independent noise realisations.
    """
    u = sample_direction(problem.dim, rng)
    noise = draw_noise(problem, rng)
    return two_point_from_draws(problem, x, lam, u, noise)


class SmoothedGradient(NamedTuple):
    grad: np.ndarray
    stderr: np.ndarray


def _half_line_rule():
    nodes, weights = np.polynomial.legendre.leggauss(QUAD_ORDER)
    edges = np.linspace(0.0, QUAD_U_MAX, QUAD_PANELS + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    u = (0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes).ravel()
    w = (0.5 * (hi - lo) * weights).ravel() * 2.0 * np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)
    return u, w


_QUAD_U, _QUAD_W = _half_line_rule()


def reference_smoothed_gradient(problem: ObjectiveProblem, x, params: SmoothingParams) -> SmoothedGradient:
    """``grad f_lam(x)`` from noise-free evaluations.

    In one dimension this is a deterministic quadrature of the two-point
    integrand (absolute error below 1e-6 on the catalog, stderr reported as
    zero).  In higher dimension it is a Monte Carlo mean of
    ``params.mc_samples`` estimates drawn from ``params.seed``; the same
    directions are reused for every call, so differences between calls are
    free of sampling noise.  ``x`` may be a batch ``(..., d)``.
    """
    x = np.asarray(x, dtype=float)
    lam = params.lam
    if problem.dim == 1:
        u = _QUAD_U[:, None]
        vals = two_point_from_draws(problem, x[..., None, :], lam, u)  # (..., nodes, 1)
        grad = np.einsum("...nd,n->...d", vals, _QUAD_W)
        return SmoothedGradient(grad, np.zeros_like(grad))
    rng = np.random.default_rng(params.seed)
    u = rng.standard_normal((params.mc_samples, problem.dim))
    vals = two_point_from_draws(problem, x[..., None, :], lam, u)  # (..., M, d)
    grad = vals.mean(axis=-2)
    stderr = vals.std(axis=-2, ddof=1) / np.sqrt(params.mc_samples)
    return SmoothedGradient(grad, stderr)


@dataclass
class EstimateDecomposition:
    """Empirical split ``g~ = g + B + M`` at a fixed point.

    ``stderr`` is the standard error of ``mean_estimate`` in norm,
    ``sqrt(residual_second_moment / n_reps)``.
    """

    estimate: np.ndarray
    mean_estimate: np.ndarray
    nearest_subgradient: np.ndarray
    bias_norm: float
    residual_second_moment: float
    second_moment: float
    second_moment_stderr: float
    stderr: float
    n_reps: int


def estimate_batch(problem: ObjectiveProblem, x, lam: float, n_reps: int, rng: np.random.Generator) -> np.ndarray:
    """``n_reps`` independent estimates at ``x``.

    Draw order: all directions ``(n_reps, d)`` first, then all noise pairs.
    """
    u = rng.standard_normal((n_reps, problem.dim))
    noise = draw_noise(problem, rng, (n_reps,))
    return two_point_from_draws(problem, np.asarray(x, dtype=float)[None, :], lam, u, noise)


def decompose_estimate(
    problem: ObjectiveProblem, x, params: SmoothingParams, n_reps: int, rng: np.random.Generator, hull_tol: float = HULL_TOL
) -> EstimateDecomposition:
    if n_reps < 2:
        raise ValueError("n_reps must be at least 2")
    g = estimate_batch(problem, x, params.lam, n_reps, rng)
    mean = g.mean(axis=0)
    resid = np.sum((g - mean) ** 2, axis=1)
    sq = np.sum(g * g, axis=1)
    hull = problem.clarke_hull(np.asarray(x, dtype=float), hull_tol)
    near = minimize_over_hull(hull, lambda c: np.linalg.norm(c - mean, axis=-1))
    return EstimateDecomposition(
        estimate=g[0],
        mean_estimate=mean,
        nearest_subgradient=near.point,
        bias_norm=near.value,
        residual_second_moment=float(resid.mean()),
        second_moment=float(sq.mean()),
        second_moment_stderr=float(sq.std(ddof=1) / np.sqrt(n_reps)),
        stderr=float(np.sqrt(resid.mean() / n_reps)),
        n_reps=n_reps,
    )
