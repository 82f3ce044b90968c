"""Compact convex constraint sets and the projected stationarity gap.

All projections act on the last axis, so a batch of points of shape
``(..., d)`` is projected row by row.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import InputDomainError, UnsupportedOperationError

#: tolerance on "x in X" preconditions and on boundary activity
FEAS_TOL = 1e-9

MAX_HULL_VERTICES = 8
GRID_SAMPLES = 10_000


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    kind: str
    dim: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    center: Optional[np.ndarray] = None
    radius: Optional[float] = None
    scale: Optional[float] = None

    @classmethod
    def box(cls, lower, upper) -> "ConstraintSet":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("box bounds must be vectors of equal length")
        if not np.all(lower < upper):
            raise ValueError("box requires lower < upper componentwise")
        return cls("box", lower.size, lower=lower, upper=upper)

    @classmethod
    def ball(cls, center, radius: float) -> "ConstraintSet":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if not radius > 0:
            raise ValueError("ball radius must be positive")
        return cls("ball", center.size, center=center, radius=float(radius))

    @classmethod
    def simplex(cls, dim: int, scale: float = 1.0) -> "ConstraintSet":
        if not scale > 0 or dim < 1:
            raise ValueError("simplex requires scale > 0 and dim >= 1")
        return cls("simplex", int(dim), scale=float(scale))

    def __eq__(self, other):
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return self.describe() == other.describe()

    def __hash__(self):
        return hash(repr(self.describe()))

    def describe(self) -> dict:
        """Plain-python description (used for config echo and metadata)."""
        if self.kind == "box":
            return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}
        if self.kind == "ball":
            return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}
        return {"kind": "simplex", "dim": self.dim, "scale": self.scale}

    # -- basic geometry -----------------------------------------------------

    def project(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.kind == "box":
            return np.clip(p, self.lower, self.upper)
        if self.kind == "ball":
            diff = p - self.center
            norm = np.sqrt(np.sum(diff * diff, axis=-1, keepdims=True))
            factor = np.where(norm > self.radius, self.radius / np.where(norm > 0, norm, 1.0), 1.0)
            return self.center + diff * factor
        return _project_simplex(p, self.scale)

    def contains(self, x, tol: float = FEAS_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "box":
            return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))
        if self.kind == "ball":
            return bool(np.linalg.norm(x - self.center) <= self.radius + tol)
        return bool(np.all(x >= -tol) and abs(np.sum(x) - self.scale) <= tol * max(1.0, self.dim))

    def diameter(self) -> float:
        if self.kind == "box":
            return float(np.linalg.norm(self.upper - self.lower))
        if self.kind == "ball":
            return 2.0 * self.radius
        return self.scale * np.sqrt(2.0)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` points drawn uniformly from the set."""
        if self.kind == "box":
            return self.lower + (self.upper - self.lower) * rng.random((n, self.dim))
        if self.kind == "ball":
            u = rng.standard_normal((n, self.dim))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            r = self.radius * rng.random(n) ** (1.0 / self.dim)
            return self.center + u * r[:, None]
        return self.scale * rng.dirichlet(np.ones(self.dim), size=n)

    def sample_boundary(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Points on the relative boundary (box faces/edges, ball sphere)."""
        if self.kind == "box":
            pts = self.sample(rng, n)
            k = rng.integers(1, self.dim + 1, size=n)
            for i in range(n):
                coords = rng.choice(self.dim, size=k[i], replace=False)
                upper = rng.random(k[i]) < 0.5
                pts[i, coords] = np.where(upper, self.upper[coords], self.lower[coords])
            return pts
        if self.kind == "ball":
            u = rng.standard_normal((n, self.dim))
            return self.center + self.radius * u / np.linalg.norm(u, axis=1, keepdims=True)
        raise UnsupportedOperationError("boundary sampling is provided for box and ball only")

    # -- cones --------------------------------------------------------------

    def _check_on_set(self, x):
        if self.kind == "simplex":
            raise UnsupportedOperationError("tangent/normal cone projection is not provided for the simplex")
        if not self.contains(x):
            raise InputDomainError("x is not in the constraint set")

    def tangent_project(self, x, v) -> np.ndarray:
        """Projection of ``v`` onto the tangent cone of the set at ``x``."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        self._check_on_set(x)
        if self.kind == "box":
            out = v.copy()
            at_lower = x <= self.lower + FEAS_TOL
            at_upper = x >= self.upper - FEAS_TOL
            out[at_lower] = np.maximum(out[at_lower], 0.0)
            out[at_upper] = np.minimum(out[at_upper], 0.0)
            return out
        diff = x - self.center
        norm = np.linalg.norm(diff)
        if norm < self.radius - FEAS_TOL:
            return v.copy()
        outward = diff / norm
        return v - max(float(np.dot(v, outward)), 0.0) * outward

    def normal_project(self, x, v) -> np.ndarray:
        """Projection of ``v`` onto the normal cone (Moreau complement)."""
        v = np.asarray(v, dtype=float)
        return v - self.tangent_project(x, v)


def _project_simplex(p: np.ndarray, scale: float) -> np.ndarray:
    # sort-based projection onto {z >= 0, sum z = scale}, row-wise
    d = p.shape[-1]
    u = -np.sort(-p, axis=-1)
    css = np.cumsum(u, axis=-1) - scale
    ind = np.arange(1, d + 1)
    cond = u - css / ind > 0
    rho = d - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1.0)
    return np.maximum(p - theta, 0.0)


def project(cset: ConstraintSet, p) -> np.ndarray:
    return cset.project(p)


def tangent_project(cset: ConstraintSet, x, v) -> np.ndarray:
    return cset.tangent_project(x, v)


def normal_project(cset: ConstraintSet, x, v) -> np.ndarray:
    return cset.normal_project(x, v)


def moreau_check(cset: ConstraintSet, x, v) -> tuple[float, float]:
    """Residual ``||v - T - N||`` and inner product ``<T, N>`` of the split."""
    v = np.asarray(v, dtype=float)
    t = cset.tangent_project(x, v)
    n = cset.normal_project(x, v)
    return float(np.linalg.norm(v - t - n)), float(np.dot(t, n))


# ---------------------------------------------------------------------------
# minimisation over a convex hull


class HullMinimum(NamedTuple):
    value: float
    point: np.ndarray
    weights: np.ndarray


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _golden(fun: Callable[[float], float], lo: float, hi: float, tol: float = 1e-13, maxit: int = 200):
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = fun(c), fun(d)
    for _ in range(maxit):
        if hi - lo < tol:
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = fun(d)
    t = 0.5 * (lo + hi)
    return t, fun(t)


def _refine_simplex(objective, vertices, w, value, rng, rounds=80, pop=128):
    """Shrinking random search on the weight simplex around ``w``."""
    k = len(w)
    radius = 0.5
    for _ in range(rounds):
        step = rng.dirichlet(np.ones(k), size=pop) - 1.0 / k
        cand = np.maximum(w + radius * step * k, 0.0)
        cand /= cand.sum(axis=1, keepdims=True)
        vals = objective(cand @ vertices)
        j = int(np.argmin(vals))
        if vals[j] < value:
            w, value = cand[j], float(vals[j])
        else:
            radius *= 0.6
        if value <= 1e-15 or radius < 1e-12:
            break
    return w, value


def minimize_over_hull(vertices, objective: Callable[[np.ndarray], np.ndarray]) -> HullMinimum:
    """Minimise a function of ``g`` over ``conv(vertices)``.

    ``objective`` is vectorised: it maps ``(m, d)`` candidates to ``(m,)``.
    One vertex is closed form; two vertices use golden-section search on the
    segment after a coarse bracketing scan; three to eight vertices use a
    simplex sample of :data:`GRID_SAMPLES` weight vectors followed by local
    refinement.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    k = len(V)
    if k == 0:
        raise RuntimeError("empty hull")
    if k > MAX_HULL_VERTICES:
        raise UnsupportedOperationError(f"hull has {k} vertices; at most {MAX_HULL_VERTICES} are supported")
    if k == 1:
        return HullMinimum(float(objective(V)[0]), V[0].copy(), np.ones(1))
    if k == 2:
        ts = np.linspace(0.0, 1.0, 65)
        vals = objective(V[0] + ts[:, None] * (V[1] - V[0]))
        j = int(np.argmin(vals))
        lo, hi = ts[max(j - 1, 0)], ts[min(j + 1, len(ts) - 1)]
        t, val = _golden(lambda s: float(objective((V[0] + s * (V[1] - V[0]))[None, :])[0]), lo, hi)
        if vals[j] < val:
            t, val = ts[j], float(vals[j])
        w = np.array([1.0 - t, t])
        return HullMinimum(val, w @ V, w)
    rng = np.random.default_rng(12345)
    singles = np.eye(k)
    pairs = np.array([(singles[i] + singles[j]) / 2 for i in range(k) for j in range(i + 1, k)])
    centre = np.full((1, k), 1.0 / k)
    rand = rng.dirichlet(np.ones(k), size=GRID_SAMPLES - len(pairs) - k - 1)
    W = np.concatenate([singles, pairs, centre, rand])
    vals = objective(W @ V)
    j = int(np.argmin(vals))
    w, val = W[j], float(vals[j])
    if val > 1e-15:
        w, val = _refine_simplex(objective, V, w, val, rng)
    return HullMinimum(val, w @ V, w)


class GapResult(NamedTuple):
    gap: float
    witness_subgradient: np.ndarray
    witness_weights: np.ndarray


def fixed_point_residual(cset: ConstraintSet, x, g) -> np.ndarray:
    """``||x - P(x - g)||`` for a batch of subgradients ``g``."""
    x = np.asarray(x, dtype=float)
    r = x - cset.project(x - np.asarray(g, dtype=float))
    return np.sqrt(np.sum(r * r, axis=-1))


def stationarity_gap(cset: ConstraintSet, problem, x, tol: float = 1e-8) -> GapResult:
    """Smallest unit-step projected residual over the Clarke hull at ``x``.

    Zero exactly when some ``g`` in the hull has ``-g`` in the normal cone.
    """
    x = np.asarray(x, dtype=float)
    if not cset.contains(x):
        raise InputDomainError("x is not in the constraint set")
    hull = problem.clarke_hull(x, tol)
    res = minimize_over_hull(hull, lambda g: fixed_point_residual(cset, x, g))
    return GapResult(res.value, res.point, res.weights)
