"""Noisy black-box objectives with ground-truth metadata.

Every built-in problem is a finite composition of smooth pieces (absolute
values or a pointwise max), so its Clarke subdifferential at any point is the
convex hull of the gradients of the pieces that are *active* there.  Activity
is decided with a tolerance in function-value units: a piece of a max is
active when it is within ``tol`` of the max, and ``|h|`` (viewed as
``max(h, -h)``) is at its kink when ``2|h| <= tol``.
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _catalog_data
from .errors import InputDomainError
from .geometry import ConstraintSet

#: default activity tolerance for hull construction (function-value units)
HULL_TOL = 1e-8


@dataclass(frozen=True)
class NoiseModel:
    """Additive observation noise ``F(x, zeta) = f(x) + zeta``.

    ``variance_bound_K`` defaults to ``sigma**2``; it may be set larger but
    never smaller.
    """

    kind: str = "none"
    sigma: float = 0.0
    variance_bound_K: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("none", "gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.kind == "none" and self.sigma != 0:
            raise ValueError("noise kind 'none' requires sigma == 0")
        if self.variance_bound_K is None:
            object.__setattr__(self, "variance_bound_K", float(self.sigma) ** 2)
        if self.variance_bound_K < self.sigma**2:
            raise ValueError("variance_bound_K must be >= sigma**2")

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseModel":
        if sigma == 0:
            return cls()
        return cls("gaussian", float(sigma))

    @property
    def active(self) -> bool:
        return self.kind == "gaussian" and self.sigma > 0


@dataclass(frozen=True)
class StationarySet:
    """Finite points plus (optionally) origin-centred spheres, intersected with X."""

    points: np.ndarray
    sphere_radii: tuple = ()

    def distance(self, x) -> float:
        x = np.asarray(x, dtype=float)
        dists = []
        if len(self.points):
            dists.append(np.min(np.linalg.norm(self.points - x, axis=-1)))
        for r in self.sphere_radii:
            dists.append(abs(np.linalg.norm(x) - r))
        return float(min(dists))

    def members(self, n_sphere: int = 64, rng=None) -> np.ndarray:
        """The finite points plus ``n_sphere`` samples from each sphere."""
        out = [np.asarray(self.points, dtype=float)]
        if self.sphere_radii:
            rng = np.random.default_rng(0) if rng is None else rng
            d = self.points.shape[1]
            for r in self.sphere_radii:
                u = rng.standard_normal((n_sphere, d))
                out.append(r * u / np.linalg.norm(u, axis=1, keepdims=True))
        return np.concatenate(out)


@dataclass(frozen=True, eq=False)
class ObjectiveProblem:
    """A Lipschitz objective ``f`` on R^d, observed through additive noise.

    ``eval_clean`` maps an array of shape ``(..., dim)`` to ``(...)``.
    ``clarke_hull(x, tol)`` returns a ``(k, dim)`` array of vertices whose
    convex hull is the Clarke subdifferential at ``x``.
    """

    name: str
    dim: int
    eval_clean: Callable[[np.ndarray], np.ndarray]
    clarke_hull: Callable[[np.ndarray, float], np.ndarray]
    lipschitz_L: float
    subgrad_bound_G: float
    noise: NoiseModel = field(default_factory=NoiseModel)
    known_stationary_set: Optional[StationarySet] = None

    def with_noise(self, noise: NoiseModel) -> "ObjectiveProblem":
        return dataclasses.replace(self, noise=noise)

    def __call__(self, x):
        return self.eval_clean(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class ProblemCatalogEntry:
    problem: ObjectiveProblem
    constraint: ConstraintSet
    description: str

    @property
    def label(self) -> str:
        return f"{self.problem.name}[d={self.problem.dim}]"


def evaluate_noisy(problem: ObjectiveProblem, x, rng: np.random.Generator) -> float:
    """One oracle call ``F(x, zeta)``; draws a single normal only when noise is on."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise InputDomainError(f"expected a vector of length {problem.dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputDomainError("x must be finite")
    value = float(problem.eval_clean(x))
    if problem.noise.active:
        value += problem.noise.sigma * rng.standard_normal()
    return value


def clarke_hull_at(problem: ObjectiveProblem, x, tol: float = HULL_TOL) -> np.ndarray:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return problem.clarke_hull(np.asarray(x, dtype=float), float(tol))


# ---------------------------------------------------------------------------
# families


def _dot_last(u, v):
    """``sum_j u[..., j] v[..., j]`` accumulated left to right.

    Unlike einsum or matmul, the summation order does not depend on the
    leading (batch) shape, so a batched run reproduces a single run exactly.
    """
    u, v = np.broadcast_arrays(u, v)
    out = u[..., 0] * v[..., 0]
    for j in range(1, u.shape[-1]):
        out = out + u[..., j] * v[..., j]
    return out


def _sign_choices(base: np.ndarray, active: np.ndarray, magnitude) -> np.ndarray:
    """Vertices obtained by letting every active coordinate take both signs."""
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return base[None, :].copy()
    verts = []
    for signs in itertools.product((-1.0, 1.0), repeat=idx.size):
        v = base.copy()
        v[idx] = np.asarray(signs) * magnitude[idx]
        verts.append(v)
    return np.array(verts)


@dataclass(frozen=True)
class SignedL1:
    """``sign * sum_i |x_i|``; sign=+1 is ABS, sign=-1 is NEGABS."""

    sign: float = 1.0

    def value(self, x):
        return self.sign * np.sum(np.abs(x), axis=-1)

    def hull(self, x, tol):
        active = 2.0 * np.abs(x) <= tol
        base = self.sign * np.sign(x)
        return _sign_choices(base, active, np.ones_like(x))


@dataclass(frozen=True)
class DoubleWell:
    """``| ||x||^2 - 1 |``: kink on the unit sphere, smooth local max at 0."""

    def value(self, x):
        return np.abs(np.sum(x * x, axis=-1) - 1.0)

    def hull(self, x, tol):
        q = float(np.dot(x, x) - 1.0)
        grad = 2.0 * x
        if 2.0 * abs(q) <= tol:
            return np.array([-grad, grad])
        return (np.sign(q) * grad)[None, :]


@dataclass(frozen=True, eq=False)
class FiniteMax:
    """``max_i (a_i^T x + x^T Q_i x / 2)``."""

    linear: np.ndarray
    quadratic: np.ndarray

    def pieces(self, x):
        # explicit accumulation keeps results bit-identical for any batch shape
        x = np.asarray(x, dtype=float)[..., None, :]
        lin = _dot_last(x, self.linear)
        qx = [_dot_last(x, self.quadratic[:, :, k]) for k in range(self.linear.shape[1])]
        quad = sum(x[..., k] * qx[k] for k in range(1, len(qx))) if len(qx) > 1 else 0.0
        quad = x[..., 0] * qx[0] + quad
        return lin + 0.5 * quad

    def value(self, x):
        return np.max(self.pieces(x), axis=-1)

    def hull(self, x, tol):
        vals = self.pieces(x)
        active = vals >= vals.max() - tol
        grads = self.linear + self.quadratic @ x
        return grads[active]

    def lipschitz_on_box(self, lower, upper):
        corners = np.array(list(itertools.product(*zip(lower, upper))))
        grads = self.linear[None, :, :] + np.einsum("ijk,vk->vij", self.quadratic, corners)
        return float(np.max(np.linalg.norm(grads, axis=-1)))


@dataclass(frozen=True, eq=False)
class OneHiddenLayerL1:
    """Mean absolute error of a tanh network, parameters ``x = (a, W.ravel())``."""

    inputs: np.ndarray
    targets: np.ndarray
    hidden: int = 4

    @property
    def dim(self):
        return self.hidden * (1 + self.inputs.shape[1])

    def _split(self, x):
        a = x[..., : self.hidden]
        w = x[..., self.hidden :].reshape(x.shape[:-1] + (self.hidden, self.inputs.shape[1]))
        return a, w

    def residuals(self, x):
        a, w = self._split(np.asarray(x, dtype=float))
        act = np.tanh(_dot_last(w[..., None, :, :], self.inputs[:, None, :]))  # (..., n, m)
        return self.targets - _dot_last(act, a[..., None, :])

    def value(self, x):
        return np.mean(np.abs(self.residuals(x)), axis=-1)

    def residual_gradients(self, x):
        a, w = self._split(x)
        act = np.tanh(self.inputs @ w.T)  # (n, m)
        d_a = -act
        d_w = -(a * (1.0 - act**2))[:, :, None] * self.inputs[:, None, :]
        return np.concatenate([d_a, d_w.reshape(len(self.targets), -1)], axis=1)

    def hull(self, x, tol):
        res = self.residuals(x)
        grads = self.residual_gradients(x) / len(self.targets)
        active = 2.0 * np.abs(res) <= tol
        base = np.sum(np.sign(res[~active])[:, None] * grads[~active], axis=0)
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return base[None, :]
        verts = [base + np.asarray(signs) @ grads[idx] for signs in itertools.product((-1.0, 1.0), repeat=idx.size)]
        return np.array(verts)

    def lipschitz_on_ball(self, radius):
        # ||grad r_j||^2 <= m + ||a||^2 ||u_j||^2 and ||a|| <= radius on the ball
        norms = np.linalg.norm(self.inputs, axis=1)
        return float(np.mean(np.sqrt(self.hidden + radius**2 * norms**2)))


# ---------------------------------------------------------------------------
# catalog

FAMILIES = ("ABS", "NEGABS", "DOUBLEWELL", "FINITEMAX", "NNL1")

FINITEMAX_DIM = 2
NNL1_HIDDEN = 4
NNL1_BALL_RADIUS = 2.0


def _grid_points(values, dim):
    return np.array(list(itertools.product(values, repeat=dim)), dtype=float)


def default_constraint(name: str, dim: int) -> ConstraintSet:
    if name in ("ABS", "NEGABS", "FINITEMAX"):
        return ConstraintSet.box(-np.ones(dim), np.ones(dim))
    if name == "DOUBLEWELL":
        return ConstraintSet.box(-2 * np.ones(dim), 2 * np.ones(dim))
    if name == "NNL1":
        return ConstraintSet.ball(np.zeros(dim), NNL1_BALL_RADIUS)
    raise KeyError(f"unknown problem family {name!r}")


def make_problem(name: str, dim: Optional[int] = None, sigma: float = 0.0) -> ProblemCatalogEntry:
    """Build a catalog family member with its default constraint set.

    Stationary sets are attached only where they are known to be *complete*
    for the default constraint, since soundness checks sample points far
    from them.
    """
    noise = NoiseModel.gaussian(sigma)
    name = name.upper()
    if name in ("ABS", "NEGABS"):
        d = 1 if dim is None else int(dim)
        fam = SignedL1(1.0 if name == "ABS" else -1.0)
        if name == "ABS":
            S = StationarySet(np.zeros((1, d)))
            desc = "sum |x_i| on [-1,1]^d; convex, unique stationary point 0"
        else:
            S = StationarySet(_grid_points((-1.0, 0.0, 1.0), d))
            desc = "-sum |x_i| on [-1,1]^d; concave, stationary set {-1,0,1}^d"
        prob = ObjectiveProblem(name, d, fam.value, fam.hull, np.sqrt(d), np.sqrt(d), noise, S)
        return ProblemCatalogEntry(prob, default_constraint(name, d), desc)
    if name == "DOUBLEWELL":
        d = 1 if dim is None else int(dim)
        fam = DoubleWell()
        if d == 1:
            S = StationarySet(np.array([[-1.0], [0.0], [1.0]]))
        else:
            S = StationarySet(np.zeros((1, d)), sphere_radii=(1.0,))
        L = 4.0 * np.sqrt(d)
        prob = ObjectiveProblem(name, d, fam.value, fam.hull, L, L, noise, S)
        desc = "| ||x||^2 - 1 | on [-2,2]^d; stationary set {0} and the unit sphere"
        return ProblemCatalogEntry(prob, default_constraint(name, d), desc)
    if name == "FINITEMAX":
        if dim not in (None, FINITEMAX_DIM):
            raise ValueError(f"FINITEMAX has fixed dimension {FINITEMAX_DIM}")
        fam = FiniteMax(np.array(_catalog_data.FINITEMAX_LINEAR), np.array(_catalog_data.FINITEMAX_QUADRATIC))
        cset = default_constraint(name, FINITEMAX_DIM)
        L = fam.lipschitz_on_box(cset.lower, cset.upper)
        prob = ObjectiveProblem(name, FINITEMAX_DIM, fam.value, fam.hull, L, L, noise, None)
        desc = "max of 3 quadratics (two indefinite) on [-1,1]^2"
        return ProblemCatalogEntry(prob, cset, desc)
    if name == "NNL1":
        fam = OneHiddenLayerL1(np.array(_catalog_data.NNL1_INPUTS), np.array(_catalog_data.NNL1_TARGETS), NNL1_HIDDEN)
        if dim not in (None, fam.dim):
            raise ValueError(f"NNL1 has fixed dimension {fam.dim}")
        cset = default_constraint(name, fam.dim)
        L = fam.lipschitz_on_ball(NNL1_BALL_RADIUS)
        prob = ObjectiveProblem(name, fam.dim, fam.value, fam.hull, L, L, noise, None)
        desc = "L1 loss of a 4-unit tanh network on 20 fixed samples, ball of radius 2"
        return ProblemCatalogEntry(prob, cset, desc)
    raise KeyError(f"unknown problem family {name!r}; choose from {', '.join(FAMILIES)}")


def builtin_catalog(sigma: float = 0.0) -> list[ProblemCatalogEntry]:
    return [
        make_problem("ABS", 1, sigma),
        make_problem("ABS", 3, sigma),
        make_problem("NEGABS", 1, sigma),
        make_problem("DOUBLEWELL", 1, sigma),
        make_problem("FINITEMAX", None, sigma),
        make_problem("NNL1", None, sigma),
    ]
