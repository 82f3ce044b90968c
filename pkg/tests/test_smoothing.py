import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from zosub.errors import EvaluationError
from zosub.problems import ObjectiveProblem, make_problem
from zosub.smoothing import (
    SmoothingParams,
    decompose_estimate,
    estimate_batch,
    reference_smoothed_gradient,
    two_point_estimate,
    two_point_from_draws,
)

ABS = make_problem("ABS").problem
ABS3 = make_problem("ABS", 3).problem
DW = make_problem("DOUBLEWELL").problem


def _quad_smoothed_derivative(f, x, lam):
    # d/dx E f(x + lam u) = E[f(x + lam u) u] / lam, independent of the package's rule
    val, _ = quad(lambda u: f(x + lam * u) * u * norm.pdf(u), -np.inf, np.inf, points=None, limit=400)
    return val / lam


def test_params_validation():
    with pytest.raises(ValueError):
        SmoothingParams(0.0)
    with pytest.raises(ValueError):
        SmoothingParams(0.1, mc_samples=0)


def test_estimate_stream_order():
    noisy = make_problem("ABS", 3, sigma=0.1).problem
    rng_a, rng_b = np.random.default_rng(5), np.random.default_rng(5)
    g = two_point_estimate(noisy, np.array([0.2, -0.1, 0.4]), 0.1, rng_a)
    u = rng_b.standard_normal(3)
    z = 0.1 * rng_b.standard_normal(2)
    f = noisy.eval_clean
    x = np.array([0.2, -0.1, 0.4])
    expected = (f(x + 0.1 * u) + z[0] - f(x - 0.1 * u) - z[1]) / 0.2 * u
    assert g == pytest.approx(expected, abs=1e-15)


def test_noise_free_problem_draws_only_direction():
    rng = np.random.default_rng(0)
    two_point_estimate(ABS, np.array([0.3]), 0.1, rng)
    rng2 = np.random.default_rng(0)
    rng2.standard_normal(1)
    assert rng.standard_normal() == rng2.standard_normal()


def test_nonfinite_evaluation_raises():
    bad = ObjectiveProblem("BAD", 1, lambda x: np.full(x.shape[:-1], np.nan), lambda x, t: np.ones((1, 1)), 1.0, 1.0)
    with pytest.raises(EvaluationError):
        two_point_estimate(bad, np.array([0.0]), 0.1, np.random.default_rng(0))


@settings(max_examples=80, deadline=None)
@given(st.floats(-1, 1), st.floats(0.01, 1.0), st.floats(-3, 3), st.floats(-1, 1), st.floats(-1, 1))
def test_noise_enters_linearly(x, lam, u, z1, z2):
    clean = two_point_from_draws(ABS, np.array([x]), lam, np.array([u]))
    noisy = two_point_from_draws(ABS, np.array([x]), lam, np.array([u]), np.array([z1, z2]))
    assert noisy == pytest.approx(clean + (z1 - z2) / (2 * lam) * u, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(st.floats(-1, 1), st.floats(0.01, 1.0), st.floats(-3, 3))
def test_noise_free_estimate_symmetric_in_direction(x, lam, u):
    a = two_point_from_draws(DW, np.array([x]), lam, np.array([u]))
    b = two_point_from_draws(DW, np.array([x]), lam, np.array([-u]))
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("x", [-0.7, -0.05, 0.0, 0.3, 0.9])
@pytest.mark.parametrize("lam", [0.02, 0.1, 0.5])
def test_quadrature_reference_abs_closed_form(x, lam):
    got = reference_smoothed_gradient(ABS, np.array([x]), SmoothingParams(lam)).grad
    assert got[0] == pytest.approx(2 * norm.cdf(x / lam) - 1, abs=1e-6)


@pytest.mark.parametrize("x", [-1.3, -0.6, 0.0, 0.95, 1.7])
@pytest.mark.parametrize("lam", [0.05, 0.4])
def test_quadrature_reference_doublewell_vs_quad(x, lam):
    f = lambda z: abs(z * z - 1.0)  # noqa: E731
    got = reference_smoothed_gradient(DW, np.array([x]), SmoothingParams(lam)).grad[0]
    assert got == pytest.approx(_quad_smoothed_derivative(f, x, lam), abs=1e-6)


def test_reference_is_batched():
    xs = np.array([[0.1], [0.2], [-0.4]])
    batch = reference_smoothed_gradient(ABS, xs, SmoothingParams(0.1)).grad
    single = np.array([reference_smoothed_gradient(ABS, x, SmoothingParams(0.1)).grad for x in xs])
    assert batch == pytest.approx(single, abs=1e-15)


def test_monte_carlo_reference_abs3():
    x = np.array([0.05, -0.2, 0.0])
    lam = 0.1
    ref = reference_smoothed_gradient(ABS3, x, SmoothingParams(lam, mc_samples=40_000, seed=3))
    exact = 2 * norm.cdf(x / lam) - 1
    assert np.all(np.abs(ref.grad - exact) <= 4 * ref.stderr + 1e-12)
    assert np.all(ref.stderr > 0)


def test_monte_carlo_reference_common_random_numbers():
    x = np.array([0.05, -0.2, 0.0])
    a = reference_smoothed_gradient(ABS3, x, SmoothingParams(0.1, 500, seed=9)).grad
    b = reference_smoothed_gradient(ABS3, x, SmoothingParams(0.1, 500, seed=9)).grad
    assert np.array_equal(a, b)


def test_decompose_at_abs_kink_has_zero_bias():
    dec = decompose_estimate(ABS, np.array([0.0]), SmoothingParams(0.1), 10_000, np.random.default_rng(0))
    assert dec.bias_norm == 0.0
    assert dec.mean_estimate == pytest.approx([0.0])


def test_decompose_bias_matches_closed_form():
    x, lam, n = 0.3, 0.2, 10_000
    dec = decompose_estimate(ABS, np.array([x]), SmoothingParams(lam), n, np.random.default_rng(1))
    assert abs(dec.bias_norm - 2 * norm.cdf(-x / lam)) <= 3 * dec.stderr
    assert dec.stderr == pytest.approx(np.sqrt(dec.residual_second_moment / n))
    assert dec.stderr > 0


def test_noise_free_second_moment_below_gaussian_fourth_moment():
    g = estimate_batch(ABS, np.array([0.5]), 0.5, 100_000, np.random.default_rng(2))
    m2 = np.mean(np.sum(g * g, axis=1))
    se = np.std(np.sum(g * g, axis=1)) / np.sqrt(len(g))
    assert m2 <= 3.0 + 3 * se
    assert m2 <= 4.0


def test_decompose_requires_two_reps():
    with pytest.raises(ValueError):
        decompose_estimate(ABS, np.array([0.0]), SmoothingParams(0.1), 1, np.random.default_rng(0))
