import dataclasses

import numpy as np
import pytest
from scipy.stats import norm

from zosub.analysis import (
    BOUND_SE,
    baseline_comparison,
    bias_experiment,
    convergence_experiment,
    lambda_sweep,
    moment_bound,
    moment_experiment,
    nonincreasing_within,
)
from zosub.optimizer import RunConfig
from zosub.problems import make_problem

ABS = make_problem("ABS").problem
QUICK = RunConfig(iterations=2000, stride=100, probe_stride=1000)


def test_moment_bound_examples():
    assert moment_bound(1.0, 0.01, 1, 0.5) == pytest.approx(4.04, abs=1e-12)
    assert moment_bound(1.0, 0.01, 1, 0.02) == pytest.approx(29.0, abs=1e-12)


def test_nonincreasing_within():
    assert nonincreasing_within([1.0, 0.5, 0.51], [0.01, 0.01, 0.01])
    assert not nonincreasing_within([1.0, 0.5, 0.6], [0.01, 0.01, 0.01])


def test_bias_at_kink_is_zero():
    rep = bias_experiment(ABS, [[0.0]], [0.4, 0.1], 10_000, seed=0)
    assert np.all(rep.bias == 0.0)
    assert rep.passed


def test_bias_closed_form_and_monotone():
    lambdas = [0.4, 0.2, 0.1, 0.05]
    rep = bias_experiment(ABS, [[0.3]], lambdas, 10_000, seed=1)
    expected = 2 * norm.cdf(-0.3 / np.array(lambdas))
    assert expected == pytest.approx([0.4533, 0.1336, 0.0027, 2e-9], abs=1e-4)
    assert np.all(np.abs(rep.bias[0] - expected) <= 3 * rep.stderr[0])
    assert rep.monotone[0]
    assert np.all(rep.stderr > 0)
    assert rep.reference[0, :, 0] == pytest.approx(2 * norm.cdf(0.3 / np.array(lambdas)) - 1, abs=1e-6)


def test_bias_r_bar_dominates_points():
    rep = bias_experiment(ABS, [[0.3], [-0.1], [0.7]], [0.4, 0.1], 10_000, seed=2)
    assert np.all(rep.r_bar >= rep.bias)
    assert rep.r_bar == pytest.approx(rep.bias.max(axis=0))


def test_bias_preconditions():
    with pytest.raises(ValueError):
        bias_experiment(ABS, [[0.3]], [0.1, 0.4], 10_000, 0)
    with pytest.raises(ValueError):
        bias_experiment(ABS, [[0.3]], [0.4, 0.1], 100, 0)


def test_bias_report_reproducible_and_csv():
    a = bias_experiment(ABS, [[0.3]], [0.4, 0.1], 10_000, seed=3)
    b = bias_experiment(ABS, [[0.3]], [0.4, 0.1], 10_000, seed=3)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == "point_index,point,lambda,bias,stderr,reference_grad,monotone"
    assert any("PASS" in line for line in a.summary())


def test_moment_cells_and_bound_recomputation():
    rep = moment_experiment(ABS, [[0.3], [-0.6]], [0.5, 0.02], 20_000, sigma=0.1, seed=0)
    assert rep.K == pytest.approx(0.01)
    for j, lam in enumerate(rep.lambdas):
        assert rep.bound[j] == moment_bound(rep.L, rep.K, 1, lam)
    assert rep.passed
    assert np.all(rep.second_moment[:, 1] > rep.second_moment[:, 0])
    assert np.all(rep.cell_passed == (rep.second_moment <= rep.bound + BOUND_SE * rep.stderr))


def test_moment_report_fails_when_bound_is_violated():
    rep = moment_experiment(ABS, [[0.3]], [0.5], 20_000, sigma=0.1, seed=0)
    broken = dataclasses.replace(rep, bound=np.array([0.1]))
    assert not broken.passed
    assert "FAIL" in broken.summary()[1]


def test_convergence_requires_ten_seeds():
    with pytest.raises(ValueError):
        convergence_experiment(QUICK, range(5))


def test_convergence_zero_iterations_reports_initial_gap():
    cfg = dataclasses.replace(QUICK, iterations=0)
    rep = convergence_experiment(cfg, range(10))
    from zosub.geometry import stationarity_gap

    e = cfg.entry()
    g0 = stationarity_gap(e.constraint, e.problem, cfg.initial_point(e), cfg.gap_tol).gap
    assert all(r.final_gap == g0 and r.tail_min_gap == g0 for r in rep.rows)
    assert 0.0 <= rep.pass_fraction <= 1.0


def test_convergence_rows_reproducible():
    a = convergence_experiment(QUICK, range(10))
    b = convergence_experiment(QUICK, range(10), jobs=2)
    assert a.to_csv() == b.to_csv()
    assert a.rows[0].tail_min_dist is not None


def test_convergence_without_known_set():
    rep = convergence_experiment(dataclasses.replace(QUICK, problem="FINITEMAX"), range(10))
    assert rep.rows[0].tail_min_dist is None
    assert rep.distance_fraction(0.1) is None
    assert ",," in rep.to_csv().splitlines()[1]


def test_sweep_single_lambda_no_trend():
    rep = lambda_sweep(QUICK, [0.05], range(10))
    assert len(rep.reports) == 1
    assert rep.trend_ok is None


def test_sweep_nnl1_smoke():
    cfg = dataclasses.replace(QUICK, problem="NNL1", iterations=1000)
    rep = lambda_sweep(cfg, [0.4, 0.1, 0.05], range(10))
    assert np.all(np.isfinite(rep.medians))
    assert rep.trend_ok in (True, False)


def test_baseline_comparison_small_n_smoke():
    rep = baseline_comparison(dataclasses.replace(QUICK, iterations=100, stride=10, probe_stride=100), range(10))
    assert len(rep.baseline.rows) == 10
    assert 0.0 <= rep.std_win_fraction <= 1.0
    assert rep.to_csv().count("\n") == 11


@pytest.mark.slow
def test_baseline_tail_spread_lower_for_two_timescale():
    rep = baseline_comparison(RunConfig(lam=0.05), range(20))
    assert rep.std_win_fraction >= 0.7
