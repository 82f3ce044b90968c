import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from zosub.errors import InvalidScheduleError
from zosub.schedules import StepSchedule, step_values, validate

DEFAULT = StepSchedule()

valid_schedules = st.builds(
    StepSchedule,
    a=st.floats(0.05, 0.95),
    p=st.floats(0.55, 1.0),
    b=st.floats(0.05, 0.95),
    q=st.floats(0.51, 0.99),
    offset=st.integers(0, 50),
).filter(lambda s: s.p - s.q > 0.02)


def power_sum(c, e, s, N):
    """``sum_{n=0}^{N} c/(n+1+s)^e`` via Hurwitz zeta (digamma at e=1)."""
    with mpmath.workdps(40):
        if e == 1:
            return c * (mpmath.digamma(N + 2 + s) - mpmath.digamma(1 + s))
        return c * (mpmath.zeta(e, 1 + s) - mpmath.zeta(e, N + 2 + s))


def test_step_value_examples():
    assert step_values(DEFAULT, 0) == (0.9, 0.9)
    a, b = step_values(DEFAULT, 999)
    assert a == pytest.approx(9e-4, rel=1e-14)
    assert b == pytest.approx(0.9 / 1000**0.6, rel=1e-14)
    assert b == pytest.approx(0.014258, abs=1e-5)
    assert a / b == pytest.approx(1000**-0.4, rel=1e-14)
    assert a / b == pytest.approx(0.0631, abs=5e-5)


def test_validate_default_horizon_million():
    rep = validate(DEFAULT, 10**6)
    assert rep.monotone_ok
    assert rep.ratio_tail == pytest.approx(0.0040, abs=5e-5)


@pytest.mark.parametrize(
    "sched,clause",
    [
        (StepSchedule(0.9, 0.6, 0.9, 0.8), "ratio"),
        (StepSchedule(0.9, 0.6, 0.9, 0.6), "ratio"),
        (StepSchedule(0.9, 1.0, 0.9, 0.4), "square_summable"),
        (StepSchedule(0.9, 1.0, 0.9, 0.5), "square_summable"),
        (StepSchedule(0.9, 1.2, 0.9, 0.6), "divergent"),
        (StepSchedule(1.2, 1.0, 0.9, 0.6), "initial_step"),
        (StepSchedule(0.9, 1.0, 0.9, 0.6, offset=-1), "initial_step"),
    ],
)
def test_rejections_name_clause(sched, clause):
    with pytest.raises(InvalidScheduleError) as info:
        validate(sched, 1000)
    assert info.value.clause == clause


def test_ratio_message_mentions_condition():
    with pytest.raises(InvalidScheduleError, match="ratio condition"):
        StepSchedule(0.9, 0.6, 0.9, 0.8).check()


def test_horizon_precondition():
    with pytest.raises(ValueError):
        validate(DEFAULT, 999)


@pytest.mark.parametrize("sched", [DEFAULT, StepSchedule(0.5, 0.8, 0.7, 0.55, offset=3), StepSchedule(0.3, 0.9, 0.9, 0.7)])
@pytest.mark.parametrize("horizon", [1000, 54321])
def test_report_matches_hurwitz_zeta(sched, horizon):
    rep = validate(sched, horizon)
    s = sched.offset
    sa = power_sum(sched.a, sched.p, s, horizon)
    sb = power_sum(sched.b, sched.q, s, horizon)
    sq = power_sum(sched.a**2, 2 * sched.p, s, horizon) + power_sum(sched.b**2, 2 * sched.q, s, horizon)
    assert rep.sum_alpha == pytest.approx(float(sa), rel=1e-12)
    assert rep.sum_beta == pytest.approx(float(sb), rel=1e-12)
    assert rep.sq_partial_sum == pytest.approx(float(sq), rel=1e-12)
    with mpmath.workdps(40):
        ratio = mpmath.mpf(sched.a) / sched.b * mpmath.power(horizon + 1 + s, sched.q - sched.p)
    assert rep.ratio_tail == pytest.approx(float(ratio), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(valid_schedules)
def test_valid_schedule_invariants(sched):
    assume(sched.alpha(0) < 1 and sched.beta(0) < 1)
    sched.check()
    n = np.arange(5000)
    ratio = sched.alpha(n) / sched.beta(n)
    assert np.all(np.diff(sched.alpha(n)) < 0) and np.all(np.diff(sched.beta(n)) < 0)
    assert np.all(np.diff(ratio) < 0)
    with mpmath.workdps(60):
        n_star = mpmath.ceil(mpmath.power(20 * mpmath.mpf(sched.a) / sched.b, 1 / (mpmath.mpf(sched.p) - sched.q)))
        ratio_star = mpmath.mpf(sched.a) / sched.b * mpmath.power(n_star + 1 + sched.offset, sched.q - sched.p)
        assert ratio_star < 0.05


@settings(max_examples=30, deadline=None)
@given(valid_schedules)
def test_square_sum_increments_shrink_geometrically(sched):
    # doubling increments of sum beta^2 contract by 2^(1 - 2q) asymptotically
    assume(sched.alpha(0) < 1 and sched.beta(0) < 1)
    N = 10_000
    sq = lambda M: power_sum(sched.a**2, 2 * sched.p, sched.offset, M) + power_sum(sched.b**2, 2 * sched.q, sched.offset, M)  # noqa: E731
    r = float((sq(4 * N) - sq(2 * N)) / (sq(2 * N) - sq(N)))
    assert r < 1
    if sched.offset == 0:
        assert r < 2 ** (1 - 2 * min(sched.p, sched.q)) + 1e-3


@pytest.mark.parametrize("a", [0.4, 0.45, 0.9])
@pytest.mark.parametrize("N", [1000, 10_000])
def test_sum_alpha_grows_by_a_log_ten(a, N):
    sched = StepSchedule(a, 1.0, 0.9, 0.6)
    inc = float(power_sum(a, 1.0, 0, 10 * N) - power_sum(a, 1.0, 0, N))
    assert inc >= a * math.log((10 * N + 2) / (N + 2))
    assert inc >= 0.99 * a * math.log(10)
    if a >= 0.45:
        assert inc >= 1.0
    assert validate(sched, 10 * N).sum_alpha - validate(sched, N).sum_alpha == pytest.approx(inc, rel=1e-11)
