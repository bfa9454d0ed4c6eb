from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfperc.errors import (
    CoreEmptyError,
    CoreExceedsGraphError,
    DomainError,
    RangeError,
    ScheduleInfeasibleError,
)
from sfperc.params import (
    LambdaRule,
    WeightSequence,
    build_weights,
    core_prefix_size,
    derive_constants,
    make_schedule,
    model_params,
)

TAUS = st.floats(min_value=2.05, max_value=2.95)
CS = st.floats(min_value=0.1, max_value=10.0)


def test_derived_constants_at_reference_point():
    d = derive_constants(2.5, 1.0)
    assert d["alpha"] == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert d["eta"] == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert d["eta_s"] == pytest.approx(0.25, rel=1e-15)
    assert d["c_F"] == pytest.approx(1.0, rel=1e-15)
    assert d["mu"] == pytest.approx(3.0, rel=1e-15)


def test_weight_scale_uses_inverse_tail_exponent():
    # c_F = C**(1/(tau-1)), so C=4 at tau=2.5 gives 4**(2/3)
    d = derive_constants(2.5, 4.0)
    assert d["c_F"] == pytest.approx(4.0 ** (2.0 / 3.0), rel=1e-14)
    assert d["mu"] == pytest.approx(3.0 * 4.0 ** (2.0 / 3.0), rel=1e-14)


@pytest.mark.parametrize("tau", [1.5, 2.0, 3.0, 3.5])
def test_tau_outside_open_interval_rejected(tau):
    with pytest.raises(DomainError):
        derive_constants(tau, 1.0)


def test_nonpositive_scale_rejected():
    with pytest.raises(DomainError):
        derive_constants(2.5, 0.0)
    with pytest.raises(DomainError):
        derive_constants(2.5, -1.0)


@given(tau=TAUS, c=CS)
@settings(max_examples=60, deadline=None)
def test_exponent_relations(tau, c):
    d = derive_constants(tau, c)
    assert 0.5 < d["alpha"] < 1.0
    assert d["eta"] == pytest.approx((3.0 - tau) / (tau - 1.0), rel=1e-12)
    assert d["eta_s"] == pytest.approx((3.0 - tau) / 2.0, rel=1e-12)
    # single-edge window is the wider one: eta_s < eta iff tau < 2... always
    assert d["eta_s"] / d["eta"] == pytest.approx((tau - 1.0) / 2.0, rel=1e-10)
    assert d["mu"] > 0.0


def test_build_weights_power_law():
    params = model_params(2.5, 1.0, 100)
    ws = build_weights(params)
    assert ws.n == 100
    assert ws.weight_of(100) == pytest.approx(1.0, rel=1e-14)
    assert ws.weight_of(1) == pytest.approx(100.0 ** (2.0 / 3.0), rel=1e-14)
    w = ws.weights
    assert np.all(np.diff(w) < 0.0)
    assert ws.ell_n == pytest.approx(float(w.sum()), rel=1e-14)
    np.testing.assert_allclose(ws.cum_weights, np.cumsum(w), rtol=1e-14)


def test_weight_of_range_checked():
    ws = build_weights(model_params(2.5, 1.0, 10))
    with pytest.raises(RangeError):
        ws.weight_of(0)
    with pytest.raises(RangeError):
        ws.weight_of(11)


def test_weight_arrays_read_only():
    ws = build_weights(model_params(2.5, 1.0, 10))
    with pytest.raises(ValueError):
        ws.weights[0] = 99.0


def test_from_array_toy_sequence():
    ws = WeightSequence.from_array([3.0, 2.0, 1.0])
    assert ws.n == 3
    assert ws.ell_n == pytest.approx(6.0)
    assert ws.params is None
    assert ws.weight_of(2) == pytest.approx(2.0)


def test_from_array_rejects_bad_values():
    with pytest.raises(DomainError):
        WeightSequence.from_array([])
    with pytest.raises(DomainError):
        WeightSequence.from_array([1.0, 0.0])
    with pytest.raises(DomainError):
        WeightSequence.from_array([1.0, -2.0])


def test_lambda_rules_evaluate():
    assert LambdaRule("constant", 7.0).evaluate(10**6) == 7.0
    assert LambdaRule("power", 0.1).evaluate(10**5) == pytest.approx(10.0 ** 0.5)
    assert LambdaRule("logpower", 2.0).evaluate(math.e ** 3) == pytest.approx(9.0, rel=1e-6)


def test_lambda_rule_validation():
    with pytest.raises(DomainError):
        LambdaRule("cubic", 1.0)
    with pytest.raises(DomainError):
        LambdaRule("constant", 0.5)
    with pytest.raises(DomainError):
        LambdaRule("power", -0.1)
    with pytest.raises(DomainError):
        LambdaRule("power", math.inf)


def test_lambda_rule_dict_round_trip():
    rule = LambdaRule("power", 0.1)
    assert LambdaRule.from_dict(rule.to_dict()) == rule
    with pytest.raises(DomainError):
        LambdaRule.from_dict({"kind": "power", "value": 0.1, "x": 1})
    with pytest.raises(DomainError):
        LambdaRule.from_dict({"kind": "power"})


def test_multi_schedule_closed_forms():
    n = 10**6
    sch = make_schedule(model_params(2.5, 1.0, n), "multi", LambdaRule("power", 0.1))
    lam = n ** 0.1
    assert sch.lambda_n == pytest.approx(lam, rel=1e-12)
    assert sch.pi_n == pytest.approx(lam * n ** (-1.0 / 3.0), rel=1e-12)
    assert sch.beta_n == pytest.approx(n * sch.pi_n ** 2.0, rel=1e-12)
    assert sch.N_n is None


def test_single_schedule_closed_forms():
    n = 10**6
    sch = make_schedule(model_params(2.5, 1.0, n), "single", LambdaRule("constant", 10.0))
    assert sch.pi_n == pytest.approx(10.0 * n ** -0.25, rel=1e-12)
    assert sch.beta_n == pytest.approx(n * sch.pi_n ** 2.0, rel=1e-12)
    assert sch.N_n == pytest.approx(n * sch.pi_n ** 3.0, rel=1e-12)


def test_infeasible_schedules_raise():
    # pi_n = 1 exactly at n = lambda**4 in single mode
    with pytest.raises(ScheduleInfeasibleError):
        make_schedule(model_params(2.5, 1.0, 10**4), "single", LambdaRule("constant", 10.0))
    # logpower rules drop below 1 for small n, leaving the subcritical side
    with pytest.raises(ScheduleInfeasibleError):
        make_schedule(model_params(2.5, 1.0, 2), "multi", LambdaRule("logpower", 1.0))


def test_bad_mode_rejected():
    with pytest.raises(DomainError):
        make_schedule(model_params(2.5, 1.0, 100), "both", LambdaRule("power", 0.1))


def test_percolated_weights_scale_by_pi():
    params = model_params(2.5, 1.0, 50)
    ws = build_weights(params)
    sch = make_schedule(params, "multi", LambdaRule("power", 0.1))
    np.testing.assert_allclose(sch.percolated_weights(ws), sch.pi_n * ws.weights, rtol=1e-14)
    assert sch.percolated_total(ws) == pytest.approx(sch.pi_n * ws.ell_n, rel=1e-14)


def test_core_prefix_size():
    sch = make_schedule(model_params(2.5, 1.0, 10**6), "single", LambdaRule("constant", 10.0))
    assert core_prefix_size(sch, 1.0) == math.floor(sch.N_n)
    assert core_prefix_size(sch, 0.5) == math.floor(0.5 * sch.N_n)
    with pytest.raises(CoreEmptyError):
        core_prefix_size(sch, 1e-9)
    with pytest.raises(CoreExceedsGraphError):
        core_prefix_size(sch, 1e9)


def test_core_prefix_needs_single_mode():
    sch = make_schedule(model_params(2.5, 1.0, 10**6), "multi", LambdaRule("power", 0.1))
    with pytest.raises(DomainError):
        core_prefix_size(sch, 1.0)


def test_weight_at_core_scale_approaches_power_law():
    # w_ceil(N_n*u) / (sqrt(n) * lambda**(-1/(3-tau))) -> c_F * u**-alpha;
    # the only finite-n error is the index rounding, so the worst relative
    # deviation over the u-grid shrinks as N_n grows
    rule = LambdaRule("constant", 10.0)
    worst = []
    for n in (10**5, 10**6, 10**7):
        params = model_params(2.5, 1.0, n)
        ws = build_weights(params)
        sch = make_schedule(params, "single", rule)
        scale = math.sqrt(n) * sch.lambda_n ** (-1.0 / (3.0 - params.tau))
        devs = []
        for u in (0.5, 1.0, 2.0):
            got = ws.weight_of(math.ceil(sch.N_n * u)) / scale
            devs.append(abs(got / (params.c_F * u ** -params.alpha) - 1.0))
        assert max(devs) < 1e-4
        worst.append(max(devs))
    assert worst[0] > worst[1] > worst[2]


@given(tau=TAUS, c=CS, n=st.integers(min_value=10, max_value=2000))
@settings(max_examples=40, deadline=None)
def test_weight_sequence_properties(tau, c, n):
    params = model_params(tau, c, n)
    ws = build_weights(params)
    # w_i = c_F * (n/i)**alpha, so extremes pin the whole sequence
    assert ws.weight_of(n) == pytest.approx(params.c_F, rel=1e-12)
    assert ws.weight_of(1) == pytest.approx(params.c_F * n ** params.alpha, rel=1e-12)
    assert ws.ell_n > 0.0
    # ell_n/(mu*n) -> 1; integral bracket of sum(i**-alpha) gives exact envelope
    ratio = ws.ell_n / (params.mu * n)
    assert 1.0 - n ** (params.alpha - 1.0) - 1e-12 < ratio <= 1.0
