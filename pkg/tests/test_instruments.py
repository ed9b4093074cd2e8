from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import hw_bond_textbook, swap_value_textbook, swaption_mc
from simim.instruments import (
    NettingSet,
    SwapSpec,
    SwaptionSpec,
    build_value_cube,
    forward_swap_value,
    make_atm_swap,
    make_swaption,
    par_rate,
    settled_flows,
    swap_delta,
    swaption_delta,
    value_swap,
    value_swaption,
    value_trade,
)
from simim.market import DiscountCurve
from simim.rates import HullWhiteParams, TimeGrid, simulate_paths

N = 1_000_000.0


def test_par_rate_annuity_oracle(params):
    df = [math.exp(-0.02 * k) for k in range(1, 6)]
    expected = (1 - df[-1]) / sum(df)
    assert par_rate(params, SwapSpec(N, 0.0, True, 0.0, 5.0)) == pytest.approx(expected, rel=1e-14)


def test_single_period_par_is_simple_forward(params):
    spec = SwapSpec(N, 0.0, True, 2.0, 3.0)
    fwd = math.exp(-0.02 * 2) / math.exp(-0.02 * 3) - 1.0
    assert par_rate(params, spec) == pytest.approx(fwd, rel=1e-13)


@pytest.mark.parametrize("maturity", [3.0, 5.0, 7.0, 10.0])
@pytest.mark.parametrize("pay_fixed", [True, False])
def test_atm_swap_worth_zero(params, maturity, pay_fixed):
    spec = make_atm_swap(params, maturity, N, pay_fixed)
    v = value_swap(params, spec, params.initial_short_rate(), 0.0)
    assert abs(v) <= 1e-9 * N


def test_swap_zero_at_maturity(params):
    spec = make_atm_swap(params, 5.0)
    assert value_trade(params, spec, 0.05, 5.0) == 0.0
    assert value_trade(params, spec, 0.05, 6.0) == 0.0


def test_bond_replication_at_reset_date(params):
    spec = make_atm_swap(params, 5.0)
    r = params.phi(1.0) + 0.01
    v = float(value_swap(params, spec, r, 1.0))
    reset_bond = hw_bond_textbook(0.05, 0.01, 0.02, 1.0, 2.0, r)
    expected = swap_value_textbook(0.05, 0.01, 0.02, 1.0, r, spec.fixed_rate, 0.0, 5.0, N,
                                   reset_bond=reset_bond)
    assert v > 0
    assert v == pytest.approx(expected, rel=1e-12)


def test_bond_replication_mid_period(params):
    spec = make_atm_swap(params, 5.0)
    r_reset, r = 0.025, 0.031
    v = float(value_swap(params, spec, r, 1.5, reset_rate=r_reset))
    reset_bond = hw_bond_textbook(0.05, 0.01, 0.02, 1.0, 2.0, r_reset)
    expected = swap_value_textbook(0.05, 0.01, 0.02, 1.5, r, spec.fixed_rate, 0.0, 5.0, N,
                                   reset_bond=reset_bond)
    assert v == pytest.approx(expected, rel=1e-12)


def test_mid_period_needs_reset_rate(params):
    with pytest.raises(ValueError):
        value_swap(params, make_atm_swap(params, 5.0), 0.02, 1.5)


def test_receiver_is_negated_payer(params):
    pay = make_atm_swap(params, 7.0)
    rec = replace(pay, pay_fixed=False)
    r = np.linspace(-0.02, 0.08, 7)
    np.testing.assert_allclose(value_swap(params, rec, r, 2.0), -value_swap(params, pay, r, 2.0), rtol=0, atol=1e-9)


@pytest.mark.parametrize("t,reset", [(0.5, 0.02), (3.25, 0.035)])
def test_swap_delta_matches_finite_difference(params, t, reset):
    spec = make_atm_swap(params, 5.0)
    r, h = 0.027, 1e-6
    fd = (value_swap(params, spec, r + h, t, reset) - value_swap(params, spec, r - h, t, reset)) / (2 * h)
    assert float(swap_delta(params, spec, r, t, reset)) == pytest.approx(float(fd), rel=1e-5)


@pytest.mark.parametrize("t", [0.0, 1.0, 4.0])
def test_swap_delta_at_fixing_date_holds_the_new_coupon(params, t):
    """At a fixing date the delta is that of the period just fixed, as seen an instant later."""
    spec = make_atm_swap(params, 5.0)
    r, h, eps = 0.027, 1e-6, 1e-9
    fd = (value_swap(params, spec, r + h, t + eps, r) - value_swap(params, spec, r - h, t + eps, r)) / (2 * h)
    assert float(swap_delta(params, spec, r, t)) == pytest.approx(float(fd), rel=1e-5)


def test_deep_otm_swaption_vanishes(params):
    spec = make_swaption(params, 5.0, strike=make_swaption(params, 5.0).strike + 0.5)
    v = float(value_swaption(params, spec, params.phi(4.99), 4.99))
    assert v < 1e-6 * spec.notional


def test_zero_vol_swaption_is_discounted_intrinsic(flat_curve):
    p = HullWhiteParams(0.05, 1e-10, flat_curve)
    atm = make_swaption(p, 5.0).strike
    for k in (atm - 0.005, atm + 0.005):
        spec = make_swaption(p, 5.0, strike=k)
        r0 = p.initial_short_rate()
        intrinsic = max(float(forward_swap_value(p, spec, r0, 0.0)), 0.0)
        assert abs(float(value_swaption(p, spec, r0, 0.0)) - intrinsic) < 1e-6 * N


def test_swaption_matches_direct_monte_carlo(params):
    spec = make_swaption(params, 5.0, 5.0, N)
    v = float(value_swaption(params, spec, params.initial_short_rate(), 0.0))
    mc, se = swaption_mc(0.05, 0.01, 0.02, 5.0, 5.0, spec.strike, N, 200_000, seed=2024)
    assert abs(v - mc) / mc < 0.005
    assert abs(v - mc) < 4 * se


@pytest.mark.parametrize("t,r", [(0.0, 0.02), (2.0, 0.045), (4.5, -0.01)])
def test_put_call_parity(params, t, r):
    payer = make_swaption(params, 5.0)
    receiver = replace(payer, underlying=replace(payer.underlying, pay_fixed=False))
    lhs = float(value_swaption(params, payer, r, t) - value_swaption(params, receiver, r, t))
    rhs = float(forward_swap_value(params, payer, r, t))
    assert abs(lhs - rhs) <= 1e-8 * N


def test_swaption_monotone_in_rate_and_strike(params):
    spec = make_swaption(params, 3.0)
    r = np.linspace(-0.03, 0.09, 25)
    v = value_swaption(params, spec, r, 1.0)
    assert np.all(np.diff(v) > 0)
    ks = spec.strike + np.linspace(-0.02, 0.02, 9)
    prices = [float(value_swaption(params, replace(spec, underlying=spec.underlying.with_rate(k)), 0.02, 0.0))
              for k in ks]
    assert np.all(np.diff(prices) < 0)
    # payer price is convex in strike
    assert np.all(np.diff(prices, 2) > -1e-9 * N)


def test_swaption_after_expiry(params):
    spec = make_swaption(params, 3.0)
    with pytest.raises(ValueError):
        value_swaption(params, spec, 0.02, 3.5)
    assert value_trade(params, spec, 0.02, 3.5) == 0.0


def test_swaption_at_expiry_is_cash_intrinsic(params):
    spec = make_swaption(params, 3.0)
    r = np.array([-0.01, 0.02, 0.05])
    np.testing.assert_allclose(value_swaption(params, spec, r, 3.0),
                               np.maximum(value_swap(params, spec.underlying, r, 3.0), 0.0))


def test_swaption_delta_positive_for_payer(params):
    spec = make_swaption(params, 5.0)
    d = swaption_delta(params, spec, np.array([0.0, 0.02, 0.04]), 1.0)
    assert np.all(d > 0)


def test_swaption_rejects_misaligned_underlying(params):
    with pytest.raises(ValueError):
        SwaptionSpec(3.0, SwapSpec(N, 0.02, True, 2.0, 7.0))


def test_swap_schedule_validation():
    with pytest.raises(ValueError):
        SwapSpec(N, 0.02, True, 0.0, 2.5)
    with pytest.raises(ValueError):
        SwapSpec(N, 0.02, True, 3.0, 2.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.05, 0.12), st.floats(0.0, 4.9))
def test_parity_property(r, t):
    p = HullWhiteParams(0.05, 0.01, DiscountCurve.flat(0.02))
    payer = make_swaption(p, 5.0)
    receiver = replace(payer, underlying=replace(payer.underlying, pay_fixed=False))
    lhs = float(value_swaption(p, payer, r, t) - value_swaption(p, receiver, r, t))
    assert abs(lhs - float(forward_swap_value(p, payer, r, t))) <= 1e-8 * N


@pytest.fixture(scope="module")
def swap_cube(params):
    ns = NettingSet(make_atm_swap(params, 5.0))
    paths = simulate_paths(params, TimeGrid.monthly(5.0), 10_000, seed=21, extra_times=ns.fixing_times())
    return ns, paths, build_value_cube(params, ns, paths)


@pytest.fixture(scope="module")
def swaption_cube(params):
    ns = NettingSet(make_swaption(params, 5.0))
    paths = simulate_paths(params, TimeGrid.monthly(5.0), 10_000, seed=22)
    return ns, paths, build_value_cube(params, ns, paths)


def test_cube_first_column_identical(swap_cube, swaption_cube):
    for _, _, cube in (swap_cube, swaption_cube):
        assert np.all(cube.values[:, 0] == cube.values[0, 0])


def test_swap_cube_zero_at_maturity(swap_cube):
    _, _, cube = swap_cube
    assert np.all(cube.values[:, -1] == 0.0)


def test_cube_lag_values_align(swap_cube, params):
    ns, paths, cube = swap_cube
    k = 30
    s = cube.lag_times[k]
    np.testing.assert_array_equal(cube.lag_values[:, k], build_value_cube(params, ns, paths).lag_values[:, k])
    assert s == pytest.approx(cube.times[k] - 10 / 365, abs=1e-12)


def test_deflated_swaption_is_martingale(swaption_cube, params):
    ns, paths, cube = swaption_cube
    v0 = cube.values[0, 0]
    for k in (12, 36, 60):
        d = paths.deflator_at(cube.times[k]) * cube.values[:, k]
        se = d.std(ddof=1) / np.sqrt(d.size)
        assert abs(d.mean() - v0) < 3 * se


def test_deflated_swap_plus_paid_flows_is_martingale(swap_cube, params):
    ns, paths, cube = swap_cube
    spec = ns.trade
    for k in (18, 30, 54):
        t = cube.times[k]
        total = paths.deflator_at(t) * cube.values[:, k]
        for pay in spec.float_dates[spec.float_dates <= t]:
            flow = settled_flows(params, spec, paths, pay - 1e-6, pay)
            total = total + paths.deflator_at(pay) * flow
        se = total.std(ddof=1) / np.sqrt(total.size)
        assert abs(total.mean() - cube.values[0, 0]) < 3 * se + 1e-9 * N


def test_settled_flows_window(swap_cube, params):
    ns, paths, cube = swap_cube
    # month 12 sits on a payment date, its MPoR window holds that coupon
    k = 12
    assert np.any(cube.settled_flows[:, k] != 0.0)
    assert np.all(cube.settled_flows[:, 6] == 0.0)
