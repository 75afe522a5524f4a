import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import EX1
from oracles import hand_stepped_omd
from refprice import (
    ConfigurationError,
    DomainError,
    MarketParams,
    PriceState,
    Regularizer,
    StepSchedule,
    classify_schedule,
    mirror_step,
    simulate,
    simulate_induced,
    sne_closed_form,
)

EX = MarketParams(**EX1)
Q1 = Regularizer.quadratic(1.0)
START = PriceState(1.0, 1.0, 1.5)
FIG2 = {
    "0.1/t^2": (StepSchedule.power(0.1, 2), StepSchedule.power(0.1, 2)),
    "1/t": (StepSchedule.power(1, 1), StepSchedule.power(1, 1)),
    "0.6": (StepSchedule.constant(0.6), StepSchedule.constant(0.6)),
    "(1-a)/beta": (StepSchedule.constant(0.6 / 2), StepSchedule.constant(0.6 / 3)),
}


# -- regularizers

def test_quadratic_map():
    reg = Regularizer.quadratic(3.0)
    assert reg.value(2.0) == 6.0 and reg.derivative(2.0) == 6.0
    assert reg.inverse_derivative(6.0) == 2.0 and reg.sigma == 3.0


@pytest.mark.parametrize("reg", [Regularizer.quadratic(1.0), Regularizer.quadratic(9.0),
                                 Regularizer.custom(lambda x: math.cosh(x), math.sinh, 1.0)])
def test_inverse_round_trip_and_monotone(reg):
    grid = np.linspace(0.0, 3.0, 61)
    for x in grid:
        assert reg.inverse_derivative(reg.derivative(x)) == pytest.approx(x, abs=1e-10)
    d = [reg.derivative(x) for x in grid]
    assert np.all(np.diff(d) > 0)


def test_entropic_map():
    reg = Regularizer.entropic(2.0)
    for x in np.linspace(0.5, 3.0, 26):
        assert reg.inverse_derivative(reg.derivative(x)) == pytest.approx(x, abs=1e-12)
    assert reg.sigma == 0.5


def test_custom_numeric_inverse_failure_is_configuration_error():
    flat = Regularizer.custom(lambda x: 0.0, lambda x: math.tanh(x), 1.0)
    with pytest.raises(ConfigurationError):
        mirror_step(flat, 1.0, 1.0, 5.0)  # tanh never reaches tanh(1) - 5


def test_bad_regularizer_parameters():
    with pytest.raises(ConfigurationError):
        Regularizer.quadratic(0.0)
    with pytest.raises(ConfigurationError):
        Regularizer.custom(abs, abs, sigma=-1.0)


def test_argmin_on_box():
    assert Q1.argmin_on_box(1.0, 2.0) == 1.0
    shifted = Regularizer.custom(lambda x: (x - 1.5) ** 2, lambda x: 2 * (x - 1.5), 2.0,
                                 inverse_derivative=lambda v: v / 2 + 1.5)
    assert shifted.argmin_on_box(1.0, 2.0) == 1.5


# -- mirror step

def test_mirror_step_examples():
    assert mirror_step(Regularizer.quadratic(2.0), 1.5, 0.1, 2.0) == pytest.approx(1.4)
    assert mirror_step(Q1, 1.0, 0.5, -1.55) == pytest.approx(1.775)
    for reg in (Q1, Regularizer.quadratic(7.0), Regularizer.entropic(2.0)):
        assert mirror_step(reg, 1.3, 0.7, 0.0) == pytest.approx(1.3, abs=1e-15)


def test_mirror_step_negative_step_rejected():
    with pytest.raises(DomainError):
        mirror_step(Q1, 1.0, -0.1, 1.0)


# -- schedules

def test_schedule_values():
    assert StepSchedule.power(1, 1).values(4).tolist() == [1, 1 / 2, 1 / 3, 1 / 4]
    assert StepSchedule.power(0.1, 2).values(3) == pytest.approx([0.1, 0.025, 0.1 / 9])
    assert StepSchedule.power(2, 1, offset=1).values(2).tolist() == [1.0, 2 / 3]
    assert StepSchedule.constant(0.6).values(3).tolist() == [0.6] * 3
    assert StepSchedule.from_table([0.3, 0.2]).values(2).tolist() == [0.3, 0.2]
    with pytest.raises(ConfigurationError):
        StepSchedule.from_table([0.3]).values(2)


@given(c=st.floats(0.01, 10), eta=st.floats(0.01, 3), off=st.floats(0, 5))
def test_power_schedule_nonincreasing_and_positive(c, eta, off):
    v = StepSchedule.power(c, eta, off).values(200)
    assert np.all(v > 0) and np.all(np.diff(v) <= 0)


@pytest.mark.parametrize("kwargs", [dict(kind="power", c=-1.0), dict(kind="power", c=1.0, offset=-1.0),
                                    dict(kind="wiggle"), dict(kind="table", table=(0.1, -0.1))])
def test_bad_schedules(kwargs):
    with pytest.raises(ConfigurationError):
        StepSchedule(**kwargs)


def test_classifier_table():
    one_over_t = classify_schedule(StepSchedule.power(1, 1))
    assert (one_over_t.sum_diverges, one_over_t.sum_sq_converges, one_over_t.limit_zero) == (True, True, True)
    assert one_over_t.label == "sne-convergent"
    summable = classify_schedule(StepSchedule.power(0.1, 2))
    assert summable.sum_diverges is False and summable.label == "may-converge-off-sne"
    const = classify_schedule(StepSchedule.constant(0.6))
    assert (const.sum_diverges, const.sum_sq_converges, const.limit_zero) == (True, False, False)
    assert const.label == "non-vanishing"
    slow = classify_schedule(StepSchedule.power(1, 0.5))
    assert (slow.sum_diverges, slow.sum_sq_converges) == (True, False)
    table = classify_schedule(StepSchedule.from_table([1, 0.5, 0.1, 0.001]))
    assert table.sum_diverges is None and table.sum_sq_converges is None
    assert table.limit_zero is True


# -- simulation

def test_simulation_matches_hand_stepped_oracle():
    # Asymmetric steps expose any sequential (non-simultaneous) update.
    e1, e2 = [0.9, 0.4, 0.7], [0.2, 1.1, 0.5]
    tr = simulate(EX, Q1, Q1, StepSchedule.from_table(e1), StepSchedule.from_table(e2), START, 3)
    oracle = hand_stepped_omd(EX.alpha, EX.beta, EX.delta, EX.gamma, EX.theta, EX.a, 1, 2, 1.0,
                              e1, e2, (1, 1, 1.5), 3)
    assert np.array_equal(tr.states(), oracle)


def test_trajectory_columns_consistent():
    tr = simulate(EX, Q1, Q1, *FIG2["1/t"], START, 50)
    assert tr.t.tolist() == list(range(1, 51))
    assert np.allclose(tr.g1, 4 * tr.p1 - (5 + 0.4 * tr.p2 + 0.1 * tr.r))
    assert np.allclose(tr.rev2, tr.p2 * tr.d2)
    r_next = EX.a * tr.r[:-1] + (1 - EX.a) * (0.8 * tr.p1[:-1] + 0.2 * tr.p2[:-1])
    assert np.array_equal(tr.r[1:], r_next)
    with pytest.raises(ValueError):
        tr.p1[0] = 3.0


def test_initial_proxies_from_map_minimizer():
    tr = simulate(EX, Q1, Q1, *FIG2["1/t"], 1.5, 5)
    assert (tr.y1[0], tr.y2[0], tr.r[0]) == (1.0, 1.0, 1.5)


@pytest.mark.parametrize("name", list(FIG2))
def test_deterministic_and_in_box(name):
    a = simulate(EX, Q1, Q1, *FIG2[name], START, 2000)
    b = simulate(EX, Q1, Q1, *FIG2[name], START, 2000)
    assert np.array_equal(a.states(), b.states())
    assert np.array_equal(a.y1, b.y1)
    st_ = a.states()
    assert st_.min() >= EX.p_lo and st_.max() <= EX.p_hi


def test_harmonic_regime_reaches_equilibrium():
    tr = simulate(EX, Q1, Q1, *FIG2["1/t"], START, 10_000)
    s = sne_closed_form(EX)
    assert math.dist((tr.p1[-1], tr.p2[-1]), s.prices()) <= 1e-3
    assert abs(tr.r[-1] - s.r_star) <= 1e-3


def test_summable_regime_stalls_off_equilibrium():
    tr = simulate(EX, Q1, Q1, *FIG2["0.1/t^2"], START, 100_000)
    assert tr.states()[-1] == pytest.approx((1.21, 1.18, 1.20), abs=0.02)


def test_cycle_regime_keeps_moving():
    tr = simulate(EX, Q1, Q1, *FIG2["0.6"], START, 1001)
    assert np.abs(np.diff(tr.p1[899:1001])).max() >= 0.01


def test_frozen_firms_reference_converges_at_rate_a():
    zero = StepSchedule.constant(0.0)
    tr = simulate(EX, Q1, Q1, zero, zero, PriceState(1.2, 1.7, 1.9), 40)
    assert np.all(tr.p1 == 1.2) and np.all(tr.p2 == 1.7)
    limit = 0.8 * 1.2 + 0.2 * 1.7
    gaps = tr.r - limit
    assert np.allclose(gaps[1:], EX.a * gaps[:-1], rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("name", list(FIG2))
def test_induced_game_matches_memory_rule(name):
    a = simulate(EX, Q1, Q1, *FIG2[name], START, 10_000)
    b = simulate_induced(EX, Q1, Q1, *FIG2[name], START, 10_000)
    assert np.abs(a.states() - b.states()).max() <= 1e-9
    assert b.yn is not None


def test_induced_generic_nature_map_agrees():
    # Route nature through the generic mirror step with a custom quadratic map.
    nat = Regularizer.custom(lambda x: 0.5 * x * x, lambda x: x, 1.0, inverse_derivative=lambda v: v)
    a = simulate(EX, Q1, Q1, *FIG2["1/t"], START, 2000)
    b = simulate_induced(EX, Q1, Q1, *FIG2["1/t"], START, 2000, reg_n=nat)
    assert np.abs(a.states() - b.states()).max() <= 1e-9


def test_induced_zero_nature_step_freezes_reference():
    b = simulate_induced(EX, Q1, Q1, *FIG2["1/t"], START, 100, sched_n=StepSchedule.constant(0.0))
    assert np.all(b.r == 1.5)


def test_induced_stationary_at_stability():
    zero = StepSchedule.constant(0.0)
    r = 0.8 * 1.3 + 0.2 * 1.6
    b = simulate_induced(EX, Q1, Q1, zero, zero, PriceState(1.3, 1.6, r), 50)
    assert np.all(b.p1 == 1.3) and np.all(b.p2 == 1.6)
    assert np.allclose(b.r, r, atol=1e-15)


def test_bad_horizon_and_init():
    with pytest.raises(DomainError):
        simulate(EX, Q1, Q1, *FIG2["1/t"], START, 0)
    with pytest.raises(DomainError):
        simulate(EX, Q1, Q1, *FIG2["1/t"], PriceState(1, 1, 3), 5)
