import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import EX1, seeded_markets
from oracles import interior_profile, random_market, sne_linear_system
from refprice import (
    DomainError,
    MarketParams,
    SingularityError,
    best_response,
    best_response_dynamics,
    best_response_iterates,
    gradient,
    largest_best_response_profile,
    nature_gradient,
    sne_closed_form,
)
from refprice.equilibrium import sne_denominator

EX = MarketParams(**EX1)


def test_baseline_sne(ex1):
    s = sne_closed_form(ex1)
    assert tuple(round(v, 2) for v in s.as_tuple()) == (1.41, 1.28, 1.39)
    assert s.as_tuple() == pytest.approx((1.4127, 1.2803, 1.3862), abs=1e-4)
    assert s.interior
    assert s.r_star == pytest.approx(0.8 * s.p1_star + 0.2 * s.p2_star, abs=1e-12)


def test_symmetric_market_gives_equal_components():
    p = MarketParams(alpha=(4, 4), beta=(2, 2), delta=(0.3, 0.3), gamma=(0.2, 0.2),
                     theta=(0.5, 0.5), a=0.3, p_lo=1, p_hi=2)
    s = sne_closed_form(p)
    assert s.p1_star == pytest.approx(s.p2_star, abs=1e-15)
    assert s.r_star == pytest.approx(s.p1_star, abs=1e-15)


def test_sne_matches_linear_solve_on_seeded_markets():
    for p in seeded_markets(100):
        s = sne_closed_form(p)
        assert s.interior
        oracle = sne_linear_system(p.alpha, p.beta, p.delta, p.gamma, p.theta)
        assert np.max(np.abs(np.array(s.as_tuple()) - oracle)) <= 1e-10
        assert abs(gradient(p, 1, *s.as_tuple())) < 1e-10
        assert abs(gradient(p, 2, *s.as_tuple())) < 1e-10
        assert abs(nature_gradient(p, *s.as_tuple())) < 1e-12


def test_boundary_candidate_is_flagged_not_interior():
    p = MarketParams(**{**EX1, "p_lo": 1.3, "p_hi": 2.0})
    s = sne_closed_form(p)
    assert not s.interior  # p2* = 1.28 sits below the box


def test_singular_denominator_guard(monkeypatch):
    import refprice.equilibrium as eq
    monkeypatch.setattr(eq, "sne_denominator", lambda params: 0.0)
    with pytest.raises(SingularityError):
        eq.sne_closed_form(EX)
    assert sne_denominator(EX) > 0


def test_best_response_reference_values(ex1):
    assert best_response(ex1, 1, 1.18, 1.20) == pytest.approx(1.398, abs=5e-4)
    assert round(best_response(ex1, 1, 1.18, 1.20), 2) == 1.40
    s = sne_closed_form(ex1)
    assert best_response(ex1, 1, s.p2_star, s.r_star) == pytest.approx(s.p1_star, abs=1e-14)
    assert best_response(ex1, 2, s.p1_star, s.r_star) == pytest.approx(s.p2_star, abs=1e-14)


def test_best_response_upper_clamp():
    p = MarketParams(**{**EX1, "alpha": (7.9, 6)})
    assert best_response(p, 1, 2.0, 2.0) == 2.0


def test_best_response_rejects_out_of_box(ex1):
    with pytest.raises(DomainError):
        best_response(ex1, 1, 2.5, 1.0)


@given(lo=st.floats(1.0, 2.0), hi=st.floats(1.0, 2.0), r=st.floats(1.0, 2.0))
def test_best_response_monotone(lo, hi, r):
    lo, hi = min(lo, hi), max(lo, hi)
    for i in (1, 2):
        assert best_response(EX, i, lo, r) <= best_response(EX, i, hi, r)
        assert best_response(EX, i, r, lo) <= best_response(EX, i, r, hi)


def test_largest_profile_at_reference_star(ex1):
    s = sne_closed_form(ex1)
    assert largest_best_response_profile(ex1, s.r_star) == pytest.approx(s.prices(), abs=1e-8)


def test_largest_profile_at_r_one(ex1):
    # Independent 2x2 solve of p1 = (5.1 + 0.4 p2)/4, p2 = (6.5 + 0.7 p1)/6.
    oracle = interior_profile(ex1.alpha, ex1.beta, ex1.delta, ex1.gamma, 1.0)
    got = largest_best_response_profile(ex1, 1.0)
    assert got == pytest.approx(oracle, abs=1e-10)
    assert got == pytest.approx((1.3997, 1.2466), abs=1e-4)


def test_largest_profile_clamp_dominated():
    p = MarketParams(alpha=(9, 9), beta=(2, 2), delta=(0.3, 0.3), gamma=(0.2, 0.2),
                     theta=(0.5, 0.5), a=0.5, p_lo=1.0, p_hi=1.5)
    assert largest_best_response_profile(p, 1.0) == (1.5, 1.5)


def test_largest_profile_seeded_random_r():
    rng = np.random.default_rng(7)
    for p in seeded_markets(10, seed=11):
        for r in rng.uniform(p.p_lo, p.p_hi, 20):
            got = largest_best_response_profile(p, r)
            oracle = interior_profile(p.alpha, p.beta, p.delta, p.gamma, r)
            if all(p.p_lo <= v <= p.p_hi for v in oracle):
                assert got == pytest.approx(oracle, abs=1e-8)
            else:
                # Clamp-consistent: a fixed point of the clamped map.
                assert best_response(p, 1, got[1], r) == pytest.approx(got[0], abs=1e-10)
                assert best_response(p, 2, got[0], r) == pytest.approx(got[1], abs=1e-10)


@given(seed=st.integers(0, 10**6), u=st.floats(0, 1))
def test_iterates_nonincreasing_from_top(seed, u):
    spec = random_market(np.random.default_rng(seed))
    assume(spec is not None)
    p = MarketParams(**spec)
    r = p.p_lo + u * (p.p_hi - p.p_lo)
    its = np.array(best_response_iterates(p, r))
    assert its[0].tolist() == [p.p_hi, p.p_hi]
    assert np.all(np.diff(its, axis=0) <= 0)


def test_dynamics_from_below(ex1):
    tr = best_response_dynamics(ex1, 1.0, 200)
    assert 0.8 * 1.3997 + 0.2 * 1.2466 >= 1.0
    assert np.all(np.diff(tr.r) >= 0)
    assert np.all(np.diff(tr.p1) >= 0) and np.all(np.diff(tr.p2) >= 0)
    s = sne_closed_form(ex1)
    assert np.abs(tr.states()[-1] - s.as_tuple()).max() <= 1e-6


def test_dynamics_from_above(ex1):
    tr = best_response_dynamics(ex1, 2.0, 200)
    assert np.all(np.diff(tr.r) <= 0)
    assert np.all(np.diff(tr.p1) <= 0) and np.all(np.diff(tr.p2) <= 0)
    s = sne_closed_form(ex1)
    assert np.abs(tr.states()[-1] - s.as_tuple()).max() <= 1e-6


def test_dynamics_from_reference_star_is_constant(ex1):
    s = sne_closed_form(ex1)
    tr = best_response_dynamics(ex1, s.r_star, 50)
    assert np.abs(tr.states() - s.as_tuple()).max() <= 1e-12


@given(seed=st.integers(0, 10**6), u=st.floats(0, 1))
def test_dynamics_monotone_and_stable_limit(seed, u):
    spec = random_market(np.random.default_rng(seed))
    assume(spec is not None)
    p = MarketParams(**spec)
    r1 = p.p_lo + u * (p.p_hi - p.p_lo)
    tr = best_response_dynamics(p, r1, 150)
    dr = np.diff(tr.r)
    assert np.all(dr >= 0) or np.all(dr <= 0)
    up = np.all(dr >= 0)
    for col in (tr.p1, tr.p2):
        d = np.diff(col)
        assert np.all(d >= 0) if up else np.all(d <= 0)
    # Stability: the reference price stops moving in the limit.
    assert abs(tr.gn[-1]) < 1e-3


def test_dynamics_rejects_bad_horizon(ex1):
    with pytest.raises(DomainError):
        best_response_dynamics(ex1, 1.0, 0)
