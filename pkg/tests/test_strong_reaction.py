import pytest
from hypothesis import given, strategies as st

from dnfkpp.critical_speed import critical_speed
from dnfkpp.errors import ConfigError
from dnfkpp.params import logistic, make_params, pseudo_linear_params, strong_power
from dnfkpp.strong_reaction import (StrongClass, StrongReactionCase, case_grid, classify,
                                    endpoint_power, expected_kinds, is_finite_endpoint,
                                    no_connection_certificate, q_parameter,
                                    verify_numerically)
from dnfkpp.wave_profile import WaveKind, critical_wave, wave_profile


def case(m, p, n):
    return StrongReactionCase(make_params(m, p), n)


@pytest.mark.parametrize("n, expected", [
    (1.0, StrongClass.CRITICAL_FINITE_OTHERS_POSITIVE),
    (0.5, StrongClass.CRITICAL_FINITE_OTHERS_FINITE),
    (0.0, StrongClass.ALL_FINITE),
    (-1.0, StrongClass.NO_TWS),
])
def test_classify_examples(n, expected):
    assert classify(case(2, 2, n)) is expected


def test_q_values():
    assert case(2, 2, 1.0).q == 1.0
    assert case(2, 2, 0.5).q == 0.5
    assert case(2, 2, -1.0).q == -1.0


@given(m=st.floats(1.0, 4.0), p=st.floats(1.2, 4.0), n=st.floats(-2.0, 3.0))
def test_q_recomputed_matches(m, p, n):
    P = make_params(m, p) if m * (p - 1) - 1 > 1e-6 else None
    if P is None:
        return
    c = StrongReactionCase(P, n)
    assert c.q == q_parameter(P, n)
    assert c.q == pytest.approx((P.gamma + (n - 1) * (p - 1)) / (p - 1), abs=1e-12)


def test_pseudo_linear_classes():
    P = pseudo_linear_params(2.0)
    assert classify(StrongReactionCase(P, 1.0)) is StrongClass.ALL_POSITIVE
    assert classify(StrongReactionCase(P, 2.0)) is StrongClass.ALL_POSITIVE
    assert classify(StrongReactionCase(P, 0.5)) is StrongClass.NO_TWS


def test_non_finite_n_rejected():
    with pytest.raises(ConfigError):
        StrongReactionCase(make_params(2, 2), float("nan"))


def test_endpoint_power_rule():
    P = make_params(2, 2)
    assert endpoint_power(P, 0.0) == pytest.approx(0.0)
    assert endpoint_power(P, 1.0) == pytest.approx(-1.0)
    assert is_finite_endpoint(endpoint_power(P, 0.0))
    assert not is_finite_endpoint(endpoint_power(P, 1.0))
    assert expected_kinds(StrongClass.NO_TWS) is None


def test_case_grid_covers_admissible_pairs():
    cases = case_grid()
    assert len(cases) == 40
    assert all(m * (p - 1) - 1 >= -1e-12 for m, p, _ in cases)


@pytest.mark.parametrize("mp", [(2, 2), (1, 3), (3, 1.5)])
def test_n_one_reduces_to_logistic(mp):
    P = make_params(*mp)
    tol = 1e-8
    a = critical_speed(P, strong_power(1.0), tol).c_star
    b = critical_speed(P, logistic(), tol).c_star
    assert abs(a - b) <= 2 * tol


def test_no_connection_certificate():
    cert = no_connection_certificate(case(2, 2, -1.0))
    assert cert.holds
    assert all(0 < x < 1 for x in cert.thresholds)
    with pytest.raises(ConfigError):
        no_connection_certificate(case(2, 2, 1.0))


def test_sublinear_strong_reaction_waves_are_finite():
    P, r = make_params(2, 2), strong_power(0.5)
    crit, res = critical_wave(P, r, tol=1e-9)
    assert crit.kind is WaveKind.FINITE
    prof = wave_profile(P, r, 1.5 * res.c_star, X_floor=1e-12)
    assert prof.kind is WaveKind.FINITE


def test_linear_strong_reaction_fast_wave_is_positive():
    P, r = make_params(2, 2), strong_power(1.0)
    c = critical_speed(P, r, 1e-9).c_star
    assert wave_profile(P, r, 1.5 * c, X_floor=1e-12).kind is WaveKind.POSITIVE


@pytest.mark.parametrize("mpn", [(2, 2, 1.0), (2, 2, 2.0), (1, 3, 1.0)])
def test_origin_law_for_fast_orbits(mpn):
    rep = verify_numerically(case(*mpn), factors=(2.0,))
    law = rep.origin_law
    assert law[2.0]["ratio"] == pytest.approx(law[2.0]["expected"], rel=0.05)


@pytest.mark.parametrize("mpn", [(2, 2, 0.5), (2, 2, 0.0), (2, 2, 1.0), (3, 2, 2.0),
                                 (2, 2, -1.0), (2, 1.5, 0.5)])
def test_symbolic_and_numerical_agree(mpn):
    rep = verify_numerically(case(*mpn))
    assert rep.agree, (rep.symbolic, rep.numerical, rep.notes)
