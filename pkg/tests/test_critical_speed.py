import math

import pytest

from dnfkpp.critical_speed import (bisection_floor, c0_upper_bound, continuity_sweep,
                                   critical_speed, pseudo_linear_roots, sweep_modulus)
from dnfkpp.errors import BracketFailure, ConfigError, NoRealRoots
from dnfkpp.params import logistic, make_params, strong_power
from dnfkpp.phase_plane import OrbitOptions, classify_speed

R = logistic()


def test_linear_case():
    res = critical_speed(make_params(1, 2), R)
    assert abs(res.c_star - 2.0) <= 1e-3 and res.closed_form


def test_pseudo_linear_closed_form():
    res = critical_speed(make_params(2, 1.5), R)
    assert res.c_star == pytest.approx(1.5 * 4 ** (1 / 3), rel=1e-14)


def test_c0_examples():
    assert c0_upper_bound(make_params(1, 2), R) == pytest.approx(2.0)
    assert c0_upper_bound(make_params(2, 2), R) == pytest.approx(2 * math.sqrt(0.5), rel=1e-10)


@pytest.mark.parametrize("m,p", [(2, 2), (3, 2), (2, 1.8), (2, 3), (1.5, 2.5)])
def test_bracket_and_bound(m, p):
    P = make_params(m, p)
    tol = 1e-7
    res = critical_speed(P, R, tol)
    lo, hi = res.bracket
    assert hi - lo <= tol and lo < res.c_star < hi
    assert res.c_star < c0_upper_bound(P, R)
    # endpoints re-classify to opposite terminals at halved integrator tolerances
    opts = OrbitOptions(rtol=5e-11, atol=5e-14, X_floor=bisection_floor(P.beta))
    assert not classify_speed(P, R, lo, opts).supercritical
    assert classify_speed(P, R, hi, opts).supercritical


def test_m2_p2_value():
    assert critical_speed(make_params(2, 2), R, 1e-9).c_star == pytest.approx(1.0, abs=1e-8)


def test_pseudo_linear_roots():
    P = make_params(1, 2)
    assert pseudo_linear_roots(P, R, 2.0) == pytest.approx((1, 1, 1), abs=1e-7)
    assert pseudo_linear_roots(P, R, 2.5) == pytest.approx((0.5, 1, 2), abs=1e-12)
    with pytest.raises(NoRealRoots):
        pseudo_linear_roots(P, R, 2.0 * (1 - 1e-6))
    with pytest.raises(ConfigError):
        pseudo_linear_roots(make_params(2, 2), R, 2.5)


@pytest.mark.parametrize("m,p,k", [(2, 2, 4.0), (3, 2, 0.25), (2, 3, 9.0), (2, 1.5, 3.0)])
def test_scaling_covariance(m, p, k):
    P, tol = make_params(m, p), 1e-8
    base = critical_speed(P, R, tol).c_star
    scaled = critical_speed(P, logistic(k), tol).c_star
    assert abs(scaled - k ** ((p - 1) / p) * base) <= 5 * tol * max(1.0, k ** ((p - 1) / p))


def test_gamma_zero_consistency():
    """Linear extrapolation in gamma of c* along m(p-1) = 1 + gamma hits the
    closed form within 1e-2 relative."""
    p = 2.0
    g1, g2 = 1e-2, 1e-3
    c1 = critical_speed(make_params((1 + g1) / (p - 1), p), R, 1e-8).c_star
    c2 = critical_speed(make_params((1 + g2) / (p - 1), p), R, 1e-8).c_star
    extrap = c2 - (c1 - c2) * g2 / (g1 - g2)
    closed = critical_speed(make_params(1 / (p - 1), p), R).c_star
    assert abs(extrap / closed - 1) <= 1e-2


def test_sweep_single_point():
    (pt,) = continuity_sweep([(2, 2)], R, 1e-7)
    assert pt.c_star == pytest.approx(critical_speed(make_params(2, 2), R, 1e-7).c_star)


def test_sweep_gap_shrinks_towards_linear():
    pts = continuity_sweep([(1, 2 + 2.0 ** -k) for k in range(1, 6)], R, 1e-7)
    gaps = [abs(s.c_star - 2) for s in pts]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_constant_gamma_path_continuity():
    """gamma = 1 along m(p-1) = 2: the largest neighbour jump halves with the spacing."""
    def path(n):
        return [(m, 1 + 2 / m) for m in (2 + i / n for i in range(n + 1))]
    coarse = continuity_sweep(path(4), R, 1e-8)
    fine = continuity_sweep(path(8), R, 1e-8)
    jump = lambda pts: max(abs(a.c_star - b.c_star) for a, b in zip(pts, pts[1:]))
    assert jump(fine) < 0.6 * jump(coarse)
    assert sweep_modulus(fine) < 2 * sweep_modulus(coarse)


def test_singular_reaction_has_no_speed():
    with pytest.raises(BracketFailure):
        critical_speed(make_params(2, 2), strong_power(-1.0))


def test_tolerance_guard():
    with pytest.raises(ConfigError):
        critical_speed(make_params(2, 2), R, 0.0)
