import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dnfkpp.barenblatt import barenblatt, barenblatt_eval
from dnfkpp.critical_speed import critical_speed
from dnfkpp.errors import (ClippingExcess, ConfigError, StabilityCollapse,
                           WindowTooShort)
from dnfkpp.params import logistic, make_params, pseudo_linear_params
from dnfkpp.pde import (BoundaryCondition, DatumKind, FrontRecord, Grid, InitialDatum,
                        PdeState, check_domain, domain_time, explicit_dt,
                        free_boundary_check, initial_state, level_position, plateau,
                        positivity_persistence_check, run_until, solve_tridiagonal,
                        spreading_speed, step, support_edge)

LOGISTIC = logistic()


def constant(value):
    return InitialDatum(DatumKind.CUSTOM, values=lambda x: np.full(x.shape, value))


def cell_average(spec, grid, t, n=64):
    xg, wg = np.polynomial.legendre.leggauss(n)
    pts = grid.x[:, None] + 0.5 * grid.dx * xg[None, :]
    return (barenblatt_eval(spec, pts, t) * wg[None, :]).sum(1) / 2


# grid -----------------------------------------------------------------------

def test_grid_geometry():
    g = Grid(10.0, 100)
    assert g.dx == pytest.approx(0.2)
    assert g.x[0] == pytest.approx(-9.9) and g.x[-1] == pytest.approx(9.9)
    assert g.geometry_factor == 1.0
    r = Grid(10.0, 100, radial=True, N=3)
    assert r.faces[0] == 0.0
    assert r.volume.sum() == pytest.approx(1000.0 / 3.0)


@pytest.mark.parametrize("kw", [dict(L=-1.0, J=10), dict(L=1.0, J=1), dict(L=1.0, J=10, N=2)])
def test_grid_rejects_bad_input(kw):
    with pytest.raises(ConfigError):
        Grid(**kw)


def test_datum_range_is_validated():
    g = Grid(5.0, 50)
    with pytest.raises(ConfigError):
        initial_state(make_params(2, 2), g, constant(1.5))
    with pytest.raises(ConfigError):
        initial_state(make_params(2, 2), g, InitialDatum(DatumKind.CUSTOM, values=np.zeros(3)))


def test_plateau_support_is_exact():
    g = Grid(10.0, 200)
    u = plateau(0.3, 2.0).evaluate(g, 2.0)
    assert set(np.unique(u)) == {0.0, 0.3}
    assert np.all(u[np.abs(g.x) > 2.0] == 0.0)


def test_cyclic_reduction_matches_dense_solve():
    rng = np.random.default_rng(4)
    for n in (1, 2, 7, 64, 100):
        a, c = -rng.random(n), -rng.random(n)
        b = 2.5 + rng.random(n)
        d = rng.random(n)
        A = np.diag(b) + np.diag(a[1:], -1) + np.diag(c[:-1], 1)
        assert np.allclose(solve_tridiagonal(a, b, c, d), np.linalg.solve(A, d), atol=1e-13)


# steps ----------------------------------------------------------------------

@pytest.mark.parametrize("mp", [(1, 2), (2, 2), (2, 3), (2, 1.5)])
@pytest.mark.parametrize("value", [0.0, 1.0])
def test_equilibria_are_fixed(mp, value):
    P = make_params(*mp)
    g = Grid(5.0, 100)
    s = initial_state(P, g, constant(value))
    for _ in range(50):
        s = step(P, LOGISTIC, g, s)
    assert np.all(s.u == value)


def test_support_grows_at_most_one_cell_per_step():
    P = make_params(2, 2)
    g = Grid(20.0, 400)
    s = initial_state(P, g, plateau(0.5, 2.0))
    pos = np.nonzero(s.u > 0)[0]
    lo, hi = pos[0], pos[-1]
    for _ in range(300):
        s = step(P, LOGISTIC, g, s)
        pos = np.nonzero(s.u > 0)[0]
        assert lo - pos[0] <= 1 and pos[-1] - hi <= 1
        lo, hi = pos[0], pos[-1]
    assert hi > 0.5 * g.J + 2.0 / g.dx


@pytest.mark.parametrize("mp", [(1, 2), (2, 2), (3, 2), (2, 3), (2, 1.5), (1.5, 1.8)])
def test_range_preserved_with_small_clip_ledger(mp):
    P = make_params(*mp)
    g = Grid(15.0, 300)
    res = run_until(P, LOGISTIC, g, plateau(0.8, 3.0), 3.0, probe_every=0.5)
    u = np.asarray(res.state.u, dtype=float)
    assert u.min() >= 0.0 and u.max() <= 1.0
    assert max(res.state.clip_history) <= 1e-12


def test_oversized_step_is_rejected():
    P = make_params(2, 2)
    g = Grid(5.0, 100)
    s = initial_state(P, g, plateau(1.0, 1.0))
    with pytest.raises(ClippingExcess):
        step(P, LOGISTIC, g, s, dt=10.0)
    with pytest.raises(StabilityCollapse):
        step(P, LOGISTIC, g, s, dt=1e-16)
    with pytest.raises(ConfigError):
        step(P, LOGISTIC, g, s, safety=2.0)


PAIR_PARAMS = [(1.0, 2.0), (2.0, 2.0), (3.0, 2.0), (2.0, 3.0), (1.0, 2.5)]


@settings(max_examples=20, deadline=None, derandomize=True)
@given(seed=st.integers(0, 2 ** 32 - 1), which=st.integers(0, len(PAIR_PARAMS) - 1))
def test_comparison_principle(seed, which):
    P = make_params(*PAIR_PARAMS[which])
    g = Grid(10.0, 120)
    rng = np.random.default_rng(seed)
    hi = np.where(rng.random(g.J) < 0.3, 0.0, rng.random(g.J))
    lo = hi * rng.random(g.J)
    a = PdeState(0.0, lo)
    b = PdeState(0.0, hi.copy())
    for _ in range(1000):
        dt = min(explicit_dt(P, LOGISTIC, g, a.u, 0.2 / max(1.0, P.p - 1.0)),
                 explicit_dt(P, LOGISTIC, g, b.u, 0.2 / max(1.0, P.p - 1.0)))
        a = step(P, LOGISTIC, g, a, dt=dt)
        b = step(P, LOGISTIC, g, b, dt=dt)
        assert np.all(a.u <= b.u)


def test_radial_one_dimension_matches_symmetric_line():
    P = make_params(2, 2)
    line = Grid(10.0, 200)
    half = Grid(10.0, 100, radial=True, N=1)
    datum = plateau(0.6, 2.5)
    a = initial_state(P, line, datum)
    b = initial_state(P, half, datum)
    for _ in range(500):
        dt = explicit_dt(P, LOGISTIC, line, a.u, 0.2)
        a = step(P, LOGISTIC, line, a, dt=dt)
        b = step(P, LOGISTIC, half, b, dt=dt)
    assert np.max(np.abs(a.u[100:] - b.u)) <= 1e-10


def test_radial_mass_is_conserved_without_reaction():
    P = make_params(2, 2)
    g = Grid(10.0, 100, radial=True, N=3)
    res = run_until(P, None, g, plateau(0.6, 2.0), 1.0, probe_every=0.25)
    mass = res.diagnostics["mass"]
    assert max(mass) - min(mass) <= 1e-12 * mass[0]


def test_dirichlet_boundary_loses_mass():
    P = make_params(1, 2)
    g = Grid(3.0, 60, bc=BoundaryCondition.DIRICHLET0)
    res = run_until(P, None, g, constant(0.5), 1.0, probe_every=0.25)
    assert res.diagnostics["mass"][-1] < res.diagnostics["mass"][0]


def barenblatt_order(mp, J=240):
    P = make_params(*mp)
    spec = barenblatt(P, 1, 1.0)
    L = 3.0 * spec.support_radius(2.0)
    errs = []
    for n in (J, 2 * J):
        g = Grid(L, n)
        d = InitialDatum(DatumKind.CUSTOM, values=cell_average(spec, g, 1.0))
        res = run_until(P, None, g, d, 1.0, probe_every=1.0)
        errs.append(np.max(np.abs(res.state.u - cell_average(spec, g, 2.0))))
    return math.log2(errs[0] / errs[1])


def test_barenblatt_tracking_order():
    assert barenblatt_order((2, 2)) >= 0.8


@pytest.mark.parametrize("mp", [(3, 2), (2, 2.5)])
def test_barenblatt_order_follows_front_regularity(mp):
    # the profile vanishes like distance^((p-1)/gamma) at its edge, which caps
    # the sup-norm order when that power is below one
    P = make_params(*mp)
    assert barenblatt_order(mp) == pytest.approx(min(1.0, (P.p - 1.0) / P.gamma), abs=0.1)


# diagnostics ------------------------------------------------------------------

def test_spreading_speed_of_exact_line():
    t = np.linspace(0.0, 10.0, 101)
    fr = FrontRecord(0.5, list(t), list(3.0 * t + 1.0))
    c, se = spreading_speed(fr, (0.0, 10.0))
    assert c == pytest.approx(3.0, abs=1e-12)
    assert se < 1e-10


def test_spreading_speed_needs_enough_samples():
    t = np.linspace(0.0, 10.0, 101)
    fr = FrontRecord(0.5, list(t), list(2.0 * t))
    with pytest.raises(WindowTooShort):
        spreading_speed(fr, (0.0, 1.0))


def test_level_position_interpolates():
    g = Grid(5.0, 10)
    u = np.clip(1.0 - (g.x + 5.0) / 10.0, 0, 1)
    assert level_position(g, u, 0.5) == pytest.approx(0.0)
    assert math.isnan(level_position(g, np.zeros(10), 0.5))


def test_free_boundary_check_on_zero_state():
    P = make_params(2, 2)
    g = Grid(5.0, 10)
    ok, edge = free_boundary_check(PdeState(0.0, np.zeros(10)), P, g)
    assert ok and edge == -5.0
    assert support_edge(g, np.zeros(10)) == -5.0


def test_free_boundary_classification():
    slow = make_params(2, 2)
    g = Grid(20.0, 400)
    res = run_until(slow, LOGISTIC, g, plateau(0.5, 2.0), 2.0, probe_every=0.5)
    ok, edge = free_boundary_check(res.state, slow, g)
    assert ok and 2.0 < edge < 20.0
    pl = pseudo_linear_params(1.5)
    res = run_until(pl, LOGISTIC, g, plateau(0.5, 2.0), 2.0, probe_every=0.5)
    ok, edge = free_boundary_check(res.state, pl, g)
    assert not ok and edge is None


def test_positivity_persists_with_reaction():
    P = make_params(2, 2)
    g = Grid(40.0, 800)
    assert positivity_persistence_check(P, LOGISTIC, g, plateau(1e-3, 1.0), 4.0, 20.0)


def test_positivity_fails_without_reaction():
    P = make_params(2, 2)
    g = Grid(40.0, 800)
    assert not positivity_persistence_check(P, None, g, plateau(1e-3, 1.0), 4.0, 20.0)


def test_domain_rule():
    check_domain(Grid(100.0, 10), 2.0, 30.0, 5.0)
    with pytest.raises(ConfigError):
        check_domain(Grid(60.0, 10), 2.0, 30.0, 5.0)
    assert domain_time(95.0, 2.0, 5.0) == pytest.approx(30.0)


def _front_speed(P, datum, L=60.0, J=1500, T=30.0):
    res = run_until(P, LOGISTIC, Grid(L, J), datum, T, probes=(0.5,), probe_every=0.25)
    return spreading_speed(res.fronts[0.5], (2 * T / 3, T))[0]


def test_slow_diffusion_front_speed():
    P = make_params(2, 2)
    c = critical_speed(P, LOGISTIC, 1e-8).c_star
    assert _front_speed(P, plateau(0.5, 3.0)) == pytest.approx(c, rel=0.05)


def test_exponential_datum_at_critical_decay_spreads_at_critical_speed():
    P = make_params(2, 2)
    c = critical_speed(P, LOGISTIC, 1e-8).c_star
    datum = InitialDatum(DatumKind.EXP_DECAY, a0=1.0, rate=1.0 / c)
    assert _front_speed(P, datum) == pytest.approx(c, rel=0.05)
