"""Critical speed c*(m, p): bisection on the orbit dichotomy, closed form when
f_mp has a positive limit at the origin, and sweeps along (m, p) paths."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import BracketFailure, ConfigError, NoRealRoots
from .params import (DiffusionParams, Reaction, Regime, fmp_exponent, fmp_origin_limit,
                     make_params)
from .phase_plane import (OrbitOptions, classify_speed, integrate_from_S, lambda_roots,
                          touching_speed)


@dataclass(frozen=True)
class CriticalSpeedResult:
    c_star: float
    bracket: tuple
    evaluations: int
    regime: Regime
    terminal_at_c_star: float | None
    closed_form: bool
    c0_bound: float


def c0_upper_bound(params: DiffusionParams, r: Reaction) -> float:
    """Isocline-touching speed c0; strict upper bound for c* when f_mp(0) = 0,
    and equal to c* when f_mp(0) > 0."""
    return touching_speed(params, r)


def pseudo_linear_roots(params: DiffusionParams, r: Reaction, c: float):
    if not params.pseudo_linear:
        raise ConfigError("the lambda roots are defined for gamma = 0")
    return lambda_roots(c, params.p, params.m * r.fprime0)


def _closed_form(params, r, tol, opts):
    F0 = fmp_origin_limit(params, r)
    p = params.p
    c = p * (F0 / (p - 1.0)) ** ((p - 1.0) / p)
    lo, hi = c * (1 - 10 * tol), c * (1 + 10 * tol)
    below = classify_speed(params, r, lo, opts)
    above = classify_speed(params, r, hi, opts)
    if below.supercritical or not above.supercritical:
        raise BracketFailure("classifier does not flip around the closed-form speed",
                             (below.trace, above.trace))
    lam = lambda_roots(c, p, F0)[1]
    return CriticalSpeedResult(c, (lo, hi), 4, params.regime, lam, True, c)


def bisection_floor(q: float) -> float:
    """X_floor for classifying orbits when f_mp ~ X^q: deep enough that
    X_floor^q <= 1e-12, so small q does not leave the decision to the guide
    while f_mp still looks constant."""
    if q <= 0:
        return OrbitOptions().X_floor
    return max(1e-300, min(OrbitOptions().X_floor, math.exp(math.log(1e-12) / q)))


def critical_speed(params: DiffusionParams, r: Reaction, tol: float = 1e-6,
                   opts: OrbitOptions | None = None) -> CriticalSpeedResult:
    if not tol > 1e-14:
        raise ConfigError("tolerance must exceed 1e-14")
    opts = opts or OrbitOptions(X_floor=bisection_floor(fmp_exponent(params, r)))
    F0 = fmp_origin_limit(params, r)
    if math.isinf(F0):
        trace = integrate_from_S(params, r, 1.0, opts)
        raise BracketFailure("f_mp is unbounded at the origin: no speed connects S to "
                             "the axis", (trace,))
    if F0 > 0:
        return _closed_form(params, r, tol, opts)

    c0 = touching_speed(params, r)
    evals = 0
    hi = c0
    v_hi = classify_speed(params, r, hi, opts)
    evals += 1
    lo = 1e-3 * c0
    v_lo = classify_speed(params, r, lo, opts)
    evals += 1
    widen = 0
    while v_lo.supercritical and widen < 6:
        lo *= 0.1
        v_lo = classify_speed(params, r, lo, opts)
        evals += 1
        widen += 1
    if v_lo.supercritical or not v_hi.supercritical:
        raise BracketFailure("classifier does not flip on the initial bracket",
                             (v_lo.trace, v_hi.trace))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v = classify_speed(params, r, mid, opts)
        evals += 1
        if v.supercritical:
            hi = mid
        else:
            lo = mid
    c_star = 0.5 * (lo + hi)
    end = integrate_from_S(params, r, c_star, opts)
    z_end = end.terminal.value if end.terminal.value is not None else float(end.Z[-1])
    return CriticalSpeedResult(c_star, (lo, hi), evals, params.regime, z_end, False, c0)


def classify_at(params, r, c, opts=None) -> bool:
    """True when c admits a connection (orbit from S reaches the axis or O)."""
    return classify_speed(params, r, c, opts).supercritical


@dataclass(frozen=True)
class SweepPoint:
    m: float
    p: float
    gamma: float
    c_star: float
    c0_bound: float
    evaluations: int


def _sweep_one(args):
    m, p, r, tol = args
    params = make_params(m, p)
    res = critical_speed(params, r, tol)
    return SweepPoint(params.m, params.p, params.gamma, res.c_star, res.c0_bound,
                      res.evaluations)


def continuity_sweep(path, r: Reaction, tol: float = 1e-6, workers: int = 1):
    """c* at each (m, p) of the path, in order."""
    jobs = [(float(m), float(p), r, tol) for m, p in path]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]


def sweep_modulus(points) -> float:
    """Largest |c* jump| per unit (m, p) distance between neighbours."""
    worst = 0.0
    for a, b in zip(points, points[1:]):
        d = math.hypot(b.m - a.m, b.p - a.p)
        if d > 0:
            worst = max(worst, abs(b.c_star - a.c_star) / d)
    return worst


__all__ = ["CriticalSpeedResult", "critical_speed", "c0_upper_bound", "pseudo_linear_roots",
           "continuity_sweep", "sweep_modulus", "SweepPoint", "classify_at", "NoRealRoots"]
