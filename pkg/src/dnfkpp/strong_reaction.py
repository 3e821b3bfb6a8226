"""Travelling waves for strong reactions f(u) = u^n (1 - u).

The balance parameter q = [gamma + (n-1)(p-1)]/(p-1) is the power of X in
f_mp(X) = m X^q (1 - X). It decides existence (q >= 0) and, through the
behaviour of the orbits at X = 0, whether waves reach zero at a finite point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from scipy.optimize import brentq

from .errors import ConfigError
from .params import PSEUDO_LINEAR_TOL, DiffusionParams, strong_power
from .phase_plane import OrbitOptions, TerminalKind, integrate_from_S
from .wave_profile import WaveKind, critical_wave, wave_profile


class StrongClass(enum.Enum):
    NO_TWS = "NoTWs"
    ALL_FINITE = "AllFinite"
    CRITICAL_FINITE_OTHERS_FINITE = "CriticalFiniteOthersFinite"
    CRITICAL_FINITE_OTHERS_POSITIVE = "CriticalFiniteOthersPositive"
    ALL_POSITIVE = "AllPositive"


def q_parameter(params: DiffusionParams, n: float) -> float:
    g = 0.0 if params.pseudo_linear else params.gamma
    q = (g + (n - 1.0) * (params.p - 1.0)) / (params.p - 1.0)
    return 0.0 if abs(q) < PSEUDO_LINEAR_TOL else q


@dataclass(frozen=True)
class StrongReactionCase:
    params: DiffusionParams
    n: float
    q: float = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.n):
            raise ConfigError("n must be finite")
        object.__setattr__(self, "q", q_parameter(self.params, self.n))

    @property
    def reaction(self):
        return strong_power(self.n)


def endpoint_power(params: DiffusionParams, kappa: float) -> float:
    """Power of X in d xi/dX = m X^(beta-1)/Z at X -> 0 when Z ~ a X^kappa."""
    return params.beta - kappa - 1.0


def is_finite_endpoint(power: float) -> bool:
    return power > -1.0


def classify(case: StrongReactionCase) -> StrongClass:
    """Classification from (q, n).

    The finiteness of each wave follows from the endpoint power: the critical
    orbit ends with Z -> const (kappa = 0) and faster ones follow
    Z ~ (m/c) X^q (kappa = q), or stop on the axis when q = 0.
    """
    q, n, params = case.q, case.n, case.params
    if q < 0:
        return StrongClass.NO_TWS
    if params.pseudo_linear:
        # beta = 0 makes every endpoint power <= -1
        return StrongClass.ALL_POSITIVE
    if q == 0:
        return StrongClass.ALL_FINITE
    critical = is_finite_endpoint(endpoint_power(params, 0.0))
    faster = is_finite_endpoint(endpoint_power(params, q))
    assert critical
    return (StrongClass.CRITICAL_FINITE_OTHERS_FINITE if faster
            else StrongClass.CRITICAL_FINITE_OTHERS_POSITIVE)


def expected_kinds(cls: StrongClass):
    """(kind at c*, kind above c*) implied by a class."""
    F, P = WaveKind.FINITE, WaveKind.POSITIVE
    return {StrongClass.ALL_FINITE: (F, F),
            StrongClass.CRITICAL_FINITE_OTHERS_FINITE: (F, F),
            StrongClass.CRITICAL_FINITE_OTHERS_POSITIVE: (F, P),
            StrongClass.ALL_POSITIVE: (P, P)}.get(cls)


@dataclass
class NoConnectionCertificate:
    """For q < 0, f_mp blows up at X = 0; below X_c(c), where f_mp exceeds
    max_Z (cZ - Z^p) = (p-1)(c/p)^(p/(p-1)), every orbit has Z increasing as X
    decreases and is driven past C = c^(1/(p-1)). Each sampled speed records
    its threshold and the numerically observed escape."""

    q: float
    speeds: list
    thresholds: list
    escaped: list

    @property
    def holds(self) -> bool:
        return self.q < 0 and all(self.escaped)


def no_connection_certificate(case: StrongReactionCase, speeds=(0.25, 0.5, 1.0, 2.0, 4.0)):
    if case.q >= 0:
        raise ConfigError("a no-connection certificate needs q < 0")
    params, r = case.params, case.reaction
    m, p, q = params.m, params.p, case.q
    thresholds, escaped = [], []
    for c in speeds:
        top = (p - 1.0) * (c / p) ** (p / (p - 1.0))
        # solved in ln X: m X^q (1-X) spans many decades near 0
        g = lambda s: math.log(m) + q * s + math.log1p(-math.exp(s)) - math.log(top)
        thresholds.append(math.exp(brentq(g, -700.0, -1e-12)))
        tr = integrate_from_S(params, r, c, OrbitOptions(X_floor=1e-12))
        escaped.append(tr.terminal.kind is TerminalKind.ESCAPED_UP
                       and tr.meta.get("decided_by") == "escape_certificate")
    return NoConnectionCertificate(q, list(speeds), thresholds, escaped)


@dataclass
class VerificationReport:
    case: StrongReactionCase
    symbolic: StrongClass
    numerical: StrongClass | None
    c_star: float | None
    kinds: dict
    origin_law: dict
    certificate: NoConnectionCertificate | None = None
    notes: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return self.symbolic is self.numerical


def _measured_kappa(profile_orbit_X, profile_orbit_Z, lo=1e-8, hi=1e-6):
    mask = (profile_orbit_X >= lo) & (profile_orbit_X <= hi) & (profile_orbit_Z > 0)
    if mask.sum() < 5:
        return math.nan
    A = np.column_stack([np.ones(mask.sum()), np.log(profile_orbit_X[mask])])
    coef, *_ = np.linalg.lstsq(A, np.log(profile_orbit_Z[mask]), rcond=None)
    return float(coef[1])


def verify_numerically(case: StrongReactionCase, factors=(1.5, 2.0),
                       tol: float = 1e-9) -> VerificationReport:
    """Rebuild waves at c* and at factor*c*, read off their kinds, and check
    the near-origin law Z X^-q -> m/c on supercritical orbits when q > 0.

    A wave is finite when its endpoint power beta - kappa - 1 exceeds -1,
    with kappa taken from the end state the orbit actually reached and
    cross-checked against the slope of ln Z over X in [1e-8, 1e-6].
    """
    symbolic = classify(case)
    params, r = case.params, case.reaction
    if case.q < 0:
        cert = no_connection_certificate(case)
        num = StrongClass.NO_TWS if cert.holds else None
        return VerificationReport(case, symbolic, num, None, {}, {}, cert)
    crit, res = critical_wave(params, r, tol=tol)
    c_star = res.c_star
    kinds = {"critical": crit.kind}
    law = {}
    notes = []
    for k in factors:
        c = k * c_star
        prof, orbit = wave_profile(params, r, c, X_floor=1e-12, return_orbit=True)
        kinds[k] = prof.kind
        if orbit.terminal.kind is TerminalKind.REACHED_X_ZERO:
            kappa_num = _measured_kappa(orbit.X, orbit.Z)
            notes.append(f"c={c:.6g}: ends on the axis, measured kappa {kappa_num:.3g}")
        elif case.q > 0:
            kappa_num = _measured_kappa(orbit.X, orbit.Z)
            X = 1e-6
            Z_at = float(np.interp(math.log(X), np.log(orbit.X[::-1]), orbit.Z[::-1]))
            law[k] = {"ratio": Z_at * X ** (-case.q), "expected": params.m / c,
                      "kappa": kappa_num}
            if abs(kappa_num - case.q) > 0.05 * max(case.q, 1.0):
                notes.append(f"c={c:.6g}: measured kappa {kappa_num:.4g} differs from q")
    sup = {kinds[k] for k in factors}
    numerical = None
    if len(sup) == 1:
        above = sup.pop()
        table = {(WaveKind.FINITE, WaveKind.FINITE): (StrongClass.ALL_FINITE
                                                      if res.closed_form else
                                                      StrongClass.CRITICAL_FINITE_OTHERS_FINITE),
                 (WaveKind.FINITE, WaveKind.POSITIVE): StrongClass.CRITICAL_FINITE_OTHERS_POSITIVE,
                 (WaveKind.POSITIVE, WaveKind.POSITIVE): StrongClass.ALL_POSITIVE}
        numerical = table.get((crit.kind, above))
    return VerificationReport(case, symbolic, numerical, c_star, kinds, law, None, notes)


def case_grid():
    """(m, p, n) cases with gamma >= 0 on the standard test grid."""
    out = []
    for m in (1.0, 2.0, 3.0):
        for p in (1.5, 2.0, 3.0):
            if m * (p - 1.0) - 1.0 < -1e-12:
                continue
            for n in (-1.0, 0.0, 0.5, 1.0, 2.0):
                out.append((m, p, n))
    return out


def _verify_job(args):
    m, p, n, tol = args
    from .params import make_params
    return verify_numerically(StrongReactionCase(make_params(m, p), n), tol=tol)


def verify_grid(cases, tol: float = 1e-9, workers: int = 1):
    """verify_numerically over many cases, optionally in worker processes."""
    jobs = [(c.params.m, c.params.p, c.n, tol) for c in cases]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_verify_job, jobs))
    return [_verify_job(j) for j in jobs]
