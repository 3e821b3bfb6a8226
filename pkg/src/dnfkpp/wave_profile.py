"""Wave profiles phi(xi) rebuilt from phase-plane orbits.

Along an orbit, d xi = m dX / (Z X^(1 - gamma/(p-1))), so the profile follows
from the orbit by quadrature. The integral is carried along with the orbit
integration (an extra ODE component).  Near X = 0 the integrand behaves like
X^(beta - kappa - 1) when Z ~ a X^kappa, which decides finite versus positive
waves; near X = 1 the seed law at S extends the profile analytically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .critical_speed import critical_speed
from .errors import ConfigError, SpeedAboveCritical, WindowTooShort
from .params import DiffusionParams, Reaction, fmp_origin_limit
from .phase_plane import (OrbitOptions, OrbitTrace, Terminal, TerminalKind, _cs_leg,
                          _Orbit, integrate_from_rc, integrate_from_S,
                          lambda_roots)


class WaveKind(enum.Enum):
    FINITE = "FinitePositiveTW"
    POSITIVE = "PositiveTW"
    CHANGE_SIGN = "ChangeSignTW"


class TailModel(enum.Enum):
    PURE_EXP = "PureExp"
    EXP_WITH_POWER = "ExpWithPowerPrefactor"
    POWER_FREE_BOUNDARY = "PowerFreeBoundary"


@dataclass
class TailFit:
    model: TailModel
    values: dict
    residual: float
    window: tuple
    n_samples: int


@dataclass
class WaveProfile:
    xi: np.ndarray
    phi: np.ndarray
    z: np.ndarray
    c: float
    kind: WaveKind
    p: float
    xi0: float | None = None
    xi1: float | None = None
    tailfit: TailFit | None = None
    synthetic: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def flux(self) -> np.ndarray:
        """|(phi^m)'|^(p-2) (phi^m)' = X |Z|^(p-2) Z."""
        return self.phi * np.sign(self.z) * np.abs(self.z) ** (self.p - 1.0)

    def shifted(self, delta: float) -> "WaveProfile":
        return replace(self, xi=self.xi + delta,
                       xi0=None if self.xi0 is None else self.xi0 + delta,
                       xi1=None if self.xi1 is None else self.xi1 + delta)

    def reflected(self) -> "WaveProfile":
        """phi(-xi): the same curve for the speed -c."""
        return replace(self, xi=-self.xi[::-1], phi=self.phi[::-1], z=-self.z[::-1],
                       c=-self.c,
                       synthetic=None if self.synthetic is None else self.synthetic[::-1],
                       xi0=None if self.xi1 is None else -self.xi1,
                       xi1=None if self.xi0 is None else -self.xi0)

    def truncated_subsolution(self):
        """Barrier shape from a change-sign profile: the peak value for xi <= 0,
        the decreasing branch on [0, xi0], zero beyond."""
        if self.kind is not WaveKind.CHANGE_SIGN:
            raise ConfigError("truncation applies to change-sign profiles")
        peak = float(self.phi.max())
        right = self.xi >= 0
        xi = np.concatenate([[self.xi[0]], self.xi[right], [self.xi0 + 1.0]])
        phi = np.concatenate([[peak], self.phi[right], [0.0]])
        return xi, phi

    def __call__(self, x):
        """Profile value at arbitrary abscissae (linear interpolation)."""
        return np.interp(x, self.xi, self.phi, left=self.phi[0], right=self.phi[-1])


def _endpoint_power(beta: float, kappa: float) -> float:
    """Power of X in d xi/dX near X = 0 when Z ~ a X^kappa."""
    return beta - kappa - 1.0


def reconstruct_profile(params: DiffusionParams, orbit: OrbitTrace,
                        xi_anchor: float = 0.0) -> WaveProfile:
    """Profile from an orbit integrated with ``track_xi``.

    The anchor puts phi = 1/2 at xi = xi_anchor.
    """
    if orbit.xi is None:
        raise ConfigError("orbit was integrated without tracking xi")
    if orbit.terminal.kind in (TerminalKind.ESCAPED_UP, TerminalKind.CROSSED_ZERO):
        raise ConfigError("orbit does not end on an admissible connection")
    if np.any(orbit.Z <= 0):
        raise ConfigError("admissible orbits keep Z > 0")
    meta = orbit.meta
    m, p, beta = params.m, params.p, params.beta
    X = orbit.X.copy()
    Z = orbit.Z.copy()
    xi = orbit.xi.copy()
    info = {"splice": None}
    kind = WaveKind.POSITIVE
    xi0 = None
    synth_lo = []

    X_end, Z_end, xi_end = float(X[-1]), float(Z[-1]), float(xi[-1])
    if orbit.terminal.kind is TerminalKind.HIT_RC:
        kappa = 0.0
    elif orbit.terminal.kind is TerminalKind.HIT_ORIGIN:
        kappa = meta["q"]
    else:
        kappa = 0.0
    power = _endpoint_power(beta, kappa)
    info["endpoint_power"] = power
    if power > -1.0:
        kind = WaveKind.FINITE
        a = Z_end / X_end ** kappa
        e = beta - kappa
        xi0 = xi_end - m / a * X_end ** e / e
        info["splice"] = {"X": X_end, "method": "power-law remainder", "a": a, "exponent": e}
        Xs = np.logspace(math.log10(X_end), math.log10(X_end) - 8.0, 33)[1:]
        xs = xi0 + m / a * Xs ** e / e
        off = xs > xi0  # samples that round onto xi0 would break phi = 0 there
        synth_lo = (Xs[off], a * Xs[off] ** kappa, xs[off])

    # analytic continuation towards S
    coeff, ex, xp = meta["seed_coeff"], meta["seed_exp"], meta["x_patch"]
    gaps = xp * np.logspace(-0.25, -5.0, 20)
    if ex == 1.0:
        xs_hi = m / coeff * np.log(xp / gaps)
    else:
        xs_hi = m / coeff * (gaps ** (1.0 - ex) - xp ** (1.0 - ex)) / (ex - 1.0)
    X_hi = 1.0 - gaps
    Z_hi = coeff * gaps ** ex

    parts_X = [X_hi[::-1], X]
    parts_Z = [Z_hi[::-1], Z]
    parts_xi = [xs_hi[::-1], xi]
    synth = [np.ones(gaps.size, bool), np.zeros(X.size, bool)]
    if synth_lo:
        parts_X.append(synth_lo[0])
        parts_Z.append(synth_lo[1])
        parts_xi.append(synth_lo[2])
        synth.append(np.ones(synth_lo[0].size, bool))
    Xa = np.concatenate(parts_X)
    Za = np.concatenate(parts_Z)
    xia = np.concatenate(parts_xi)
    sy = np.concatenate(synth)
    if kind is WaveKind.FINITE:
        left = xi0 - np.linspace(1.0, 0.0, 11)[:-1][::-1] * 5.0
        Xa = np.concatenate([Xa, [0.0], np.zeros(left.size)])
        Za = np.concatenate([Za, [meta["C"] if kappa == 0 else 0.0], np.zeros(left.size)])
        xia = np.concatenate([xia, [xi0], left[::-1]])
        sy = np.concatenate([sy, [True], np.ones(left.size, bool)])

    order = np.argsort(xia, kind="stable")
    xia, Xa, Za, sy = xia[order], Xa[order], Za[order], sy[order]
    keep = np.concatenate([[True], np.diff(xia) > 0])
    xia, Xa, Za, sy = xia[keep], Xa[keep], Za[keep], sy[keep]
    pos = Xa > 0
    half = float(np.interp(0.5, Xa[pos], xia[pos]))
    shift = xi_anchor - half
    xia = xia + shift
    if xi0 is not None:
        xi0 += shift
    info.update({"terminal": orbit.terminal.tag, "critical": bool(meta.get("critical", False)),
                 "structure": meta["structure"]})
    return WaveProfile(xia, Xa, Za, orbit.c, kind, p, xi0=xi0, synthetic=sy, meta=info)


def wave_profile(params: DiffusionParams, r: Reaction, c: float, xi_anchor: float = 0.0,
                 X_floor: float = 1e-10, return_orbit: bool = False):
    """Profile for a speed above the critical one (or at it, pseudo-linear case).

    With ``return_orbit`` the underlying orbit is returned as well.
    """
    opts = OrbitOptions(track_xi=True, continue_to_floor=True, X_floor=X_floor)
    orbit = integrate_from_S(params, r, c, opts)
    if not orbit.supercritical:
        raise ConfigError(f"c = {c} is below the critical speed: no admissible wave")
    prof = reconstruct_profile(params, orbit, xi_anchor)
    prof.meta["reaction"] = r.describe()
    return (prof, orbit) if return_orbit else prof


def critical_wave(params: DiffusionParams, r: Reaction, xi_anchor: float = 0.0,
                  tol: float = 1e-13, X_match: float = 0.5, X0: float = 1e-10):
    """Profile of the wave at c*.

    When f_mp(0) = 0 the c* orbit runs into R_c, and integrating it from S is
    ill conditioned near X = 0 (deviations grow like 1/X). The orbit is
    therefore assembled from the S side down to ``X_match`` and from the R_c
    side (started at ``X0``) up to ``X_match``; the gap in Z at the matching
    point is stored in meta["match_gap"].
    """
    res = critical_speed(params, r, tol)
    c = res.c_star
    if res.closed_form:
        opts = OrbitOptions(track_xi=True, continue_to_floor=True)
        orbit = integrate_from_S(params, r, c * (1.0 + 1e-12), opts)
        orbit.meta["critical"] = True
        prof = reconstruct_profile(params, orbit, xi_anchor)
        prof.meta["c_star"] = c
        return prof, res
    upper = integrate_from_S(params, r, c, OrbitOptions(track_xi=True, X_floor=X_match))
    if upper.terminal.kind is not TerminalKind.HIT_RC:
        raise ConfigError("S-side orbit at c* ended before the matching point")
    Xl, Zl, xil = integrate_from_rc(params, r, c, X0, X_match)
    xil = xil + (upper.xi[-1] - xil[-1])
    gap = abs(float(Zl[-1]) - float(upper.Z[-1]))
    X = np.concatenate([upper.X, Xl[::-1][1:]])
    Z = np.concatenate([upper.Z, Zl[::-1][1:]])
    xi = np.concatenate([upper.xi, xil[::-1][1:]])
    meta = dict(upper.meta)
    meta.update({"critical": True, "match_gap": gap, "X_match": X_match})
    orbit = OrbitTrace(X, Z, Terminal(TerminalKind.HIT_RC, float(Z[-1]), False), c, xi,
                       True, meta)
    prof = reconstruct_profile(params, orbit, xi_anchor)
    prof.meta.update({"c_star": c, "match_gap": gap})
    return prof, res


# tails ---------------------------------------------------------------------------

def expected_tail(params: DiffusionParams, r: Reaction, c: float, critical: bool = False):
    """Leading-order tail law predicted for a positive wave at speed c."""
    m, p = params.m, params.p
    if params.pseudo_linear:
        F0 = fmp_origin_limit(params, r)
        lam1 = lambda_roots(c, p, F0)[0]
        if critical:
            return TailModel.EXP_WITH_POWER, {"rate": lam1 / m, "power": 2.0 / p}
        return TailModel.PURE_EXP, {"rate": lam1 / m}
    return TailModel.PURE_EXP, {"rate": r.fprime0 / c}


def _window(profile, lo, hi, min_samples=50, real_only=True):
    mask = (profile.phi >= lo) & (profile.phi <= hi)
    if real_only and profile.synthetic is not None:
        mask &= ~profile.synthetic
    if mask.sum() < min_samples:
        raise WindowTooShort(f"only {int(mask.sum())} samples with phi in [{lo}, {hi}]")
    return mask


def _fit_exp(xi, lphi):
    A = np.column_stack([np.ones_like(xi), xi])
    coef, *_ = np.linalg.lstsq(A, lphi, rcond=None)
    return coef


def _fit_exp_power(xi, lphi, rate):
    """ln phi - rate xi = ln a0 + power ln|xi - s|.

    The rate is the double-root value, so only the prefactor is fitted: over a
    window a few units of xi wide a free rate and the power are nearly
    collinear. The offset s of the asymptotic origin is found by a 1-D search
    with the other two coefficients solved linearly.
    """
    span = xi.max() - xi.min()
    target = lphi - rate * xi

    def solve(s):
        A = np.column_stack([np.ones_like(xi), np.log(np.abs(xi - s))])
        coef, *_ = np.linalg.lstsq(A, target, rcond=None)
        return coef, float(np.sum((A @ coef - target) ** 2))

    top = xi.max()
    res = minimize_scalar(lambda s: solve(s)[1], bounds=(top + 1e-3 * span, top + 40 * span),
                          method="bounded", options={"xatol": 1e-10 * span})
    coef, _ = solve(res.x)
    return coef, float(res.x)


def fit_tail(profile: WaveProfile, params: DiffusionParams, r: Reaction | None = None,
             window=(1e-8, 1e-3)) -> TailFit:
    """Least-squares fit of ln phi over the window phi in [1e-8, 1e-3]."""
    if profile.kind is WaveKind.FINITE:
        expo = free_boundary_exponent(profile, params)
        fit = TailFit(TailModel.POWER_FREE_BOUNDARY, {"exponent": expo["exponent"]},
                      expo["residual"], expo["window"], expo["n_samples"])
        profile.tailfit = fit
        return fit
    if profile.kind is not WaveKind.POSITIVE:
        raise ConfigError("tail fits apply to admissible waves")
    mask = _window(profile, *window)
    xi = profile.xi[mask]
    lphi = np.log(profile.phi[mask])
    critical = profile.meta.get("critical", False)
    if params.pseudo_linear and critical:
        if r is None:
            raise ConfigError("the prefactor fit needs the reaction for its rate")
        rate = expected_tail(params, r, profile.c, critical=True)[1]["rate"]
        coef, s = _fit_exp_power(xi, lphi, rate)
        model = coef[0] + rate * xi + coef[1] * np.log(np.abs(xi - s))
        values = {"rate": rate, "rate_fixed": True, "power": float(coef[1]), "shift": s,
                  "log_amplitude": float(coef[0])}
        kind = TailModel.EXP_WITH_POWER
    else:
        coef = _fit_exp(xi, lphi)
        model = coef[0] + coef[1] * xi
        values = {"rate": float(coef[1]), "log_amplitude": float(coef[0])}
        kind = TailModel.PURE_EXP
    resid = float(np.max(np.abs(np.expm1(lphi - model))))
    fit = TailFit(kind, values, resid, tuple(window), int(mask.sum()))
    profile.tailfit = fit
    return fit


def free_boundary_exponent(profile: WaveProfile, params: DiffusionParams,
                           window=(1e-6, 1e-3), side: str = "right") -> dict:
    """Log-log slope of phi against the distance to the free boundary.

    For finite waves the boundary is xi0 (phi vanishes to its left). For
    change-sign profiles ``side`` picks the right zero xi0 or the left one xi1.
    """
    if profile.kind is WaveKind.FINITE:
        d = profile.xi - profile.xi0
        zone = d > 0
    elif profile.kind is WaveKind.CHANGE_SIGN:
        if side == "right":
            d = profile.xi0 - profile.xi
            zone = profile.xi > 0
        else:
            d = profile.xi - profile.xi1
            zone = profile.xi < 0
    else:
        raise ConfigError("no free boundary on a positive wave")
    mask = _window(profile, *window) & zone & (d > 0)
    if mask.sum() < 50:
        raise WindowTooShort("too few samples next to the free boundary")
    ld = np.log(d[mask])
    lphi = np.log(profile.phi[mask])
    coef = _fit_exp(ld, lphi)
    resid = float(np.max(np.abs(np.expm1(lphi - coef[0] - coef[1] * ld))))
    return {"exponent": float(coef[1]), "residual": resid, "window": tuple(window),
            "n_samples": int(mask.sum())}


# change-sign waves ------------------------------------------------------------------

def _cs_profile(params, r, c, peak):
    ob = _Orbit(params, r, c, signed=True)
    m, p = params.m, params.p
    e = 1.0 / (p - 1.0)
    Xa, Za, xia = _cs_leg(ob, peak, 0.0, +1)
    Xb, Zb, xib = _cs_leg(ob, peak, 0.0, -1)

    def remainder(Xe, Ze):
        # |Z| X^(1/(p-1)) -> a, so xi - xi_zero ~ X^m / a and dphi/dxi ~ (a/m) phi^(1-m)
        a = abs(Ze) * Xe ** e
        return Xe ** m / a, a / m

    ra, aa = remainder(Xa[-1], Za[-1])
    rb, ab = remainder(Xb[-1], Zb[-1])
    xi1 = xia[-1] - ra
    xi0 = xib[-1] + rb
    xi = np.concatenate([[xi1], xia[::-1], xib[1:], [xi0]])
    X = np.concatenate([[0.0], Xa[::-1], Xb[1:], [0.0]])
    Z = np.concatenate([[np.inf], Za[::-1], Zb[1:], [-np.inf]])
    order = np.argsort(xi, kind="stable")
    xi, X, Z = xi[order], X[order], Z[order]
    keep = np.concatenate([[True], np.diff(xi) > 0])
    xi, X, Z = xi[keep], X[keep], Z[keep]
    sy = np.zeros(xi.size, bool)
    sy[0] = sy[-1] = True
    meta = {"slope_left": float(aa), "slope_right": float(ab), "peak": peak}
    return WaveProfile(xi, X, np.where(np.isfinite(Z), Z, 0.0), c, WaveKind.CHANGE_SIGN, p,
                       xi0=float(xi0), xi1=float(xi1), synthetic=sy, meta=meta)


def build_cs_tw(params: DiffusionParams, r: Reaction, c: float, peak: float,
                c_star: float | None = None) -> WaveProfile:
    """Change-sign profile of type 2 with maximum ``peak`` at xi = 0."""
    if not (0.0 < peak < 1.0):
        raise ConfigError("peak must lie in (0, 1)")
    if c <= 0:
        raise ConfigError("speed must be positive")
    if c_star is None:
        c_star = critical_speed(params, r, 1e-8).c_star
    if c >= c_star:
        raise SpeedAboveCritical(f"c = {c} is not below c* = {c_star}")
    return _cs_profile(params, r, c, peak)


# residual check ---------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


def weak_residual(profile: WaveProfile, r: Reaction, away: float = 1e-3,
                  min_dxi: float = 1e-4) -> float:
    """max over sample intervals of |c dphi - d(flux) - int f(phi)| / dxi.

    Intervals touching phi < ``away`` (free boundaries, synthetic extensions)
    are skipped, and samples closer than ``min_dxi`` are thinned so that
    round-off in xi is not amplified. The reaction integral uses
    Gauss-Legendre on a cubic spline of phi(xi).
    """
    ok = (profile.phi >= away) & (profile.phi <= 1.0 - 1e-9)
    if profile.synthetic is not None:
        ok &= ~profile.synthetic
    xi, phi, flux = profile.xi[ok], profile.phi[ok], profile.flux[ok]
    if xi.size < 4:
        raise WindowTooShort("too few samples for the residual check")
    spline_full = CubicSpline(xi, phi)
    keep = [0]
    for i in range(1, xi.size):
        if xi[i] - xi[keep[-1]] >= min_dxi:
            keep.append(i)
    xi, phi, flux = xi[keep], phi[keep], flux[keep]
    spline = spline_full
    a, b = xi[:-1], xi[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.clip(spline(pts), 0.0, 1.0)
    fv = np.vectorize(r.f)(vals)
    integral = (fv * _GL_W[None, :]).sum(axis=1) * half
    res = profile.c * np.diff(phi) - np.diff(flux) - integral
    return float(np.max(np.abs(res) / (b - a)))
