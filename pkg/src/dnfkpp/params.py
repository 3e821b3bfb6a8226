"""Diffusion parameters (m, p), reaction terms and the f'(0) rescaling."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import minimize_scalar

from .errors import ConfigError, DomainError, RegimeUnsupported

PSEUDO_LINEAR_TOL = 1e-12


class Regime(enum.Enum):
    SLOW = "slow"
    PSEUDO_LINEAR = "pseudo_linear"


@dataclass(frozen=True)
class DiffusionParams:
    """Exponents of the doubly nonlinear operator div(|grad u^m|^(p-2) grad u^m)."""

    m: float
    p: float
    gamma: float = field(init=False)
    mu: float = field(init=False)
    regime: Regime = field(init=False)

    def __post_init__(self):
        m, p = float(self.m), float(self.p)
        if not (m > 0 and math.isfinite(m)):
            raise ConfigError(f"m must be positive, got {self.m}")
        if not (p > 1 and math.isfinite(p)):
            raise ConfigError(f"p must exceed 1, got {self.p}")
        gamma = m * (p - 1) - 1
        if gamma < -PSEUDO_LINEAR_TOL:
            raise RegimeUnsupported(
                f"gamma = m(p-1)-1 = {gamma:.6g} < 0: fast diffusion is not supported")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "mu", (m - 1) * (p - 1))
        regime = Regime.PSEUDO_LINEAR if abs(gamma) <= PSEUDO_LINEAR_TOL else Regime.SLOW
        object.__setattr__(self, "regime", regime)

    @property
    def pseudo_linear(self) -> bool:
        return self.regime is Regime.PSEUDO_LINEAR

    @property
    def beta(self) -> float:
        """Exponent gamma/(p-1) of the near-origin power laws (0 when pseudo-linear)."""
        return 0.0 if self.pseudo_linear else self.gamma / (self.p - 1)


def make_params(m: float, p: float) -> DiffusionParams:
    return DiffusionParams(m, p)


def pseudo_linear_params(p: float) -> DiffusionParams:
    """Parameters on the line m(p-1) = 1, with m derived from p."""
    return DiffusionParams(1.0 / (p - 1.0), p)


class ReactionKind(enum.Enum):
    LOGISTIC = "logistic"
    STRONG_POWER = "strong_power"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class Reaction:
    """A KPP-type reaction f on [0, 1], stored as scale * base(u).

    Logistic: base = u(1-u).  StrongPower(n): base = u^n (1-u).
    Tabulated: monotone piecewise-cubic through samples, with the endpoint
    slopes pinned to the supplied f'(0) and f'(1).
    """

    kind: ReactionKind
    scale: float = 1.0
    n: float | None = None
    samples: tuple | None = None
    fprime0_given: float | None = None
    fprime1_given: float | None = None
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ConfigError("reaction scale must be positive")
        if self.kind is ReactionKind.STRONG_POWER:
            if self.n is None or not math.isfinite(self.n):
                raise ConfigError("StrongPower reaction needs a finite exponent n")
        if self.kind is ReactionKind.TABULATED:
            self._build_table()
        self._validate()

    def _build_table(self):
        if self.samples is None or self.fprime0_given is None or self.fprime1_given is None:
            raise ConfigError("Tabulated reaction needs samples, fprime0 and fprime1")
        u = np.asarray([s[0] for s in self.samples], dtype=float)
        fv = np.asarray([s[1] for s in self.samples], dtype=float)
        if u.size < 3 or np.any(np.diff(u) <= 0) or u[0] != 0.0 or u[-1] != 1.0:
            raise ConfigError("table abscissae must increase strictly from 0 to 1")
        if not (self.fprime0_given > 0 and self.fprime1_given < 0):
            raise ConfigError("tabulated reaction needs f'(0) > 0 and f'(1) < 0")
        slopes = PchipInterpolator(u, fv).derivative()(u)
        slopes[0] = self.fprime0_given
        slopes[-1] = self.fprime1_given
        object.__setattr__(self, "_spline", CubicHermiteSpline(u, fv, slopes))

    def _validate(self):
        grid = np.linspace(0.0, 1.0, 2001)
        inner = grid[1:-1]
        vals = np.array([self.f(x) for x in inner])
        if np.any(vals <= 0):
            raise ConfigError("reaction must be positive on (0, 1)")
        if abs(self.f(1.0)) > 1e-14:
            raise ConfigError("reaction must vanish at u = 1")
        if self.n is None or self.n > 0:
            if abs(self.f(0.0)) > 1e-14:
                raise ConfigError("reaction must vanish at u = 0")
        if self.kind is not ReactionKind.STRONG_POWER:
            full = np.concatenate([[self.f(0.0)], vals, [self.f(1.0)]])
            second = full[2:] - 2 * full[1:-1] + full[:-2]
            if np.any(second > 1e-12 * self.scale):
                raise ConfigError("logistic/tabulated reactions must be concave")

    # evaluators -----------------------------------------------------------
    def f(self, u: float) -> float:
        if self.kind is ReactionKind.LOGISTIC:
            return self.scale * u * (1.0 - u)
        if self.kind is ReactionKind.STRONG_POWER:
            if u == 0.0:
                return 0.0 if self.n > 0 else (self.scale if self.n == 0 else math.inf)
            return self.scale * u ** self.n * (1.0 - u)
        return float(self._spline(u))

    def f_array(self, u: np.ndarray) -> np.ndarray:
        """Vectorised f, preserving the dtype of ``u`` for the analytic kinds."""
        if self.kind is ReactionKind.LOGISTIC:
            return self.scale * u * (1 - u)
        if self.kind is ReactionKind.STRONG_POWER:
            pos = u > 0
            out = np.zeros_like(u)
            out[pos] = self.scale * u[pos] ** self.n * (1 - u[pos])
            if self.n <= 0:
                out[~pos] = self.scale if self.n == 0 else np.inf
            return out
        return self._spline(np.asarray(u, dtype=float)).astype(u.dtype)

    @property
    def rate_scale(self) -> float:
        """Reaction rate used for time-step caps: f'(0) when finite and
        positive, otherwise the scale factor."""
        fp = self.fprime0
        return fp if 0 < fp < math.inf else self.scale

    def f_over_u(self, u: float) -> float:
        """f(u)/u, with the limit f'(0) at u = 0 where it exists."""
        if self.kind is ReactionKind.LOGISTIC:
            return self.scale * (1.0 - u)
        if self.kind is ReactionKind.STRONG_POWER:
            n1 = self.n - 1.0
            if u == 0.0:
                return 0.0 if n1 > 0 else (self.scale if n1 == 0 else math.inf)
            return self.scale * u ** n1 * (1.0 - u)
        if u < 1e-12:
            return self.fprime0_given
        return float(self._spline(u)) / u

    @property
    def fprime0(self) -> float:
        if self.kind is ReactionKind.LOGISTIC:
            return self.scale
        if self.kind is ReactionKind.STRONG_POWER:
            if self.n == 1:
                return self.scale
            return 0.0 if self.n > 1 else math.inf
        return self.fprime0_given

    @property
    def fprime1(self) -> float:
        if self.kind is ReactionKind.TABULATED:
            return self.fprime1_given
        return -self.scale

    def scaled(self, factor: float) -> "Reaction":
        return Reaction(self.kind, self.scale * factor, self.n, self.samples,
                        None if self.fprime0_given is None else self.fprime0_given * factor,
                        None if self.fprime1_given is None else self.fprime1_given * factor)

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "scale": self.scale}
        if self.n is not None:
            out["n"] = self.n
        if self.samples is not None:
            out["samples"] = [list(s) for s in self.samples]
            out["fprime0"] = self.fprime0_given
            out["fprime1"] = self.fprime1_given
        return out


def logistic(scale: float = 1.0) -> Reaction:
    return Reaction(ReactionKind.LOGISTIC, scale)


def strong_power(n: float, scale: float = 1.0) -> Reaction:
    return Reaction(ReactionKind.STRONG_POWER, scale, n=float(n))


def tabulated(samples, fprime0: float, fprime1: float) -> Reaction:
    pts = tuple((float(u), float(v)) for u, v in samples)
    return Reaction(ReactionKind.TABULATED, 1.0, samples=pts,
                    fprime0_given=float(fprime0), fprime1_given=float(fprime1))


def eval_f(r: Reaction, u: float) -> float:
    if not (0.0 <= u <= 1.0):
        raise DomainError(f"u = {u} outside [0, 1]")
    return r.f(u)


def fmp_exponent(params: DiffusionParams, r: Reaction) -> float:
    """Power q with f_mp(X) ~ const * X^q as X -> 0."""
    base = params.beta
    if r.kind is ReactionKind.STRONG_POWER:
        q = base + r.n - 1.0
        return 0.0 if abs(q) < PSEUDO_LINEAR_TOL else q
    return base


def fmp_function(params: DiffusionParams, r: Reaction):
    """Fast scalar closure X -> f_mp(X) = m X^(gamma/(p-1) - 1) f(X)."""
    m = params.m
    q = fmp_exponent(params, r)
    if r.kind is ReactionKind.LOGISTIC:
        k = m * r.scale
        if q == 0.0:
            return lambda X: k * (1.0 - X)

        def fmp(X):
            return k * X ** q * (1.0 - X) if X > 0.0 else 0.0
        return fmp
    if r.kind is ReactionKind.STRONG_POWER:
        k = m * r.scale
        if q == 0.0:
            return lambda X: k * (1.0 - X)
        if q > 0.0:
            return lambda X: k * X ** q * (1.0 - X) if X > 0.0 else 0.0
        return lambda X: k * X ** q * (1.0 - X) if X > 0.0 else math.inf
    beta = params.beta
    g = r.f_over_u
    if beta == 0.0:
        return lambda X: m * g(X)
    return lambda X: m * X ** beta * g(X) if X > 0.0 else 0.0


def eval_fmp(params: DiffusionParams, r: Reaction, X: float) -> float:
    if not (0.0 <= X <= 1.0):
        raise DomainError(f"X = {X} outside [0, 1]")
    return fmp_function(params, r)(X)


def fmp_origin_limit(params: DiffusionParams, r: Reaction) -> float:
    """lim f_mp(X) as X -> 0: 0, a positive constant, or inf."""
    q = fmp_exponent(params, r)
    if q > 0:
        return 0.0
    if q < 0:
        return math.inf
    if r.kind is ReactionKind.STRONG_POWER:
        return params.m * r.scale
    return params.m * r.f_over_u(0.0)


def fmp_max(params: DiffusionParams, r: Reaction, scan_points: int = 10_000):
    """(X_mp, F_mp): maximiser and maximum of f_mp on [0, 1].

    Scan, then golden-section refinement of the best bracket. A second local
    maximum in the scan raises, since the phase-plane picture needs a single hump.
    """
    if fmp_origin_limit(params, r) == math.inf:
        return 0.0, math.inf
    fmp = fmp_function(params, r)
    xs = np.linspace(0.0, 1.0, scan_points + 1)
    vals = np.array([fmp(x) for x in xs])
    k = int(np.argmax(vals))
    rises = np.diff(vals) > 1e-14 * max(vals[k], 1e-300)
    falls = np.diff(vals) < -1e-14 * max(vals[k], 1e-300)
    if np.any(falls[:k]) or np.any(rises[k:]):
        raise ConfigError("f_mp is not unimodal on [0, 1]")
    if k == 0:
        return 0.0, float(vals[0])
    lo, hi = xs[k - 1], xs[min(k + 1, scan_points)]
    res = minimize_scalar(lambda x: -fmp(x), bracket=(lo, xs[k], hi), method="golden",
                          tol=1e-12)
    x_best = float(res.x)
    if not (lo <= x_best <= hi) or -res.fun < vals[k]:
        x_best = float(xs[k])
    return x_best, float(fmp(x_best))


@dataclass(frozen=True)
class ScalingReduction:
    """Maps between the original and the f'(0) = 1 problems.

    Lengths scale by A, speeds by speed_factor: c = speed_factor * nu.
    """

    A: float
    speed_factor: float

    def to_original_speed(self, nu: float) -> float:
        return self.speed_factor * nu

    def to_normalized_speed(self, c: float) -> float:
        return c / self.speed_factor


def normalize_reaction(params: DiffusionParams, r: Reaction):
    fp0 = r.fprime0
    if not (fp0 > 0 and math.isfinite(fp0)):
        raise ConfigError("normalisation needs a finite positive f'(0)")
    p = params.p
    red = ScalingReduction(A=fp0 ** (-1.0 / p), speed_factor=fp0 ** ((p - 1.0) / p))
    return r.scaled(1.0 / fp0), red
