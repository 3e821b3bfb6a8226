"""Self-similar source solutions of u_t = div(|grad u^m|^(p-2) grad u^m) in R^N.

B_M(x, t) = t^-alpha F_M(|x| t^(-alpha/N)) with

* gamma > 0: F_M(r) = (C_M - k r^(p/(p-1)))_+^((p-1)/gamma), compact support;
* gamma = 0: F_M(r) = C_M exp(-k r^(p/(p-1))), positive everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ConfigError, QuadratureNonConvergence
from .params import DiffusionParams


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def similarity_constants(params: DiffusionParams, N: int):
    """(alpha, k) of the self-similar profile.

    Integrating the radial profile equation once gives
    |(F^m)'|^(p-2) (F^m)' = -(alpha/N) r F, which fixes
    k = (gamma/(m p)) (alpha/N)^(1/(p-1)) for gamma > 0 and
    k = (p-1) p^(-p/(p-1)) / m for gamma = 0.
    """
    m, p, g = params.m, params.p, params.gamma
    if params.pseudo_linear:
        return N / p, (p - 1.0) * p ** (-p / (p - 1.0)) / m
    alpha = 1.0 / (g + p / N)
    k = (g / (m * p)) * (alpha / N) ** (1.0 / (p - 1.0))
    return alpha, k


def _check(params, N):
    if int(N) != N or N < 1:
        raise ConfigError("dimension must be a positive integer")
    if params.gamma < 0:
        raise ConfigError("source solutions need gamma >= 0")


def profile_mass(params: DiffusionParams, N: int, C: float) -> float:
    """Mass of F with constant C, by quadrature in y = r^(p/(p-1)).

    In y the integrand is (1/q) (C - k y)^e y^(N/q - 1), q = p/(p-1), whose
    endpoint singularities are handled by algebraic-weight quadrature.
    """
    _check(params, N)
    _, k = similarity_constants(params, N)
    p = params.p
    q = p / (p - 1.0)
    a = N / q - 1.0
    if params.pseudo_linear:
        # weight y^a on [0, 1/k] near the singular end, plain quad on the tail
        head, e1 = quad(lambda y: C * math.exp(-k * y), 0.0, 1.0 / k, weight="alg",
                        wvar=(a, 0.0), epsabs=0.0, epsrel=1e-13, limit=200)
        tail, e2 = quad(lambda y: C * math.exp(-k * y) * y ** a, 1.0 / k, math.inf,
                        epsabs=0.0, epsrel=1e-12, limit=200)
        val, err = head + tail, e1 + e2
    else:
        e = (p - 1.0) / params.gamma
        y1 = C / k
        val, err = quad(lambda y: k ** e, 0.0, y1, weight="alg",
                        wvar=(a, e), epsabs=0.0, epsrel=1e-13, limit=200)
    if not math.isfinite(val) or err > 1e-9 * abs(val):
        raise QuadratureNonConvergence("mass quadrature did not converge", val)
    return sphere_area(N) * val / q


def mass_to_constant(params: DiffusionParams, N: int, M: float) -> float:
    """C_M with profile mass M (root of the increasing map C -> mass)."""
    if not M > 0:
        raise ConfigError("mass must be positive")
    _check(params, N)
    if params.pseudo_linear:
        return M / profile_mass(params, N, 1.0)
    g = lambda lc: math.log(profile_mass(params, N, math.exp(lc))) - math.log(M)
    lo, hi = -1.0, 1.0
    while g(lo) > 0:
        lo -= 5.0
    while g(hi) < 0:
        hi += 5.0
    return math.exp(brentq(g, lo, hi, xtol=1e-15, rtol=1e-15))


@dataclass(frozen=True)
class BarenblattSpec:
    params: DiffusionParams
    N: int
    M: float
    C_M: float
    alpha: float
    k: float
    t0: float = 0.0

    def profile(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        q = self.params.p / (self.params.p - 1.0)
        if self.params.pseudo_linear:
            return self.C_M * np.exp(-self.k * r ** q)
        e = (self.params.p - 1.0) / self.params.gamma
        return np.maximum(self.C_M - self.k * r ** q, 0.0) ** e

    def support_radius(self, t: float) -> float:
        if self.params.pseudo_linear:
            return math.inf
        q = self.params.p / (self.params.p - 1.0)
        return (self.C_M / self.k) ** (1.0 / q) * (t + self.t0) ** (self.alpha / self.N)


def barenblatt(params: DiffusionParams, N: int = 1, M: float = 1.0,
               t0: float = 0.0) -> BarenblattSpec:
    """Source solution of mass M; ``t0`` shifts time (evaluated at t + t0)."""
    _check(params, N)
    alpha, k = similarity_constants(params, N)
    return BarenblattSpec(params, int(N), float(M), mass_to_constant(params, N, M), alpha, k,
                          float(t0))


def barenblatt_eval(spec: BarenblattSpec, x, t: float):
    """B_M at position(s) x (or radius) and time t > 0."""
    tt = t + spec.t0
    if not tt > 0:
        raise ConfigError("Barenblatt solutions are evaluated at positive times")
    scale = tt ** (-spec.alpha / spec.N)
    out = tt ** (-spec.alpha) * spec.profile(np.asarray(x, dtype=float) * scale)
    return float(out) if np.ndim(out) == 0 else out


def numerical_mass(spec: BarenblattSpec, t: float) -> float:
    """Mass of B_M(., t) by radial quadrature in x (independent of the profile
    quadrature used to fit C_M)."""
    R = spec.support_radius(t)
    if not math.isfinite(R):
        tt = t + spec.t0
        R = (60.0 / spec.k) ** ((spec.params.p - 1.0) / spec.params.p) * tt ** (spec.alpha / spec.N)
    f = lambda r: barenblatt_eval(spec, r, t) * r ** (spec.N - 1)
    val, _ = quad(f, 0.0, R, epsabs=0.0, epsrel=1e-12, limit=500)
    return sphere_area(spec.N) * val


def scaling_identity_check(spec: BarenblattSpec, x, t: float) -> float:
    """max |B_M(x, t) - M B_1(x, M^gamma t)| over the given points."""
    one = barenblatt(spec.params, spec.N, 1.0)
    g = spec.params.gamma if not spec.params.pseudo_linear else 0.0
    a = np.asarray(barenblatt_eval(replace_t0(spec, 0.0), x, t))
    b = spec.M * np.asarray(barenblatt_eval(one, x, spec.M ** g * t))
    return float(np.max(np.abs(a - b)))


def replace_t0(spec: BarenblattSpec, t0: float) -> BarenblattSpec:
    return BarenblattSpec(spec.params, spec.N, spec.M, spec.C_M, spec.alpha, spec.k, t0)


def diffusion_residual(spec: BarenblattSpec, t: float, r, h: float = 1e-4):
    """Finite-difference residual of u_t - Delta_p u^m at radii r (radial form).

    Centred differences of step h; meant for points inside the support away
    from r = 0 and the free boundary.
    """
    m, p, N = spec.params.m, spec.params.p, spec.N
    r = np.asarray(r, dtype=float)
    u = lambda rr, tt: np.asarray(barenblatt_eval(spec, rr, tt))
    ut = (u(r, t + h) - u(r, t - h)) / (2 * h)

    def flux(rr):
        d = (u(rr + h / 2, t) ** m - u(rr - h / 2, t) ** m) / h
        return rr ** (N - 1) * np.abs(d) ** (p - 2) * d

    lap = (flux(r + h / 2) - flux(r - h / 2)) / (h * r ** (N - 1))
    return ut - lap
