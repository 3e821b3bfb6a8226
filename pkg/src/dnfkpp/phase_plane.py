"""The (X, Z) phase plane of the travelling-wave equation.

X = phi and Z = m X^((mu-1)/(p-1)) phi'.  Orbits leave the saddle S = (1, 0)
and are followed towards X = 0 in the variable s = ln X, where the trajectory
equation reads dZ/ds = (cZ - Z^p - f_mp(X)) / ((p-1) Z^(p-1)).

Terminal classification uses analytic certificates instead of thresholds:

* Z >= C = c^(1/(p-1)) anywhere: the numerator is negative above C, so Z keeps
  growing as X decreases (escape, speed below critical).
* numerator > 0 at some X < X_mp (only when f_mp(0) = 0): that region is
  invariant in the leftward flow and funnels into O (speed above critical).
* f_mp(0) > 0 (pseudo-linear structure): once f_mp is frozen at its limit the
  flow is one-dimensional and the fate follows from the roots of
  c*lam - lam^p = f_mp(0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (ConfigError, MaxStepsExceeded, NoRealRoots, NoRoot, NotChangeSign,
                     StepSizeUnderflow)
from .params import (DiffusionParams, Reaction, fmp_exponent, fmp_function, fmp_max,
                     fmp_origin_limit)


@dataclass(frozen=True)
class PhaseState:
    X: float
    Z: float


class TerminalKind(enum.Enum):
    HIT_ORIGIN = "HitOrigin"
    HIT_RC = "HitRc"
    ESCAPED_UP = "EscapedUp"
    CROSSED_ZERO = "CrossedZero"
    REACHED_X_ZERO = "ReachedXZeroAt"


@dataclass(frozen=True)
class Terminal:
    kind: TerminalKind
    value: float | None = None
    certified: bool = True

    @property
    def tag(self) -> str:
        return self.kind.value


@dataclass
class OrbitTrace:
    """Samples ordered along the orbit, plus the classified end state.

    For orbits from S, X decreases along the samples. ``xi`` holds the profile
    abscissa relative to the seed point when it was tracked.
    """

    X: np.ndarray
    Z: np.ndarray
    terminal: Terminal
    c: float
    xi: np.ndarray | None = None
    supercritical: bool | None = None
    meta: dict = field(default_factory=dict)

    @property
    def samples(self):
        return np.column_stack([self.X, self.Z])


STIFF_LEG_END = math.log(0.9)
# the stiff leg is strongly attracting, so its local errors are damped out
STIFF_RTOL = 1e-8


@dataclass(frozen=True)
class OrbitOptions:
    x_patch: float = 1e-4
    X_floor: float = 1e-10
    Z_ceiling: float | None = None
    rtol: float = 1e-10
    atol: float = 1e-13
    track_xi: bool = False
    continue_to_floor: bool = False
    max_evals: int = 2_000_000
    resample_ds: float = 0.02


class Topology(enum.Enum):
    TWO_BRANCHES_SUB_C0 = "TwoBranchesSubC0"
    TOUCHING = "Touching"
    TWO_BRANCHES_SUPER_C0 = "TwoBranchesSuperC0"


@dataclass
class IsoclineBranches:
    c: float
    X: np.ndarray
    Z_low: np.ndarray
    Z_up: np.ndarray
    topology: Topology
    gap: np.ndarray

    def residual(self, params, r) -> float:
        fmp = fmp_function(params, r)
        p = params.p
        worst = 0.0
        for x, lo, up in zip(self.X, self.Z_low, self.Z_up):
            fx = fmp(x)
            for z in (lo, up):
                if np.isfinite(z):
                    worst = max(worst, abs(self.c * z - z ** p - fx))
        return worst


class ExpansionForm(enum.Enum):
    LINEAR = "Linear"
    POWER = "Power"


def _spow(z: float, e: float) -> float:
    """sign(z)|z|^e (defined at z = 0 for any e > 0)."""
    if z > 0.0:
        return z ** e
    if z < 0.0:
        return -((-z) ** e)
    return 0.0


def vector_field(params: DiffusionParams, r: Reaction, c: float, s: PhaseState):
    """Right-hand side of the non-singular (tau) system."""
    if c <= 0:
        raise ConfigError("speed must be positive")
    if s.X < 0:
        raise ConfigError("X must be nonnegative")
    p = params.p
    fmp = fmp_function(params, r)
    dX = (p - 1.0) * s.X * _spow(s.Z, p - 1.0)
    dZ = c * s.Z - abs(s.Z) ** p - fmp(s.X)
    return dX, dZ


def trajectory_slope(params, r, c, X, Z) -> float:
    """dZ/dX along orbits (undefined at Z = 0)."""
    dX, dZ = vector_field(params, r, c, PhaseState(X, Z))
    return dZ / dX


def touching_speed(params: DiffusionParams, r: Reaction) -> float:
    """Speed at which the two isocline branches touch: p (F_mp/(p-1))^((p-1)/p)."""
    _, F = fmp_max(params, r)
    p = params.p
    return p * (F / (p - 1.0)) ** ((p - 1.0) / p)


def lambda_roots(c: float, p: float, F0: float):
    """(lam1, lam_star, lam2): the roots of c*lam - lam^p = F0 (F0 > 0) and the
    double root lam_star = (F0/(p-1))^(1/p) they split from at the threshold."""
    lam_pk = (c / p) ** (1.0 / (p - 1.0))
    g = lambda z: c * z - z ** p - F0
    top = g(lam_pk)
    if top < -1e-14 * max(F0, 1.0):
        raise NoRealRoots(f"c = {c} is below the threshold speed")
    if top <= 1e-14 * max(F0, 1.0):
        return lam_pk, lam_pk, lam_pk
    l1 = brentq(g, 0.0, lam_pk, xtol=1e-15, rtol=1e-15)
    l2 = brentq(g, lam_pk, c ** (1.0 / (p - 1.0)), xtol=1e-15, rtol=1e-15)
    return l1, (F0 / (p - 1.0)) ** (1.0 / p), l2


def isocline_roots(params, r, c: float, X: float):
    p = params.p
    fx = fmp_function(params, r)(X)
    Zpk = (c / p) ** (1.0 / (p - 1.0))
    C = c ** (1.0 / (p - 1.0))
    g = lambda z: c * z - z ** p - fx
    top = g(Zpk)
    scale = max(abs(fx), c * Zpk, 1e-300)
    if top < -1e-13 * scale:
        raise NoRoot(f"no isocline point at X = {X}")
    if top <= 1e-13 * scale:
        return Zpk, Zpk
    lo = 0.0 if fx <= 0 else brentq(g, 0.0, Zpk, xtol=1e-15, rtol=1e-15)
    up = C if fx <= 0 else brentq(g, Zpk, C, xtol=1e-15, rtol=1e-15)
    return lo, up


def null_isoclines(params: DiffusionParams, r: Reaction, c: float,
                   n_points: int = 401) -> IsoclineBranches:
    if c <= 0:
        raise ConfigError("speed must be positive")
    xs = np.linspace(0.0, 1.0, n_points)
    lo = np.full(n_points, np.nan)
    up = np.full(n_points, np.nan)
    gap = np.zeros(n_points, dtype=bool)
    for i, x in enumerate(xs):
        try:
            lo[i], up[i] = isocline_roots(params, r, c, float(x))
        except NoRoot:
            gap[i] = True
    c0 = touching_speed(params, r)
    if abs(c - c0) <= 1e-9 * c0:
        topo = Topology.TOUCHING
    elif c < c0:
        topo = Topology.TWO_BRANCHES_SUB_C0
    else:
        topo = Topology.TWO_BRANCHES_SUPER_C0
    return IsoclineBranches(c, xs, lo, up, topo, gap)


def expansion_at_S(params: DiffusionParams, r: Reaction, c: float):
    """Leading-order local law of the orbit leaving S.

    Returns (form, coeff, exponent). For p = 2 the coefficient is the saddle
    eigen-slope (c - sqrt(c^2 - 4 m f'(1)))/2, which is negative; the orbit
    entering the admissible quadrant is Z = |coeff| (1-X). See ``seed_at_S``.
    """
    f1 = r.fprime1
    if not f1 < 0:
        raise ConfigError("expansion at S needs f'(1) < 0")
    m, p = params.m, params.p
    if p == 2.0:
        return ExpansionForm.LINEAR, (c - math.sqrt(c * c - 4.0 * m * f1)) / 2.0, 1.0
    if p > 2.0:
        return ExpansionForm.LINEAR, -m * f1 / c, 1.0
    lam = (-p * m * f1 / (2.0 * (p - 1.0))) ** (1.0 / p)
    return ExpansionForm.POWER, lam, 2.0 / p


def seed_at_S(params, r, c, x_patch):
    """Starting Z at X = 1 - x_patch on the branch with Z > 0."""
    _, coeff, expo = expansion_at_S(params, r, c)
    return abs(coeff) * x_patch ** expo, abs(coeff), expo


def near_origin_guide(params: DiffusionParams, r: Reaction, c: float, X: float) -> float:
    """Lower isocline near O: Z ~ (k0/c) X^q with f_mp(X) ~ k0 X^q."""
    q = fmp_exponent(params, r)
    k0 = params.m * (r.scale if r.n is not None else r.f_over_u(0.0))
    return k0 / c * X ** q


class _Orbit:
    """Orbit machinery for one (params, reaction, c)."""

    def __init__(self, params, r, c, signed=False):
        if c <= 0 and not signed:
            raise ConfigError("speed must be positive")
        self.params, self.r, self.c = params, r, c
        self.m, self.p = params.m, params.p
        self.beta = params.beta
        self.q = fmp_exponent(params, r)
        self.fmp = fmp_function(params, r)
        self.F0 = fmp_origin_limit(params, r)
        self.C = c ** (1.0 / (self.p - 1.0))
        if self.F0 == 0.0:
            self.structure = "split"
            self.X_mp, self.F_mp = fmp_max(params, r)
        elif math.isinf(self.F0):
            self.structure = "singular"
            self.X_mp, self.F_mp = 0.0, math.inf
        else:
            self.structure = "lambda"
            self.X_mp, self.F_mp = fmp_max(params, r)
        self.k0 = params.m * (r.scale if r.n is not None else r.f_over_u(0.0))

    def num(self, X, Z):
        return self.c * Z - Z ** self.p - self.fmp(X)

    def rc_guide(self, X):
        """Leading-order orbit entering R_c: C - K X^q / (1+q)."""
        K = self.k0 / ((self.p - 1.0) * self.c)
        return self.C - K * X ** self.q / (1.0 + self.q)

    def root_decision(self, Z_end):
        try:
            l1, _, l2 = lambda_roots(self.c, self.p, self.F0)
        except NoRealRoots:
            return Terminal(TerminalKind.ESCAPED_UP, None), False
        if Z_end <= l2:
            return Terminal(TerminalKind.REACHED_X_ZERO, l1), True
        return Terminal(TerminalKind.ESCAPED_UP, None), False


def integrate_from_S(params: DiffusionParams, r: Reaction, c: float,
                     opts: OrbitOptions | None = None) -> OrbitTrace:
    opts = opts or OrbitOptions()
    ob = _Orbit(params, r, c)
    p, m, beta, fmp, C = ob.p, ob.m, ob.beta, ob.fmp, ob.C
    pm1 = p - 1.0
    Z0, _, _ = seed_at_S(params, r, c, opts.x_patch)
    s0 = math.log1p(-opts.x_patch)
    s_floor = math.log(opts.X_floor)
    ceiling = opts.Z_ceiling if opts.Z_ceiling is not None else 10.0 * C + 10.0
    counter = [0]

    def rhs(s, y):
        counter[0] += 1
        if counter[0] > opts.max_evals:
            raise MaxStepsExceeded("orbit integration exceeded its evaluation budget",
                                   PhaseState(math.exp(s), y[0]))
        X = math.exp(s)
        Z = y[0]
        if not Z > 1e-100:
            Z = 1e-100
        dZ = (c * Z - Z ** p - fmp(X)) / (pm1 * Z ** pm1)
        if opts.track_xi:
            return [dZ, m * X ** beta / Z]
        return [dZ]

    def jac(s, y):
        X = math.exp(s)
        Z = max(y[0], 1e-100)
        den = pm1 * Z ** pm1
        dZ = (c * Z - Z ** p - fmp(X)) / den
        dd = (c - p * Z ** pm1) / den - dZ * pm1 / Z
        if opts.track_xi:
            return [[dd, 0.0], [-m * X ** beta / (Z * Z), 0.0]]
        return [[dd]]

    def ev_escape(s, y):
        return y[0] - min(C, ceiling)
    ev_escape.terminal = True
    ev_escape.direction = 1

    X_mp = ob.X_mp

    def ev_origin(s, y):
        X = math.exp(s)
        if ob.structure != "split" or X >= X_mp:
            return -1.0
        return ob.num(X, y[0])
    ev_origin.terminal = True
    ev_origin.direction = 1

    y0 = [Z0, 0.0] if opts.track_xi else [Z0]
    legs = []
    if p > 2.0 and s0 > STIFF_LEG_END:
        # transversal relaxation ~ c/((p-1)Z^(p-1)) is stiff close to S
        legs.append(("Radau", s0, max(STIFF_LEG_END, s_floor)))
    legs.append(("RK45", legs[-1][2] if legs else s0, s_floor))
    s_parts, Z_parts, xi_parts = [], [], []
    sol = None
    escaped_at_start = False
    for method, sa, sb in legs:
        if sa <= sb:
            continue
        if y0[0] >= min(C, ceiling):
            # above C the numerator is negative: escape is certain from here
            escaped_at_start = True
            if not s_parts:
                s_parts.append(np.array([sa]))
                Z_parts.append(np.array([y0[0]]))
                if opts.track_xi:
                    xi_parts.append(np.array([y0[1]]))
            break
        # the finite-difference Jacobian of the Radau leg may overflow harmlessly
        with np.errstate(over="ignore"):
            extra = {"jac": jac} if method == "Radau" else {}
            rt, at = (opts.rtol, opts.atol) if method != "Radau" else (
                max(opts.rtol, STIFF_RTOL), max(opts.atol, STIFF_RTOL * 1e-3))
            sol = solve_ivp(rhs, (sa, sb), y0, method=method, rtol=rt,
                            atol=at, events=[ev_escape, ev_origin],
                            dense_output=opts.track_xi, **extra)
        if sol.status == -1:
            raise StepSizeUnderflow(sol.message,
                                    PhaseState(math.exp(sol.t[-1]), sol.y[0, -1]))
        sa_arr, Za, xa = sol.t, sol.y[0], (sol.y[1] if opts.track_xi else None)
        if opts.track_xi and sol.sol is not None and sa_arr.size > 1:
            sa_arr, Za, xa = _resample(sol.sol, sa_arr, opts.resample_ds)
        k = 0 if not s_parts else 1
        s_parts.append(sa_arr[k:])
        Z_parts.append(Za[k:])
        if opts.track_xi:
            xi_parts.append(xa[k:])
        if sol.status == 1:
            break
        y0 = list(sol.y[:, -1])
    s_arr = np.concatenate(s_parts)
    Z_arr = np.concatenate(Z_parts)
    xi_arr = np.concatenate(xi_parts) if opts.track_xi else None
    _, seed_coeff, seed_exp = seed_at_S(params, r, c, opts.x_patch)
    meta = {"evaluations": counter[0], "seed_Z": Z0, "x_patch": opts.x_patch,
            "structure": ob.structure, "seed_coeff": seed_coeff, "seed_exp": seed_exp,
            "q": ob.q, "k0": ob.k0, "C": C, "beta": beta, "m": m, "p": p}

    if escaped_at_start or sol.t_events[0].size:
        term = Terminal(TerminalKind.ESCAPED_UP, None)
        sup = False
        meta["decided_by"] = "escape_certificate"
    elif sol.t_events[1].size:
        term = Terminal(TerminalKind.HIT_ORIGIN, 0.0)
        sup = True
        meta["certificate_X"] = math.exp(sol.t_events[1][0])
        meta["decided_by"] = "origin_certificate"
        if opts.continue_to_floor:
            s2, Z2, xi2 = _continue_to_origin(ob, sol.t_events[1][0], sol.y_events[1][0],
                                              s_floor, opts)
            s_arr = np.concatenate([s_arr, s2[1:]])
            Z_arr = np.concatenate([Z_arr, Z2[1:]])
            if opts.track_xi:
                xi_arr = np.concatenate([xi_arr, xi2[1:]])
    else:
        Z_end = float(Z_arr[-1])
        X_end = math.exp(s_arr[-1])
        if ob.structure == "lambda":
            term, sup = ob.root_decision(Z_end)
            meta["decided_by"] = "root_algebra"
        elif ob.structure == "singular":
            term, sup = Terminal(TerminalKind.ESCAPED_UP, None, certified=False), False
            meta["decided_by"] = "floor"
        else:
            meta["decided_by"] = "rc_guide"
            guide = ob.rc_guide(X_end)
            sup = Z_end < guide
            term = Terminal(TerminalKind.HIT_RC, Z_end, certified=False)
            meta["rc_guide"] = guide
    X_arr = np.exp(s_arr)
    if X_arr.size:
        X_arr[0] = 1.0 - opts.x_patch
    trace = OrbitTrace(X_arr, np.asarray(Z_arr), term, c, xi_arr, sup, meta)
    return trace


def _resample(dense, s_nat, ds):
    """Union of natural steps and a uniform s-grid, evaluated on the interpolant."""
    s0, s1 = s_nat[0], s_nat[-1]
    n = max(2, int(abs(s1 - s0) / ds) + 1)
    grid = np.linspace(s0, s1, n)
    s_all = np.unique(np.concatenate([s_nat, grid]))[::-1]
    y = dense(s_all)
    return s_all, y[0], y[1]


def _continue_to_origin(ob, s_start, y_start, s_floor, opts):
    """Stiff leg of a supercritical orbit inside the funnel towards O.

    Integrated in (s, ln Z) with an implicit method: the decay rate
    c/((p-1)Z^(p-1)) grows without bound as Z -> 0.
    """
    p, m, beta, c, fmp = ob.p, ob.m, ob.beta, ob.c, ob.fmp
    pm1 = p - 1.0

    def rhs(s, y):
        X = math.exp(s)
        Z = math.exp(y[0])
        dZ = (c * Z - Z ** p - fmp(X)) / (pm1 * Z ** pm1)
        return [dZ / Z, m * X ** beta / Z]

    w0 = math.log(y_start[0])
    xi0 = y_start[1] if opts.track_xi else 0.0
    with np.errstate(over="ignore"):
        sol = solve_ivp(rhs, (s_start, s_floor), [w0, xi0], method="Radau", rtol=1e-10,
                        atol=1e-12, dense_output=True)
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    n = max(2, int(abs(s_floor - s_start) / opts.resample_ds) + 1)
    grid = np.unique(np.concatenate([np.linspace(s_start, s_floor, n), sol.t]))[::-1]
    y = sol.sol(grid)
    return grid, np.exp(y[0]), y[1]


def integrate_from_rc(params: DiffusionParams, r: Reaction, c: float, X0: float = 1e-10,
                      X_end: float = 0.5, ds: float = 0.02):
    """Orbit entering R_c = (0, c^(1/(p-1))), integrated away from the origin.

    Started on the leading-order law C - K X^q/(1+q) at X0. In the direction of
    increasing X, deviations from the R_c branch decay like X0/X, so this
    direction is well conditioned where the S-side integration is not.
    Returns (X, Z, xi) with X increasing and xi(X0) = 0.
    """
    ob = _Orbit(params, r, c)
    if ob.structure != "split":
        raise ConfigError("the R_c branch exists only when f_mp vanishes at the origin")
    p, m, beta, fmp = ob.p, ob.m, ob.beta, ob.fmp
    pm1 = p - 1.0

    def rhs(s, y):
        X = math.exp(s)
        Z = y[0]
        return [(c * Z - Z ** p - fmp(X)) / (pm1 * Z ** pm1), m * X ** beta / Z]

    s0, s1 = math.log(X0), math.log(X_end)
    sol = solve_ivp(rhs, (s0, s1), [ob.rc_guide(X0), 0.0], method="RK45", rtol=1e-11,
                    atol=1e-14, dense_output=True)
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    grid = np.unique(np.concatenate([sol.t, np.linspace(s0, s1, int((s1 - s0) / ds) + 2)]))
    y = sol.sol(grid)
    return np.exp(grid), y[0], y[1]


@dataclass
class Verdict:
    supercritical: bool
    certain: bool
    trace: OrbitTrace
    check: OrbitTrace | None = None


def classify_speed(params, r, c, opts: OrbitOptions | None = None) -> Verdict:
    """Classify c with the seed-halving agreement rule.

    The orbit is integrated from x_patch and x_patch/2; disagreement is retried
    once with tighter tolerances and otherwise reported as uncertain.
    """
    opts = opts or OrbitOptions()
    a = integrate_from_S(params, r, c, opts)
    half = OrbitOptions(**{**opts.__dict__, "x_patch": opts.x_patch / 2})
    b = integrate_from_S(params, r, c, half)
    if a.supercritical == b.supercritical:
        certain = a.terminal.certified or b.terminal.certified
        return Verdict(bool(a.supercritical), certain, a, b)
    tight = OrbitOptions(**{**opts.__dict__, "rtol": opts.rtol * 1e-2, "atol": opts.atol * 1e-2})
    a2 = integrate_from_S(params, r, c, tight)
    b2 = integrate_from_S(params, r, c, OrbitOptions(**{**tight.__dict__,
                                                         "x_patch": opts.x_patch / 2}))
    return Verdict(bool(a2.supercritical), a2.supercritical == b2.supercritical, a2, b2)


# change-sign orbits --------------------------------------------------------------

def _cs_leg(ob, X0, w0, direction, X_stop=1e-9, t_max=60.0):
    """Follow a change-sign orbit from (X0, w0) with w = |Z|^(p-2) Z.

    Independent variable t with w = sinh(t): smooth through Z = 0 and
    logarithmic in |Z| on the tails. State (ln X, xi). Returns arrays.
    """
    p, m, beta, c, fmp = ob.p, ob.m, ob.beta, ob.c, ob.fmp
    e = 1.0 / (p - 1.0)
    t0 = math.asinh(w0)
    t_end = direction * t_max

    def rhs(t, y):
        w = math.sinh(t)
        X = math.exp(y[0])
        Z = _spow(w, e)
        num = c * Z - abs(Z) ** p - fmp(X)
        jac = math.cosh(t)
        return [Z / num * jac, m * X ** beta / num * jac]

    def ev_small(t, y):
        return y[0] - math.log(X_stop)
    ev_small.terminal = True

    def ev_iso(t, y):
        w = math.sinh(t)
        X = math.exp(y[0])
        Z = _spow(w, e)
        return c * Z - abs(Z) ** p - fmp(X)
    ev_iso.terminal = True

    sol = solve_ivp(rhs, (t0, t_end), [math.log(X0), 0.0], method="RK45", rtol=1e-10,
                    atol=1e-12, events=[ev_small, ev_iso], dense_output=True)
    if sol.t_events[1].size:
        raise NotChangeSign("orbit meets the null isocline: not a type-2 change-sign orbit")
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    grid = np.unique(np.concatenate([sol.t, np.linspace(sol.t[0], sol.t[-1], 4000)]))
    if direction < 0:
        grid = grid[::-1]
    y = sol.sol(grid)
    w = np.sinh(grid)
    Z = np.sign(w) * np.abs(w) ** e
    return np.exp(y[0]), Z, y[1]


def cs_tw_branch(params: DiffusionParams, r: Reaction, c: float, X_start: float,
                 Z_start: float) -> OrbitTrace:
    """Change-sign orbit through (X_start, Z_start), followed in both directions.

    Samples run from the Z > 0 end (X -> 0, Z -> +inf) through the Z = 0
    crossing to the Z < 0 end. meta holds the tail constants Z X^(1/(p-1)).
    """
    ob = _Orbit(params, r, c)
    p = ob.p
    w0 = _spow(Z_start, p - 1.0)
    Xa, Za, xia = _cs_leg(ob, X_start, w0, +1)
    Xb, Zb, xib = _cs_leg(ob, X_start, w0, -1)
    X = np.concatenate([Xa[::-1], Xb[1:]])
    Z = np.concatenate([Za[::-1], Zb[1:]])
    xi = np.concatenate([xia[::-1], xib[1:]])
    k = np.nonzero(np.diff(np.sign(Z)) != 0)[0]
    if k.size == 0:
        raise NotChangeSign("orbit does not cross Z = 0")
    i = int(k[0])
    X_cross = float(np.interp(0.0, [Z[i + 1], Z[i]], [X[i + 1], X[i]]))
    e = 1.0 / (p - 1.0)
    tails = {"a_plus": float(Z[0] * X[0] ** e), "a_minus": float(Z[-1] * X[-1] ** e)}
    trace = OrbitTrace(X, Z, Terminal(TerminalKind.CROSSED_ZERO, X_cross), c, xi, None,
                       {"tails": tails})
    return trace


def tail_constant(trace: OrbitTrace, params, X_at: float, branch: int = +1) -> float:
    """Z X^(1/(p-1)) interpolated at X = X_at on the Z>0 (+1) or Z<0 (-1) end."""
    e = 1.0 / (params.p - 1.0)
    mask = trace.Z > 0 if branch > 0 else trace.Z < 0
    X = trace.X[mask]
    a = trace.Z[mask] * X ** e
    order = np.argsort(X)
    return float(np.interp(math.log(X_at), np.log(X[order]), a[order]))
