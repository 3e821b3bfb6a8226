"""Finite-volume solver for u_t = div(|grad u^m|^(p-2) grad u^m) + f(u).

1-D on [-L, L] or radially symmetric in R^N on [0, L]. Fluxes live on cell
faces and only use differences of u^m, so cells surrounded by zeros stay
exactly zero (free boundaries are preserved).

* p >= 2: explicit update with an adaptive step from the effective
  diffusivity bound.
* p < 2: the effective diffusivity |grad u|^(p-2) is singular where the
  gradient vanishes, which makes any explicit step collapse. These runs use a
  linearly implicit step with lagged face coefficients, carried in extended
  precision so that far-field values of pseudo-linear runs do not underflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClippingExcess, ConfigError, StabilityCollapse, WindowTooShort
from .params import DiffusionParams, Reaction

EPS_REG = 1e-30
CLIP_LIMIT = 1e-8
K_CAP = 1e8
DT_MIN = 1e-14


class BoundaryCondition(enum.Enum):
    ZERO_FLUX = "ZeroFlux"
    DIRICHLET0 = "Dirichlet0"


@dataclass(frozen=True)
class Grid:
    """Uniform cells. 1-D: J cells on [-L, L]. Radial: J cells on [0, L]."""

    L: float
    J: int
    radial: bool = False
    N: int = 1
    bc: BoundaryCondition = BoundaryCondition.ZERO_FLUX

    def __post_init__(self):
        if not (self.L > 0 and self.J >= 2):
            raise ConfigError("grid needs L > 0 and at least two cells")
        if self.N < 1 or (self.N > 1 and not self.radial):
            raise ConfigError("dimensions above one need the radial grid")

    @property
    def dx(self) -> float:
        return (self.L if self.radial else 2.0 * self.L) / self.J

    @property
    def x(self) -> np.ndarray:
        """Cell centres."""
        lo = 0.0 if self.radial else -self.L
        return lo + (np.arange(self.J) + 0.5) * self.dx

    @property
    def faces(self) -> np.ndarray:
        lo = 0.0 if self.radial else -self.L
        return lo + np.arange(self.J + 1) * self.dx

    @property
    def face_area(self) -> np.ndarray:
        if not self.radial or self.N == 1:
            return np.ones(self.J + 1)
        return self.faces ** (self.N - 1)

    @property
    def volume(self) -> np.ndarray:
        if not self.radial or self.N == 1:
            return np.full(self.J, self.dx)
        f = self.faces
        return (f[1:] ** self.N - f[:-1] ** self.N) / self.N

    @property
    def geometry_factor(self) -> float:
        """max over cells of (A_- + A_+) dx / (2 V); 1 on 1-D grids."""
        a = self.face_area
        return float(np.max((a[:-1] + a[1:]) * self.dx / (2.0 * self.volume)))


@dataclass
class PdeState:
    t: float
    u: np.ndarray
    dt_history: list = field(default_factory=list)
    clip_history: list = field(default_factory=list)

    def copy(self) -> "PdeState":
        return PdeState(self.t, self.u.copy(), list(self.dt_history), list(self.clip_history))


class DatumKind(enum.Enum):
    PLATEAU = "PlateauIndicator"
    PLATEAU_EXP_TAIL = "PlateauWithExpTail"
    EXP_DECAY = "ExpDecay"
    EXP_DECAY_POWER = "ExpDecayWithPower"
    BARENBLATT = "BarenblattSnapshot"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class InitialDatum:
    kind: DatumKind
    eps: float = 1.0
    rho0: float = 1.0
    b0: float = 1.0
    a0: float = 1.0
    rate: float = 1.0
    power: float = 0.0
    spec: object = None
    t_offset: float = 1.0
    values: object = None

    def evaluate(self, grid: Grid, p: float) -> np.ndarray:
        r = np.abs(grid.x)
        k = self.kind
        if k is DatumKind.PLATEAU:
            u = np.where(r <= self.rho0, self.eps, 0.0)
        elif k is DatumKind.PLATEAU_EXP_TAIL:
            q = p / (p - 1.0)
            tail = self.eps * np.exp(-self.b0 * (r ** q - self.rho0 ** q))
            u = np.where(r <= self.rho0, self.eps, tail)
        elif k is DatumKind.EXP_DECAY:
            u = np.minimum(1.0, self.a0 * np.exp(-self.rate * r))
        elif k is DatumKind.EXP_DECAY_POWER:
            u = np.minimum(1.0, self.a0 * (1.0 + r) ** self.power * np.exp(-self.rate * r))
        elif k is DatumKind.BARENBLATT:
            from .barenblatt import barenblatt_eval
            u = np.asarray(barenblatt_eval(self.spec, grid.x, self.t_offset), dtype=float)
        else:
            vals = self.values(grid.x) if callable(self.values) else self.values
            u = np.asarray(vals, dtype=float)
            if u.shape != grid.x.shape:
                raise ConfigError("custom datum has the wrong length")
        if np.any(u < 0) or np.any(u > 1) or not np.all(np.isfinite(u)):
            raise ConfigError("initial datum must take values in [0, 1]")
        return u


def plateau(eps: float, rho0: float) -> InitialDatum:
    return InitialDatum(DatumKind.PLATEAU, eps=eps, rho0=rho0)


def uses_implicit(params: DiffusionParams) -> bool:
    return params.p < 2.0


def initial_state(params: DiffusionParams, grid: Grid, datum: InitialDatum) -> PdeState:
    u = datum.evaluate(grid, params.p)
    if uses_implicit(params):
        u = u.astype(np.longdouble)
    return PdeState(0.0, u)


# time stepping -------------------------------------------------------------

def _boundary_values(u, grid):
    """Cell values padded with the neighbours seen by the two boundary faces.

    A value of None means the face carries no flux.
    """
    left = None if (grid.radial or grid.bc is BoundaryCondition.ZERO_FLUX) else 0.0
    right = None if grid.bc is BoundaryCondition.ZERO_FLUX else 0.0
    return left, right


def explicit_dt(params, r, grid, u, safety):
    m, p, mu = params.m, params.p, params.mu
    du = np.abs(np.diff(u))
    ubar = 0.5 * (u[1:] + u[:-1])
    left, right = _boundary_values(u, grid)
    if right is not None:
        du = np.append(du, abs(u[-1]))
        ubar = np.append(ubar, 0.5 * u[-1])
    if left is not None:
        du = np.append(du, abs(u[0]))
        ubar = np.append(ubar, 0.5 * u[0])
    with np.errstate(divide="ignore"):
        grad = du ** (p - 2.0) if p != 2.0 else np.ones_like(du)
    coeff = m ** (p - 1.0) * ubar ** mu * grad
    denom = EPS_REG + float(np.max(coeff)) * grid.geometry_factor
    return min(safety * grid.dx ** p / denom, _reaction_cap(r))


def _explicit_rhs(params, r, grid, u):
    m, p = params.m, params.p
    um = u ** m
    flux = np.zeros(grid.J + 1, dtype=u.dtype)
    d = np.diff(um)
    flux[1:-1] = np.abs(d) ** (p - 2.0) * d if p != 2.0 else d
    left, right = _boundary_values(u, grid)
    if left is not None:
        d0 = um[0] - left
        flux[0] = abs(d0) ** (p - 2.0) * d0 if d0 != 0 else 0.0
    if right is not None:
        d1 = right - um[-1]
        flux[-1] = abs(d1) ** (p - 2.0) * d1 if d1 != 0 else 0.0
    flux /= grid.dx ** (p - 1.0)
    area = grid.face_area
    div = (area[1:] * flux[1:] - area[:-1] * flux[:-1]) / grid.volume
    return div if r is None else div + r.f_array(u)


def _fill_coefficients(K, valid):
    """Copy the nearest valid face coefficient into faces between zero cells."""
    if valid.all() or not valid.any():
        return K
    idx = np.arange(K.size)
    left = np.maximum.accumulate(np.where(valid, idx, -1))
    right = np.minimum.accumulate(np.where(valid, idx, K.size)[::-1])[::-1]
    dl = np.where(left >= 0, idx - left, K.size + 1)
    dr = np.where(right < K.size, right - idx, K.size + 1)
    src = np.where(dl <= dr, left, right)
    out = K.copy()
    out[~valid] = K[src[~valid]]
    return out


def _face_coefficients(params, grid, u):
    """K = |D u^m|^(p-1) / |D u| on every face (boundary faces included).

    This is s^(p-1) |Du|^(p-2) with s the secant slope of u^m, so the face
    flux reads K Du / dx^(p-1).
    """
    m, p = params.m, params.p
    left, right = _boundary_values(u, grid)
    zero = np.zeros(1, dtype=u.dtype)
    ext = np.concatenate([zero if left is not None else u[:1], u,
                          zero if right is not None else u[-1:]])
    du = np.diff(ext)
    dm = np.diff(ext ** m)
    both_zero = (ext[1:] == 0) & (ext[:-1] == 0)
    flat = (du == 0) & ~both_zero
    with np.errstate(divide="ignore", invalid="ignore"):
        K = np.abs(dm) ** (p - 1.0) / np.abs(du)
    K = np.where(flat, K_CAP, K)
    K = np.where(both_zero, 0.0, np.minimum(K, K_CAP))
    if left is None:
        K[0] = 0.0
    if right is None:
        K[-1] = 0.0
    if params.pseudo_linear:
        # on exponential tails K tends to m^(p-1) |dlog u|^(p-2) > 0, so the
        # degenerate 0/0 between empty cells takes the nearest defined value
        inner = slice(1 if left is None else 0, K.size - 1 if right is None else K.size)
        Ki = K[inner]
        K[inner] = _fill_coefficients(Ki, ~both_zero[inner])
    return K


def solve_tridiagonal(a, b, c, d):
    """Cyclic reduction for a diagonally dominant tridiagonal system.

    a: sub-diagonal (a[0] unused), b: diagonal, c: super-diagonal (c[-1]
    unused). Vectorised over each reduction level and dtype preserving, which
    keeps extended precision intact.
    """
    n = b.size
    size = 1
    while size - 1 < n:
        size *= 2
    size -= 1
    dt = np.result_type(a, b, c, d)
    A = np.zeros(size, dt)
    B = np.ones(size, dt)
    C = np.zeros(size, dt)
    D = np.zeros(size, dt)
    A[:n], B[:n], C[:n], D[:n] = a, b, c, d
    A[0] = 0
    C[n - 1] = 0
    h = 1
    levels = []
    while 2 * h - 1 < size:
        i = np.arange(2 * h - 1, size, 2 * h)
        lo, hi = i - h, i + h
        al = -A[i] / B[lo]
        ga = -C[i] / B[hi]
        B[i] = B[i] + al * C[lo] + ga * A[hi]
        D[i] = D[i] + al * D[lo] + ga * D[hi]
        A[i] = al * A[lo]
        C[i] = ga * C[hi]
        levels.append(h)
        h *= 2
    x = np.zeros(size + 2 * h, dt)  # padded so that out-of-range neighbours read 0
    off = h
    mid = size // 2
    x[off + mid] = D[mid] / B[mid]
    for h in reversed(levels):
        i = np.arange(h - 1, size, 2 * h)
        x[off + i] = (D[i] - A[i] * x[off + i - h] - C[i] * x[off + i + h]) / B[i]
    return x[off:off + n]


def _reaction_cap(r):
    return math.inf if r is None else 0.1 / r.rate_scale


def implicit_dt(r, grid, safety):
    return min(_reaction_cap(r), safety * grid.dx)


def _implicit_update(params, r, grid, u, dt):
    p = params.p
    K = _face_coefficients(params, grid, u) / grid.dx ** (p - 1.0)
    W = grid.face_area * K
    V = grid.volume
    lo = -dt * W[:-1] / V
    up = -dt * W[1:] / V
    diag = 1.0 - lo - up
    # solved for the increment, so steady states give a zero right-hand side
    left, right = _boundary_values(u, grid)
    ghost_l = u[:1] if left is None else np.zeros(1, dtype=u.dtype)
    ghost_r = u[-1:] if right is None else np.zeros(1, dtype=u.dtype)
    du = np.diff(np.concatenate([ghost_l, u, ghost_r]))
    rhs = (W[1:] * du[1:] - W[:-1] * du[:-1]) / V
    if r is not None:
        rhs = rhs + r.f_array(u)
    return u + solve_tridiagonal(lo, diag, up, dt * rhs)


def default_safety(params: DiffusionParams) -> float:
    return 0.2 / max(1.0, params.p - 1.0)


def step(params: DiffusionParams, r: Reaction, grid: Grid, state: PdeState,
         safety: float | None = None, dt: float | None = None) -> PdeState:
    """One time step; ``dt`` overrides the adaptive choice (used to advance
    two runs in lock-step). ``r = None`` means pure diffusion."""
    if safety is None:
        safety = default_safety(params)
    if not (0 < safety <= 1):
        raise ConfigError("safety must lie in (0, 1]")
    u = state.u
    implicit = uses_implicit(params)
    if dt is None:
        dt = implicit_dt(r, grid, safety) if implicit else explicit_dt(params, r, grid, u,
                                                                        safety)
    if not dt > DT_MIN:
        raise StabilityCollapse(f"time step {dt:.3g} underflows")
    if implicit:
        new = _implicit_update(params, r, grid, u, dt)
    else:
        new = u + dt * _explicit_rhs(params, r, grid, u)
    below = float(max(0.0, -np.min(new)))
    above = float(max(0.0, np.max(new) - 1.0))
    clip = max(below, above)
    if clip > CLIP_LIMIT or not np.all(np.isfinite(new)):
        raise ClippingExcess(f"update left [0, 1] by {clip:.3g}")
    np.clip(new, 0.0, 1.0, out=new)
    state.dt_history.append(dt)
    state.clip_history.append(clip)
    return PdeState(state.t + dt, new, state.dt_history, state.clip_history)


# runs and diagnostics ---------------------------------------------------------------

@dataclass
class FrontRecord:
    omega: float
    times: list = field(default_factory=list)
    positions: list = field(default_factory=list)
    support_edge: list | None = None


def level_position(grid: Grid, u: np.ndarray, omega: float) -> float:
    """Rightmost down-crossing of omega, linearly interpolated; nan if none."""
    above = np.nonzero(u >= omega)[0]
    if above.size == 0:
        return math.nan
    j = int(above[-1])
    x = grid.x
    if j == grid.J - 1:
        return float(x[-1])
    u0, u1 = float(u[j]), float(u[j + 1])
    return float(x[j] + (u0 - omega) / (u0 - u1) * (x[j + 1] - x[j]))


def support_edge(grid: Grid, u: np.ndarray) -> float:
    """Centre of the last positive cell; the domain start when u = 0."""
    pos = np.nonzero(u > 0)[0]
    if pos.size == 0:
        return float(grid.faces[0])
    return float(grid.x[pos[-1]])


def check_domain(grid: Grid, c_expected: float, T: float, rho0: float):
    need = 1.5 * c_expected * T + rho0
    if grid.L < need:
        raise ConfigError(f"domain half-width {grid.L} is below 1.5 c T + rho0 = {need:.6g}")


def domain_time(L: float, c_expected: float, rho0: float) -> float:
    """Largest T allowed by the domain rule."""
    return (L - rho0) / (1.5 * c_expected)


@dataclass
class RunResult:
    state: PdeState
    fronts: dict
    diagnostics: dict
    snapshots: dict
    min_positive: list


def run_until(params: DiffusionParams, r: Reaction, grid: Grid, datum: InitialDatum,
              T: float, probes=(0.5,), probe_every: float = 0.25, snapshots=(),
              safety: float | None = None, observe=None) -> RunResult:
    """Integrate to T, recording level-set positions every ``probe_every``.

    ``observe(t, u)`` is called at every probe time when given.
    """
    if not T > 0:
        raise ConfigError("T must be positive")
    if not probes:
        raise ConfigError("need at least one probe level")
    state = initial_state(params, grid, datum)
    track_edge = params.gamma > 0 and not params.pseudo_linear
    fronts = {w: FrontRecord(w, support_edge=[] if track_edge else None) for w in probes}
    snaps = {}
    pending = sorted(snapshots)
    mass = []
    min_pos = []
    next_probe = probe_every
    V = grid.volume

    def record(st):
        for w, fr in fronts.items():
            fr.times.append(st.t)
            fr.positions.append(level_position(grid, st.u, w))
            if fr.support_edge is not None:
                fr.support_edge.append(support_edge(grid, st.u))
        mass.append(float(np.sum(st.u * V)))
        min_pos.append((st.t, float(np.min(st.u)), bool(np.all(st.u > 0))))
        if observe is not None:
            observe(st.t, st.u)

    while state.t < T - 1e-12:
        target = min(next_probe, T, pending[0] if pending else math.inf)
        dt_auto = None
        sf = safety if safety is not None else default_safety(params)
        if uses_implicit(params):
            dt_auto = implicit_dt(r, grid, sf)
        else:
            dt_auto = explicit_dt(params, r, grid, state.u, sf)
        dt = min(dt_auto, target - state.t)
        if dt < 1e-12 * max(1.0, T):
            dt = dt_auto
        state = step(params, r, grid, state, sf, dt=dt)
        if state.t >= next_probe - 1e-12:
            record(state)
            next_probe += probe_every
        while pending and state.t >= pending[0] - 1e-12:
            snaps[pending.pop(0)] = (grid.x.copy(), np.asarray(state.u, dtype=float).copy())
    clips = state.clip_history
    diag = {"steps": len(state.dt_history),
            "dt_min": float(min(state.dt_history)) if state.dt_history else None,
            "dt_max": float(max(state.dt_history)) if state.dt_history else None,
            "clip_max": float(max(clips)) if clips else 0.0,
            "mass": mass,
            "scheme": "linearly-implicit" if uses_implicit(params) else "explicit"}
    return RunResult(state, fronts, diag, snaps, min_pos)


def spreading_speed(front: FrontRecord, window) -> tuple:
    """Least-squares slope of x_omega(t) over the window, with its standard error."""
    t = np.asarray(front.times, dtype=float)
    x = np.asarray(front.positions, dtype=float)
    ta, tb = window
    mask = (t >= ta) & (t <= tb) & np.isfinite(x)
    if mask.sum() < 20:
        raise WindowTooShort(f"only {int(mask.sum())} front samples in {window}")
    t, x = t[mask], x[mask]
    A = np.column_stack([t, np.ones_like(t)])
    coef, res, *_ = np.linalg.lstsq(A, x, rcond=None)
    n = t.size
    resid = x - A @ coef
    s2 = float(resid @ resid) / max(n - 2, 1)
    se = math.sqrt(s2 / float(np.sum((t - t.mean()) ** 2)))
    return float(coef[0]), se


def positivity_persistence_check(params, r, grid, datum, rho1: float, T: float,
                                 probe_every: float = 0.25) -> bool:
    """min of u over the inner ball stays >= eps in the second half of [0, T].

    The ball is |x| <= rho1/2 for gamma > 0 and |x| <= rho1 for gamma = 0.
    """
    radius = rho1 if params.pseudo_linear else rho1 / 2.0
    inner = np.abs(grid.x) <= radius
    if not inner.any():
        raise ConfigError("inner ball contains no cells")
    ok = [True]

    def observe(t, u):
        if t >= T / 2 and float(np.min(u[inner])) < datum.eps:
            ok[0] = False

    run_until(params, r, grid, datum, T, probes=(0.5,), probe_every=probe_every,
              observe=observe)
    return ok[0]


def free_boundary_check(state: PdeState, params: DiffusionParams, grid: Grid):
    """(has_exact_zeros, edge). For gamma > 0 the cells beyond the support
    edge must be exactly zero; for gamma = 0 every cell must be positive."""
    u = state.u
    if params.pseudo_linear:
        return (not bool(np.all(u > 0))), None
    edge = support_edge(grid, u)
    pos = np.nonzero(u > 0)[0]
    if pos.size == 0:
        return True, edge
    beyond = u[pos[-1] + 1:]
    return bool(beyond.size > 0 and np.all(beyond == 0)), edge
