"""Command-line front end.

Every subcommand reads one JSON config, validates it before computing, and
writes a deterministic file set plus ``manifest.json`` into an exclusive output
directory. Output root: ``--out-root``, else $DNFKPP_OUTPUT_ROOT, else ./dnfkpp-out.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalFailure

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
OUTPUT_ENV = "DNFKPP_OUTPUT_ROOT"
COMMANDS = ("critical-speed", "wave", "isoclines", "phase-portrait", "barenblatt", "pde",
            "sweep", "strong-reaction")


class ConfigFieldError(ConfigError):
    """Validation failure tied to a config field (and its line when known)."""

    def __init__(self, field, message, line=None):
        self.field, self.line = field, line
        where = f"line {line}, " if line else ""
        super().__init__(f"{where}field '{field}': {message}")


# config loading ---------------------------------------------------------------

def _locate(text: str, path: str):
    """Line of the innermost key of a dotted path, searching after its parents."""
    if not text:
        return None
    pos = 0
    for key in path.split("."):
        if key.isdigit():
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            return None
        pos = m.start()
    return text.count("\n", 0, pos) + 1


def parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_override(cfg: dict, assignment: str):
    if "=" not in assignment:
        raise ConfigFieldError(assignment, "override must look like key.path=value")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for k in parts[:-1]:
        nxt = node.get(k)
        if nxt is None:
            nxt = node[k] = {}
        if not isinstance(nxt, dict):
            raise ConfigFieldError(key, f"'{k}' is not an object")
        node = nxt
    node[parts[-1]] = parse_value(raw)


def load_config(path, overrides=()):
    """Returns (config dict, raw text)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for a in overrides:
        apply_override(cfg, a)
    return cfg, text


class Fields:
    """Typed accessors over the config that raise ConfigFieldError."""

    def __init__(self, cfg: dict, text: str = ""):
        self.cfg, self.text = cfg, text

    def fail(self, path, msg):
        raise ConfigFieldError(path, msg, _locate(self.text, path))

    def get(self, path, default=ConfigError):
        node = self.cfg
        for k in path.split("."):
            if isinstance(node, dict) and k in node:
                node = node[k]
            elif default is ConfigError:
                self.fail(path, "is required")
            else:
                return default
        return node

    def number(self, path, default=ConfigError, positive=False, allow_none=False):
        v = self.get(path, default)
        if v is None and allow_none:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(path, f"expected a finite number, got {v!r}")
        if positive and not v > 0:
            self.fail(path, "must be positive")
        return float(v)

    def integer(self, path, default=ConfigError, minimum=None):
        v = self.get(path, default)
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(path, f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            self.fail(path, f"must be at least {minimum}")
        return v

    def numbers(self, path, default=ConfigError, nonempty=True):
        v = self.get(path, default)
        if not isinstance(v, list) or (nonempty and not v):
            self.fail(path, "expected a non-empty list of numbers")
        for i, x in enumerate(v):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                self.fail(f"{path}.{i}", f"expected a finite number, got {x!r}")
        return [float(x) for x in v]

    def choice(self, path, options, default=ConfigError):
        v = self.get(path, default)
        if v not in options:
            self.fail(path, f"expected one of {sorted(options)}, got {v!r}")
        return v


def read_params(F: Fields, require_slow=True):
    from .params import make_params
    m = F.number("diffusion.m", positive=True)
    p = F.number("diffusion.p")
    if not p > 1:
        F.fail("diffusion.p", "must exceed 1")
    try:
        params = make_params(m, p)
    except ConfigError as exc:
        F.fail("diffusion", str(exc))
    if require_slow and params.gamma < 0 and not params.pseudo_linear:
        F.fail("diffusion", f"gamma = m(p-1)-1 = {params.gamma:.6g} < 0 (fast diffusion) "
                            "is not supported")
    return params


def read_reaction(F: Fields, allow_none=False):
    from .params import logistic, strong_power, tabulated
    kind = F.choice("reaction.kind", {"logistic", "strong_power", "tabulated", "none"},
                    default="logistic")
    if kind == "none":
        if not allow_none:
            F.fail("reaction.kind", "this command needs a reaction")
        return None
    try:
        if kind == "logistic":
            return logistic(F.number("reaction.scale", 1.0, positive=True))
        if kind == "strong_power":
            return strong_power(F.number("reaction.n"),
                                F.number("reaction.scale", 1.0, positive=True))
        samples = F.get("reaction.samples")
        if not isinstance(samples, list) or not all(
                isinstance(s, list) and len(s) == 2 for s in samples):
            F.fail("reaction.samples", "expected a list of [u, f] pairs")
        return tabulated(samples, F.number("reaction.fprime0"), F.number("reaction.fprime1"))
    except ConfigFieldError:
        raise
    except ConfigError as exc:
        F.fail("reaction", str(exc))


# artifacts ---------------------------------------------------------------------

def fmt(v) -> str:
    """Shortest round-trip text for floats; plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if hasattr(obj, "value") and hasattr(obj, "name"):
        return obj.value
    return obj


class Artifacts:
    """Exclusive output directory with a manifest of hashed files."""

    LOCK = ".lock"

    def __init__(self, directory: Path, command: str, inputs: dict, tolerances: dict):
        self.dir = Path(directory)
        self.command, self.inputs, self.tolerances = command, inputs, tolerances
        self.files = {}
        self._lock = None

    def __enter__(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        try:
            self._lock = os.open(self.dir / self.LOCK, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(f"output directory {self.dir} is locked by another run") from None
        return self

    def __exit__(self, exc_type, exc, tb):
        partial = exc_type is not None
        self._write_manifest(partial, None if exc is None else f"{type(exc).__name__}: {exc}")
        os.close(self._lock)
        os.unlink(self.dir / self.LOCK)
        return False

    def _write(self, name: str, data: bytes):
        (self.dir / name).write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def csv(self, name: str, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        self._write(name, buf.getvalue().encode())

    def json(self, name: str, obj):
        self._write(name, (json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n").encode())

    def _write_manifest(self, partial, error):
        man = {"command": self.command, "version": __version__,
               "inputs": _jsonable(self.inputs), "tolerances": _jsonable(self.tolerances),
               "seeds": None, "files": dict(sorted(self.files.items())),
               "partial": partial, "error": error}
        (self.dir / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")


def output_dir(cfg: dict, command: str, out_root=None) -> Path:
    root = out_root or os.environ.get(OUTPUT_ENV) or "dnfkpp-out"
    name = cfg.get("output", command)
    if not isinstance(name, str) or not name:
        raise ConfigFieldError("output", "expected a directory name")
    return Path(root) / name


# commands ----------------------------------------------------------------------
# Each takes (Fields) and returns (tolerances, writer) where writer(Artifacts)
# does the work. Validation happens before the writer runs.

def _orbit_rows(trace):
    return zip(trace.X, trace.Z)


def cmd_critical_speed(F: Fields):
    from .critical_speed import critical_speed
    from .phase_plane import OrbitOptions, integrate_from_S
    params, r = read_params(F), read_reaction(F)
    tol = F.number("speed.tol", 1e-6, positive=True)
    if not tol > 1e-14:
        F.fail("speed.tol", "must exceed 1e-14")

    def run(out: Artifacts):
        res = critical_speed(params, r, tol)
        out.json("report.json", {"m": params.m, "p": params.p, "gamma": params.gamma,
                                 "c_star": res.c_star, "bracket": list(res.bracket),
                                 "c0_bound": res.c0_bound, "closed_form": res.closed_form,
                                 "evaluations": res.evaluations,
                                 "regime": params.regime.value})
        for name, c in (("orbit_below.csv", res.bracket[0]), ("orbit_above.csv", res.bracket[1])):
            tr = integrate_from_S(params, r, c, OrbitOptions())
            out.csv(name, ["X", "Z"], _orbit_rows(tr))
    return {"speed.tol": tol}, run


def _profile_rows(prof):
    syn = prof.synthetic if prof.synthetic is not None else np.zeros(prof.xi.size, bool)
    return zip(prof.xi, prof.phi, prof.flux, prof.z, syn)


def cmd_wave(F: Fields):
    from .critical_speed import critical_speed
    from .wave_profile import critical_wave, expected_tail, fit_tail, wave_profile, WaveKind
    params, r = read_params(F), read_reaction(F)
    tol = F.number("speed.tol", 1e-10, positive=True)
    critical = F.get("wave.critical", False)
    if not isinstance(critical, bool):
        F.fail("wave.critical", "expected true or false")
    c_given = F.number("wave.c", None, positive=True, allow_none=True)
    factor = F.number("wave.c_factor", 2.0, positive=True)
    if not critical and c_given is None and factor < 1:
        F.fail("wave.c_factor", "must be at least 1")

    def run(out: Artifacts):
        summary = {}
        if critical:
            prof, res = critical_wave(params, r, tol=max(tol, 1e-13))
            summary["c_star"] = res.c_star
        else:
            if c_given is None:
                res = critical_speed(params, r, tol)
                c = factor * res.c_star
                summary["c_star"] = res.c_star
            else:
                c = c_given
            prof = wave_profile(params, r, c)
        summary.update({"c": prof.c, "kind": prof.kind, "xi0": prof.xi0, "xi1": prof.xi1,
                        "meta": {k: v for k, v in prof.meta.items() if k != "reaction"}})
        out.csv("profile.csv", ["xi", "phi", "flux", "z", "synthetic"], _profile_rows(prof))
        fit = fit_tail(prof, params, r)
        summary["tail_fit"] = {"model": fit.model, "values": fit.values,
                               "residual": fit.residual, "window": list(fit.window),
                               "n_samples": fit.n_samples}
        if prof.kind is WaveKind.POSITIVE:
            model, expected = expected_tail(params, r, prof.c, prof.meta.get("critical", False))
            summary["tail_expected"] = {"model": model, "values": expected}
        out.json("wave.json", summary)
    return {"speed.tol": tol}, run


def cmd_isoclines(F: Fields):
    from .phase_plane import null_isoclines
    params, r = read_params(F), read_reaction(F)
    c = F.number("isoclines.c", positive=True)
    n = F.integer("isoclines.n_points", 401, minimum=3)

    def run(out: Artifacts):
        iso = null_isoclines(params, r, c, n)
        out.csv("isoclines.csv", ["X", "Z_low", "Z_up", "gap"],
                ((x, None if np.isnan(a) else a, None if np.isnan(b) else b, g)
                 for x, a, b, g in zip(iso.X, iso.Z_low, iso.Z_up, iso.gap)))
        out.json("isoclines.json", {"c": c, "topology": iso.topology,
                                    "residual": iso.residual(params, r)})
    return {}, run


def cmd_phase_portrait(F: Fields):
    from .phase_plane import OrbitOptions, integrate_from_S
    params, r = read_params(F), read_reaction(F)
    speeds = F.numbers("phase_portrait.speeds")
    if any(c <= 0 for c in speeds):
        F.fail("phase_portrait.speeds", "speeds must be positive")
    floor = F.number("phase_portrait.X_floor", 1e-10, positive=True)
    opts = OrbitOptions(X_floor=floor, continue_to_floor=True)

    def run(out: Artifacts):
        rows, ends = [], []
        for c in speeds:
            tr = integrate_from_S(params, r, c, opts)
            rows.extend((c, x, z, tr.terminal.tag) for x, z in zip(tr.X, tr.Z))
            ends.append({"c": c, "terminal": tr.terminal.tag, "value": tr.terminal.value,
                         "certified": tr.terminal.certified,
                         "supercritical": tr.supercritical})
        out.csv("orbits.csv", ["c", "X", "Z", "terminal_tag"], rows)
        out.json("terminals.json", ends)
    return {"rtol": opts.rtol, "atol": opts.atol, "X_floor": floor}, run


def cmd_barenblatt(F: Fields):
    from .barenblatt import (barenblatt, barenblatt_eval, numerical_mass,
                             scaling_identity_check)
    params = read_params(F)
    N = F.integer("barenblatt.N", 1, minimum=1)
    M = F.number("barenblatt.M", 1.0, positive=True)
    times = F.numbers("barenblatt.times", [1.0])
    if any(t <= 0 for t in times):
        F.fail("barenblatt.times", "times must be positive")
    npts = F.integer("barenblatt.points", 201, minimum=2)
    x_max = F.number("barenblatt.x_max", None, positive=True, allow_none=True)

    def run(out: Artifacts):
        spec = barenblatt(params, N, M)
        rows, info = [], []
        for t in times:
            R = spec.support_radius(t)
            top = x_max or (1.25 * R if math.isfinite(R) else
                            (40.0 / spec.k) ** ((params.p - 1) / params.p)
                            * t ** (spec.alpha / N))
            xs = np.linspace(0.0, top, npts)
            rows.extend((t, x, u) for x, u in zip(xs, barenblatt_eval(spec, xs, t)))
            info.append({"t": t, "support_radius": R if math.isfinite(R) else None,
                         "mass": numerical_mass(spec, t)})
        out.csv("barenblatt.csv", ["t", "r", "u"], rows)
        xs = np.linspace(0.0, 2.0, 10)
        out.json("barenblatt.json", {"N": N, "M": M, "C_M": spec.C_M, "alpha": spec.alpha,
                                     "k": spec.k, "times": info,
                                     "scaling_residual": max(scaling_identity_check(spec, xs, t)
                                                             for t in times)})
    return {}, run


def _read_datum(F: Fields, params):
    from .barenblatt import barenblatt
    from .pde import DatumKind, InitialDatum
    kinds = {k.value: k for k in DatumKind if k is not DatumKind.CUSTOM}
    kind = kinds[F.choice("pde.datum.kind", set(kinds), default="PlateauIndicator")]
    num = lambda key, d: F.number(f"pde.datum.{key}", d)
    eps = num("eps", 0.5)
    if not 0 < eps <= 1:
        F.fail("pde.datum.eps", "must lie in (0, 1]")
    rho0 = num("rho0", 5.0)
    if rho0 < 0:
        F.fail("pde.datum.rho0", "must be non-negative")
    kw = dict(kind=kind, eps=eps, rho0=rho0, b0=num("b0", 1.0), a0=num("a0", 1.0),
              rate=num("rate", 1.0), power=num("power", 0.0))
    if kind is DatumKind.BARENBLATT:
        t_off = F.number("pde.datum.t_offset", 1.0, positive=True)
        spec = barenblatt(params, F.integer("pde.N", 1, minimum=1),
                          F.number("pde.datum.M", 1.0, positive=True))
        kw.update(spec=spec, t_offset=t_off)
        R = spec.support_radius(t_off)
        if math.isfinite(R):
            kw["rho0"] = R
        else:
            kw["rho0"] = (40.0 / spec.k) ** ((params.p - 1) / params.p) * t_off ** (
                spec.alpha / spec.N)
    return InitialDatum(**kw)


def cmd_pde(F: Fields):
    from .critical_speed import critical_speed
    from .pde import BoundaryCondition, Grid, check_domain, run_until, spreading_speed
    params = read_params(F)
    r = read_reaction(F, allow_none=True)
    L = F.number("pde.L", positive=True)
    J = F.integer("pde.J", 4000, minimum=2)
    T = F.number("pde.T", positive=True)
    radial = F.get("pde.radial", False)
    if not isinstance(radial, bool):
        F.fail("pde.radial", "expected true or false")
    N = F.integer("pde.N", 1, minimum=1)
    bcs = {b.value: b for b in BoundaryCondition}
    bc = bcs[F.choice("pde.bc", set(bcs), default=BoundaryCondition.ZERO_FLUX.value)]
    probes = F.numbers("pde.probes", [0.1, 0.5, 0.9])
    if any(not 0 < w < 1 for w in probes):
        F.fail("pde.probes", "levels must lie in (0, 1)")
    every = F.number("pde.probe_every", 0.25, positive=True)
    snaps = F.numbers("pde.snapshots", [], nonempty=False)
    safety = F.number("pde.safety", None, allow_none=True)
    if safety is not None and not 0 < safety <= 1:
        F.fail("pde.safety", "must lie in (0, 1]")
    try:
        grid = Grid(L, J, radial, N, bc)
    except ConfigError as exc:
        F.fail("pde", str(exc))
    datum = _read_datum(F, params)
    c_exp = F.number("pde.c_expected", None, positive=True, allow_none=True)
    if c_exp is None:
        c_exp = 0.0 if r is None else critical_speed(params, r, 1e-6).c_star
    try:
        check_domain(grid, c_exp, T, datum.rho0)
    except ConfigError as exc:
        F.fail("pde.L", str(exc))

    def run(out: Artifacts):
        res = run_until(params, r, grid, datum, T, probes=tuple(probes), probe_every=every,
                        snapshots=snaps, safety=safety)
        rows = []
        for w, fr in res.fronts.items():
            edges = fr.support_edge or [None] * len(fr.times)
            rows.extend((t, w, x, e) for t, x, e in zip(fr.times, fr.positions, edges))
        out.csv("fronts.csv", ["t", "omega", "x_omega", "support_edge"], rows)
        srows = []
        for t in sorted(res.snapshots):
            xs, us = res.snapshots[t]
            srows.extend((t, x, u) for x, u in zip(xs, us))
        out.csv("snapshots.csv", ["t", "x", "u"], srows)
        diag = dict(res.diagnostics)
        diag["c_expected"] = c_exp
        speeds = {}
        for w, fr in res.fronts.items():
            try:
                speeds[str(w)] = spreading_speed(fr, (2.0 * T / 3.0, T))[0]
            except NumericalFailure:
                speeds[str(w)] = None
        diag["speed_final_third"] = speeds
        diag["always_positive"] = all(flag for _, _, flag in res.min_positive)
        out.json("diagnostics.json", diag)
    return {"safety": safety, "J": J}, run


def cmd_sweep(F: Fields):
    from .critical_speed import continuity_sweep, critical_speed
    from .params import make_params
    r = read_reaction(F)
    tol = F.number("speed.tol", 1e-6, positive=True)
    path = F.get("sweep.path")
    if not isinstance(path, list) or not path or not all(
            isinstance(pt, list) and len(pt) == 2 for pt in path):
        F.fail("sweep.path", "expected a list of [m, p] pairs")
    for i, (m, p) in enumerate(path):
        try:
            pp = make_params(float(m), float(p))
        except (ConfigError, TypeError, ValueError) as exc:
            F.fail(f"sweep.path.{i}", str(exc))
        if pp.gamma < 0 and not pp.pseudo_linear:
            F.fail(f"sweep.path.{i}", "gamma < 0 is not supported")
    limit = F.get("sweep.limit", None)
    if limit is not None and not (isinstance(limit, list) and len(limit) == 2):
        F.fail("sweep.limit", "expected an [m, p] pair")
    workers = F.integer("sweep.workers", 1, minimum=1)

    def run(out: Artifacts):
        pts = continuity_sweep([(float(m), float(p)) for m, p in path], r, tol, workers)
        ref = None
        if limit is not None:
            ref = critical_speed(make_params(float(limit[0]), float(limit[1])), r, tol).c_star
        out.csv("sweep.csv", ["m", "p", "gamma", "c_star", "c0_bound", "evaluations",
                              "gap_to_limit"],
                ((s.m, s.p, s.gamma, s.c_star, s.c0_bound, s.evaluations,
                  None if ref is None else abs(s.c_star - ref)) for s in pts))
        out.json("sweep.json", {"limit_c_star": ref})
    return {"speed.tol": tol}, run


def cmd_strong_reaction(F: Fields):
    from .params import make_params
    from .strong_reaction import StrongReactionCase, case_grid, classify, verify_grid
    grid = F.get("strong_reaction.grid", False)
    if grid is True:
        cases = case_grid()
    else:
        raw = F.get("strong_reaction.cases")
        if not isinstance(raw, list) or not raw or not all(
                isinstance(c, list) and len(c) == 3 for c in raw):
            F.fail("strong_reaction.cases", "expected a list of [m, p, n] triples")
        cases = [tuple(float(v) for v in c) for c in raw]
    built = []
    for i, (m, p, n) in enumerate(cases):
        try:
            case = StrongReactionCase(make_params(m, p), n)
        except ConfigError as exc:
            F.fail(f"strong_reaction.cases.{i}", str(exc))
        if case.params.gamma < 0 and not case.params.pseudo_linear:
            F.fail(f"strong_reaction.cases.{i}", "gamma < 0 is not supported")
        built.append(case)
    verify = F.get("strong_reaction.verify", True)
    if not isinstance(verify, bool):
        F.fail("strong_reaction.verify", "expected true or false")
    tol = F.number("speed.tol", 1e-9, positive=True)

    def run(out: Artifacts):
        reps = verify_grid(built, tol=tol) if verify else [None] * len(built)
        rows = []
        for case, rep in zip(built, reps):
            cls = classify(case)
            rows.append((case.params.m, case.params.p, case.n, case.params.gamma, case.q,
                         cls.value, None if rep is None else rep.c_star,
                         None if rep is None or rep.numerical is None else rep.numerical.value,
                         None if rep is None else rep.agree))
        out.csv("classification.csv",
                ["m", "p", "n", "gamma", "q", "class", "c_star", "numerical", "agree"], rows)
    return {"speed.tol": tol}, run


HANDLERS = {"critical-speed": cmd_critical_speed, "wave": cmd_wave, "isoclines": cmd_isoclines,
            "phase-portrait": cmd_phase_portrait, "barenblatt": cmd_barenblatt, "pde": cmd_pde,
            "sweep": cmd_sweep, "strong-reaction": cmd_strong_reaction}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dnfkpp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", help="JSON run config")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field (dotted path; value parsed as JSON)")
        sp.add_argument("--out-root", default=None, help=f"output root (overrides ${OUTPUT_ENV})")
    return ap


def run_command(command: str, config_path, overrides=(), out_root=None) -> Path:
    cfg, text = load_config(config_path, overrides)
    F = Fields(cfg, text if not overrides else "")
    tolerances, work = HANDLERS[command](F)
    directory = output_dir(cfg, command, out_root)
    with Artifacts(directory, command, copy.deepcopy(cfg), tolerances) as out:
        work(out)
    return directory


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        d = run_command(args.command, args.config, args.set, args.out_root)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(d)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
