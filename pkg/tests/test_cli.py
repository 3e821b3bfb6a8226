import csv
import hashlib
import json

import numpy as np
import pytest

from dnfkpp import cli


def write_config(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


def run(tmp_path, command, cfg, *extra):
    path = write_config(tmp_path, cfg) if isinstance(cfg, dict) else cfg
    return cli.main([command, str(path), "--out-root", str(tmp_path / "out"), *extra])


def read_json(path):
    return json.loads(path.read_text())


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


BASE = {"diffusion": {"m": 1, "p": 2}, "reaction": {"kind": "logistic"},
        "speed": {"tol": 1e-6}}


def test_critical_speed_report(tmp_path):
    assert run(tmp_path, "critical-speed", BASE) == cli.EXIT_OK
    d = tmp_path / "out" / "critical-speed"
    rep = read_json(d / "report.json")
    assert rep["c_star"] == pytest.approx(2.0, abs=1e-3)
    assert rep["bracket"][0] <= rep["c_star"] <= rep["bracket"][1]
    assert rep["closed_form"] is True
    assert {"m", "p", "gamma", "c0_bound"} <= set(rep)
    rows = read_csv(d / "orbit_below.csv")
    assert rows and set(rows[0]) == {"X", "Z"}


def test_pseudo_linear_report_flags_closed_form(tmp_path):
    cfg = dict(BASE, diffusion={"m": 2, "p": 1.5})
    assert run(tmp_path, "critical-speed", cfg) == cli.EXIT_OK
    rep = read_json(tmp_path / "out" / "critical-speed" / "report.json")
    assert rep["closed_form"] is True
    assert rep["c_star"] == pytest.approx(1.5 * 4 ** (1 / 3), rel=1e-6)


def test_fast_diffusion_is_a_config_error(tmp_path, capsys):
    cfg = {"diffusion": {"m": 0.5, "p": 2}, "reaction": {"kind": "logistic"}}
    assert run(tmp_path, "critical-speed", cfg) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "diffusion" in err and "line 2" in err


def test_field_errors_name_field_and_line(tmp_path):
    cfg = dict(BASE, speed={"tol": "small"})
    path = write_config(tmp_path, cfg)
    with pytest.raises(cli.ConfigFieldError) as info:
        cli.run_command("critical-speed", path, out_root=tmp_path / "out")
    assert info.value.field == "speed.tol"
    assert info.value.line == path.read_text().splitlines().index('    "tol": "small"') + 1


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "diffusion": {"m": 1,,}\n}')
    assert run(tmp_path, "critical-speed", path) == cli.EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err


def test_missing_field_and_bad_choice(tmp_path):
    assert run(tmp_path, "critical-speed", {"reaction": {"kind": "logistic"}}) == cli.EXIT_CONFIG
    cfg = dict(BASE, reaction={"kind": "cubic"})
    assert run(tmp_path, "critical-speed", cfg) == cli.EXIT_CONFIG


def test_set_overrides_values(tmp_path):
    path = write_config(tmp_path, BASE)
    rc = cli.main(["critical-speed", str(path), "--out-root", str(tmp_path / "out"),
                   "--set", "diffusion.m=2", "--set", "output=\"m2\""])
    assert rc == cli.EXIT_OK
    rep = read_json(tmp_path / "out" / "m2" / "report.json")
    assert rep["m"] == 2.0 and rep["gamma"] == 1.0
    assert rep["closed_form"] is False and rep["c_star"] < rep["c0_bound"]
    with pytest.raises(cli.ConfigFieldError):
        cli.apply_override({}, "no-equals-sign")


def test_manifest_hashes_and_determinism(tmp_path):
    cfg = dict(BASE, diffusion={"m": 2, "p": 2}, isoclines={"c": 0.5, "n_points": 21})
    assert run(tmp_path, "isoclines", cfg) == cli.EXIT_OK
    d = tmp_path / "out" / "isoclines"
    man = read_json(d / "manifest.json")
    assert man["partial"] is False and man["command"] == "isoclines"
    assert man["inputs"]["diffusion"] == {"m": 2, "p": 2}
    for name, digest in man["files"].items():
        assert hashlib.sha256((d / name).read_bytes()).hexdigest() == digest
    first = {n: (d / n).read_bytes() for n in man["files"]}
    assert run(tmp_path, "isoclines", cfg) == cli.EXIT_OK
    assert {n: (d / n).read_bytes() for n in man["files"]} == first
    assert not (d / ".lock").exists()


def test_locked_output_is_refused(tmp_path):
    d = tmp_path / "out" / "critical-speed"
    d.mkdir(parents=True)
    (d / ".lock").write_text("")
    assert run(tmp_path, "critical-speed", BASE) == cli.EXIT_CONFIG


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    path = write_config(tmp_path, dict(BASE, output="from-env"))
    assert cli.main(["critical-speed", str(path)]) == cli.EXIT_OK
    assert (tmp_path / "env" / "from-env" / "manifest.json").exists()


def test_numerical_failure_marks_partial(tmp_path):
    cfg = {"diffusion": {"m": 2, "p": 2}, "reaction": {"kind": "logistic"},
           "pde": {"L": 10, "J": 100, "T": 1.0, "c_expected": 1.0, "safety": 1.0,
                   "datum": {"kind": "PlateauIndicator", "eps": 1.0, "rho0": 1}},
           "output": "boom"}
    path = write_config(tmp_path, cfg)
    # an unstable step size so the solver fails part way through
    from dnfkpp import pde
    orig = pde.explicit_dt
    try:
        pde.explicit_dt = lambda *a, **k: 10.0
        rc = cli.main(["pde", str(path), "--out-root", str(tmp_path / "out")])
    finally:
        pde.explicit_dt = orig
    assert rc == cli.EXIT_NUMERICAL
    man = read_json(tmp_path / "out" / "boom" / "manifest.json")
    assert man["partial"] is True and "ClippingExcess" in man["error"]


def test_pde_domain_rule_enforced(tmp_path):
    cfg = {"diffusion": {"m": 1, "p": 2}, "reaction": {"kind": "logistic"},
           "pde": {"L": 20, "J": 200, "T": 20, "c_expected": 2.0}}
    assert run(tmp_path, "pde", cfg) == cli.EXIT_CONFIG


def test_pde_quickstart_front_slope(tmp_path):
    cfg = {"diffusion": {"m": 1, "p": 2}, "reaction": {"kind": "logistic"},
           "pde": {"L": 100, "J": 1000, "T": 30, "c_expected": 2.0, "probes": [0.5],
                   "datum": {"kind": "PlateauIndicator", "eps": 0.5, "rho0": 5}}}
    assert run(tmp_path, "pde", cfg) == cli.EXIT_OK
    d = tmp_path / "out" / "pde"
    rows = read_csv(d / "fronts.csv")
    t = np.array([float(r["t"]) for r in rows])
    x = np.array([float(r["x_omega"]) for r in rows])
    sel = t >= 20
    assert np.polyfit(t[sel], x[sel], 1)[0] == pytest.approx(2.0, rel=0.05)
    diag = read_json(d / "diagnostics.json")
    assert diag["speed_final_third"]["0.5"] == pytest.approx(2.0, rel=0.05)
    assert diag["scheme"] == "explicit"


def test_wave_tail_block(tmp_path):
    cfg = {"diffusion": {"m": 2, "p": 2}, "reaction": {"kind": "logistic"},
           "wave": {"c_factor": 2.0}}
    assert run(tmp_path, "wave", cfg) == cli.EXIT_OK
    d = tmp_path / "out" / "wave"
    info = read_json(d / "wave.json")
    rate = info["tail_fit"]["values"]["rate"]
    assert info["c"] == pytest.approx(2.0 * info["c_star"])
    assert rate == pytest.approx(1.0 / info["c"], rel=0.02)
    assert info["tail_expected"]["values"]["rate"] == pytest.approx(1.0 / info["c"], rel=1e-9)
    assert read_csv(d / "profile.csv")


def test_sweep_gap_column_decreases(tmp_path):
    cfg = {"reaction": {"kind": "logistic"}, "speed": {"tol": 1e-5},
           "sweep": {"path": [[1, 2.5], [1, 2.25], [1, 2.125]], "limit": [1, 2]}}
    assert run(tmp_path, "sweep", cfg) == cli.EXIT_OK
    gaps = [float(r["gap_to_limit"]) for r in read_csv(tmp_path / "out" / "sweep" / "sweep.csv")]
    assert gaps == sorted(gaps, reverse=True)


def test_strong_reaction_table(tmp_path):
    cfg = {"strong_reaction": {"cases": [[2, 2, 1], [2, 2, -1]], "verify": False}}
    assert run(tmp_path, "strong-reaction", cfg) == cli.EXIT_OK
    rows = read_csv(tmp_path / "out" / "strong-reaction" / "classification.csv")
    assert [r["class"] for r in rows] == ["CriticalFiniteOthersPositive", "NoTWs"]


def test_barenblatt_and_portrait_commands(tmp_path):
    cfg = {"diffusion": {"m": 2, "p": 2}, "reaction": {"kind": "logistic"},
           "barenblatt": {"N": 1, "M": 1, "times": [1, 2]},
           "phase_portrait": {"speeds": [0.5, 1.0]}}
    assert run(tmp_path, "barenblatt", cfg) == cli.EXIT_OK
    info = read_json(tmp_path / "out" / "barenblatt" / "barenblatt.json")
    assert info["scaling_residual"] <= 1e-8
    assert run(tmp_path, "phase-portrait", cfg) == cli.EXIT_OK
    assert (tmp_path / "out" / "phase-portrait" / "orbits.csv").exists()


def test_every_command_has_a_parser():
    ap = cli.build_parser()
    for name in cli.COMMANDS:
        assert ap.parse_args([name, "x.json"]).command == name
