from __future__ import annotations

import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from lateral_vdw.analysis import Scenario, find_minima_1d, ratio_at
from lateral_vdw.cli import COMMANDS, _check_keys, build_scenario, load_config, run
from lateral_vdw.profile import Grating, Strip
from lateral_vdw.response import GammaParams, Orientation

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
ANISO = {"gamma_s": 0.6, "phi": 0, "theta": 90, "psi": 0, "angle_unit": "deg"}


def write(tmp_path, name="run.json", **cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [l for l in text.strip().splitlines() if not l.startswith("#")]
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


# ---------------------------------------------------------------------- eval


def test_eval_proximity_limit(capsys):
    code, out, _ = invoke(capsys, "eval", "--config", str(CONFIGS / "gaussian_pfa_limit.json"))
    assert code == 0
    assert float(out) == pytest.approx(-12.0, rel=0.01)


def test_eval_is_a_pass_through(capsys, tmp_path):
    cfg = write(tmp_path, profile="strip", d_over_z0=1.0, x0_over_z0=0.0, precision=17, **ANISO)
    code, out, _ = invoke(capsys, "eval", "--config", cfg)
    want = ratio_at(Scenario(Strip(1.0), GammaParams(gamma_s=0.6), Orientation(0, math.pi / 2, 0)), 0.0)
    assert code == 0 and want < 0
    assert float(out) == want


def test_eval_force_and_json(capsys, tmp_path):
    cfg = write(tmp_path, profile="strip", d_over_z0=1.0, x0_over_z0=0.3, quantity="force", **ANISO)
    code, out, _ = invoke(capsys, "eval", "--config", cfg, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["quantity"] == "force" and math.isfinite(doc["value"])


def test_eval_writes_optional_file(capsys, tmp_path):
    cfg = write(tmp_path, profile="strip", d_over_z0=1.0, **ANISO)
    target = tmp_path / "value.txt"
    code, out, _ = invoke(capsys, "eval", "--config", cfg, "--out", str(target))
    assert code == 0 and out == target.read_text()


@pytest.mark.parametrize(
    "bad",
    [
        {"angle_units": "deg"},
        {"angle_unit": "degrees"},
        {"angle_unit": None},
    ],
)
def test_malformed_angle_unit_is_a_config_error(capsys, tmp_path, bad):
    cfg = {"profile": "strip", "d_over_z0": 1.0, "gamma_s": 0.6, "theta": 90, **bad}
    code, _, err = invoke(capsys, "eval", "--config", write(tmp_path, **cfg))
    assert code == 2
    assert "angle_unit" in err


def test_angles_in_radians(capsys, tmp_path):
    deg = write(tmp_path, "deg.json", profile="strip", d_over_z0=1.0, precision=17, **ANISO)
    rad = write(tmp_path, "rad.json", profile="strip", d_over_z0=1.0, precision=17, gamma_s=0.6,
                theta=math.pi / 2, angle_unit="rad")
    assert invoke(capsys, "eval", "--config", deg)[1] == invoke(capsys, "eval", "--config", rad)[1]


def test_json_syntax_error_reports_position(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "profile": "strip",\n  "d_over_z0": 1.0,,\n}')
    code, _, err = invoke(capsys, "eval", "--config", str(path))
    assert code == 2
    assert "broken.json:3:" in err


@pytest.mark.parametrize(
    "cfg,field",
    [
        ({"profile": "strip", "d_over_z0": -1.0}, "d_over_z0"),
        ({"profile": "cone", "d_over_z0": 1.0}, "profile"),
        ({"profile": "strip", "d_over_z0": 1.0, "gamma_s": 1.2}, "gamma_s"),
        ({"profile": "strip", "d_over_z0": 1.0, "a11": 3, "a22": 2, "a33": 1}, "a11"),
        ({"profile": "strip", "d_over_z0": 1.0, "a11": 1, "a22": 1, "a33": 2, "gamma_s": 0.1}, "a11"),
        ({"profile": "strip", "d_over_z0": 1.0, "x0_over_z0": "zero"}, "x0_over_z0"),
        ({"profile": "strip", "d_over_z0": 1.0, "nx": 3}, "nx"),
        ({"profile": "strip", "d_over_z0": 1.0, "task": "scan"}, "task"),
        ({"profile": "grating", "d_over_z0": 1.0, "L_over_z0": 0.5, "n_strips": 0}, "n_strips"),
        ({"profile": "tabulated", "table": "missing.txt"}, "table"),
    ],
)
def test_config_errors_name_the_field(capsys, tmp_path, cfg, field):
    code, _, err = invoke(capsys, "eval", "--config", write(tmp_path, **cfg))
    assert code == 2
    assert field in err


def test_raw_polarizability_diagonal(capsys, tmp_path):
    a = write(tmp_path, "a.json", profile="strip", d_over_z0=1.0, a11=1, a22=1, a33=4, precision=17)
    g = write(tmp_path, "g.json", profile="strip", d_over_z0=1.0, gamma_s=0.5, gamma_iso=2, precision=17)
    assert invoke(capsys, "eval", "--config", a)[1] == invoke(capsys, "eval", "--config", g)[1]


def test_convergence_failure_exits_one_with_estimate(capsys, tmp_path):
    x = np.linspace(-3, 3, 61)
    np.savetxt(tmp_path / "bump.txt", np.column_stack([x, np.exp(-(x / 0.3) ** 2)]))
    cfg = write(tmp_path, profile="tabulated", table="bump.txt", rel_tol=1e-15, abs_tol=1e-300,
                max_refinements=1, **ANISO)
    code, out, err = invoke(capsys, "eval", "--config", cfg)
    assert code == 1 and out == ""
    assert "error estimate" in err


def test_missing_config_file(capsys, tmp_path):
    code, _, err = invoke(capsys, "eval", "--config", str(tmp_path / "absent.json"))
    assert code == 2 and "absent.json" in err


def test_argument_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        run(["scan"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run(["eval", "--config", "x.json", "--threads", "0"])
    assert info.value.code == 2


# ---------------------------------------------------------------------- scan


def test_scan_minima_match_minimum_finder(capsys):
    code, out, _ = invoke(capsys, "scan", "--config", str(CONFIGS / "two_strips_scan_wide.json"))
    header, rows = csv_rows(out)
    assert code == 0 and header == ["x0_over_z0", "ratio"]
    xs = np.array([float(r[0]) for r in rows])
    vals = np.array([float(r[1]) for r in rows])
    assert np.all(np.diff(xs) > 0)
    grid_minima = xs[1:-1][(vals[1:-1] < vals[:-2]) & (vals[1:-1] < vals[2:])]
    s = Scenario(Grating(0.8, 0.5, 2), GammaParams(gamma_s=0.2), Orientation(0, math.pi / 2, 0))
    found = [m.location[0] for m in find_minima_1d(s, -3, 3)]
    assert len(found) == len(grid_minima) == 2
    np.testing.assert_allclose(grid_minima, found, atol=xs[1] - xs[0])


def test_scan_edge_cases(capsys, tmp_path):
    empty = write(tmp_path, "e.json", profile="strip", d_over_z0=1.0, x_min=-1, x_max=1, n=0)
    code, out, _ = invoke(capsys, "scan", "--config", empty)
    assert code == 0 and out == "x0_over_z0,ratio\n"
    reversed_ = write(tmp_path, "r.json", profile="strip", d_over_z0=1.0, x_min=1, x_max=-1, n=5)
    assert invoke(capsys, "scan", "--config", reversed_)[0] == 2


def test_scan_json_format(capsys, tmp_path):
    cfg = write(tmp_path, profile="strip", d_over_z0=1.0, x_min=-1, x_max=1, n=3, format="json")
    code, out, _ = invoke(capsys, "scan", "--config", cfg)
    doc = json.loads(out)
    assert code == 0 and doc["columns"] == ["x0_over_z0", "ratio"] and len(doc["rows"]) == 3


def test_threads_flag_and_environment(capsys, tmp_path, monkeypatch):
    cfg = write(tmp_path, profile="grating", d_over_z0=0.3, L_over_z0=0.5, n_strips=3, x_min=-1, x_max=1, n=7)
    serial = invoke(capsys, "scan", "--config", cfg)[1]
    assert invoke(capsys, "scan", "--config", cfg, "--threads", "2")[1] == serial
    monkeypatch.setenv("LATERAL_VDW_THREADS", "2")
    assert invoke(capsys, "scan", "--config", cfg)[1] == serial
    monkeypatch.setenv("LATERAL_VDW_THREADS", "many")
    assert invoke(capsys, "scan", "--config", cfg)[0] == 2


# ----------------------------------------------------------------------- map


def test_map_circular_symmetry(capsys, tmp_path):
    cfg = write(tmp_path, profile="gaussian", d_over_z0=0.2, gamma_s=0.6, theta=0, angle_unit="deg",
                x_min=-1, x_max=1, nx=5, y_min=-1, y_max=1, ny=5)
    code, out, _ = invoke(capsys, "map", "--config", cfg)
    header, rows = csv_rows(out)
    assert code == 0 and header == ["x0_over_z0", "y0_over_z0", "ratio"]
    grid = np.array([float(r[2]) for r in rows]).reshape(5, 5)
    np.testing.assert_array_equal(grid, grid[::-1, :])
    np.testing.assert_array_equal(grid, grid[:, ::-1])
    # row-major with x outer
    assert [r[0] for r in rows[:5]] == ["-1"] * 5


def test_map_single_point_and_mirror(capsys, tmp_path):
    one = write(tmp_path, "one.json", profile="gaussian", d_over_z0=0.5, x_min=0.2, x_max=0.2, nx=1,
                y_min=0.1, y_max=0.1, ny=1)
    code, out, _ = invoke(capsys, "map", "--config", one)
    assert code == 0 and len(csv_rows(out)[1]) == 1
    tilted = write(tmp_path, "tilt.json", profile="gaussian", d_over_z0=0.2, gamma_s=0.6, theta=84.6,
                   angle_unit="deg", x_min=-1, x_max=1, nx=3, y_min=-1, y_max=1, ny=5)
    grid = np.array([float(r[2]) for r in csv_rows(invoke(capsys, "map", "--config", tilted)[1])[1]])
    grid = grid.reshape(3, 5)
    np.testing.assert_array_equal(grid, grid[:, ::-1])


# --------------------------------------------------------------------- phase


@pytest.mark.parametrize("family,threshold", [("gaussian", 0.3571), ("strip", 0.3636)])
def test_phase_footer_and_rows(capsys, tmp_path, family, threshold):
    cfg = write(tmp_path, profile="strip", d_over_z0=1.0, family=family, gamma_s_values=[0.3, 0.6], width_tol=1e-3)
    code, out, _ = invoke(capsys, "phase", "--config", cfg)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "gamma_s,critical_d_over_z0"
    assert lines[1] == "0.3,"
    assert float(lines[2].split(",")[1]) > 0
    key, value = lines[-1].lstrip("# ").split(",")
    assert key == "threshold_gamma_s"
    assert float(value) == pytest.approx(threshold, abs=1e-3)


def test_phase_rejects_bad_gamma_list(capsys, tmp_path):
    cfg = write(tmp_path, profile="strip", d_over_z0=1.0, family="strip", gamma_s_values=[0.5, 1.5])
    assert invoke(capsys, "phase", "--config", cfg)[0] == 2


# ---------------------------------------------------------------------- trap


ROUND_SETUP = {"z0": 1.0, "amplitude_a": 0.1, "mass": 1.0, "omega_trap": 1.0, "hbar": 1.0, "epsilon0": 1.0}


@pytest.mark.parametrize("d,sign", [(0.8, 1), (0.2, -1)])
def test_trap_report(capsys, tmp_path, d, sign):
    cfg = write(tmp_path, profile="gaussian", d_over_z0=d, **ANISO, **ROUND_SETUP)
    code, out, _ = invoke(capsys, "trap", "--config", cfg)
    doc = json.loads(out)
    assert code == 0
    assert {"curvature", "omega_prime", "delta_omega"} <= set(doc)
    assert np.sign(doc["delta_omega"]) == sign == np.sign(doc["curvature"])


def test_trap_flat_profile(capsys, tmp_path):
    cfg = write(tmp_path, profile="gaussian", d_over_z0=0.5, sign=0, **ANISO, **ROUND_SETUP)
    code, out, _ = invoke(capsys, "trap", "--config", cfg)
    assert code == 0 and json.loads(out)["delta_omega"] == 0.0


def test_trap_destabilised_exits_one(capsys, tmp_path):
    setup = dict(ROUND_SETUP, hbar=1e4, omega_trap=1e-3)
    cfg = write(tmp_path, profile="gaussian", d_over_z0=0.2, **ANISO, **setup)
    code, _, err = invoke(capsys, "trap", "--config", cfg)
    assert code == 1 and "destabilis" in err


def test_trap_uses_codata_defaults(capsys):
    code, out, _ = invoke(capsys, "trap", "--config", str(CONFIGS / "trap_gaussian_wide.json"))
    assert code == 0 and json.loads(out)["delta_omega"] > 0


# ---------------------------------------------------------- regime / minima


def test_regime_and_minima_outputs(capsys):
    code, out, _ = invoke(capsys, "regime", "--config", str(CONFIGS / "grating_regime_narrow.json"))
    assert code == 0 and out.splitlines() == ["regime", "valley"]
    code, out, _ = invoke(capsys, "minima", "--config", str(CONFIGS / "gaussian_bump_minima_narrow.json"))
    header, rows = csv_rows(out)
    assert code == 0 and len(rows) == 2 and header[-1] == "is_global"


def test_regime_needs_grating(capsys, tmp_path):
    assert invoke(capsys, "regime", "--config", write(tmp_path, profile="strip", d_over_z0=1.0))[0] == 2


# ---------------------------------------------------------------- contract


def test_output_files_are_byte_identical(tmp_path, capsys):
    cfg = str(CONFIGS / "single_strip_scan_narrow.json")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["scan", "--config", cfg, "--out", str(a)]) == 0
    assert run(["scan", "--config", cfg, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert capsys.readouterr().out == ""


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_checked_in_configs_validate(path):
    data = load_config(path)
    assert data["task"] in COMMANDS
    _check_keys(data, data["task"])
    build_scenario(data)


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, profile="strip", d_over_z0=1.0, **ANISO)
    done = subprocess.run([sys.executable, "-m", "lateral_vdw", "eval", "--config", cfg],
                          capture_output=True, text=True, check=False)
    assert done.returncode == 0 and float(done.stdout) < 0
    bad = subprocess.run([sys.executable, "-m", "lateral_vdw", "eval", "--config", str(tmp_path / "none.json")],
                         capture_output=True, text=True, check=False)
    assert bad.returncode == 2
