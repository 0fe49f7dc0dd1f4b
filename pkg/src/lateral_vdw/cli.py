"""Command-line front end: flat JSON run configs in, plot-ready CSV/JSON out.

Exit codes: 0 success, 1 numerical failure, 2 configuration failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Any

import scipy.constants as const

from . import analysis
from .analysis import Scenario
from .energy import PhysicalSetup
from .errors import ConvergenceError, DomainError, LateralVdWError, NoSignChangeError, TrapDestabilizedError
from .profile import Gaussian, Grating, Strip, load_table
from .quadrature import QuadratureSpec
from .response import GammaParams, Orientation, gamma_from_polarizability

COMMANDS = ("eval", "scan", "map", "phase", "trap", "regime", "minima")
THREADS_ENV = "LATERAL_VDW_THREADS"

_SCENARIO_KEYS = {
    "profile", "d_over_z0", "L_over_z0", "n_strips", "table", "taper", "sign",
    "gamma_s", "gamma_a", "gamma_iso", "a11", "a22", "a33", "strict_gammas",
    "phi", "theta", "psi", "angle_unit", "mode", "approximation",
    "rel_tol", "abs_tol", "u_max", "max_refinements",
}
_OUTPUT_KEYS = {"task", "format", "out", "precision"}
_TASK_KEYS = {
    "eval": {"x0_over_z0", "y0_over_z0", "quantity"},
    "scan": {"x_min", "x_max", "n", "y0_over_z0"},
    "map": {"x_min", "x_max", "nx", "y_min", "y_max", "ny"},
    "phase": {"family", "gamma_s_values", "width_tol"},
    "trap": {"z0", "amplitude_a", "mass", "omega_trap", "hbar", "epsilon0", "gamma_iso_si", "dipole_p"},
    "regime": set(),
    "minima": {"x_min", "x_max", "grid_n", "y0_over_z0"},
}


class ConfigError(LateralVdWError, ValueError):
    """Invalid run configuration."""


# ------------------------------------------------------------------ config


def load_config(path: str | os.PathLike) -> dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    data["_base_dir"] = str(path.parent)
    return data


class _Fields:
    """Typed access to a flat config dict with field-precise error messages."""

    def __init__(self, data: dict[str, Any]):
        self.data = data

    def has(self, key: str) -> bool:
        return key in self.data

    def number(self, key: str, default: float | None = None, *, positive: bool = False) -> float:
        if key not in self.data:
            if default is None:
                raise ConfigError(f"field '{key}': required")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"field '{key}': expected a finite number, got {value!r}")
        if positive and value <= 0:
            raise ConfigError(f"field '{key}': must be > 0, got {value!r}")
        return float(value)

    def integer(self, key: str, default: int | None = None, *, minimum: int | None = None) -> int:
        if key not in self.data:
            if default is None:
                raise ConfigError(f"field '{key}': required")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"field '{key}': expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"field '{key}': must be >= {minimum}, got {value}")
        return value

    def choice(self, key: str, options: tuple[str, ...], default: str | None = None) -> str:
        if key not in self.data:
            if default is None:
                raise ConfigError(f"field '{key}': required, one of {list(options)}")
            return default
        value = self.data[key]
        if value not in options:
            raise ConfigError(f"field '{key}': expected one of {list(options)}, got {value!r}")
        return value

    def boolean(self, key: str, default: bool) -> bool:
        value = self.data.get(key, default)
        if not isinstance(value, bool):
            raise ConfigError(f"field '{key}': expected true or false, got {value!r}")
        return value


def _check_keys(data: dict[str, Any], command: str) -> None:
    allowed = _SCENARIO_KEYS | _OUTPUT_KEYS | _TASK_KEYS[command] | {"_base_dir"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"field '{unknown[0]}': not recognised for task '{command}'")
    task = data.get("task", command)
    if task != command:
        raise ConfigError(f"field 'task': config is for '{task}' but command is '{command}'")


def _orientation(f: _Fields) -> Orientation:
    given = [k for k in ("phi", "theta", "psi") if f.has(k)]
    if not given:
        return Orientation()
    unit = f.choice("angle_unit", ("deg", "rad"))
    phi, theta, psi = (f.number(k, 0.0) for k in ("phi", "theta", "psi"))
    if unit == "deg":
        return Orientation.from_degrees(phi, theta, psi)
    return Orientation(phi, theta, psi)


def _gammas(f: _Fields) -> GammaParams:
    raw = [k for k in ("a11", "a22", "a33") if f.has(k)]
    direct = [k for k in ("gamma_s", "gamma_a", "gamma_iso") if f.has(k)]
    if raw and direct:
        raise ConfigError(f"field '{raw[0]}': give either a11/a22/a33 or gamma parameters, not both")
    strict = f.boolean("strict_gammas", True)
    try:
        if raw:
            g = gamma_from_polarizability(f.number("a11"), f.number("a22"), f.number("a33"))
            return GammaParams(g.gamma_iso, g.gamma_s, g.gamma_a, strict=strict and g.strict)
        return GammaParams(f.number("gamma_iso", 1.0), f.number("gamma_s", 0.0),
                           f.number("gamma_a", 0.0), strict=strict)
    except DomainError as exc:
        key = raw[0] if raw else (direct[0] if direct else "gamma_s")
        raise ConfigError(f"field '{key}': {exc}") from exc


def _profile(f: _Fields):
    kind = f.choice("profile", ("gaussian", "strip", "grating", "tabulated"))
    sign = f.integer("sign", 1)
    if sign not in (-1, 0, 1):
        raise ConfigError(f"field 'sign': expected -1, 0 or 1, got {sign}")
    try:
        if kind == "gaussian":
            return Gaussian(f.number("d_over_z0", positive=True), sign)
        if kind == "strip":
            return Strip(f.number("d_over_z0", positive=True), sign)
        if kind == "grating":
            return Grating(f.number("d_over_z0", positive=True), f.number("L_over_z0", positive=True),
                           f.integer("n_strips", minimum=1), sign)
        table = f.data.get("table")
        if not isinstance(table, str):
            raise ConfigError("field 'table': required path to a two-column text table")
        path = Path(f.data["_base_dir"]) / table
        try:
            return load_table(path, sign=sign, taper=f.number("taper", 0.05))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"field 'table': {exc}") from exc
    except DomainError as exc:
        raise ConfigError(f"field 'profile': {exc}") from exc


def build_scenario(data: dict[str, Any], tol: float | None = None) -> Scenario:
    """Validate the scenario block of a config and build the :class:`Scenario`."""
    f = _Fields(data)
    default = QuadratureSpec()
    try:
        quad = QuadratureSpec(
            rel_tol=tol if tol is not None else f.number("rel_tol", default.rel_tol, positive=True),
            abs_tol=f.number("abs_tol", default.abs_tol, positive=True),
            u_max=f.number("u_max", default.u_max),
            max_refinements=f.integer("max_refinements", default.max_refinements, minimum=1),
        )
    except DomainError as exc:
        raise ConfigError(f"quadrature fields: {exc}") from exc
    return Scenario(
        profile=_profile(f),
        gammas=_gammas(f),
        orientation=_orientation(f),
        mode=f.choice("mode", ("quantum", "classical"), "quantum"),
        quad=quad,
        approximation=f.choice("approximation", ("exact", "pfa"), "exact"),
    )


# ------------------------------------------------------------------ output


def _fmt(value, precision: int) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.{precision}g}"


def _json_value(value, precision: int):
    if isinstance(value, float):
        return None if math.isnan(value) else float(f"{value:.{precision}g}")
    return value


def _render_table(columns, rows, fmt: str, precision: int, extra: dict | None = None) -> str:
    if fmt == "json":
        doc = {"columns": list(columns),
               "rows": [[_json_value(v, precision) for v in row] for row in rows]}
        for key, value in (extra or {}).items():
            doc[key] = _json_value(value, precision)
        return json.dumps(doc, indent=1) + "\n"
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v, precision) for v in row) for row in rows]
    for key, value in (extra or {}).items():
        lines.append(f"# {key},{_fmt(value, precision)}")
    return "\n".join(lines) + "\n"


def _render_record(record: dict, fmt: str, precision: int) -> str:
    if fmt == "json":
        return json.dumps({k: _json_value(v, precision) for k, v in record.items()}, indent=1) + "\n"
    return _render_table(list(record), [list(record.values())], "csv", precision)


# ---------------------------------------------------------------- commands


def cmd_eval(s: Scenario, f: _Fields, fmt: str, precision: int, workers: int) -> str:
    x = f.number("x0_over_z0", 0.0)
    y = f.number("y0_over_z0", 0.0)
    quantity = f.choice("quantity", ("ratio", "force"), "ratio")
    if quantity == "ratio":
        value = analysis.ratio_at(s, x, y)
    else:
        value = analysis.lateral_force_ratio(s, x, y).value
    if fmt == "json":
        return _render_record({"quantity": quantity, "x0_over_z0": x, "y0_over_z0": y, "value": value},
                              "json", precision)
    return _fmt(value, precision) + "\n"


def cmd_scan(s: Scenario, f: _Fields, fmt: str, precision: int, workers: int) -> str:
    lo, hi = f.number("x_min"), f.number("x_max")
    n = f.integer("n", minimum=0)
    if hi < lo:
        raise ConfigError("field 'x_max': must be >= x_min")
    xs, values = analysis.scan_1d(s, lo, hi, n, f.number("y0_over_z0", 0.0), workers)
    rows = [[float(x), float(v)] for x, v in zip(xs, values)]
    return _render_table(("x0_over_z0", "ratio"), rows, fmt, precision)


def cmd_map(s: Scenario, f: _Fields, fmt: str, precision: int, workers: int) -> str:
    x_lo, x_hi = f.number("x_min"), f.number("x_max")
    y_lo, y_hi = f.number("y_min"), f.number("y_max")
    nx, ny = f.integer("nx", minimum=1), f.integer("ny", minimum=1)
    if x_hi < x_lo:
        raise ConfigError("field 'x_max': must be >= x_min")
    if y_hi < y_lo:
        raise ConfigError("field 'y_max': must be >= y_min")
    grid = analysis.energy_map_2d(s, (x_lo, x_hi), (y_lo, y_hi), nx, ny, workers)
    rows = [[float(x), float(y), float(grid.values[i, j])]
            for i, x in enumerate(grid.x) for j, y in enumerate(grid.y)]
    return _render_table(("x0_over_z0", "y0_over_z0", "ratio"), rows, fmt, precision)


def cmd_phase(s: Scenario, f: _Fields, fmt: str, precision: int, workers: int) -> str:
    family = f.choice("family", analysis.FAMILIES)
    values = f.data.get("gamma_s_values")
    if not isinstance(values, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) and 0 <= v < 1 for v in values
    ):
        raise ConfigError("field 'gamma_s_values': expected a list of numbers in [0, 1)")
    tol = f.number("width_tol", 1e-4, positive=True)
    rows = [[g, d] for g, d in analysis.phase_boundary(family, values, tol, s.quad)]
    threshold = analysis.threshold_gamma(family, s.quad)
    return _render_table(("gamma_s", "critical_d_over_z0"), rows, fmt, precision,
                         {"threshold_gamma_s": threshold})


def cmd_trap(s: Scenario, f: _Fields, fmt: str, precision: int, workers: int) -> str:
    try:
        setup = PhysicalSetup(
            z0=f.number("z0", positive=True),
            amplitude_a=f.number("amplitude_a"),
            hbar=f.number("hbar", const.hbar, positive=True),
            epsilon0=f.number("epsilon0", const.epsilon_0, positive=True),
            gamma_iso=f.number("gamma_iso_si", 1.0, positive=True),
            dipole_p=f.number("dipole_p", 1.0, positive=True),
            mass=f.number("mass", positive=True),
            omega_trap=f.number("omega_trap", positive=True),
        )
    except DomainError as exc:
        raise ConfigError(f"trap setup: {exc}") from exc
    r = analysis.trap_response(s, setup)
    record = {"curvature": r.curvature, "stiffness": r.stiffness,
              "omega_prime": r.omega_prime, "delta_omega": r.delta_omega}
    return _render_record(record, fmt, precision)


def cmd_regime(s: Scenario, f: _Fields, fmt: str, precision: int, workers: int) -> str:
    if not isinstance(s.profile, Grating):
        raise ConfigError("field 'profile': regime needs a grating")
    if s.profile.n_strips < 5:
        raise ConfigError("field 'n_strips': regime needs at least 5 strips")
    return _render_record({"regime": analysis.regime_classify(s)}, fmt, precision)


def cmd_minima(s: Scenario, f: _Fields, fmt: str, precision: int, workers: int) -> str:
    lo, hi = f.number("x_min"), f.number("x_max")
    if not hi > lo:
        raise ConfigError("field 'x_max': must be > x_min")
    grid_n = f.integer("grid_n", 64, minimum=16)
    y0 = f.number("y0_over_z0", 0.0)
    found = analysis.find_minima_1d(s, lo, hi, grid_n, y0)
    rows = [[r.location[0], r.location[1], r.value, r.kind, r.curvature, r.is_global] for r in found]
    return _render_table(("x0_over_z0", "y0_over_z0", "ratio", "kind", "curvature", "is_global"),
                         rows, fmt, precision)


_HANDLERS = {
    "eval": cmd_eval,
    "scan": cmd_scan,
    "map": cmd_map,
    "phase": cmd_phase,
    "trap": cmd_trap,
    "regime": cmd_regime,
    "minima": cmd_minima,
}


# -------------------------------------------------------------------- main


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError("must be finite and > 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="flat JSON run configuration")
    common.add_argument("--tol", type=_positive_float, help="quadrature relative tolerance")
    common.add_argument("--out", help="write output here instead of standard output")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--threads", type=_positive_int,
                        help=f"worker processes for sweeps (fallback: ${THREADS_ENV})")

    parser = argparse.ArgumentParser(
        prog="lateral-vdw",
        description="First-order van der Waals corrugation energy: evaluations, sweeps and phase data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=(_HANDLERS[name].__doc__ or name))
    return parser


def _threads(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        value = int(env)
    except ValueError:
        raise ConfigError(f"environment variable {THREADS_ENV}: expected an integer, got {env!r}")
    if value < 1:
        raise ConfigError(f"environment variable {THREADS_ENV}: must be >= 1")
    return value


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = load_config(args.config)
        _check_keys(data, args.command)
        f = _Fields(data)
        scenario = build_scenario(data, args.tol)
        default_fmt = "json" if args.command == "trap" else "csv"
        fmt = args.format or f.choice("format", ("csv", "json"), default_fmt)
        precision = f.integer("precision", 9, minimum=1)
        out = args.out or data.get("out")
        if out is not None and not isinstance(out, str):
            raise ConfigError("field 'out': expected a path string")
        workers = _threads(args.threads)
        text = _HANDLERS[args.command](scenario, f, fmt, precision, workers)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"numerical error: {exc} (achieved error estimate {exc.estimate:.3g})", file=sys.stderr)
        return 1
    except (NoSignChangeError, TrapDestabilizedError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1

    if out is None:
        sys.stdout.write(text)
    else:
        if args.command == "eval":
            sys.stdout.write(text)
        target = Path(out)
        if not target.is_absolute() and args.out is None:
            target = Path(data["_base_dir"]) / target
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def main() -> None:
    sys.exit(run())
