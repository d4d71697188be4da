"""Command-line front end: run a figure preset or a custom scenario and write
observable time series (and optionally a Husimi grid) as CSV or JSON.

All user-facing parameters are in units of the coupling lambda: rates enter
as ratios to lambda and times as the scaled time tau = lambda t.

Exit codes: 0 success, 2 configuration error, 3 degenerate roots,
4 oracle verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import oracle
from .dynamics import evolve_state, solve_sectors
from .errors import DegenerateRootsError
from .model import ModelParams, NonlinearityFn, TruncationPolicy, coherent_field
from .observables import (
    ObservableRecord,
    entropy,
    husimi_grid,
    mandel_q,
    photon_moments,
    squeezing,
)

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_ORACLE = 0, 2, 3, 4
OBSERVABLES = ("entropy", "mandel", "squeeze1", "squeeze2", "squeeze3", "moments")
SERIES_COLUMNS = (
    "tau", "entropy", "mean_n", "mean_n2", "mean_n3", "mandel_q",
    "s_x1", "s_y1", "s_x2", "s_y2", "s_x3", "s_y3",
)
_COLUMNS_FOR = {
    "entropy": ("entropy",),
    "moments": ("mean_n", "mean_n2", "mean_n3"),
    "mandel": ("mandel_q",),
    "squeeze1": ("s_x1", "s_y1"),
    "squeeze2": ("s_x2", "s_y2"),
    "squeeze3": ("s_x3", "s_y3"),
}
ORACLE_POINTS = 10
ORACLE_TOLERANCE = 1e-6


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass(frozen=True)
class HusimiRequest:
    tau: float
    x_range: tuple = (-7.0, 7.0)
    y_range: tuple = (-7.0, 7.0)
    resolution: int = 201
    exact: bool = False


@dataclass(frozen=True)
class RunConfig:
    f_kind: str = "constant"
    alpha_sq: float = 10.0
    alpha_phase: float = 0.0
    chi_over_lambda: float = 0.0
    delta2_over_lambda: float = 0.0
    delta3_over_lambda: float = 0.0
    lambda_: float = 1.0
    tau_max: float = 25.0
    tau_steps: int = 2500
    observables: tuple = ("entropy",)
    husimi: Optional[HusimiRequest] = None
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    oracle_check: bool = False
    out: Optional[str] = None
    husimi_out: Optional[str] = None
    format: str = "csv"
    preset: Optional[str] = None

    def __post_init__(self):
        if self.tau_steps < 2:
            raise ConfigError(f"tau_steps must be >= 2, got {self.tau_steps}")
        if not self.tau_max > 0:
            raise ConfigError(f"tau_max must be > 0, got {self.tau_max}")
        if not self.observables:
            raise ConfigError("observables must name at least one quantity")
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise ConfigError(f"observables: unknown entries {sorted(unknown)}; choose from {OBSERVABLES}")
        if self.alpha_sq < 0:
            raise ConfigError(f"alpha_sq must be >= 0, got {self.alpha_sq}")
        if not self.lambda_ > 0:
            raise ConfigError(f"lambda must be > 0, got {self.lambda_}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.husimi is not None and self.husimi.resolution < 2:
            raise ConfigError(f"husimi_res must be >= 2, got {self.husimi.resolution}")

    @property
    def alpha(self):
        return math.sqrt(self.alpha_sq) * complex(math.cos(self.alpha_phase), math.sin(self.alpha_phase))

    def nonlinearity(self):
        kind = self.f_kind
        if kind.startswith("custom:"):
            path = kind.split(":", 1)[1]
            try:
                return NonlinearityFn.from_file(path)
            except (OSError, ValueError) as err:
                raise ConfigError(f"f_kind: cannot load custom table {path!r}: {err}") from err
        if kind not in ("constant", "inverse-sqrt"):
            raise ConfigError(f"f_kind must be constant, inverse-sqrt or custom:<path>, got {kind!r}")
        return NonlinearityFn(kind)

    def params(self):
        lam = self.lambda_
        return ModelParams.from_detunings(
            delta2=self.delta2_over_lambda * lam,
            delta3=self.delta3_over_lambda * lam,
            chi=self.chi_over_lambda * lam,
            lambda1=lam,
        )

    def tau_grid(self):
        return np.linspace(0.0, self.tau_max, self.tau_steps)

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["observables"] = list(self.observables)
        return d


_FAMILIES = {
    "a": dict(chi_over_lambda=0.0, delta2_over_lambda=0.0, delta3_over_lambda=0.0),
    "b": dict(chi_over_lambda=0.4, delta2_over_lambda=0.0, delta3_over_lambda=0.0),
    "c": dict(chi_over_lambda=0.0, delta2_over_lambda=7.0, delta3_over_lambda=15.0),
}
_FIGURE_OBSERVABLE = {2: "entropy", 3: "mandel", 4: "squeeze1", 5: "squeeze2", 6: "squeeze3"}
_SIDES = {"left": "constant", "right": "inverse-sqrt"}


def _build_presets():
    presets = {}
    for fig, obs in _FIGURE_OBSERVABLE.items():
        for fam, values in _FAMILIES.items():
            for side, kind in _SIDES.items():
                presets[f"fig{fig}{fam}-{side}"] = dict(
                    values, f_kind=kind, alpha_sq=10.0, observables=(obs,)
                )
    for fam, values, kind in (("a", _FAMILIES["a"], "constant"),
                              ("b", _FAMILIES["a"], "inverse-sqrt"),
                              ("c", _FAMILIES["b"], "constant")):
        presets[f"fig7{fam}"] = dict(
            values, f_kind=kind, alpha_sq=10.0, observables=("moments",),
            husimi_tau=math.pi / 2,
        )
    return presets


PRESETS = _build_presets()


def expand_preset(name):
    """RunConfig for a named figure preset."""
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return _config_from_values(dict(PRESETS[name], preset=name))


def _parser():
    p = argparse.ArgumentParser(
        prog="lambda-kerr",
        description="Lambda atom + Kerr medium with intensity-dependent coupling: "
        "observable time series and Husimi grids.",
        argument_default=argparse.SUPPRESS,
    )
    p.add_argument("--config", help="JSON file with flat keys mirroring the flags")
    p.add_argument("--preset", help="figure preset, e.g. fig3a-right or fig7c")
    p.add_argument("--f-kind", help="constant | inverse-sqrt | custom:<path to e_n table>")
    p.add_argument("--alpha-sq", type=float, help="initial mean photon number |alpha|^2")
    p.add_argument("--alpha-phase", type=float, help="phase of alpha in radians")
    p.add_argument("--chi-over-lambda", type=float)
    p.add_argument("--delta2-over-lambda", type=float)
    p.add_argument("--delta3-over-lambda", type=float)
    p.add_argument("--lambda", dest="lambda_", type=float, help="coupling (time unit), default 1")
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-steps", type=int, help="number of grid points on [0, tau_max]")
    p.add_argument("--observables", help="comma list from " + ",".join(OBSERVABLES))
    p.add_argument("--husimi-tau", type=float, help="scaled time of the Husimi snapshot")
    p.add_argument("--husimi-range", help="a,b for a square [a,b]^2 or xmin,xmax,ymin,ymax")
    p.add_argument("--husimi-res", type=int, help="grid points per axis")
    p.add_argument("--husimi-exact", action="store_true",
                   help="include field coherences in the Husimi function")
    p.add_argument("--husimi-out", help="Husimi output path (default derived from --out)")
    p.add_argument("--epsilon", type=float, help="Poisson tail budget of the Fock cut-off")
    p.add_argument("--nmax-margin", type=int, help="extra Fock levels beyond the tail cut")
    p.add_argument("--oracle-check", action="store_true",
                   help="compare with direct integration at 10 grid times")
    p.add_argument("--out", help="series output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"))
    return p


def _parse_range(text, name):
    try:
        vals = [float(v) for v in str(text).split(",")] if isinstance(text, str) else [float(v) for v in text]
    except ValueError as err:
        raise ConfigError(f"{name}: expected comma separated numbers, got {text!r}") from err
    if len(vals) == 2:
        vals = vals * 2
    if len(vals) != 4 or vals[0] >= vals[1] or vals[2] >= vals[3]:
        raise ConfigError(f"{name}: expected a,b or xmin,xmax,ymin,ymax with min < max, got {text!r}")
    return (vals[0], vals[1]), (vals[2], vals[3])


def _normalise_key(key):
    key = key.replace("-", "_")
    return "lambda_" if key == "lambda" else key


_INT_KEYS = {"tau_steps", "husimi_res", "nmax_margin"}
_FLOAT_KEYS = {
    "alpha_sq", "alpha_phase", "chi_over_lambda", "delta2_over_lambda",
    "delta3_over_lambda", "lambda_", "tau_max", "husimi_tau", "epsilon",
}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | {
    "preset", "f_kind", "observables", "husimi_range", "husimi_exact", "husimi_out",
    "oracle_check", "out", "format",
}


def _config_from_values(values):
    v = dict(values)
    try:
        for key in _INT_KEYS & v.keys():
            if isinstance(v[key], bool) or float(v[key]) != int(float(v[key])):
                raise ConfigError(f"{key}: expected an integer, got {v[key]!r}")
            v[key] = int(float(v[key]))
        for key in _FLOAT_KEYS & v.keys():
            v[key] = float(v[key])
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"invalid numeric value: {err}") from err

    obs = v.get("observables", ("entropy",))
    if isinstance(obs, str):
        obs = [o.strip() for o in obs.split(",") if o.strip()]
    obs = tuple(o for o in OBSERVABLES if o in obs) + tuple(o for o in obs if o not in OBSERVABLES)

    husimi = None
    if v.get("husimi_tau") is not None:
        xr, yr = _parse_range(v.get("husimi_range", "-7,7"), "husimi_range")
        if v["husimi_tau"] < 0:
            raise ConfigError(f"husimi_tau must be >= 0, got {v['husimi_tau']}")
        husimi = HusimiRequest(
            tau=v["husimi_tau"], x_range=xr, y_range=yr,
            resolution=v.get("husimi_res", 201), exact=bool(v.get("husimi_exact", False)),
        )
    try:
        truncation = TruncationPolicy(
            epsilon=v.get("epsilon", 1e-12), margin=v.get("nmax_margin", 8)
        )
    except ValueError as err:
        raise ConfigError(f"truncation (epsilon / nmax_margin): {err}") from err

    kwargs = {k: v[k] for k in (
        "f_kind", "alpha_sq", "alpha_phase", "chi_over_lambda", "delta2_over_lambda",
        "delta3_over_lambda", "lambda_", "tau_max", "tau_steps", "oracle_check", "out",
        "husimi_out", "format", "preset",
    ) if k in v}
    return RunConfig(observables=obs, husimi=husimi, truncation=truncation, **kwargs)


def parse_config(argv=None):
    """Build a RunConfig from command-line flags plus an optional JSON file.

    Precedence, lowest first: defaults, preset, config file, explicit flags.
    """
    parser = _parser()
    args = vars(parser.parse_args(argv))
    file_values = {}
    if "config" in args:
        try:
            raw = json.loads(Path(args.pop("config")).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"config: cannot read JSON config: {err}") from err
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be a JSON object")
        file_values = {_normalise_key(k): val for k, val in raw.items()}
        unknown = set(file_values) - _KNOWN_KEYS
        if unknown:
            raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    flags = {_normalise_key(k): val for k, val in args.items()}
    preset = flags.get("preset", file_values.get("preset"))
    values = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"preset: unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}")
        values.update(PRESETS[preset], preset=preset)
    values.update(file_values)
    values.update(flags)
    return _config_from_values(values)


@dataclass
class ScenarioResult:
    config: RunConfig
    records: list
    columns: dict
    husimi: object = None
    oracle_gaps: Optional[dict] = None

    def oracle_failed(self):
        return bool(self.oracle_gaps) and max(self.oracle_gaps.values()) > ORACLE_TOLERANCE


def run_scenario(config: RunConfig):
    """Evaluate the requested observables on the tau grid (and Husimi snapshot)."""
    params = config.params()
    f = config.nonlinearity()
    field_state = coherent_field(config.alpha, config.truncation)
    sectors = solve_sectors(field_state.n_max, params, f)
    tau = config.tau_grid()
    state = evolve_state(field_state, params, f, tau / config.lambda_, sectors=sectors)

    columns = {"tau": tau}
    obs = set(config.observables)
    if "entropy" in obs:
        columns["entropy"] = entropy(state)
    if "moments" in obs:
        for k, name in zip((1, 2, 3), ("mean_n", "mean_n2", "mean_n3")):
            columns[name] = photon_moments(state, k)
    if "mandel" in obs:
        columns["mandel_q"] = mandel_q(state)
    for k in (1, 2, 3):
        if f"squeeze{k}" in obs:
            sx, sy = squeezing(state, k)
            columns[f"s_x{k}"], columns[f"s_y{k}"] = sx, sy
    columns = {c: columns[c] for c in SERIES_COLUMNS if c in columns}

    records = [
        ObservableRecord(**{c: float(columns[c][i]) for c in columns})
        for i in range(len(tau))
    ]

    husimi = None
    if config.husimi is not None:
        h = config.husimi
        snap = evolve_state(field_state, params, f, h.tau / config.lambda_, sectors=sectors)
        husimi = husimi_grid(snap, h.x_range, h.y_range, h.resolution, exact=h.exact)

    gaps = None
    if config.oracle_check:
        idx = np.unique(np.round(np.linspace(0, len(tau) - 1, ORACLE_POINTS)).astype(int))
        times = tau[idx] / config.lambda_
        cfg = oracle.IntegratorConfig(method="expm", dt=float(np.max(np.diff(times))) if len(times) > 1 else None)
        numeric = oracle.evolve_numeric(field_state, params, f, times, cfg)
        gaps = {
            int(i): oracle.fidelity_gap(state[int(i)], psi) for i, psi in zip(idx, numeric)
        }
        col = np.full(len(tau), np.nan)
        for i, g in gaps.items():
            col[i] = g
        columns["oracle_gap"] = col
    return ScenarioResult(config, records, columns, husimi, gaps)


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.12g}"


def _round12(value):
    value = float(value)
    if math.isnan(value):
        return None
    return float(f"{value:.12g}")


def _series_columns(records_or_columns):
    if isinstance(records_or_columns, dict):
        return records_or_columns
    records = list(records_or_columns)
    if not records:
        raise ValueError("no records to write")
    names = [c for c in SERIES_COLUMNS if not all(math.isnan(getattr(r, c)) for r in records)]
    return {c: np.array([getattr(r, c) for r in records]) for c in names}


def write_series(records, path, format="csv", config=None):
    """Write the observable series; ``path=None`` writes to stdout.

    ``records`` is a list of ObservableRecord or a column mapping as produced
    by :func:`run_scenario` (which may add an ``oracle_gap`` column).
    """
    columns = _series_columns(records)
    ordered = [c for c in SERIES_COLUMNS + ("oracle_gap",) if c in columns]
    if not ordered or len(columns["tau"]) == 0:
        raise ValueError("no records to write")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ordered)
        for i in range(len(columns["tau"])):
            writer.writerow([_fmt(float(columns[c][i])) for c in ordered])
        text = buf.getvalue()
    elif format == "json":
        payload = {
            "config": config.to_dict() if config is not None else None,
            "columns": {c: [_round12(x) for x in columns[c]] for c in ordered},
        }
        text = json.dumps(payload, indent=1, sort_keys=False) + "\n"
    else:
        raise ValueError(f"unknown format {format!r}")
    _emit(text, path)


def write_husimi(grid, path, format="csv", tau=None):
    """Write a Husimi grid: CSV rows ``x,y,q`` (y outer, x inner) or JSON."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y", "q"])
        x, y = grid.x, grid.y
        for iy in range(grid.resolution):
            for ix in range(grid.resolution):
                writer.writerow([_fmt(x[ix]), _fmt(y[iy]), _fmt(float(grid.values[iy, ix]))])
        text = buf.getvalue()
    elif format == "json":
        payload = {
            "tau": tau,
            "x_range": list(grid.x_range),
            "y_range": list(grid.y_range),
            "resolution": grid.resolution,
            "values": [_round12(v) for v in grid.values.ravel()],
        }
        text = json.dumps(payload, indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {format!r}")
    _emit(text, path)


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def husimi_path(config: RunConfig):
    if config.husimi_out:
        return config.husimi_out
    if config.out:
        p = Path(config.out)
        return str(p.with_name(p.stem + ".husimi." + config.format))
    return None


def main(argv=None):
    try:
        config = parse_config(argv)
        if config.husimi is not None and husimi_path(config) is None:
            raise ConfigError("husimi_out: a Husimi snapshot needs --out or --husimi-out")
        config.nonlinearity()
    except ConfigError as err:
        print(f"lambda-kerr: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as err:
        return EXIT_CONFIG if err.code else EXIT_OK

    print(json.dumps(config.to_dict(), sort_keys=True), file=sys.stderr)
    try:
        result = run_scenario(config)
    except DegenerateRootsError as err:
        print(f"lambda-kerr: degenerate roots: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as err:
        # e.g. a custom e_n table shorter than the Fock cut-off
        print(f"lambda-kerr: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        write_series(result.columns, config.out, config.format, config)
        if result.husimi is not None:
            write_husimi(result.husimi, husimi_path(config), config.format, tau=config.husimi.tau)
    except OSError as err:
        print(f"lambda-kerr: cannot write output: {err}", file=sys.stderr)
        return EXIT_CONFIG

    if result.oracle_failed():
        worst = max(result.oracle_gaps.values())
        print(f"lambda-kerr: oracle verification failed, max fidelity gap {worst:.3g}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
