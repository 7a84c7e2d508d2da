"""Command-line driver: trajectories, parameter sweeps and the verify suite.

Configuration comes from an optional ``key = value`` file, overridden by
command-line flags of the same names. Radii are given in units of M.

Exit codes: 0 success, 1 configuration error, 2 numerical or domain
failure, 3 verify-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import channel_report
from .errors import ConfigError, SpinfallError
from .geometry import HORIZON_EPS
from .kinematics import integrate_worldline, momentum_from_rapidity
from .verify import format_report, run_verify
from .wigner import accumulate, closed_form_radial, cumulative_maps

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

MODES = ("trajectory", "sweep", "verify")
FORMATS = ("csv", "json")
SWEEP_AXES = ("alpha0", "r_start", "mass", "n_steps")

COLUMNS = (
    "index", "tau", "t", "t_over_M", "r", "r_over_M", "T", "X", "beta",
    "D00", "D01", "D10", "D11",
    "unitarity_dev", "p", "q", "trace_out",
    "entropy_paper", "entropy_normalized", "bitflip_distance",
)


@dataclass
class RunConfig:
    mass: float = 1.0
    alpha0: float = 1.0
    r_start: float = 6.0
    r_end: float = 2.2
    n_steps: int = 1000
    mode: str = "trajectory"
    sweep_axis: str | None = None
    sweep_values: list = field(default_factory=list)
    output: str | None = None
    format: str = "csv"
    workers: int = 1

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if not self.mass > 0:
            raise ConfigError(f"mass must be positive, got {self.mass!r}")
        if self.mode == "verify":
            return self
        if not self.alpha0 > 0:
            raise ConfigError(f"alpha0 must be positive, got {self.alpha0!r}")
        if not 2.0 * (1.0 + HORIZON_EPS) < self.r_end < self.r_start:
            raise ConfigError(
                f"need 2(1 + eps) < r_end < r_start (units of M), got r_start={self.r_start!r}, r_end={self.r_end!r}"
            )
        if self.n_steps < 2:
            raise ConfigError(f"n_steps must be at least 2, got {self.n_steps!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers!r}")
        if self.mode == "sweep":
            if self.sweep_axis not in SWEEP_AXES:
                raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
            if not self.sweep_values:
                raise ConfigError("sweep mode needs sweep values")
            for value in self.sweep_values:
                dataclasses.replace(self, mode="trajectory", **{self.sweep_axis: value}).validate()
        return self


_KEY_ALIASES = {"steps": "n_steps", "sweep-axis": "sweep_axis", "sweep-values": "sweep_values",
                "r-start": "r_start", "r-end": "r_end"}
_CONVERTERS = {
    "mass": float, "alpha0": float, "r_start": float, "r_end": float, "n_steps": int,
    "workers": int, "mode": str, "sweep_axis": str, "output": str, "format": str,
}


def _convert(key, raw):
    key = _KEY_ALIASES.get(key, key).replace("-", "_")
    if key == "sweep_values":
        if isinstance(raw, str):
            raw = [x for x in raw.split(",") if x.strip()]
        try:
            return key, [float(x) for x in raw]
        except ValueError as exc:
            raise ConfigError(f"bad sweep value list {raw!r}") from exc
    if key not in _CONVERTERS:
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        return key, _CONVERTERS[key](raw)
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for {key}") from exc


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        k, v = _convert(key, raw)
        values[k] = v
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="spinfall", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--mass", type=float)
    parser.add_argument("--alpha0", type=float)
    parser.add_argument("--r-start", dest="r_start", type=float, help="initial radius in units of M")
    parser.add_argument("--r-end", dest="r_end", type=float, help="final radius in units of M")
    parser.add_argument("--steps", dest="n_steps", type=int)
    parser.add_argument("--sweep-axis", dest="sweep_axis", choices=SWEEP_AXES)
    parser.add_argument("--sweep-values", dest="sweep_values", help="comma-separated list")
    parser.add_argument("--output", help="output file (default: stdout)")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--workers", type=int)
    return parser


def config_from_args(args):
    values = read_config_file(args.config) if args.config else {}
    for key, raw in vars(args).items():
        if key == "config" or raw is None:
            continue
        k, v = _convert(key, raw)
        values[k] = v
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# simulation


def _row(index, sample, D, report):
    M = sample.mass
    p = report.params
    return {
        "index": index, "tau": sample.tau, "t": sample.t, "t_over_M": sample.t / M,
        "r": sample.r, "r_over_M": sample.r / M, "T": sample.T, "X": sample.X, "beta": sample.beta,
        "D00": D[0, 0].real, "D01": D[0, 1].real, "D10": D[1, 0].real, "D11": D[1, 1].real,
        "unitarity_dev": report.unitarity_dev, "p": p.p, "q": p.q, "trace_out": report.trace_out,
        "entropy_paper": report.entropy_paper, "entropy_normalized": report.entropy_normalized,
        "bitflip_distance": report.bitflip_distance,
    }


def _report(index, D):
    if not np.all(np.isfinite(D)):
        raise SpinfallError(f"sample {index}: accumulated Wigner map overflowed (entries not finite)")
    with np.errstate(over="ignore"):
        size = float(np.sum(np.abs(D) ** 2))
    if not math.isfinite(size):
        raise SpinfallError(f"sample {index}: accumulated Wigner map too large to act on a state (|D| ~ {np.abs(D).max():.3g})")
    try:
        return channel_report(D)
    except SpinfallError as exc:
        raise type(exc)(f"sample {index}: {exc}") from exc


def _worldline(config):
    M = config.mass
    return integrate_worldline(config.r_start * M, config.r_end * M, config.alpha0, M, config.n_steps)


def run_trajectory(config):
    """Simulate one infall; returns ``(rows, summary)``."""
    worldline = _worldline(config)
    mom = momentum_from_rapidity(config.alpha0)
    maps = cumulative_maps(worldline, mom)
    rows = [_row(i, s, D, _report(i, D)) for i, (s, D) in enumerate(zip(worldline, maps))]
    summary = dict(rows[-1], index="summary")
    summary["closed_form_distance"] = float(np.linalg.norm(closed_form_radial(worldline, mom) - maps[-1]))
    summary["K"] = mom.K
    return rows, summary


def sweep_point(config):
    """Final-sample summary for one configuration (no per-sample channel reports)."""
    worldline = _worldline(config)
    mom = momentum_from_rapidity(config.alpha0)
    D = accumulate(worldline, mom)
    row = _row("summary", worldline[-1], D, _report(len(worldline) - 1, D))
    row["closed_form_distance"] = float(np.linalg.norm(closed_form_radial(worldline, mom) - D))
    row["K"] = mom.K
    return row


def run_sweep(config):
    """One summary row per sweep value, in ascending value order."""
    axis = config.sweep_axis
    values = sorted(config.sweep_values)
    configs = []
    for value in values:
        value = int(value) if axis == "n_steps" else value
        configs.append(dataclasses.replace(config, mode="trajectory", **{axis: value}))
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(sweep_point, configs))
    else:
        results = [sweep_point(c) for c in configs]
    rows = []
    for value, row in zip(values, results):
        rows.append({"sweep_axis": axis, "sweep_value": value, **row})
    return rows


# ---------------------------------------------------------------------------
# output


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def to_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def to_json(document):
    return json.dumps(document, indent=1) + "\n"


def _config_echo(config):
    return dataclasses.asdict(config)


def render_trajectory(config, rows, summary):
    if config.format == "csv":
        return to_csv(rows + [summary], COLUMNS)
    return to_json({"config": _config_echo(config), "columns": list(COLUMNS), "samples": rows, "summary": summary})


def render_sweep(config, rows):
    columns = ["sweep_axis", "sweep_value", *COLUMNS[1:], "closed_form_distance", "K"]
    if config.format == "csv":
        return to_csv(rows, columns)
    return to_json({"config": _config_echo(config), "columns": columns, "rows": rows})


def render_verify(config, checks):
    if config.format == "json":
        return to_json({"config": _config_echo(config), "checks": [dataclasses.asdict(c) for c in checks]})
    columns = ["name", "status", "residual", "tolerance", "detail"]
    rows = [
        {
            "name": c.name,
            "status": "INFO" if c.informational else ("PASS" if c.passed else "FAIL"),
            "residual": c.residual,
            "tolerance": "" if c.tolerance is None else c.tolerance,
            "detail": c.detail,
        }
        for c in checks
    ]
    return to_csv(rows, columns)


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG

    try:
        if config.mode == "verify":
            checks = run_verify(config.mass)
            print(format_report(checks), file=sys.stderr)
            if config.output:
                _emit(render_verify(config, checks), config.output)
            failed = [c.name for c in checks if not c.passed]
            if failed:
                log.error("verify failed: %s", ", ".join(failed))
                return EXIT_VERIFY
            return EXIT_OK
        if config.mode == "sweep":
            _emit(render_sweep(config, run_sweep(config)), config.output)
        else:
            rows, summary = run_trajectory(config)
            _emit(render_trajectory(config, rows, summary), config.output)
    except SpinfallError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
