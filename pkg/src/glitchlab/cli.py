"""Command-line front end: ``glitchlab {metrics,convergence,sweep,search,connectivity}``.

Configuration is a text file of ``key = value`` lines (``#`` starts a
comment).  ``--set key=value``, ``--out`` and ``--seed`` override the file.
Exit status: 0 success, 1 invalid configuration, 2 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import experiments
from .arbiter import ArbiterParams
from .funcspace import TimeGrid
from .pulses import InputPair, PulseShape

log = logging.getLogger("glitchlab")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # arbiter
    tau: float = 1.0
    gain: float = 50.0
    theta: float = 0.9
    out_amp: float = 1.0
    sat: float = 0.4
    h: float = 1e-3
    t_max: float = 40.0
    # input pulses
    amplitude: float = 1.0
    width: float = 0.1
    # function space
    grid_step: float = 1e-3
    truncation: int = 20
    # metrics / convergence
    tent_n_max: int = 50
    exp_n_max: int = 20
    metric_trials: int = 1000
    conv_n_min: int = 20
    conv_n_max: int = 30
    conv_tolerance: float = 1e-3
    # sweep
    base_time: float = 0.2
    sweep_min: float = 1e-8
    sweep_max: float = 1e-3
    sweep_count: int = 30
    sweep_zero: bool = True
    # search
    search_base_time: float = 0.5
    search_lo: float = -0.3
    search_hi: float = 0.4
    search_max_iterations: int = 60
    # connectivity
    net_count: int = 32
    net_width: float = 1.0
    path_start_a: float = 0.2
    path_start_b: float = 0.8
    path_points: int = 512
    decide_by: float = 3.0
    # run
    workers: int = 1
    seed: int = 0
    out: str = "."

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        try:
            self.arbiter_params()
            self.pulse_shape()
            PulseShape(self.amplitude, self.net_width)
            self.path_endpoints()
            self.grid()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        checks = [
            (self.truncation >= 1, "truncation must be >= 1"),
            (min(self.tent_n_max, self.exp_n_max, self.metric_trials, self.sweep_count) >= 0,
             "counts must be non-negative"),
            (self.conv_n_min >= 1, "conv_n_min must be >= 1"),
            (self.conv_tolerance > 0, "conv_tolerance must be positive"),
            (0 < self.base_time < 1, "base_time must lie in (0, 1)"),
            (self.sweep_count == 0 or 0 < self.sweep_min <= self.sweep_max,
             "sweep range needs 0 < sweep_min <= sweep_max"),
            (0 < self.search_base_time < 1, "search_base_time must lie in (0, 1)"),
            (self.search_lo < self.search_hi, "search_lo must be below search_hi"),
            (self.search_max_iterations >= 1, "search_max_iterations must be >= 1"),
            (self.net_count >= 2, "net_count must be >= 2"),
            (self.path_points >= 2, "path_points must be >= 2"),
            (self.workers >= 1, "workers must be >= 1"),
            (0 <= self.seed < 2 ** 64, "seed must be an unsigned 64-bit integer"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    def arbiter_params(self) -> ArbiterParams:
        return ArbiterParams(self.tau, self.gain, self.theta, self.out_amp, self.sat, self.h, self.t_max)

    def pulse_shape(self) -> PulseShape:
        return PulseShape(self.amplitude, self.width)

    def grid(self) -> TimeGrid:
        return TimeGrid.covering(self.truncation, self.grid_step)

    def path_endpoints(self) -> tuple[InputPair, InputPair]:
        return (InputPair(self.path_start_a, self.path_start_b),
                InputPair(self.path_start_b, self.path_start_a))

    # -- text form -------------------------------------------------------

    @classmethod
    def parse(cls, text: str, overrides: dict[str, str] | None = None) -> "RunConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            values[key.strip()] = value.strip()
        values.update(overrides or {})
        types = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(values) - set(types))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**{k: _convert(k, v, types[k]) for k, v in values.items()})

    def serialize(self) -> str:
        return "".join(f"{f.name} = {_format(getattr(self, f.name))}\n" for f in fields(self))


def _convert(key: str, text: str, kind: str):
    try:
        if kind == "bool":
            lowered = text.lower()
            if lowered not in ("true", "false"):
                raise ValueError(text)
            return lowered == "true"
        if kind == "int":
            return int(text)
        if kind == "float":
            value = float(text)
            if not math.isfinite(value):
                raise ValueError(text)
            return value
        return text
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {kind}") from None


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, columns, rows) -> None:
    """Write atomically: a reader never sees a partial file."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(v) for v in row])
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def run_metrics(config: RunConfig) -> int:
    rows = experiments.metrics_rows(config.tent_n_max, config.exp_n_max, config.metric_trials,
                                    config.truncation, np.random.default_rng(config.seed))
    write_csv(Path(config.out) / "metrics.csv", experiments.METRICS_COLUMNS, rows)
    return EXIT_OK


def run_convergence(config: RunConfig) -> int:
    rows = experiments.convergence_rows(config.conv_n_min, config.conv_n_max,
                                        config.conv_tolerance, config.truncation)
    write_csv(Path(config.out) / "convergence.csv", experiments.CONVERGENCE_COLUMNS, rows)
    return EXIT_OK


def run_sweep(config: RunConfig) -> int:
    skews = experiments.sweep_skews(config.sweep_min, config.sweep_max, config.sweep_count,
                                    config.sweep_zero)
    rows, fit, curve = experiments.sweep_rows(skews, config.base_time, config.pulse_shape(),
                                              config.arbiter_params(), config.workers)
    for row in curve:
        if row.error:
            log.warning("skew %r: %s", row.skew, row.error)
    out = Path(config.out)
    write_csv(out / "sweep.csv", experiments.SWEEP_COLUMNS, rows)
    write_csv(out / "sweep_fit.csv", experiments.SWEEP_FIT_COLUMNS, fit)
    return EXIT_OK


def run_search(config: RunConfig, target: float) -> int:
    rows, result = experiments.search_rows(target, config.search_base_time,
                                           (config.search_lo, config.search_hi),
                                           config.search_max_iterations,
                                           config.pulse_shape(), config.arbiter_params())
    write_csv(Path(config.out) / "search.csv", experiments.SEARCH_COLUMNS, rows)
    log.info("search %s after %d iterations: skew %r, decision time %r",
             "succeeded" if result.success else "failed", result.iterations,
             result.skew, result.achieved_time)
    return EXIT_OK


def run_connectivity(config: RunConfig) -> int:
    rows = experiments.connectivity_rows(
        config.net_count, PulseShape(config.amplitude, config.net_width), config.grid(),
        config.truncation, config.path_endpoints(), config.path_points, config.decide_by,
        config.pulse_shape(), config.arbiter_params())
    write_csv(Path(config.out) / "connectivity.csv", experiments.CONNECTIVITY_COLUMNS, rows)
    return EXIT_OK


def show_config(config: RunConfig) -> int:
    sys.stdout.write(config.serialize())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", help="random seed (unsigned 64-bit)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration value")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="glitchlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("metrics", parents=[common], help="metric regression table (metrics.csv)")
    sub.add_parser("convergence", parents=[common], help="compact-open convergence (convergence.csv)")
    sub.add_parser("sweep", parents=[common], help="decision time vs skew (sweep.csv, sweep_fit.csv)")
    search = sub.add_parser("search", parents=[common], help="bisect for a late decider (search.csv)")
    search.add_argument("target", help="decision time to reach")
    sub.add_parser("connectivity", parents=[common], help="net connectivity (connectivity.csv)")
    sub.add_parser("show-config", parents=[common], help="print the effective configuration")
    return parser


def load_config(args) -> RunConfig:
    text = args.config.read_text() if args.config else ""
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    if args.out is not None:
        overrides["out"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    return RunConfig.parse(text, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = load_config(args)
        if args.command == "search":
            target = _convert("target", args.target, "float")
            if target >= config.t_max:
                raise ConfigError(f"target {target} must be below t_max {config.t_max}")
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID
    except OSError as exc:
        log.error("cannot read configuration: %s", exc)
        return EXIT_IO

    commands = {
        "metrics": run_metrics,
        "convergence": run_convergence,
        "sweep": run_sweep,
        "connectivity": run_connectivity,
        "search": lambda c: run_search(c, target),
        "show-config": show_config,
    }
    try:
        return commands[args.command](config)
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        log.error("invalid run: %s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
