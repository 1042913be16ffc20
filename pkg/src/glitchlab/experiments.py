"""Experiment drivers behind the command-line subcommands.

Each driver returns plain rows (tuples) in the column order of its CSV.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arbiter import ArbiterParams, decision_time_curve, fit_log_slope
from .funcspace import (SampledSignal, TimeGrid, compact_open_distance, exp_function,
                        tent_function, verify_convergence, window_distance, zero_signal)
from .pulses import InputPair, PulseShape, sample_family
from .topology import (chain_resolution, epsilon_components, glitch_search, min_cross_distance,
                       three_step_check)

METRICS_COLUMNS = ("case", "n", "r", "expected", "actual", "abs_error")
CONVERGENCE_COLUMNS = ("sequence", "n", "distance", "tolerance", "passed")
SWEEP_COLUMNS = ("skew", "sign", "decision_time", "decided")
SWEEP_FIT_COLUMNS = ("slope", "tau", "relative_error", "decided_rows")
SEARCH_COLUMNS = ("iteration", "lo", "hi", "skew", "sign", "decision_time", "decided", "best_time")
CONNECTIVITY_COLUMNS = ("experiment", "delta", "components", "min_cross_distance")

EXP_RADII = (1, 2, 3)
AXIOM_RADII = (1, 2, 5)


def random_signal(rng: np.random.Generator, grid: TimeGrid) -> SampledSignal:
    """Random-walk samples with occasional jumps; always finite."""
    steps = rng.normal(0.0, 0.1, grid.count)
    steps[rng.random(grid.count) < 0.01] *= 30.0
    return SampledSignal(grid, np.cumsum(steps) * rng.uniform(0.1, 3.0))


@dataclass
class AxiomCheck:
    distance: str
    r: int
    trials: int
    symmetry: float
    identity: float
    triangle: float


def metric_axiom_checks(rng: np.random.Generator, trials: int, R: int,
                        grid: TimeGrid | None = None) -> list[AxiomCheck]:
    """Worst violations of symmetry, identity and the triangle inequality.

    Symmetry and identity violations are absolute differences (exactly 0
    when they hold); the triangle violation is max(d(f,h) - d(f,g) - d(g,h), 0).
    """
    grid = grid or TimeGrid.covering(R, step=0.01)
    names = [("window", r) for r in AXIOM_RADII] + [("compact_open", R)]

    def dist(name, r, f, g):
        return window_distance(f, g, r) if name == "window" else compact_open_distance(f, g, r)

    worst = {key: [0.0, 0.0, 0.0] for key in names}
    for _ in range(trials):
        f, g, h = (random_signal(rng, grid) for _ in range(3))
        for key in names:
            fg, gf = dist(*key, f, g), dist(*key, g, f)
            fh, gh = dist(*key, f, h), dist(*key, g, h)
            w = worst[key]
            w[0] = max(w[0], abs(fg - gf))
            w[1] = max(w[1], abs(dist(*key, f, f)))
            w[2] = max(w[2], fh - fg - gh)
    return [AxiomCheck(name, r, trials, *worst[(name, r)]) for name, r in names]


def metrics_rows(tent_n_max: int, exp_n_max: int, trials: int, R: int,
                 rng: np.random.Generator) -> list[tuple]:
    rows = []
    for n in range(1, tent_n_max + 1):
        tent = tent_function(n)
        actual = window_distance(tent, zero_signal(tent.grid), 1)
        rows.append(("tent", n, 1, 1.0, actual, abs(actual - 1.0)))
    for n in range(1, exp_n_max + 1):
        f = exp_function(n)
        for r in EXP_RADII:
            expected = math.exp(r - n)
            actual = window_distance(f, zero_signal(f.grid), r)
            rows.append(("exp", n, r, expected, actual, abs(actual - expected)))
    if trials > 0:
        for check in metric_axiom_checks(rng, trials, R):
            for axiom in ("symmetry", "identity", "triangle"):
                value = getattr(check, axiom)
                rows.append((f"{check.distance}_{axiom}", trials, check.r, 0.0, value, value))
    return rows


def convergence_rows(n_min: int, n_max: int, tolerance: float, R: int) -> list[tuple]:
    if n_max < n_min:
        return []
    rows = []
    sequences = {"exp": exp_function, "tent": tent_function}
    for name, make in sequences.items():
        first = make(n_min)
        report = verify_convergence(make, zero_signal(first.grid, first.extension),
                                    tolerance, n_min, n_max, R)
        rows += [(name, n, d, tolerance, report.passed) for n, d in report.distances]
    return rows


def sweep_skews(lo: float, hi: float, count: int, include_zero: bool) -> list[float]:
    skews = [0.0] if include_zero else []
    if count > 0:
        skews += [float(s) for s in np.logspace(math.log10(lo), math.log10(hi), count)]
    return skews


def sweep_rows(skews, base_time: float, shape: PulseShape, params: ArbiterParams,
               workers: int = 1):
    curve = decision_time_curve(skews, base_time, shape, params, workers=workers)
    rows = [(r.skew, r.sign, r.time, r.decided) for r in curve]
    try:
        slope = fit_log_slope(curve)
    except ValueError:
        fit = []
    else:
        fit = [(slope, params.tau, abs(slope - params.tau) / params.tau,
                sum(r.decided and r.skew != 0 for r in curve))]
    return rows, fit, curve


def search_rows(target: float, base_time: float, bracket, max_iterations: int,
                shape: PulseShape, params: ArbiterParams):
    result = glitch_search(target, base_time, shape, params, max_iterations, bracket)
    rows = [(s.iteration, s.lo, s.hi, s.skew, s.sign, s.time, s.time is not None,
             s.best_time) for s in result.history]
    return rows, result


def connectivity_rows(net_count: int, net_shape: PulseShape, grid: TimeGrid, R: int,
                      path: tuple[InputPair, InputPair], path_points: int, decide_by: float,
                      shape: PulseShape, params: ArbiterParams) -> list[tuple]:
    rows = []
    net = sample_family(1.0, net_count, shape=net_shape, grid=grid)
    cross = min_cross_distance(net[:net_count], net[net_count:], R)
    report = epsilon_components(net, cross / 2, R)
    rows.append(("U_r", report.delta, report.component_count, cross))

    full = sample_family(math.inf, net_count, include_zero=True, shape=net_shape, grid=grid)
    resolution = chain_resolution(full, R)
    report = epsilon_components(full, 1.5 * resolution, R)
    rows.append(("U_infty", report.delta, report.component_count, None))

    three = three_step_check(path[0], path[1], path_points, decide_by, shape, params, R)
    rows.append(("image_chain", three.chain.delta, three.chain.component_count,
                 three.early_cross_distance))
    return rows
