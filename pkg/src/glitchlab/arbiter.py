"""Double-well latch arbiter driven by two input pulses.

The latch variable obeys

    dx/dt = (x - x**3) / tau + gain * (a(t) - b(t)),    x(0) = x0,

with a, b the raised-cosine pulses on the two wires, and the device output
is ``out_amp * tanh(x / sat)``.  x = 0 is the metastable point; the wells
sit at x = +-1.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np

from .funcspace import Extension, SampledSignal, TimeGrid
from .pulses import InputPair, PulseShape


class IntegrationError(RuntimeError):
    def __init__(self, time: float):
        super().__init__(f"latch state became non-finite at t = {time}")
        self.time = time


@dataclass(frozen=True)
class ArbiterParams:
    tau: float = 1.0
    gain: float = 50.0
    theta: float = 0.9
    out_amp: float = 1.0
    sat: float = 0.4
    h: float = 1e-3
    t_max: float = 40.0

    def __post_init__(self):
        for name in ("tau", "gain", "out_amp", "sat", "h", "t_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.h > self.tau / 10 * (1 + 1e-12):
            raise ValueError(f"step h={self.h} exceeds tau/10={self.tau / 10}")
        if self.t_max < 2:
            raise ValueError(f"horizon t_max must be at least 2, got {self.t_max}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.h))

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(0.0, self.h, self.n_steps + 1)

    @property
    def threshold_state(self) -> float:
        """Latch value at which the output crosses the decision threshold."""
        return self.sat * math.atanh(self.theta)


@dataclass(frozen=True)
class Decision:
    sign: int
    time: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    state: SampledSignal
    output: SampledSignal
    params: ArbiterParams

    @property
    def decision(self) -> Decision | None:
        return decision_of(self.output, self.params)


@numba.njit(cache=True, nogil=True)
def _pulse(u, amplitude, width):
    if u <= 0.0 or u >= width:
        return 0.0
    return amplitude * (1.0 - math.cos(2.0 * math.pi * u / width)) * 0.5


@numba.njit(cache=True, nogil=True)
def _rhs(x, t, t_a, t_b, amplitude, width, tau, gain):
    drive = _pulse(t - t_a, amplitude, width) - _pulse(t - t_b, amplitude, width)
    return (x - x * x * x) / tau + gain * drive


@numba.njit(cache=True, nogil=True)
def _rk4(t_a, t_b, x0, amplitude, width, tau, gain, h, n_steps):
    xs = np.empty(n_steps + 1)
    x = x0
    xs[0] = x
    for i in range(n_steps):
        t = i * h
        k1 = _rhs(x, t, t_a, t_b, amplitude, width, tau, gain)
        k2 = _rhs(x + 0.5 * h * k1, t + 0.5 * h, t_a, t_b, amplitude, width, tau, gain)
        k3 = _rhs(x + 0.5 * h * k2, t + 0.5 * h, t_a, t_b, amplitude, width, tau, gain)
        k4 = _rhs(x + h * k3, t + h, t_a, t_b, amplitude, width, tau, gain)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xs[i + 1] = x
    return xs


def integrate(pair: InputPair, shape: PulseShape | None = None,
              params: ArbiterParams | None = None, x0: float = 0.0) -> Trajectory:
    """Classical RK4 on the uniform grid of ``params`` (step h, horizon t_max)."""
    shape = shape or PulseShape()
    params = params or ArbiterParams()
    xs = _rk4(float(pair.t_a), float(pair.t_b), float(x0), shape.amplitude, shape.width,
              params.tau, params.gain, params.h, params.n_steps)
    bad = np.flatnonzero(~np.isfinite(xs))
    if bad.size:
        raise IntegrationError(bad[0] * params.h)
    grid = params.grid
    state = SampledSignal(grid, xs, Extension.HOLD_ENDS)
    output = SampledSignal(grid, params.out_amp * np.tanh(xs / params.sat), Extension.HOLD_ENDS)
    return Trajectory(state, output, params)


def delta(pair: InputPair, shape: PulseShape | None = None,
          params: ArbiterParams | None = None) -> SampledSignal:
    """The device map: input pulse pair -> output waveform."""
    return integrate(pair, shape, params).output


def decision_of(output: SampledSignal, params: ArbiterParams) -> Decision | None:
    """First grid instant with |o| >= theta * out_amp, or None if never."""
    level = params.theta * params.out_amp
    times = output.grid.times
    hits = np.flatnonzero((np.abs(output.values) >= level) & (times <= params.t_max + 0.5 * params.h))
    if hits.size == 0:
        return None
    k = hits[0]
    return Decision(int(np.sign(output.values[k])), float(times[k]))


def escape_time_oracle(x0: float, params: ArbiterParams | None = None) -> float:
    """Escape time of the linearised latch dx/dt = x/tau from x0 to the threshold."""
    params = params or ArbiterParams()
    if x0 == 0:
        raise ValueError("x0 = 0 is an equilibrium; it never escapes")
    return params.tau * math.log(params.threshold_state / abs(x0))


@dataclass(frozen=True)
class CurveRow:
    skew: float
    sign: int | None
    time: float | None
    error: str | None = None

    @property
    def decided(self) -> bool:
        return self.time is not None


def _curve_row(skew: float, base_time: float, shape: PulseShape, params: ArbiterParams) -> CurveRow:
    try:
        pair = InputPair.from_skew(base_time, skew)
        decision = integrate(pair, shape, params).decision
    except (ValueError, IntegrationError) as exc:
        return CurveRow(skew, None, None, str(exc))
    if decision is None:
        return CurveRow(skew, None, None)
    return CurveRow(skew, decision.sign, decision.time)


def decision_time_curve(skews: Iterable[float], base_time: float,
                        shape: PulseShape | None = None, params: ArbiterParams | None = None,
                        workers: int = 1) -> list[CurveRow]:
    """Decision sign and time for inputs (base_time, base_time + skew).

    Invalid inputs produce a row carrying the error message; the sweep
    carries on.
    """
    shape = shape or PulseShape()
    params = params or ArbiterParams()
    skews = [float(s) for s in skews]
    if workers <= 1:
        return [_curve_row(s, base_time, shape, params) for s in skews]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: _curve_row(s, base_time, shape, params), skews))


def fit_log_slope(rows: Sequence[CurveRow]) -> float:
    """Least-squares slope of decision time against ln(1/|skew|) over decided rows."""
    pts = [(math.log(1.0 / abs(r.skew)), r.time) for r in rows if r.decided and r.skew != 0]
    if len(pts) < 2:
        raise ValueError("need at least two decided rows with nonzero skew")
    x, y = np.array(pts).T
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
