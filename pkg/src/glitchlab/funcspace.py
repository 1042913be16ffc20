"""Sampled signals on a time grid and the windowed sup / compact-open metrics.

Signals live on a uniform grid starting at (or before) t = 0.  Outside the
grid a signal is extended either by zero or by holding its end samples.
The window of radius ``r`` is ``[0, r]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

DEFAULT_STEP = 1e-3
DEFAULT_TRUNCATION = 20

# grid-membership slack, in units of the grid step
_SNAP = 1e-9


class Extension(Enum):
    ZERO_OUTSIDE = "zero"
    HOLD_ENDS = "hold"


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    step: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.step)):
            raise ValueError("grid start and step must be finite")
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"grid needs at least 2 samples, got {self.count}")

    @classmethod
    def covering(cls, t_end: float, step: float = DEFAULT_STEP, t_start: float = 0.0) -> "TimeGrid":
        """Smallest grid from ``t_start`` with the given step reaching ``t_end``."""
        count = int(math.ceil((t_end - t_start) / step - _SNAP)) + 1
        return cls(t_start, step, max(count, 2))

    @property
    def t_end(self) -> float:
        return self.t_start + (self.count - 1) * self.step

    @property
    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.count) * self.step

    def position(self, t: float) -> float:
        """Fractional sample index of time ``t``."""
        return (t - self.t_start) / self.step

    def last_index_at_or_before(self, t: float) -> int:
        return int(math.floor(self.position(t) + _SNAP))

    def first_index_at_or_after(self, t: float) -> int:
        return int(math.ceil(self.position(t) - _SNAP))

    def contains(self, t: float) -> bool:
        """True when ``t`` is (up to rounding) one of the grid's sample times."""
        pos = self.position(t)
        k = round(pos)
        return 0 <= k < self.count and abs(pos - k) <= 1e-6

    def covers(self, a: float, b: float) -> bool:
        slack = _SNAP * self.step
        return self.t_start <= a + slack and self.t_end >= b - slack


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """A real function of time known on ``grid`` and extended outside it."""

    grid: TimeGrid
    values: np.ndarray
    extension: Extension = Extension.ZERO_OUTSIDE

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.count,):
            raise ValueError(f"expected {self.grid.count} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def left_value(self) -> float:
        """Value taken before the first sample."""
        return 0.0 if self.extension is Extension.ZERO_OUTSIDE else float(self.values[0])

    @property
    def right_value(self) -> float:
        """Value taken after the last sample."""
        return 0.0 if self.extension is Extension.ZERO_OUTSIDE else float(self.values[-1])

    def __call__(self, t):
        """Evaluate at arbitrary times: linear interpolation inside the grid."""
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.grid.times, self.values,
                        left=self.left_value, right=self.right_value)
        return out if out.ndim else float(out)

    def __neg__(self) -> "SampledSignal":
        return SampledSignal(self.grid, -self.values, self.extension)

    def resample(self, grid: TimeGrid) -> "SampledSignal":
        if grid == self.grid:
            return self
        return SampledSignal(grid, self(grid.times), self.extension)

    def shifted(self, samples: int) -> "SampledSignal":
        """Delay by an integer number of samples, filling from the extension rule."""
        m, n = int(samples), self.grid.count
        out = np.empty_like(self.values)
        if m >= 0:
            k = min(m, n)
            out[:k] = self.left_value
            out[k:] = self.values[:n - k]
        else:
            k = min(-m, n)
            out[n - k:] = self.right_value
            out[:n - k] = self.values[k:]
        return SampledSignal(self.grid, out, self.extension)

    def truncated(self, t_end: float) -> "SampledSignal":
        """Drop samples after ``t_end`` (keeps the extension rule)."""
        k = min(self.grid.last_index_at_or_before(t_end) + 1, self.grid.count)
        grid = TimeGrid(self.grid.t_start, self.grid.step, k)
        return SampledSignal(grid, self.values[:k], self.extension)


def zero_signal(grid: TimeGrid, extension: Extension = Extension.ZERO_OUTSIDE) -> SampledSignal:
    return SampledSignal(grid, np.zeros(grid.count), extension)


def point_distance(x: float, y: float) -> float:
    """The usual metric on the real line."""
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError("point_distance needs finite arguments")
    return abs(x - y)


def _check_pair(f: SampledSignal, g: SampledSignal) -> None:
    if f.grid != g.grid:
        raise ValueError(f"signals live on different grids: {f.grid} vs {g.grid}")


def windowed_sup(absdiff: np.ndarray, grid: TimeGrid, radii, left_gap=0.0, right_gap=0.0) -> np.ndarray:
    """Sup of ``absdiff`` over ``[0, r]`` for each radius, along the last axis.

    ``left_gap`` / ``right_gap`` are the (constant) differences of the two
    extensions, used where the grid does not reach 0 or r.  Leading axes of
    ``absdiff`` are batch axes and broadcast against the gap arrays.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    absdiff = np.asarray(absdiff, dtype=float)
    lo = max(grid.first_index_at_or_after(0.0), 0)
    batch = absdiff.shape[:-1]
    out = np.zeros(batch + (len(radii),))
    if lo < grid.count:
        his = np.array([min(grid.last_index_at_or_before(r), grid.count - 1) for r in radii])
        order = np.argsort(his, kind="stable")
        sorted_his = his[order]
        valid = sorted_his >= lo
        if np.any(valid):
            # segment maxima between consecutive window ends, then running max
            ends = sorted_his[valid]
            starts = np.concatenate(([lo], ends[:-1] + 1))
            nonempty = starts <= ends
            seg = np.full(batch + (len(ends),), -np.inf)
            if np.any(nonempty):
                red = np.maximum.reduceat(absdiff[..., :ends[-1] + 1], starts[nonempty], axis=-1)
                seg[..., nonempty] = red
            sup = np.maximum.accumulate(seg, axis=-1)
            sup = np.where(np.isfinite(sup), sup, 0.0)
            out[..., order[valid]] = sup
    left_gap = np.asarray(left_gap, dtype=float)[..., None]
    right_gap = np.asarray(right_gap, dtype=float)[..., None]
    if grid.t_start > _SNAP * grid.step:
        out = np.maximum(out, left_gap)
    beyond = radii > grid.t_end + _SNAP * grid.step
    if np.any(beyond):
        out = np.where(beyond, np.maximum(out, right_gap), out)
    return out


def window_distances(f: SampledSignal, g: SampledSignal, radii) -> np.ndarray:
    """``window_distance`` for several radii at once."""
    _check_pair(f, g)
    absdiff = np.abs(f.values - g.values)
    return windowed_sup(absdiff, f.grid, radii,
                        abs(f.left_value - g.left_value), abs(f.right_value - g.right_value))


def window_distance(f: SampledSignal, g: SampledSignal, r: float) -> float:
    """Max of |f(t) - g(t)| over grid samples in [0, r]."""
    if not r > 0:
        raise ValueError(f"window radius must be positive, got {r}")
    return float(window_distances(f, g, [r])[0])


def compact_open_from_windows(d: np.ndarray) -> np.ndarray:
    """Combine d^1..d^R (last axis) into the truncated compact-open series."""
    d = np.asarray(d, dtype=float)
    weights = 0.5 ** np.arange(1, d.shape[-1] + 1)
    return np.sum(weights * (d / (1.0 + d)), axis=-1)


def compact_open_distance(f: SampledSignal, g: SampledSignal, R: int = DEFAULT_TRUNCATION) -> float:
    """Sum over r = 1..R of 2^-r d^r / (1 + d^r).

    The neglected tail is at most 2^-R.
    """
    if int(R) != R or R < 1:
        raise ValueError(f"truncation R must be a positive integer, got {R}")
    d = window_distances(f, g, np.arange(1, int(R) + 1))
    return float(compact_open_from_windows(d))


@dataclass
class ConvergenceReport:
    distances: list[tuple[int, float]]
    passed: bool
    tolerance: float
    n_min: int = 0
    R: int = DEFAULT_TRUNCATION
    notes: list[str] = field(default_factory=list)


def verify_convergence(sequence: Callable[[int], SampledSignal], limit: SampledSignal,
                       tolerance: float, n_min: int, n_max: int,
                       R: int = DEFAULT_TRUNCATION) -> ConvergenceReport:
    """Tabulate d*(f_n, limit) for n_min <= n <= n_max and judge convergence.

    Passes when every tabulated distance is within ``tolerance`` and the
    last distance does not exceed the first.  When a term lives on a
    different grid the limit is resampled onto it.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    if n_min > n_max:
        raise ValueError(f"empty index range [{n_min}, {n_max}]")
    distances = []
    for n in range(n_min, n_max + 1):
        f_n = sequence(n)
        distances.append((n, compact_open_distance(f_n, limit.resample(f_n.grid), R)))
    values = [d for _, d in distances]
    passed = all(d <= tolerance for d in values) and values[-1] <= values[0]
    return ConvergenceReport(distances, passed, tolerance, n_min, R)


def _snap(x: np.ndarray) -> np.ndarray:
    nearest = np.round(x)
    return np.where(np.abs(x - nearest) <= _SNAP, nearest, x)


def tent_grid(n: int, horizon: float = DEFAULT_TRUNCATION, max_step: float = DEFAULT_STEP) -> TimeGrid:
    """Grid from 0 whose step divides 1/n, so 1/n, 2/n and integer times are samples."""
    per_unit = n * int(math.ceil(1.0 / (n * max_step)))
    return TimeGrid(0.0, 1.0 / per_unit, int(round(horizon * per_unit)) + 1)


def tent_function(n: int, grid: TimeGrid | None = None,
                  horizon: float = DEFAULT_TRUNCATION) -> SampledSignal:
    """Tent of height 1 on [0, 2/n] peaking at t = 1/n."""
    if int(n) != n or n < 1:
        raise ValueError(f"tent index must be a positive integer, got {n}")
    grid = grid or tent_grid(n, horizon)
    for t in (1.0 / n, 2.0 / n):
        if not grid.contains(t):
            raise ValueError(f"grid must contain t = {t} for the tent of index {n}")
    phase = _snap(n * grid.times)
    values = np.clip(1.0 - np.abs(phase - 1.0), 0.0, None)
    return SampledSignal(grid, values, Extension.ZERO_OUTSIDE)


def exp_function(n: int, grid: TimeGrid | None = None,
                 horizon: float = DEFAULT_TRUNCATION) -> SampledSignal:
    """Samples of exp(t - n); held at the ends outside the grid."""
    if int(n) != n or n < 1:
        raise ValueError(f"exponential index must be a positive integer, got {n}")
    grid = grid or TimeGrid.covering(horizon)
    return SampledSignal(grid, np.exp(grid.times - n), Extension.HOLD_ENDS)
