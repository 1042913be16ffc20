"""Pulse family p_s, arbiter inputs (p_r, p_s) and the explicit connecting paths."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .funcspace import (DEFAULT_TRUNCATION, Extension, SampledSignal, TimeGrid,
                        zero_signal)

# offsets closer than this (in samples) to an integer are treated as on-grid
_ALIGN = 1e-9


@dataclass(frozen=True)
class PulseShape:
    """Raised-cosine pulse of the given amplitude supported on [0, width]."""

    amplitude: float = 1.0
    width: float = 0.1

    def __post_init__(self):
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"pulse amplitude must be positive, got {self.amplitude}")
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError(f"pulse width must be positive, got {self.width}")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        inside = (u > 0.0) & (u < self.width)
        out = np.where(inside, self.amplitude * (1.0 - np.cos(2.0 * np.pi * u / self.width)) * 0.5, 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class InputPair:
    """Arrival times of the pulses on wires a and b."""

    t_a: float
    t_b: float

    def __post_init__(self):
        for name in ("t_a", "t_b"):
            t = getattr(self, name)
            if not 0.0 < t < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {t}")

    @property
    def skew(self) -> float:
        """t_b - t_a; positive when a arrives first."""
        return self.t_b - self.t_a

    def swapped(self) -> "InputPair":
        return InputPair(self.t_b, self.t_a)

    @classmethod
    def from_skew(cls, base_time: float, skew: float) -> "InputPair":
        return cls(base_time, base_time + skew)


@dataclass(frozen=True)
class SignedPulse:
    """+p_s, -p_s, or the zero function (sign 0, start None)."""

    sign: int
    start: float | None = None

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")
        if self.sign == 0:
            if self.start is not None:
                raise ValueError("the zero pulse has no start time")
        elif self.start is None or not self.start > 0:
            raise ValueError(f"signed pulse needs a positive start, got {self.start}")

    def signal(self, shape: PulseShape, grid: TimeGrid) -> SampledSignal:
        if self.sign == 0 or self.start > grid.t_end:
            return zero_signal(grid)
        sig = pulse_signal(shape, self.start, grid)
        return sig if self.sign > 0 else -sig


def default_grid(horizon: float = DEFAULT_TRUNCATION) -> TimeGrid:
    return TimeGrid.covering(horizon)


def pulse_signal(shape: PulseShape, s: float, grid: TimeGrid) -> SampledSignal:
    """Samples of p_s(t) = p_0(t - s).

    Local pulse time is computed from the sample index, so a start time
    that sits on the grid gives bit-identical samples under grid shifts.
    """
    if not s >= 0:
        raise ValueError(f"pulse start must be non-negative, got {s}")
    offset = grid.position(s)
    nearest = round(offset)
    if abs(offset - nearest) <= _ALIGN:
        offset = nearest
    u = (np.arange(grid.count) - offset) * grid.step
    return SampledSignal(grid, shape(u), Extension.ZERO_OUTSIDE)


def input_signals(pair: InputPair, shape: PulseShape, grid: TimeGrid) -> tuple[SampledSignal, SampledSignal]:
    return pulse_signal(shape, pair.t_a, grid), pulse_signal(shape, pair.t_b, grid)


def input_path_point(i0: InputPair, i1: InputPair, lam: float) -> InputPair:
    """Straight-line interpolation of arrival times; lam=0 gives i0, lam=1 gives i1."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"path parameter must lie in [0, 1], got {lam}")
    return InputPair((1.0 - lam) * i0.t_a + lam * i1.t_a,
                     (1.0 - lam) * i0.t_b + lam * i1.t_b)


def u_infty_member(lam: float) -> SignedPulse:
    """Point of the path p_1 -> (pulses escaping to infinity) -> 0 -> -p_1."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"path parameter must lie in [0, 1], got {lam}")
    if lam < 0.5:
        return SignedPulse(1, 1.0 / (1.0 - 2.0 * lam))
    if lam == 0.5:
        return SignedPulse(0)
    return SignedPulse(-1, 1.0 / (2.0 * lam - 1.0))


def u_infty_path_point(lam: float, shape: PulseShape, grid: TimeGrid) -> SampledSignal:
    """Signal at ``lam`` on the path; starts past the grid horizon give zero."""
    return u_infty_member(lam).signal(shape, grid)


def sample_family(r: float, count: int, include_zero: bool = False,
                  shape: PulseShape | None = None, grid: TimeGrid | None = None) -> list[SampledSignal]:
    """Finite net of the family of signed pulses starting in (0, r].

    Starts are ``r * i / count`` for i = 1..count.  The list is ordered as a
    chain: positive pulses by increasing start, then negative pulses by
    decreasing start, so neighbours in the list are neighbours in the net.

    With ``r = math.inf`` the net is built on (0, 1] and the gap between the
    two signs is bridged by ``count - 1`` samples of each half of the path
    through zero (uniform in the path parameter), plus the zero signal when
    ``include_zero`` is set.
    """
    if int(count) != count or count < 2:
        raise ValueError(f"need at least 2 start times, got {count}")
    shape = shape or PulseShape()
    grid = grid or default_grid()
    base_r = 1.0 if math.isinf(r) else float(r)
    if not base_r > 0:
        raise ValueError(f"family radius must be positive, got {r}")
    starts = [base_r * i / count for i in range(1, count + 1)]
    positive = [pulse_signal(shape, s, grid) for s in starts]
    negative = [-p for p in reversed(positive)]
    middle: list[SampledSignal] = []
    if math.isinf(r):
        lams = [j / (2.0 * count) for j in range(1, count)]
        middle += [u_infty_path_point(lam, shape, grid) for lam in lams]
        if include_zero:
            middle.append(zero_signal(grid))
        middle += [u_infty_path_point(1.0 - lam, shape, grid) for lam in reversed(lams)]
    elif include_zero:
        middle.append(zero_signal(grid))
    return positive + middle + negative
