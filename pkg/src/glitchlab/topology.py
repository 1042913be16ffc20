"""Chain connectivity of finite signal nets and the constructive glitch search.

Path-connectedness cannot be read off finitely many samples, so a net is
certified at a resolution ``delta``: two signals belong to the same
component when a chain of steps with compact-open distance <= delta joins
them.  The disconnection side is certified by a positive cross distance
between two subsets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .arbiter import ArbiterParams, Decision, decision_of, integrate
from .funcspace import DEFAULT_TRUNCATION, SampledSignal, TimeGrid
from .pulses import InputPair, PulseShape, input_path_point

SKEW_FLOOR = 1e-15

# the bundled TBB is too old for numba; skip straight to OpenMP / workqueue
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


class UnionFind:
    """Disjoint sets over 0..size-1 with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size
        self.count = size

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def labels(self) -> list[int]:
        """Component label per element, numbered by first appearance."""
        seen: dict[int, int] = {}
        return [seen.setdefault(self.find(i), len(seen)) for i in range(len(self.parent))]


def _stack(signals: Sequence[SampledSignal], R: int):
    if not signals:
        raise ValueError("need at least one signal")
    grid = signals[0].grid
    for s in signals[1:]:
        if s.grid != grid:
            raise ValueError("all signals must share one grid")
    values = np.stack([s.values for s in signals])
    # samples past t = R never enter the truncated series
    if grid.t_end >= R:
        k = min(grid.last_index_at_or_before(R), grid.count - 1) + 1
        grid = TimeGrid(grid.t_start, grid.step, max(k, 2))
        values = values[:, :grid.count]
    left = np.array([s.left_value for s in signals])
    right = np.array([s.right_value for s in signals])
    return grid, values, left, right


@numba.njit(cache=True, nogil=True, parallel=True)
def _distance_block(va, vb, la, lb, ra, rb, lo, ends, use_left, beyond, weights, symmetric):
    n, m = va.shape[0], vb.shape[0]
    out = np.zeros((n, m))
    for i in numba.prange(n):
        for j in range(i + 1 if symmetric else 0, m):
            left_gap = abs(la[i] - lb[j])
            right_gap = abs(ra[i] - rb[j])
            k = lo
            running = 0.0
            total = 0.0
            for r in range(ends.shape[0]):
                while k <= ends[r]:
                    diff = abs(va[i, k] - vb[j, k])
                    if diff > running:
                        running = diff
                    k += 1
                d = running
                if use_left and left_gap > d:
                    d = left_gap
                if beyond[r] and right_gap > d:
                    d = right_gap
                total += weights[r] * (d / (1.0 + d))
            out[i, j] = total
    return out


def _kernel_args(grid: TimeGrid, R: int):
    radii = np.arange(1, R + 1, dtype=float)
    lo = max(grid.first_index_at_or_after(0.0), 0)
    ends = np.array([min(grid.last_index_at_or_before(r), grid.count - 1) for r in radii], dtype=np.int64)
    use_left = grid.t_start > 1e-9 * grid.step
    beyond = radii > grid.t_end + 1e-9 * grid.step
    return lo, ends, use_left, beyond, 0.5 ** radii


def cross_distances(set_a: Sequence[SampledSignal], set_b: Sequence[SampledSignal],
                    R: int = DEFAULT_TRUNCATION) -> np.ndarray:
    """Matrix of compact-open distances d*(a_i, b_j)."""
    grid, values, left, right = _stack(list(set_a) + list(set_b), R)
    n = len(set_a)
    return _distance_block(values[:n], values[n:], left[:n], left[n:], right[:n], right[n:],
                           *_kernel_args(grid, R), False)


def pairwise_distances(signals: Sequence[SampledSignal], R: int = DEFAULT_TRUNCATION) -> np.ndarray:
    """Symmetric matrix of compact-open distances with a zero diagonal."""
    grid, values, left, right = _stack(signals, R)
    upper = _distance_block(values, values, left, left, right, right, *_kernel_args(grid, R), True)
    return upper + upper.T


@dataclass
class ConnectivityReport:
    component_count: int
    component_labels: list[int]
    delta: float
    min_cross_distance: float | None = None


def components_from_distances(distances: np.ndarray, delta: float,
                              groups: tuple[Sequence[int], Sequence[int]] | None = None) -> ConnectivityReport:
    if not delta > 0:
        raise ValueError(f"chaining threshold must be positive, got {delta}")
    n = len(distances)
    uf = UnionFind(n)
    for i, j in zip(*np.nonzero(np.triu(distances <= delta, k=1))):
        uf.union(int(i), int(j))
    cross = None
    if groups is not None:
        a, b = (np.asarray(g, dtype=int) for g in groups)
        if a.size == 0 or b.size == 0:
            raise ValueError("cross-distance groups must be nonempty")
        cross = float(distances[np.ix_(a, b)].min())
    return ConnectivityReport(uf.count, uf.labels(), float(delta), cross)


def epsilon_components(signals: Sequence[SampledSignal], delta: float, R: int = DEFAULT_TRUNCATION,
                       groups: tuple[Sequence[int], Sequence[int]] | None = None) -> ConnectivityReport:
    """Components of the graph joining signals at compact-open distance <= delta.

    ``groups`` optionally names two index subsets whose smallest cross
    distance is reported alongside.
    """
    if not delta > 0:
        raise ValueError(f"chaining threshold must be positive, got {delta}")
    return components_from_distances(pairwise_distances(signals, R), delta, groups)


def min_cross_distance(set_a: Sequence[SampledSignal], set_b: Sequence[SampledSignal],
                       R: int = DEFAULT_TRUNCATION) -> float:
    if not set_a or not set_b:
        raise ValueError("both sets must be nonempty")
    return float(cross_distances(set_a, set_b, R).min())


def chain_resolution(signals: Sequence[SampledSignal], R: int = DEFAULT_TRUNCATION) -> float:
    """Largest compact-open step between consecutive signals of an ordered net."""
    if len(signals) < 2:
        return 0.0
    return max(float(cross_distances([a], [b], R)[0, 0]) for a, b in zip(signals, signals[1:]))


@dataclass
class PathImages:
    """Device outputs along a sampled input path (outputs cut to [0, R])."""

    pairs: list[InputPair]
    outputs: list[SampledSignal]
    decisions: list[Decision | None]


def linear_path(i0: InputPair, i1: InputPair, n_points: int) -> list[InputPair]:
    if n_points < 2:
        raise ValueError("a sampled path needs at least 2 points")
    return [input_path_point(i0, i1, k / (n_points - 1)) for k in range(n_points)]


def path_images(path: Sequence[InputPair], shape: PulseShape | None = None,
                params: ArbiterParams | None = None, R: int = DEFAULT_TRUNCATION) -> PathImages:
    params = params or ArbiterParams()
    outputs, decisions = [], []
    for pair in path:
        out = integrate(pair, shape, params).output
        decisions.append(decision_of(out, params))
        outputs.append(out.truncated(R) if out.grid.t_end > R else out)
    return PathImages(list(path), outputs, decisions)


def image_chain_check(path: Sequence[InputPair], shape: PulseShape | None = None,
                      params: ArbiterParams | None = None, delta: float | None = None,
                      R: int = DEFAULT_TRUNCATION, images: PathImages | None = None) -> ConnectivityReport:
    """Map a sampled input path through the device and chain the images.

    With ``delta=None`` the threshold is the largest distance between
    images of consecutive path points.
    """
    images = images or path_images(path, shape, params, R)
    distances = pairwise_distances(images.outputs, R)
    if delta is None:
        steps = np.diagonal(distances, offset=1)
        delta = float(steps.max()) if steps.size else 0.0
        if delta == 0.0:
            delta = math.ulp(1.0)
    return components_from_distances(distances, delta)


@dataclass
class ThreeStepReport:
    """Chain connectivity of the image against separation of early deciders."""

    chain: ConnectivityReport
    early_positive: list[int]
    early_negative: list[int]
    early_cross_distance: float
    late_points: list[int]
    decide_by: float
    images: PathImages = field(repr=False)

    @property
    def forces_late_decision(self) -> bool:
        """A single chain whose steps are shorter than the early-decider gap."""
        return self.chain.component_count == 1 and self.early_cross_distance > self.chain.delta


def three_step_check(i0: InputPair, i1: InputPair, n_points: int = 512, decide_by: float = 3.0,
                     shape: PulseShape | None = None, params: ArbiterParams | None = None,
                     R: int = DEFAULT_TRUNCATION) -> ThreeStepReport:
    """Chain the images of the straight path i0 -> i1 and split its early deciders by sign."""
    images = path_images(linear_path(i0, i1, n_points), shape, params, R)
    chain = image_chain_check(images.pairs, delta=None, R=R, images=images)
    early = {1: [], -1: []}
    late = []
    for k, dec in enumerate(images.decisions):
        if dec is not None and dec.time <= decide_by:
            early[dec.sign].append(k)
        else:
            late.append(k)
    if not early[1] or not early[-1]:
        raise ValueError("path endpoints must decide early with opposite signs")
    cross = min_cross_distance([images.outputs[k] for k in early[1]],
                               [images.outputs[k] for k in early[-1]], R)
    return ThreeStepReport(chain, early[1], early[-1], cross, late, decide_by, images)


@dataclass
class GlitchStep:
    iteration: int
    lo: float
    hi: float
    skew: float
    sign: int | None
    time: float | None
    best_time: float


@dataclass
class GlitchSearchResult:
    skew: float
    achieved_time: float | None
    iterations: int
    bracket: tuple[float, float]
    success: bool
    width: float
    history: list[GlitchStep] = field(default_factory=list)


def _decide(base_time, skew, shape, params) -> Decision | None:
    return integrate(InputPair.from_skew(base_time, skew), shape, params).decision


def glitch_search(target: float, base_time: float, shape: PulseShape | None = None,
                  params: ArbiterParams | None = None, max_iterations: int = 60,
                  bracket: tuple[float, float] | None = None,
                  skew_floor: float = SKEW_FLOOR) -> GlitchSearchResult:
    """Bisect on skew for an input deciding no earlier than ``target``.

    The bracket keeps endpoints of opposite decision sign.  A midpoint that
    never decides meets any target.  Without an explicit bracket the search
    starts from (-d, d) with d = 0.9 * min(base_time, 1 - base_time), whose
    first midpoint is the symmetric input.
    """
    shape = shape or PulseShape()
    params = params or ArbiterParams()
    if target >= params.t_max:
        raise ValueError(f"target {target} must be below the horizon {params.t_max}")
    if bracket is None:
        d0 = 0.9 * min(base_time, 1.0 - base_time)
        bracket = (-d0, d0)
    lo, hi = bracket
    if not lo < hi:
        raise ValueError(f"bad bracket {bracket}")
    d_lo, d_hi = _decide(base_time, lo, shape, params), _decide(base_time, hi, shape, params)
    if d_lo is None or d_hi is None or d_lo.sign == d_hi.sign:
        raise ValueError(f"bracket ends must decide with opposite signs, got {d_lo} and {d_hi}")
    sign_lo = d_lo.sign
    width = hi - lo
    best_skew, best_time = lo, max(d_lo.time, d_hi.time)
    history: list[GlitchStep] = []
    for it in range(1, max_iterations + 1):
        half = width / 2
        mid = lo + half
        dec = _decide(base_time, mid, shape, params)
        reached = math.inf if dec is None else dec.time
        if reached > best_time:
            best_skew, best_time = mid, reached
        if dec is not None and dec.sign == sign_lo:
            lo = mid
        width = half
        history.append(GlitchStep(it, lo, lo + width, mid, None if dec is None else dec.sign,
                                  None if dec is None else dec.time, best_time))
        if reached >= target:
            return GlitchSearchResult(mid, None if dec is None else dec.time, it,
                                      (lo, lo + width), True, width, history)
        if abs(mid) < skew_floor:
            break
    achieved = None if math.isinf(best_time) else best_time
    return GlitchSearchResult(best_skew, achieved, len(history), (lo, lo + width),
                              False, width, history)
