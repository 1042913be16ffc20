import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from glitchlab.funcspace import (Extension, SampledSignal, TimeGrid, compact_open_distance,
                                 exp_function, point_distance, tent_function, verify_convergence,
                                 window_distance, window_distances, zero_signal)
from glitchlab.pulses import PulseShape, pulse_signal

from .conftest import random_signals

SMALL = TimeGrid(0.0, 0.25, 25)   # covers [0, 6]
finite = st.floats(-1e6, 1e6, allow_nan=False)
samples = arrays(np.float64, SMALL.count, elements=st.floats(-100, 100, allow_nan=False))
extensions = st.sampled_from(list(Extension))


def signal(values, ext=Extension.ZERO_OUTSIDE):
    return SampledSignal(SMALL, values, ext)


# -- grid and signal plumbing ---------------------------------------------

def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(0.0, 0.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 0.1, 1)
    g = TimeGrid(0.0, 0.5, 5)
    assert g.t_end == 2.0
    np.testing.assert_array_equal(g.times, [0, 0.5, 1, 1.5, 2])
    assert g.contains(1.5) and not g.contains(1.25)


def test_signal_rejects_non_finite():
    with pytest.raises(ValueError):
        SampledSignal(TimeGrid(0, 1, 3), [0.0, math.nan, 1.0])
    with pytest.raises(ValueError):
        SampledSignal(TimeGrid(0, 1, 3), [0.0, 1.0])


def test_signal_is_immutable():
    s = SampledSignal(TimeGrid(0, 1, 3), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_extension_rules():
    g = TimeGrid(1.0, 1.0, 3)
    zero = SampledSignal(g, [2.0, 3.0, 4.0], Extension.ZERO_OUTSIDE)
    hold = SampledSignal(g, [2.0, 3.0, 4.0], Extension.HOLD_ENDS)
    assert zero(0.5) == 0.0 and zero(10.0) == 0.0
    assert hold(0.5) == 2.0 and hold(10.0) == 4.0
    assert zero(2.5) == 3.5


def test_shifted_fills_from_extension():
    g = TimeGrid(0, 1, 4)
    s = SampledSignal(g, [1.0, 2.0, 3.0, 4.0], Extension.HOLD_ENDS)
    np.testing.assert_array_equal(s.shifted(1).values, [1, 1, 2, 3])
    np.testing.assert_array_equal(s.shifted(-2).values, [3, 4, 4, 4])
    z = SampledSignal(g, [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(z.shifted(2).values, [0, 0, 1, 2])
    np.testing.assert_array_equal(z.shifted(9).values, [0, 0, 0, 0])


# -- point metric ------------------------------------------------------------

def test_point_distance_examples():
    assert point_distance(3, 5) == 2
    assert point_distance(7.25, 7.25) == 0
    with pytest.raises(ValueError):
        point_distance(math.inf, 0)


@given(finite, finite, finite)
def test_point_distance_axioms(a, b, c):
    assert point_distance(a, b) == point_distance(b, a)
    assert point_distance(a, b) >= 0
    assert (point_distance(a, b) == 0) == (a == b)
    assert point_distance(a, c) <= point_distance(a, b) + point_distance(b, c) + 1e-9


# -- windowed sup metric -----------------------------------------------------

def test_window_distance_identity(grid, shape):
    p = pulse_signal(shape, 0.4, grid)
    assert window_distance(p, p, 3) == 0.0


def test_window_distance_tent_example():
    tent = tent_function(2)
    assert window_distance(tent, zero_signal(tent.grid), 1) == 1.0


def test_window_distance_exp_example():
    f = exp_function(5)
    assert window_distance(f, zero_signal(f.grid), 2) == pytest.approx(math.exp(-3), rel=1e-12)
    assert window_distance(f, zero_signal(f.grid), 2) == pytest.approx(0.0497871, abs=1e-7)


def test_window_distance_errors():
    a = zero_signal(SMALL)
    with pytest.raises(ValueError):
        window_distance(a, a, 0)
    with pytest.raises(ValueError):
        window_distance(a, zero_signal(TimeGrid(0, 0.5, 10)), 1)


def test_window_distance_uses_extension_past_grid():
    g = TimeGrid(0.0, 0.5, 5)   # ends at t = 2
    held = SampledSignal(g, [0, 0, 0, 0, 3.0], Extension.HOLD_ENDS)
    held_lower = SampledSignal(g, [0, 0, 0, 0, 1.0], Extension.HOLD_ENDS)
    assert window_distance(held, zero_signal(g), 5) == 3.0
    # HOLD vs HOLD beyond the grid differ by |3 - 1|, below the in-grid 2
    assert window_distance(held, held_lower, 5) == 2.0
    late = TimeGrid(1.0, 0.5, 3)
    early_hold = SampledSignal(late, [4.0, 0, 0], Extension.HOLD_ENDS)
    assert window_distance(early_hold, zero_signal(late), 0.5) == 4.0


def test_window_excludes_samples_before_zero():
    g = TimeGrid(-1.0, 0.5, 7)
    f = SampledSignal(g, [9.0, 9.0, 0, 0, 0, 0, 0])
    assert window_distance(f, zero_signal(g), 2) == 0.0


@settings(max_examples=200, deadline=None)
@given(samples, samples, samples, extensions, st.floats(0.1, 8.0))
def test_window_metric_axioms(a, b, c, ext, r):
    f, g, h = signal(a, ext), signal(b, ext), signal(c, ext)
    assert window_distance(f, g, r) == window_distance(g, f, r)
    assert window_distance(f, f, r) == 0.0
    assert window_distance(f, h, r) <= window_distance(f, g, r) + window_distance(g, h, r) + 1e-12


@settings(max_examples=200, deadline=None)
@given(samples, samples, st.floats(0.1, 8.0), st.floats(0.1, 8.0))
def test_window_distance_monotone_in_radius(a, b, r1, r2):
    f, g = signal(a), signal(b)
    lo, hi = sorted((r1, r2))
    assert window_distance(f, g, lo) <= window_distance(f, g, hi)


def test_window_distances_match_brute_force(rng):
    g = TimeGrid(0.0, 0.01, 801)
    f, h = random_signals(rng, g, 2)
    radii = [0.3, 1, 2.5, 8]
    brute = [np.max(np.abs(f.values - h.values)[g.times <= r + 1e-12]) for r in radii]
    np.testing.assert_array_equal(window_distances(f, h, radii), brute)


# -- compact-open metric -----------------------------------------------------

def test_compact_open_self_distance_zero(grid, shape):
    p = pulse_signal(shape, 3.0, grid)
    assert compact_open_distance(p, p) == 0.0


def test_compact_open_far_pulse_matches_series_oracle(grid):
    p10 = pulse_signal(PulseShape(1.0, 0.1), 10.0, grid)
    # frozen: sum_{r=11}^{20} 2^-r * 1/2, exact rational evaluation
    expected = 0.0004878044128417969
    assert compact_open_distance(p10, zero_signal(grid), 20) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(4.878e-4, rel=1e-4)


def test_compact_open_rejects_bad_truncation():
    a = zero_signal(SMALL)
    for R in (0, -1, 1.5):
        with pytest.raises(ValueError):
            compact_open_distance(a, a, R)


@settings(max_examples=150, deadline=None)
@given(samples, samples, samples, extensions)
def test_compact_open_metric_axioms(a, b, c, ext):
    f, g, h = signal(a, ext), signal(b, ext), signal(c, ext)
    fg = compact_open_distance(f, g)
    assert fg == compact_open_distance(g, f)
    assert compact_open_distance(f, f) == 0.0
    assert 0.0 <= fg < 1.0
    assert compact_open_distance(f, h) <= fg + compact_open_distance(g, h) + 1e-12


@settings(max_examples=100, deadline=None)
@given(samples, samples, st.integers(1, 19), st.integers(1, 20))
def test_compact_open_truncation_bound(a, b, R, extra):
    f, g = signal(a, Extension.HOLD_ENDS), signal(b, Extension.HOLD_ENDS)
    short, long = compact_open_distance(f, g, R), compact_open_distance(f, g, R + extra)
    assert 0.0 <= long - short <= 2.0 ** -R


@given(samples, samples)
def test_zero_compact_open_means_equal_samples(a, b):
    f = signal(a)
    g = signal(np.where(np.arange(SMALL.count) % 3 == 0, b, a))
    if compact_open_distance(f, g, 20) == 0.0:
        np.testing.assert_array_equal(f.values, g.values)


# -- tent and exponential sequences -------------------------------------------

def test_tent_examples():
    assert tent_function(1)(1.0) == 1.0
    assert tent_function(4)(0.75) == 0.0
    assert tent_function(2)(0.25) == 0.5


def test_tent_needs_critical_points_on_grid():
    with pytest.raises(ValueError):
        tent_function(3, grid=TimeGrid(0.0, 0.1, 30))
    tent = tent_function(3, grid=TimeGrid(0.0, 1 / 30, 61))
    assert window_distance(tent, zero_signal(tent.grid), 1) == 1.0


@pytest.mark.parametrize("n", range(1, 51))
def test_tent_sup_on_unit_window_is_one(n):
    tent = tent_function(n)
    assert window_distance(tent, zero_signal(tent.grid), 1) == 1.0


def test_exp_examples():
    assert exp_function(3)(3.0) == pytest.approx(1.0, rel=1e-12)
    assert exp_function(4)(0.0) == math.exp(-4)


@pytest.mark.parametrize("n", range(1, 21))
@pytest.mark.parametrize("r", [1, 2, 3])
def test_exp_window_distance(n, r):
    f = exp_function(n)
    assert window_distance(f, zero_signal(f.grid), r) == pytest.approx(math.exp(r - n), rel=1e-9)


# -- convergence ---------------------------------------------------------------

def _exp_dstar_oracle(n, R=20):
    return sum(2.0 ** -r * math.exp(r - n) / (1 + math.exp(r - n)) for r in range(1, R + 1))


@pytest.mark.parametrize("n, frozen", [(20, 2.849289065473968e-06),
                                       (25, 2.420636680477337e-08),
                                       (30, 1.6349635130617356e-10)])
def test_exp_compact_open_matches_closed_form(n, frozen):
    assert _exp_dstar_oracle(n) == pytest.approx(frozen, rel=1e-14)
    f = exp_function(n)
    assert compact_open_distance(f, zero_signal(f.grid)) == pytest.approx(frozen, rel=1e-9)


def test_exp_sequence_converges():
    limit = zero_signal(exp_function(1).grid)
    report = verify_convergence(exp_function, limit, 1e-3, 20, 30)
    assert report.passed
    assert [n for n, _ in report.distances] == list(range(20, 31))
    assert all(b < a for (_, a), (_, b) in zip(report.distances, report.distances[1:]))


def test_tent_sequence_does_not_converge():
    limit = zero_signal(tent_function(1).grid)
    report = verify_convergence(tent_function, limit, 0.2, 1, 40)
    assert not report.passed
    # the r = 1 term alone is 1/2 * 1/(1+1)
    assert all(d >= 0.25 for _, d in report.distances)


def test_constant_sequence_converges(grid, shape):
    p = pulse_signal(shape, 0.5, grid)
    assert verify_convergence(lambda n: p, p, 1e-300, 1, 5).passed


def test_convergence_argument_checks(grid):
    z = zero_signal(grid)
    with pytest.raises(ValueError):
        verify_convergence(lambda n: z, z, 0.0, 1, 2)
    with pytest.raises(ValueError):
        verify_convergence(lambda n: z, z, 1e-3, 3, 2)


def test_convergence_propagates_generator_failure(grid):
    def broken(n):
        raise RuntimeError("boom")
    with pytest.raises(RuntimeError):
        verify_convergence(broken, zero_signal(grid), 1e-3, 1, 2)
