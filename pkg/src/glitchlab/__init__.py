"""Numerical laboratory for the arbiter glitch: function-space metrics,
pulse families, a bistable latch arbiter and chain-connectivity checks."""

from .arbiter import (ArbiterParams, Decision, IntegrationError, Trajectory, decision_of,
                      decision_time_curve, delta, escape_time_oracle, integrate)
from .funcspace import (ConvergenceReport, Extension, SampledSignal, TimeGrid,
                        compact_open_distance, exp_function, point_distance, tent_function,
                        verify_convergence, window_distance, zero_signal)
from .pulses import (InputPair, PulseShape, SignedPulse, input_path_point, input_signals,
                     pulse_signal, sample_family, u_infty_path_point)
from .topology import (ConnectivityReport, GlitchSearchResult, epsilon_components,
                       glitch_search, image_chain_check, min_cross_distance, three_step_check)

__version__ = "0.1.0"
