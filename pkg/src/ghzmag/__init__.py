"""Noisy AC magnetometry with uncorrelated and GHZ qubit probes.

Exact Lindblad simulation, leading-order closed forms and the resulting
amplitude-uncertainty comparison between the two probe strategies.
"""
from .analytic import (
    model_probability,
    p_ghz_depolarizing_exact,
    p_ghz_depolarizing_leading,
    p_ghz_parallel,
    p_individual_depolarizing,
    p_individual_parallel,
    signal_integrals,
    window,
)
from .lindblad import IntegratorConfig, NoiseModel, SystemParams, evolve, probability_trace
from .quantum import ProbeState, Scheme, initial_state, projection_probability, projector_y
from .sensitivity import (
    MeasurementBudget,
    asymptotic_delta_epsilon,
    delta_epsilon,
    optimize_time,
    ratio,
)

__version__ = "0.1.0"
