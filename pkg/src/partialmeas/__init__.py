"""Simulation of generalized partial measurements on a qubit.

Measurement construction and sampling, probabilistic reversal, Fisher
information and tomography, and two-qubit dilations of the measurement.
"""

__version__ = "0.1.0"

from .algebra import Direction, PureState, fidelity, state_from_angles
from .measurement import (
    MeasurementPair,
    Outcome,
    build_measurement,
    build_measurement_along,
    outcome_probabilities,
    post_measurement_state,
    sample_outcome,
)

__all__ = [
    "Direction",
    "MeasurementPair",
    "Outcome",
    "PureState",
    "build_measurement",
    "build_measurement_along",
    "fidelity",
    "outcome_probabilities",
    "post_measurement_state",
    "sample_outcome",
    "state_from_angles",
]
