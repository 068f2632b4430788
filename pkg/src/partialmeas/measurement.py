"""Two-outcome generalized partial measurements.

A measurement is fixed by the switching probabilities ``p`` (from ``|1>``)
and ``q`` (from ``|0>``). Along the z axis the Kraus operators are

    M_m    = sqrt(1-q)|0><0| + sqrt(1-p)|1><1|
    M_mbar = sqrt(q)|0><0|   + sqrt(p)|1><1|

and along any other axis they are conjugated by the rotation that maps the
computational basis onto the axis eigenbasis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    EPS_ZERO,
    Z_AXIS,
    Direction,
    PureState,
    op_adjoint,
    rotation_matrices,
)
from .errors import InvalidProbability, ZeroProbabilityOutcome


class Outcome(enum.Enum):
    """``M``: no switching event. ``MBAR``: the detector switched."""

    M = "m"
    MBAR = "mbar"

    @property
    def other(self) -> "Outcome":
        return Outcome.MBAR if self is Outcome.M else Outcome.M


@dataclass(frozen=True, eq=False)
class MeasurementPair:
    p: float
    q: float
    direction: Direction
    m: np.ndarray = field(repr=False)
    mbar: np.ndarray = field(repr=False)

    def kraus(self, outcome: Outcome) -> np.ndarray:
        return self.m if outcome is Outcome.M else self.mbar

    def effect(self, outcome: Outcome) -> np.ndarray:
        k = self.kraus(outcome)
        return op_adjoint(k) @ k

    def completeness_error(self) -> float:
        total = self.effect(Outcome.M) + self.effect(Outcome.MBAR)
        return float(np.max(np.abs(total - np.eye(2))))


def check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise InvalidProbability(f"{name}={value!r} is outside [0, 1]")
    return value


def kraus_along(p, q, chi, psi) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Kraus pair along ``(chi, psi)``; all inputs broadcast.

    Returns arrays of shape ``(..., 2, 2)`` for ``M_m`` and ``M_mbar``.
    """
    p, q, chi, psi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, q, chi, psi)))
    r = rotation_matrices(chi, psi)
    r_dag = op_adjoint(r)
    m_z = np.zeros(p.shape + (2, 2), dtype=complex)
    mbar_z = np.zeros(p.shape + (2, 2), dtype=complex)
    m_z[..., 0, 0] = np.sqrt(1 - q)
    m_z[..., 1, 1] = np.sqrt(1 - p)
    mbar_z[..., 0, 0] = np.sqrt(q)
    mbar_z[..., 1, 1] = np.sqrt(p)
    return r @ m_z @ r_dag, r @ mbar_z @ r_dag


def build_measurement(p: float, q: float) -> MeasurementPair:
    """Measurement along z with the diagonal operators placed exactly."""
    p = check_probability("p", p)
    q = check_probability("q", q)
    m = np.diag([math.sqrt(1 - q), math.sqrt(1 - p)]).astype(complex)
    mbar = np.diag([math.sqrt(q), math.sqrt(p)]).astype(complex)
    return MeasurementPair(p, q, Z_AXIS, m, mbar)


def build_measurement_along(p: float, q: float, n: Direction) -> MeasurementPair:
    """Measurement whose effects are diagonal in the eigenbasis of ``n . sigma``.

    ``|+>_n`` plays the role of ``|0>`` (switches with probability ``q``)
    and ``|->_n`` the role of ``|1>``.
    """
    p = check_probability("p", p)
    q = check_probability("q", q)
    m, mbar = kraus_along(p, q, n.chi, n.psi)
    return MeasurementPair(p, q, n, m, mbar)


def outcome_probabilities(state: PureState, meas: MeasurementPair) -> tuple[float, float]:
    """Born-rule probabilities ``(P_m, P_mbar)``."""
    v = state.vector
    p_m = float(np.vdot(v, meas.effect(Outcome.M) @ v).real)
    p_mbar = float(np.vdot(v, meas.effect(Outcome.MBAR) @ v).real)
    return p_m, p_mbar


def post_measurement_state(state: PureState, meas: MeasurementPair, outcome: Outcome) -> PureState:
    """``M_x|psi> / sqrt(P_x)``, without re-phasing."""
    w = meas.kraus(outcome) @ state.vector
    prob = float(np.vdot(w, w).real)
    if prob <= EPS_ZERO:
        raise ZeroProbabilityOutcome(f"P({outcome.value}) = {prob:.3e}")
    w = w / math.sqrt(prob)
    return PureState(complex(w[0]), complex(w[1]))


def sample_outcome(state: PureState, meas: MeasurementPair, rng: np.random.Generator) -> Outcome:
    """Draw one outcome, consuming exactly one uniform variate from ``rng``."""
    _, p_mbar = outcome_probabilities(state, meas)
    return Outcome.MBAR if rng.random() < p_mbar else Outcome.M


def sample_counts(p_mbar: float, n: int, rng: np.random.Generator) -> int:
    """Number of ``mbar`` results among ``n`` draws, one uniform per draw.

    Matches ``n`` successive calls of :func:`sample_outcome` on the same stream.
    """
    return int(np.count_nonzero(rng.random(n) < p_mbar))
