"""Two-qubit (system + ancilla) realizations of the measurement.

Basis order is ``|0,m>, |0,mbar>, |1,m>, |1,mbar>``: the measured qubit is
the left tensor factor and the ancilla (``m`` = index 0) the right one. The
ancilla starts in ``|m>``; a projective ancilla readout after the coupling
unitary realizes the Kraus pair ``(M_m, M_mbar)`` on the qubit.

Units use hbar = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    I2,
    I4,
    P0,
    P1,
    PureState,
    X,
    Y,
    Z,
    expm_series,
    global_phase_distance,
    max_abs,
    op_adjoint,
)
from .measurement import Outcome, build_measurement, check_probability

# Phase gate diag(1, i) on the ancilla. The double-well coupling exp(-i a X)
# and the Y-rotation coupling exp(i a Y) differ exactly by this frame change,
# which commutes with the ancilla readout.
ANCILLA_PHASE = np.kron(I2, np.diag([1.0, 1j]))


@dataclass(frozen=True, eq=False)
class DilationUnitary:
    u: np.ndarray
    p: float
    q: float


@dataclass(frozen=True)
class DoubleWellParams:
    nu: float
    t0: float
    t1: float
    tau: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be non-negative")


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    matrix: np.ndarray


def ancilla_rotation(prob: float) -> np.ndarray:
    """``sqrt(1-prob) I + i sqrt(prob) Y``."""
    return math.sqrt(1 - prob) * I2 + 1j * math.sqrt(prob) * Y


def controlled(u: np.ndarray) -> np.ndarray:
    """Apply ``u`` to the ancilla when the system qubit is ``|1>``."""
    return np.kron(P0, I2) + np.kron(P1, u)


def build_naimark_unitary(p: float, q: float) -> DilationUnitary:
    p = check_probability("p", p)
    q = check_probability("q", q)
    u = np.kron(P0, ancilla_rotation(q)) + np.kron(P1, ancilla_rotation(p))
    return DilationUnitary(u, p, q)


def extract_kraus(d: DilationUnitary, outcome: Outcome) -> np.ndarray:
    """``(I x <x|) U (I x |m>)`` for ancilla result ``x``."""
    row = 0 if outcome is Outcome.M else 1
    return d.u[row::2, 0::2].copy()


def gate_decomposition(p: float, q: float) -> list[Gate]:
    """Gates in application order; their product equals the Naimark unitary.

    Sandwiching ``C(U_q)`` between ``X`` gates on the system turns it into a
    control-on-``|0>`` gate.
    """
    p = check_probability("p", p)
    q = check_probability("q", q)
    flip = np.kron(X, I2)
    return [
        Gate("X(x)I", flip),
        Gate("C(U_q)", controlled(ancilla_rotation(q))),
        Gate("X(x)I", flip),
        Gate("C(U_p)", controlled(ancilla_rotation(p))),
    ]


def circuit_unitary(gates: list[Gate]) -> np.ndarray:
    out = I4.copy()
    for g in gates:
        out = g.matrix @ out
    return out


def doublewell_hamiltonian(params: DoubleWellParams) -> np.ndarray:
    """Qubit splitting plus state-dependent tunneling between the wells.

    ``t0`` and ``t1`` are tunnel splittings, so the off-diagonal coupling is
    ``t/2``; with this convention the switching probabilities are
    ``sin^2(t tau / 2)``.
    """
    return (
        -params.nu / 2 * np.kron(Z, I2)
        + params.t0 / 2 * np.kron(P0, X)
        + params.t1 / 2 * np.kron(P1, X)
    )


def _exp_ix_block(a: float, b: float, tau: float) -> np.ndarray:
    """``exp(-i (a I + b X) tau)`` in closed form."""
    return np.exp(-1j * a * tau) * (math.cos(b * tau) * I2 - 1j * math.sin(b * tau) * X)


def lab_propagator(params: DoubleWellParams) -> np.ndarray:
    """``exp(-i H tau)`` assembled from its two 2x2 blocks."""
    nu, tau = params.nu, params.tau
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2] = _exp_ix_block(-nu / 2, params.t0 / 2, tau)
    u[2:, 2:] = _exp_ix_block(nu / 2, params.t1 / 2, tau)
    return u


def rotating_frame(params: DoubleWellParams) -> np.ndarray:
    """``exp(-i nu tau Z (x) I / 2)``, removing the free qubit precession."""
    phase = np.exp(-0.5j * params.nu * params.tau)
    return np.diag([phase, phase, phase.conjugate(), phase.conjugate()])


def doublewell_propagator(params: DoubleWellParams) -> DilationUnitary:
    """Rotating-frame evolution operator of the double-well pulse.

    The effective switching probabilities are read off the diagonal blocks.
    """
    u = rotating_frame(params) @ lab_propagator(params)
    q = math.sin(params.t0 * params.tau / 2) ** 2
    p = math.sin(params.t1 * params.tau / 2) ** 2
    return DilationUnitary(u, p, q)


def doublewell_series(params: DoubleWellParams) -> np.ndarray:
    """Same operator as :func:`doublewell_propagator` via generic series exponentials."""
    h = doublewell_hamiltonian(params)
    frame = expm_series(-0.5j * params.nu * params.tau * np.kron(Z, I2))
    return frame @ expm_series(-1j * h * params.tau)


def pulse_params(p_target: float, q_target: float, tau: float) -> tuple[float, float]:
    """Tunnel splittings ``(t0, t1)`` producing ``(q, p)`` in a pulse of length ``tau``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    p_target = check_probability("p", p_target)
    q_target = check_probability("q", q_target)
    t0 = 2.0 / tau * math.asin(math.sqrt(q_target))
    t1 = 2.0 / tau * math.asin(math.sqrt(p_target))
    return t0, t1


def born_probabilities(state: PureState, d: DilationUnitary) -> tuple[float, float]:
    """Ancilla readout probabilities ``(P_m, P_mbar)`` after the coupling."""
    out = d.u @ np.kron(state.vector, np.array([1.0, 0.0]))
    return float(np.sum(np.abs(out[0::2]) ** 2)), float(np.sum(np.abs(out[1::2]) ** 2))


def kraus_deviation(d: DilationUnitary, p: float, q: float) -> float:
    """Worst per-outcome distance, up to phase, from the z-axis Kraus pair."""
    ref = build_measurement(p, q)
    return max(
        global_phase_distance(extract_kraus(d, x), ref.kraus(x)) for x in Outcome
    )


def completeness_deviation(d: DilationUnitary) -> float:
    km, kb = extract_kraus(d, Outcome.M), extract_kraus(d, Outcome.MBAR)
    return max_abs(op_adjoint(km) @ km + op_adjoint(kb) @ kb - I2)


def dilation_report(
    p: float, q: float, tau: float = 1.0, nu: float = 10.0, corrupt: bool = False
) -> dict[str, float]:
    """Max deviations for every consistency check of the three constructions.

    ``corrupt`` negates the controlled block of ``C(U_q)`` in the gate
    circuit, a deliberate fault used to exercise the failure path.
    """
    naimark = build_naimark_unitary(p, q)
    gates = gate_decomposition(p, q)
    if corrupt:
        bad = np.kron(P0, I2) - np.kron(P1, ancilla_rotation(q))
        gates[1] = Gate("C(U_q)*", bad)
    product = circuit_unitary(gates)
    t0, t1 = pulse_params(p, q, tau)
    params = DoubleWellParams(nu, t0, t1, tau)
    well = doublewell_propagator(params)
    return {
        "unitarity": max(
            max_abs(op_adjoint(m) @ m - I4) for m in (naimark.u, product, well.u)
        ),
        "kraus_naimark": kraus_deviation(naimark, p, q),
        "kraus_gates": kraus_deviation(DilationUnitary(product, p, q), p, q),
        "kraus_doublewell": kraus_deviation(well, p, q),
        "gates_vs_naimark": global_phase_distance(product, naimark.u),
        "doublewell_vs_naimark": global_phase_distance(
            well.u, ANCILLA_PHASE @ naimark.u @ op_adjoint(ANCILLA_PHASE)
        ),
        "doublewell_vs_series": max_abs(well.u - doublewell_series(params)),
        "completeness": max(
            completeness_deviation(x) for x in (naimark, well, DilationUnitary(product, p, q))
        ),
    }
