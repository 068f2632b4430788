"""Probabilistic reversal of generalized partial measurements.

After a first result ``x`` the protocol applies ``X``, measures again and,
if the same result ``x`` occurs, applies ``X`` once more. Because
``X M_x X M_x`` is proportional to the identity, the input state is then
restored exactly. The total success probability ``(1-p)(1-q) + pq`` does not
depend on the input state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import montecarlo
from .algebra import (
    EPS_EXACT,
    EPS_ZERO,
    PureState,
    X,
    op_adjoint,
    rotation_for_direction,
    rz,
    ry,
    state_from_angles,
)
from .errors import NonInvertibleMeasurement, ZeroProbabilityOutcome
from .measurement import (
    MeasurementPair,
    Outcome,
    build_measurement,
    check_probability,
    outcome_probabilities,
    post_measurement_state,
    sample_outcome,
)

PATHS = [(a, b) for a in Outcome for b in Outcome]

# Refinement steps must beat the incumbent by more than rounding noise.
IMPROVE_MARGIN = 1e-15


@dataclass(frozen=True)
class ReversalRecord:
    first_outcome: Outcome
    second_outcome: Outcome
    success: bool
    final_state: PureState
    path_probability: float


@dataclass
class ReversalSummary:
    """Aggregate of many protocol runs on one input state.

    The final state of a run is fully determined by its outcome path, so
    ``final_states`` holds one state per path that occurred.
    """

    p: float
    q: float
    seed: int
    trials: int
    path_counts: dict = field(default_factory=dict)
    final_states: dict = field(default_factory=dict)

    @property
    def successes(self) -> int:
        return sum(n for (a, b), n in self.path_counts.items() if a is b)

    @property
    def empirical_rate(self) -> float:
        return self.successes / self.trials

    @property
    def exact_rate(self) -> float:
        return reversal_success_probability(self.p, self.q)


def _require_invertible(p: float, q: float) -> None:
    for name, v in (("p", p), ("q", q)):
        if min(abs(v), abs(1 - v)) <= EPS_EXACT:
            raise NonInvertibleMeasurement(f"{name}={v} is at an endpoint; M_m or M_mbar is singular")


def inverse_operator(meas: MeasurementPair, outcome: Outcome) -> np.ndarray:
    """Closed-form inverse ``X M_x X / sqrt(det)`` in the frame of the pair's axis."""
    p, q = meas.p, meas.q
    _require_invertible(p, q)
    z = build_measurement(p, q)
    if outcome is Outcome.M:
        inv_z = X @ z.m @ X / math.sqrt((1 - p) * (1 - q))
    else:
        inv_z = X @ z.mbar @ X / math.sqrt(p * q)
    r = rotation_for_direction(meas.direction)
    return r @ inv_z @ op_adjoint(r)


def reversal_success_probability(p: float, q: float) -> float:
    p = check_probability("p", p)
    q = check_probability("q", q)
    return (1 - p) * (1 - q) + p * q


def _path_vector(state: PureState, meas: MeasurementPair, first: Outcome, second: Outcome) -> np.ndarray:
    """Unnormalized ``M_second X M_first |psi>``."""
    return meas.kraus(second) @ (X @ (meas.kraus(first) @ state.vector))


def path_probabilities(state: PureState, p: float, q: float) -> dict:
    """Probability of each two-step outcome path of the protocol."""
    meas = build_measurement(p, q)
    out = {}
    for a, b in PATHS:
        w = _path_vector(state, meas, a, b)
        out[(a, b)] = float(np.vdot(w, w).real)
    return out


def _finish(state: PureState, meas: MeasurementPair, first: Outcome, second: Outcome) -> PureState:
    after = post_measurement_state(state, meas, first)
    flipped = PureState(*(X @ after.vector))
    after = post_measurement_state(flipped, meas, second)
    if first is second:
        after = PureState(*(X @ after.vector))
    return after


def run_reversal(state: PureState, p: float, q: float, rng: np.random.Generator) -> ReversalRecord:
    """One run of the measure / X / measure / X protocol."""
    p = check_probability("p", p)
    q = check_probability("q", q)
    _require_invertible(p, q)
    meas = build_measurement(p, q)
    first = sample_outcome(state, meas, rng)
    s1 = post_measurement_state(state, meas, first)
    s1 = PureState(*(X @ s1.vector))
    second = sample_outcome(s1, meas, rng)
    s2 = post_measurement_state(s1, meas, second)
    success = first is second
    if success:
        s2 = PureState(*(X @ s2.vector))
    w = _path_vector(state, meas, first, second)
    return ReversalRecord(first, second, success, s2, float(np.vdot(w, w).real))


def reversal_monte_carlo(
    state: PureState,
    p: float,
    q: float,
    trials: int,
    seed: int,
    workers: int = 1,
) -> ReversalSummary:
    """Vectorized equivalent of ``trials`` calls to :func:`run_reversal`.

    Each trial consumes two uniforms, in the same order as the scalar
    protocol, from the chunk stream that owns its trial index.
    """
    p = check_probability("p", p)
    q = check_probability("q", q)
    _require_invertible(p, q)
    meas = build_measurement(p, q)
    # Same thresholds the scalar protocol computes from its intermediate states.
    _, p_first_mbar = outcome_probabilities(state, meas)
    cond = {}
    for a in Outcome:
        try:
            s1 = post_measurement_state(state, meas, a)
        except ZeroProbabilityOutcome:
            cond[a] = 0.0
            continue
        cond[a] = outcome_probabilities(PureState(*(X @ s1.vector)), meas)[1]

    def work(rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random((n, 2))
        first_bar = u[:, 0] < p_first_mbar
        second_bar = np.where(first_bar, u[:, 1] < cond[Outcome.MBAR], u[:, 1] < cond[Outcome.M])
        code = 2 * first_bar.astype(np.int64) + second_bar
        return np.bincount(code, minlength=4)

    counts = sum(montecarlo.map_chunks(work, seed, trials, workers))
    summary = ReversalSummary(p, q, seed, trials)
    for code, (a, b) in enumerate(PATHS):
        n = int(counts[code])
        summary.path_counts[(a, b)] = n
        if n:
            summary.final_states[(a, b)] = _finish(state, meas, a, b)
    return summary


def fail_path_state(state: PureState, p: float, q: float, first: Outcome = Outcome.M) -> PureState:
    """Normalized state left by a failed reversal whose first result was ``first``.

    The default ``m -> mbar`` path gives ``M_mbar X M_m |psi>``, proportional to
    ``sin(theta/2) e^{i phi} sqrt(q(1-p)) |0> + cos(theta/2) sqrt(p(1-q)) |1>``.
    The ``mbar -> m`` path swaps the two square roots, so the two fail states
    coincide only when ``p == q``.
    """
    meas = build_measurement(p, q)
    w = _path_vector(state, meas, first, first.other)
    prob = float(np.vdot(w, w).real)
    if prob <= EPS_ZERO:
        raise ZeroProbabilityOutcome(f"fail-path amplitude vanishes (|w|^2 = {prob:.3e})")
    return PureState.from_vector(w)


def fibonacci_states(n: int) -> list[PureState]:
    """``n`` near-uniform points on the Bloch sphere plus both poles."""
    golden = math.pi * (3 - math.sqrt(5))
    states = [state_from_angles(0.0, 0.0), state_from_angles(math.pi, 0.0)]
    for i in range(n):
        z = 1 - 2 * (i + 0.5) / n
        states.append(state_from_angles(math.acos(z), (i * golden) % (2 * math.pi)))
    return states


def correction_unitaries(alpha, beta, gamma) -> np.ndarray:
    """Batched ``Rz(alpha) Ry(beta) Rz(gamma) X``."""
    return rz(alpha) @ ry(beta) @ rz(gamma) @ X


def _worst_fidelity(angles: np.ndarray, fails: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Minimum over states of ``|<psi|C fail>|^2`` for each row of ``angles``."""
    c = correction_unitaries(angles[:, 0], angles[:, 1], angles[:, 2])
    corrected = np.einsum("gij,sj->gsi", c, fails)
    overlaps = np.einsum("si,gsi->gs", targets.conj(), corrected)
    return np.min(np.abs(overlaps) ** 2, axis=1)


def _wrap(a: np.ndarray) -> np.ndarray:
    return (a + math.pi) % (2 * math.pi) - math.pi


def _refine_epigraph(x0: np.ndarray, fails: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Maximize ``t`` subject to every state's recovery fidelity ``>= t`` (SLSQP)."""

    def fids(x):
        c = correction_unitaries(x[0], x[1], x[2])
        return np.abs(np.einsum("si,ij,sj->s", targets.conj(), c, fails)) ** 2

    t0 = float(fids(x0).min())
    res = minimize(
        lambda z: -z[3],
        np.append(x0, t0),
        jac=lambda z: np.array([0.0, 0.0, 0.0, -1.0]),
        constraints=[{"type": "ineq", "fun": lambda z: fids(z[:3]) - z[3]}],
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 500},
    )
    return res.x[:3]


def deterministic_reversal_search(
    p: float, q: float, n_states: int = 64, grid: int = 32, min_step: float = 1e-8, n_refine: int = 8
) -> tuple[tuple[float, float, float], float]:
    """Best single unitary correction for the failed path, judged by worst case.

    The correction is ``Rz(alpha) Ry(beta) Rz(gamma)`` applied after an ``X``
    gate, so ``(0, 0, 0)`` is the plain ``X`` completion that works at
    ``p == q``. Maximizes the minimum recovery fidelity over a fixed
    Fibonacci-sphere state sample: a ``grid**3`` scan, epigraph-form SLSQP
    from the ``n_refine`` best grid points, then coordinate descent down to
    ``min_step``.
    """
    if n_states < 16:
        raise ValueError("n_states must be at least 16")
    states = fibonacci_states(n_states)
    targets = np.array([s.vector for s in states])
    fails = np.array([fail_path_state(s, p, q).vector for s in states])

    axis = np.arange(grid) * (2 * math.pi / grid)
    mesh = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    scores = np.concatenate(
        [_worst_fidelity(mesh[i : i + 4096], fails, targets) for i in range(0, len(mesh), 4096)]
    )
    # Ties (e.g. alpha + gamma = 0 at beta = 0) resolve toward the origin.
    near = np.flatnonzero(scores >= scores.max() - EPS_EXACT)
    k = near[np.argmin(np.linalg.norm(_wrap(mesh[near]), axis=1))]
    best, best_score = mesh[k].copy(), float(scores[k])

    for idx in np.argsort(-scores, kind="stable")[:n_refine]:
        x = _refine_epigraph(mesh[idx], fails, targets)
        val = float(_worst_fidelity(x[None, :], fails, targets)[0])
        if val > best_score + IMPROVE_MARGIN:
            best, best_score = x, val

    step = 2 * math.pi / grid
    while step >= min_step:
        improved = False
        for k in range(3):
            trial = np.array([best, best])
            trial[0, k] += step
            trial[1, k] -= step
            vals = _worst_fidelity(trial, fails, targets)
            j = int(np.argmax(vals))
            if vals[j] > best_score + IMPROVE_MARGIN:
                best, best_score, improved = trial[j], float(vals[j]), True
        if not improved:
            step /= 2
    best = best % (2 * math.pi)
    return (float(best[0]), float(best[1]), float(best[2])), best_score
