import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from partialmeas.algebra import (
    EPS_EXACT,
    I2,
    X_AXIS,
    Z_AXIS,
    Direction,
    PureState,
    fidelity,
    max_abs,
    op_adjoint,
    rotation_for_direction,
    state_from_angles,
)
from partialmeas.errors import InvalidProbability, ZeroProbabilityOutcome
from partialmeas.measurement import (
    Outcome,
    build_measurement,
    build_measurement_along,
    kraus_along,
    outcome_probabilities,
    post_measurement_state,
    sample_counts,
    sample_outcome,
)
from partialmeas.montecarlo import make_rng

from conftest import random_direction, random_state

prob = st.floats(0, 1)


def test_endpoints():
    m = build_measurement(0, 0)
    assert np.array_equal(m.m, I2) and not m.mbar.any()
    m = build_measurement(1, 1)
    assert np.array_equal(m.mbar, I2) and not m.m.any()


def test_z_pair_is_exactly_diagonal():
    p, q = 0.7, 0.3
    m = build_measurement(p, q)
    assert np.array_equal(m.m, np.diag([math.sqrt(1 - q), math.sqrt(1 - p)]))
    assert np.array_equal(m.mbar, np.diag([math.sqrt(q), math.sqrt(p)]))


@pytest.mark.parametrize("p,q", [(-0.1, 0.5), (0.5, 1.01), (float("nan"), 0.2)])
def test_rejects_out_of_range(p, q):
    with pytest.raises(InvalidProbability):
        build_measurement(p, q)
    with pytest.raises(InvalidProbability):
        build_measurement_along(p, q, X_AXIS)


@given(p=prob, q=prob, chi=st.floats(0, math.pi), psi=st.floats(0, 2 * math.pi))
def test_completeness_and_positivity(p, q, chi, psi):
    meas = build_measurement_along(p, q, Direction(chi, psi))
    assert meas.completeness_error() < 1e-14
    for x in Outcome:
        assert np.linalg.eigvalsh(meas.effect(x)).min() >= -1e-14


def test_along_z_equals_z_pair():
    a = build_measurement_along(0.37, 0.81, Z_AXIS)
    b = build_measurement(0.37, 0.81)
    assert max_abs(a.m - b.m) < 1e-14 and max_abs(a.mbar - b.mbar) < 1e-14


@given(p=prob, q=prob, chi=st.floats(0, math.pi), psi=st.floats(0, 2 * math.pi))
def test_effects_diagonal_in_axis_eigenbasis(p, q, chi, psi):
    n = Direction(chi, psi)
    meas = build_measurement_along(p, q, n)
    r = rotation_for_direction(n)
    plus, minus = r[:, 0], r[:, 1]
    em = meas.effect(Outcome.M)
    assert max_abs(em @ plus - (1 - q) * plus) < EPS_EXACT
    assert max_abs(em @ minus - (1 - p) * minus) < EPS_EXACT


def test_x_axis_plus_state_switches_with_q():
    plus = PureState.from_vector([1, 1])
    for p, q in [(0.3, 0.2), (0.9, 0.05), (0.0, 1.0)]:
        _, p_mbar = outcome_probabilities(plus, build_measurement_along(p, q, X_AXIS))
        assert p_mbar == pytest.approx(q, abs=1e-12)


def test_probabilities_along_z():
    for p, q in [(0.3, 0.2), (0.8, 0.1)]:
        meas = build_measurement(p, q)
        assert outcome_probabilities(state_from_angles(0, 0), meas)[1] == pytest.approx(q, abs=1e-15)
        assert outcome_probabilities(state_from_angles(math.pi, 0), meas)[1] == pytest.approx(p, abs=1e-15)
        for theta in np.linspace(0, math.pi, 7):
            _, p_mbar = outcome_probabilities(state_from_angles(theta, 0.4), meas)
            expect = q * math.cos(theta / 2) ** 2 + p * math.sin(theta / 2) ** 2
            assert p_mbar == pytest.approx(expect, abs=EPS_EXACT)


def test_half_half_is_state_independent(rng):
    meas = build_measurement_along(0.5, 0.5, random_direction(rng))
    for _ in range(20):
        pm, pb = outcome_probabilities(random_state(rng), meas)
        assert pm == pytest.approx(0.5, abs=1e-14) and pb == pytest.approx(0.5, abs=1e-14)


def test_conservation_and_rotation_covariance(rng):
    for _ in range(1000):
        s, n = random_state(rng), random_direction(rng)
        p, q = rng.uniform(0, 1, 2)
        pm, pb = outcome_probabilities(s, build_measurement_along(p, q, n))
        assert abs(pm + pb - 1) < EPS_EXACT
        r = rotation_for_direction(n)
        back = PureState(*(op_adjoint(r) @ s.vector))
        pm_z, pb_z = outcome_probabilities(back, build_measurement(p, q))
        assert abs(pm - pm_z) < EPS_EXACT and abs(pb - pb_z) < EPS_EXACT


def test_post_measurement_states():
    s = state_from_angles(1.0, 0.3)
    meas = build_measurement(0.4, 0.4)
    for x in Outcome:
        assert fidelity(post_measurement_state(s, meas, x), s) == pytest.approx(1, abs=EPS_EXACT)

    out = post_measurement_state(state_from_angles(math.pi / 2, 0), build_measurement(1, 0), Outcome.M)
    assert fidelity(out, PureState(1, 0)) == pytest.approx(1, abs=EPS_EXACT)

    theta, phi = math.pi / 3, 0.7
    out = post_measurement_state(state_from_angles(theta, phi), build_measurement(0.8, 0.1), Outcome.MBAR)
    # mpmath evaluation of (sqrt(q) cos(theta/2), sqrt(p) sin(theta/2)) normalized
    assert abs(out.amp0) == pytest.approx(0.522232967867093514, abs=1e-12)
    assert abs(out.amp1) == pytest.approx(0.852802865422441737, abs=1e-12)
    assert np.angle(out.amp1 / out.amp0) == pytest.approx(phi, abs=1e-12)


def test_post_measurement_unit_norm(rng):
    for _ in range(200):
        meas = build_measurement_along(*rng.uniform(0, 1, 2), random_direction(rng))
        s = random_state(rng)
        for x in Outcome:
            try:
                out = post_measurement_state(s, meas, x)
            except ZeroProbabilityOutcome:
                continue
            assert abs(out.norm() - 1) < EPS_EXACT


def test_zero_probability_outcome():
    with pytest.raises(ZeroProbabilityOutcome):
        post_measurement_state(PureState(1, 0), build_measurement(1, 0), Outcome.MBAR)


def test_sampling_certain_outcome():
    rng = make_rng(0)
    meas = build_measurement(1, 0)
    assert all(sample_outcome(PureState(1, 0), meas, rng) is Outcome.M for _ in range(1000))


def test_sampling_half_half_frequency():
    rng = make_rng(42)
    n = 100_000
    k = sample_counts(0.5, n, rng)
    assert abs(k / n - 0.5) < 5 * math.sqrt(0.25 / n)


def test_sampling_is_deterministic_and_uses_one_uniform():
    s = state_from_angles(1.2, 0.5)
    meas = build_measurement(0.3, 0.7)
    a = [sample_outcome(s, meas, make_rng(42)) for _ in range(3)]
    rng1, rng2 = make_rng(42), make_rng(42)
    seq1 = [sample_outcome(s, meas, rng1) for _ in range(500)]
    seq2 = [sample_outcome(s, meas, rng2) for _ in range(500)]
    assert seq1 == seq2 and len(set(a)) == 1
    # Batched counting consumes the stream in the same way.
    pb = outcome_probabilities(s, meas)[1]
    assert sample_counts(pb, 500, make_rng(42)) == sum(x is Outcome.MBAR for x in seq1)
    rng3 = make_rng(42)
    for _ in range(500):
        sample_outcome(s, meas, rng3)
    assert rng3.random() == rng1.random()


@pytest.mark.slow
def test_empirical_frequency_converges(rng):
    n = 1_000_000
    for _ in range(3):
        s = random_state(rng)
        meas = build_measurement(*rng.uniform(0.05, 0.95, 2))
        pb = outcome_probabilities(s, meas)[1]
        k = sample_counts(pb, n, make_rng(int(rng.integers(2**32))))
        assert abs(k / n - pb) < 5 * math.sqrt(pb * (1 - pb) / n)


def test_vectorized_kraus_matches_single(rng):
    p, q = rng.uniform(0, 1, (2, 5))
    n = [random_direction(rng) for _ in range(5)]
    m, mbar = kraus_along(p, q, [d.chi for d in n], [d.psi for d in n])
    for i in range(5):
        single = build_measurement_along(p[i], q[i], n[i])
        assert max_abs(m[i] - single.m) == 0 and max_abs(mbar[i] - single.mbar) == 0
