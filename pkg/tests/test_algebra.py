import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from partialmeas.algebra import (
    EPS_EXACT,
    I2,
    X,
    Y,
    Z,
    Direction,
    PureState,
    expm_series,
    fidelity,
    global_phase_distance,
    is_unitary,
    max_abs,
    op_inverse,
    rotation_for_direction,
    state_from_angles,
)
from partialmeas.errors import SingularOperator
from partialmeas.measurement import build_measurement

from conftest import random_direction

angles = st.floats(0, 2 * math.pi, allow_nan=False)
polar = st.floats(0, math.pi, allow_nan=False)


def test_state_from_angles_poles_and_equator():
    s = state_from_angles(0.0, 1.234)
    assert (s.amp0, s.amp1) == (1, 0)
    s = state_from_angles(math.pi, 0.0)
    assert abs(s.amp0) < 1e-16 and s.amp1 == pytest.approx(1)
    s = state_from_angles(math.pi / 2, math.pi / 2)
    assert s.amp0 == pytest.approx(1 / math.sqrt(2))
    assert s.amp1 == pytest.approx(1j / math.sqrt(2))


@given(theta=st.floats(1e-6, math.pi - 1e-6), phi=st.floats(0, 2 * math.pi - 1e-9))
def test_angles_roundtrip(theta, phi):
    s = state_from_angles(theta, phi)
    assert abs(s.norm() - 1) < EPS_EXACT
    t, f = s.angles()
    assert t == pytest.approx(theta, abs=1e-12)
    assert abs(cmath.exp(1j * f) - cmath.exp(1j * phi)) < 1e-11


def test_angles_at_poles_report_zero_phi():
    assert PureState(1, 0).angles() == (0.0, 0.0)
    assert PureState(0, 1j).angles() == (math.pi, 0.0)


def test_rotation_for_z_is_identity():
    assert np.array_equal(rotation_for_direction(Direction(0.0, 0.0)), I2)


def test_rotation_for_x_axis():
    r = rotation_for_direction(Direction(math.pi / 2, 0.0))
    plus = np.array([1, 1]) / math.sqrt(2)
    assert abs(abs(np.vdot(plus, r[:, 0])) - 1) < EPS_EXACT


@given(chi=polar, psi=angles)
def test_rotation_maps_basis_onto_axis_eigenvectors(chi, psi):
    n = Direction(chi, psi)
    r = rotation_for_direction(n)
    sigma = n.sigma()
    assert is_unitary(r)
    assert max_abs(sigma @ r[:, 0] - r[:, 0]) < EPS_EXACT
    assert max_abs(sigma @ r[:, 1] + r[:, 1]) < EPS_EXACT
    assert abs(np.linalg.norm(n.vector) - 1) < 1e-14
    assert np.allclose(np.linalg.eigvalsh(sigma), [-1, 1], atol=EPS_EXACT)


def test_direction_uses_standard_y_component():
    n = Direction(math.pi / 2, math.pi / 2)
    assert np.allclose(n.vector, [0, 1, 0], atol=1e-15)
    assert max_abs(n.sigma() - Y) < 1e-15


def test_pauli_involution_and_inverse():
    assert np.array_equal(X @ X, I2)
    m = build_measurement(0.3, 0.2).m
    assert max_abs(op_inverse(m) @ m - I2) < EPS_EXACT
    assert not is_unitary(m)
    with pytest.raises(SingularOperator):
        op_inverse(build_measurement(1.0, 0.2).m)


def test_fidelity_basics(rng):
    zero, one = PureState(1, 0), PureState(0, 1)
    assert fidelity(zero, zero) == 1
    assert fidelity(zero, one) == 0
    s = state_from_angles(1.1, 2.3)
    for gamma in rng.uniform(0, 2 * math.pi, 10):
        ph = cmath.exp(1j * gamma)
        t = PureState(ph * s.amp0, ph * s.amp1)
        assert fidelity(s, t) == pytest.approx(1, abs=1e-14)
        assert fidelity(s, t) == fidelity(t, s)


def test_global_phase_distance():
    a = np.array([[1, 2j], [0.5, -1]], dtype=complex)
    assert global_phase_distance(a, 1j * a) < 1e-15
    assert global_phase_distance(a, a.conj()) > 0.1


@settings(max_examples=50)
@given(st.lists(st.floats(-5, 5), min_size=16, max_size=16))
def test_series_exponential_matches_scipy(vals):
    a = (np.array(vals[:8]) + 1j * np.array(vals[8:])).reshape(2, 4)
    a = np.vstack([a, a[::-1] * 0.5])
    assert max_abs(expm_series(a) - expm(a)) < 1e-10 * max(1.0, max_abs(expm(a)))


def test_series_exponential_of_pauli():
    t = 0.731
    assert max_abs(expm_series(-1j * t * Z) - np.diag([cmath.exp(-1j * t), cmath.exp(1j * t)])) < 1e-14


def test_random_directions_unit_norm(rng):
    for _ in range(100):
        assert abs(np.linalg.norm(random_direction(rng).vector) - 1) < 1e-14
