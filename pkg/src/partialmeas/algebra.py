"""Small complex operator algebra for one and two qubits.

Operators are plain ``numpy`` arrays of shape ``(2, 2)`` (one qubit) or
``(4, 4)`` (qubit plus ancilla, basis order ``|0,m>, |0,mbar>, |1,m>,
|1,mbar>``). States are immutable :class:`PureState` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularOperator

# Algebraic identities (single products of exact-ish entries).
EPS_EXACT = 1e-12
# Composed numerics (several products, normalizations, optimizers).
EPS_NUM = 1e-10
# Below this a probability or determinant is treated as an exact zero.
EPS_ZERO = 1e-14

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I4 = np.eye(4, dtype=complex)

# Projectors onto the computational states of the measured qubit.
P0 = (I2 + Z) / 2
P1 = (I2 - Z) / 2


@dataclass(frozen=True)
class PureState:
    """Normalized qubit state ``amp0 |0> + amp1 |1>``."""

    amp0: complex
    amp1: complex

    @classmethod
    def from_vector(cls, vec, normalize: bool = True) -> "PureState":
        vec = np.asarray(vec, dtype=complex).reshape(2)
        if normalize:
            norm = np.linalg.norm(vec)
            if norm <= EPS_ZERO:
                raise ValueError("cannot normalize the zero vector")
            vec = vec / norm
        return cls(complex(vec[0]), complex(vec[1]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)

    def norm(self) -> float:
        return math.sqrt(abs(self.amp0) ** 2 + abs(self.amp1) ** 2)

    def angles(self) -> tuple[float, float]:
        """Return ``(theta, phi)`` with the global phase removed.

        At the poles ``phi`` is undefined and reported as 0.
        """
        r0, r1 = abs(self.amp0), abs(self.amp1)
        theta = 2.0 * math.atan2(r1, r0)
        if r0 <= EPS_ZERO or r1 <= EPS_ZERO:
            return theta, 0.0
        phi = (np.angle(self.amp1) - np.angle(self.amp0)) % (2 * math.pi)
        return theta, float(phi)

    def bloch(self) -> np.ndarray:
        """Bloch vector ``(<X>, <Y>, <Z>)``."""
        v = self.vector
        return np.real([v.conj() @ P @ v for P in (X, Y, Z)])


@dataclass(frozen=True)
class Direction:
    """Measurement axis on the Bloch sphere, polar angle ``chi`` and azimuth ``psi``."""

    chi: float
    psi: float = 0.0

    @classmethod
    def from_vector(cls, n) -> "Direction":
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        chi = math.acos(max(-1.0, min(1.0, n[2])))
        psi = math.atan2(n[1], n[0]) % (2 * math.pi)
        return cls(chi, psi)

    @property
    def vector(self) -> np.ndarray:
        s = math.sin(self.chi)
        return np.array([s * math.cos(self.psi), s * math.sin(self.psi), math.cos(self.chi)])

    def sigma(self) -> np.ndarray:
        """The spin operator ``n . sigma`` along this axis."""
        nx, ny, nz = self.vector
        return nx * X + ny * Y + nz * Z


Z_AXIS = Direction(0.0, 0.0)
X_AXIS = Direction(math.pi / 2, 0.0)
Y_AXIS = Direction(math.pi / 2, math.pi / 2)


def state_from_angles(theta: float, phi: float) -> PureState:
    """``cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>``."""
    return PureState(complex(math.cos(theta / 2)), complex(np.exp(1j * phi) * math.sin(theta / 2)))


def rz(alpha):
    """``exp(-i alpha Z / 2)``; broadcasts over array input."""
    alpha = np.asarray(alpha, dtype=float)
    out = np.zeros(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * alpha)
    out[..., 1, 1] = np.exp(0.5j * alpha)
    return out


def ry(beta):
    """``exp(-i beta Y / 2)``; broadcasts over array input."""
    beta = np.asarray(beta, dtype=float)
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    out = np.empty(beta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def rotation_matrices(chi, psi) -> np.ndarray:
    """Batched ``Rz(psi) Ry(chi)`` for array-valued angles, shape ``(..., 2, 2)``."""
    chi, psi = np.broadcast_arrays(np.asarray(chi, dtype=float), np.asarray(psi, dtype=float))
    c, s = np.cos(chi / 2), np.sin(chi / 2)
    em, ep = np.exp(-0.5j * psi), np.exp(0.5j * psi)
    out = np.empty(chi.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = em * c
    out[..., 0, 1] = -em * s
    out[..., 1, 0] = ep * s
    out[..., 1, 1] = ep * c
    return out


def rotation_for_direction(n: Direction) -> np.ndarray:
    """Unitary taking ``|0>, |1>`` to the +1/-1 eigenvectors of ``n . sigma``.

    The returned matrix is ``Rz(psi) Ry(chi)``, which is exactly the identity
    for the z axis.
    """
    return rotation_matrices(n.chi, n.psi)


def op_mul(*ops: np.ndarray) -> np.ndarray:
    """Product ``ops[0] @ ops[1] @ ...``."""
    out = ops[0]
    for op in ops[1:]:
        out = out @ op
    return out


def op_adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def op_inverse(a: np.ndarray) -> np.ndarray:
    if a.shape == (2, 2):
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        if abs(det) <= EPS_ZERO:
            raise SingularOperator(f"|det| = {abs(det):.3e}")
        return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]], dtype=complex) / det
    if abs(np.linalg.det(a)) <= EPS_ZERO:
        raise SingularOperator("operator is singular")
    return np.linalg.inv(a)


def is_unitary(a: np.ndarray, tol: float = EPS_EXACT) -> bool:
    return max_abs(op_adjoint(a) @ a - np.eye(a.shape[-1])) < tol


def max_abs(a) -> float:
    """Max-norm of an array (0 for empty input)."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def apply(op: np.ndarray, state: PureState) -> np.ndarray:
    """Unnormalized vector ``op |state>``."""
    return op @ state.vector


def fidelity(a: PureState, b: PureState) -> float:
    """``|<a|b>|^2`` for normalized states."""
    overlap = np.conj(a.amp0) * b.amp0 + np.conj(a.amp1) * b.amp1
    return float(min(1.0, abs(overlap) ** 2))


def global_phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_gamma max|a - exp(i gamma) b|`` using the phase of the largest overlap.

    Zero when ``a`` and ``b`` are the same operator up to a global phase.
    """
    inner = np.vdot(b, a)
    phase = inner / abs(inner) if abs(inner) > EPS_ZERO else 1.0
    return max_abs(a - phase * b)


def expm_series(a: np.ndarray, terms: int = 20) -> np.ndarray:
    """Matrix exponential by truncated Taylor series with scaling and squaring.

    The matrix is scaled by ``2**-s`` so that its 1-norm is below 0.5, the
    series is summed to ``terms`` terms, and the result squared ``s`` times.
    """
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, 1)
    s = 0
    while norm / 2**s >= 0.5:
        s += 1
    b = a / 2**s
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out
