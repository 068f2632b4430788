"""Independent reference computations used only by the tests."""

import math

import mpmath as mp
import numpy as np

mp.mp.dps = 30
FD_STEP = mp.mpf("1e-6")


def mp_prob_m(theta, phi, chi, psi, p, q):
    """<psi| M_m^dagger M_m |psi> with the rotated Kraus operator, in 30 digits."""
    theta, phi, chi, psi, p, q = (mp.mpf(float(v)) for v in (theta, phi, chi, psi, p, q))
    ry = mp.matrix([[mp.cos(chi / 2), -mp.sin(chi / 2)], [mp.sin(chi / 2), mp.cos(chi / 2)]])
    rz = mp.matrix([[mp.expj(-psi / 2), 0], [0, mp.expj(psi / 2)]])
    r = rz * ry
    m_z = mp.matrix([[mp.sqrt(1 - q), 0], [0, mp.sqrt(1 - p)]])
    m = r * m_z * r.H
    v = mp.matrix([mp.cos(theta / 2), mp.expj(phi) * mp.sin(theta / 2)])
    w = m * v
    return abs(w[0]) ** 2 + abs(w[1]) ** 2


def fd_gradient(theta, phi, chi, psi, p, q):
    """Central differences of ``P_m`` in ``(theta, phi)`` with step 1e-6."""
    h = FD_STEP
    t, f = mp.mpf(float(theta)), mp.mpf(float(phi))
    d_t = (mp_prob_m(t + h, f, chi, psi, p, q) - mp_prob_m(t - h, f, chi, psi, p, q)) / (2 * h)
    d_p = (mp_prob_m(t, f + h, chi, psi, p, q) - mp_prob_m(t, f - h, chi, psi, p, q)) / (2 * h)
    return d_t, d_p


def fd_fisher(theta, phi, chi, psi, p, q) -> np.ndarray:
    """Fisher matrix of the binary outcome built from finite-difference gradients."""
    d_t, d_p = fd_gradient(theta, phi, chi, psi, p, q)
    pm = mp_prob_m(theta, phi, chi, psi, p, q)
    denom = pm * (1 - pm)
    return np.array(
        [[float(d_t * d_t / denom), float(d_t * d_p / denom)], [float(d_t * d_p / denom), float(d_p * d_p / denom)]]
    )


def relative_error(a, b) -> float:
    """``max|a - b| / max|b|`` (0 when both vanish)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.max(np.abs(b))
    diff = np.max(np.abs(a - b))
    return float(diff / scale) if scale > 0 else float(diff)


def monte_carlo_fisher(theta, phi, chi, psi, p, q, n, rng):
    """Sample-mean estimate of the expected score outer product and its standard errors.

    Scores are ``d ln P(outcome)`` from finite differences of the 30-digit
    probability, so nothing here touches the analytic Fisher code.
    """
    d_t, d_p = (float(x) for x in fd_gradient(theta, phi, chi, psi, p, q))
    pm = float(mp_prob_m(theta, phi, chi, psi, p, q))
    switched = rng.random(n) < 1 - pm
    s_t = np.where(switched, -d_t / (1 - pm), d_t / pm)
    s_p = np.where(switched, -d_p / (1 - pm), d_p / pm)
    out = {}
    for key, vals in (("f_tt", s_t * s_t), ("f_tp", s_t * s_p), ("f_pp", s_p * s_p)):
        out[key] = (float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n)))
    return out
