"""Fisher information of the two-outcome measurement and state estimation.

The state is parametrized by Bloch angles ``(theta, phi)`` and the
measurement axis by ``(chi, psi)``. With a binary outcome every element of
the Fisher matrix is ``dP_i dP_j / (P_m P_mbar)``, where ``dP`` is the
gradient of ``P_m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import entr, xlogy

from . import montecarlo
from .algebra import EPS_EXACT, EPS_ZERO, Direction, state_from_angles
from .errors import DegenerateDistribution, NonIdentifiable
from .measurement import (
    build_measurement_along,
    check_probability,
    outcome_probabilities,
    sample_counts,
)

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class FisherMatrix:
    f_tt: float
    f_tp: float
    f_pp: float

    @property
    def f_pt(self) -> float:
        return self.f_tp

    def as_array(self) -> np.ndarray:
        return np.array([[self.f_tt, self.f_tp], [self.f_tp, self.f_pp]])

    def det(self) -> float:
        return self.f_tt * self.f_pp - self.f_tp**2

    def __add__(self, other: "FisherMatrix") -> "FisherMatrix":
        return FisherMatrix(self.f_tt + other.f_tt, self.f_tp + other.f_tp, self.f_pp + other.f_pp)

    def scaled(self, k: float) -> "FisherMatrix":
        return FisherMatrix(k * self.f_tt, k * self.f_tp, k * self.f_pp)


ZERO_FISHER = FisherMatrix(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TomographyEstimate:
    theta_hat: float
    phi_hat: float
    n_samples: int
    crb_variance_theta: float
    crb_variance_phi: float
    at_boundary: bool = False
    log_likelihood: float = float("nan")


def prob_m(theta, phi, chi, psi, p, q):
    """Closed-form ``P_m`` along ``(chi, psi)``; broadcasts over arrays.

    The effect ``E_m`` equals ``(1 - (p+q)/2) I + ((p-q)/2) n.sigma``, so
    ``P_m`` is affine in the projection of the Bloch vector on the axis.
    """
    proj = np.sin(theta) * np.sin(chi) * np.cos(phi - psi) + np.cos(theta) * np.cos(chi)
    return 1 - (p + q) / 2 + (p - q) / 2 * proj


def prob_derivatives(state_angles, n: Direction, p: float, q: float) -> tuple[float, float]:
    """Gradient ``(dP_m/dtheta, dP_m/dphi)`` of the no-switch probability."""
    theta, phi = state_angles
    chi, psi = n.chi, n.psi
    k = (q - p) / 2
    d_theta = k * (math.sin(theta) * math.cos(chi) - math.cos(theta) * math.sin(chi) * math.cos(phi - psi))
    d_phi = k * math.sin(theta) * math.sin(chi) * math.sin(phi - psi)
    return d_theta, d_phi


def fisher_matrix(state_angles, n: Direction, p: float, q: float) -> FisherMatrix:
    """Fisher matrix over ``(theta, phi)`` for one measurement along ``n``.

    Raises
    ------
    DegenerateDistribution
        If the outcome is certain (``P_m P_mbar <= 1e-14``) yet the
        probability still moves with the state.
    """
    p = check_probability("p", p)
    q = check_probability("q", q)
    theta, phi = state_angles
    p_m, p_mbar = outcome_probabilities(state_from_angles(theta, phi), build_measurement_along(p, q, n))
    d_t, d_p = prob_derivatives(state_angles, n, p, q)
    denom = p_m * p_mbar
    if denom <= EPS_ZERO:
        if d_t**2 < 1e-20 and d_p**2 < 1e-20:
            return ZERO_FISHER
        raise DegenerateDistribution(f"P_m P_mbar = {denom:.3e} with gradient ({d_t:.3e}, {d_p:.3e})")
    return FisherMatrix(d_t * d_t / denom, d_t * d_p / denom, d_p * d_p / denom)


def fisher_surface(theta: float, chi: float, psi: float, phi: float, grid_n: int) -> np.ndarray:
    """Fisher elements on a uniform ``grid_n x grid_n`` grid over ``(p, q)``.

    Rows are ``(p, q, f_tt, f_tp, f_pp)`` ordered with ``p`` outermost.
    Grid points where the outcome is certain hold 0 when the gradient
    vanishes there too, NaN otherwise.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    axis = np.linspace(0.0, 1.0, grid_n)
    n = Direction(chi, psi)
    rows = np.empty((grid_n * grid_n, 5))
    i = 0
    for p in axis:
        for q in axis:
            try:
                f = fisher_matrix((theta, phi), n, p, q)
                vals = (f.f_tt, f.f_tp, f.f_pp)
            except DegenerateDistribution:
                vals = (math.nan, math.nan, math.nan)
            rows[i] = (p, q, *vals)
            i += 1
    return rows


def cramer_rao(f: FisherMatrix) -> tuple[float, float]:
    """Single-parameter bounds ``1/F_tt`` and ``1/F_pp`` (inf when uninformative)."""
    var_t = 1.0 / f.f_tt if f.f_tt >= EPS_ZERO else math.inf
    var_p = 1.0 / f.f_pp if f.f_pp >= EPS_ZERO else math.inf
    return var_t, var_p


def reversal_entropy(p, q):
    """``-(1-p)(1-q) ln[(1-p)(1-q)] - pq ln[pq]`` in nats, with ``0 ln 0 = 0``.

    Accepts scalars or arrays.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((p < 0) | (p > 1) | (q < 0) | (q > 1)):
        raise ValueError("p and q must lie in [0, 1]")
    out = entr((1 - p) * (1 - q)) + entr(p * q)
    return float(out) if out.ndim == 0 else out


# -- maximum-likelihood tomography -----------------------------------------


def _log_likelihood(theta, phi, counts: np.ndarray, dirs: np.ndarray, p: float, q: float):
    pm = prob_m(theta, phi, dirs[:, 0], dirs[:, 1], p, q)
    pm = np.clip(pm, 0.0, 1.0)
    return float(np.sum(xlogy(counts[:, 0], pm) + xlogy(counts[:, 1], 1 - pm)))


def _score_theta(theta, phi, counts: np.ndarray, dirs: np.ndarray, p: float, q: float) -> float:
    """Derivative of the log-likelihood in ``theta``."""
    chi, psi = dirs[:, 0], dirs[:, 1]
    pm = prob_m(theta, phi, chi, psi, p, q)
    d_t = (q - p) / 2 * (np.sin(theta) * np.cos(chi) - np.cos(theta) * np.sin(chi) * np.cos(phi - psi))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = (counts[:, 0] / pm - counts[:, 1] / (1 - pm)) * d_t
    return float(np.sum(np.where(d_t == 0, 0.0, terms)))


def _moment_estimate(counts: np.ndarray, directions: Sequence[Direction], p: float, q: float, fixed_phi):
    """Invert the affine relation between ``P_m`` and the Bloch projection."""
    freq = counts[:, 0] / np.maximum(counts.sum(axis=1), 1)
    proj = np.clip((2 * freq - 2 + p + q) / (p - q), -1, 1)
    vecs = np.array([d.vector for d in directions])
    if fixed_phi is not None:
        # proj = sin(theta) * (n . e_phi) + cos(theta) * n_z
        e_phi = np.array([math.cos(fixed_phi), math.sin(fixed_phi), 0.0])
        design = np.column_stack([vecs @ e_phi, vecs[:, 2]])
        (u, v), *_ = np.linalg.lstsq(design, proj, rcond=None)
        return abs(math.atan2(u, v)), fixed_phi
    r, *_ = np.linalg.lstsq(vecs, proj, rcond=None)
    if np.linalg.norm(r) <= EPS_EXACT:
        return math.pi / 2, 0.0
    d = Direction.from_vector(r)
    return d.chi, d.psi


def _golden_max(f, a: float, b: float, tol: float = 1e-12) -> float:
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2


def _is_spanning(directions: Sequence[Direction]) -> bool:
    vecs = [d.vector for d in directions]
    return any(
        np.linalg.norm(np.cross(vecs[i], vecs[j])) > EPS_EXACT
        for i in range(len(vecs))
        for j in range(i + 1, len(vecs))
    )


def mle_estimate(
    counts,
    directions: Sequence[Direction],
    p: float,
    q: float,
    fixed_phi: Optional[float] = None,
) -> TomographyEstimate:
    """Maximum-likelihood Bloch angles from per-direction outcome counts.

    Parameters
    ----------
    counts : sequence of (n_m, n_mbar)
        One pair per entry of ``directions``.
    fixed_phi : float, optional
        If given, only ``theta`` is estimated (golden-section search over
        ``[0, pi]``); otherwise both angles are fitted with Nelder-Mead.

    The CRB fields come from the count-weighted sum of per-direction Fisher
    matrices at the estimate.
    """
    p = check_probability("p", p)
    q = check_probability("q", q)
    if abs(p - q) <= EPS_EXACT:
        raise NonIdentifiable(f"p = q = {p}: outcome statistics do not depend on the state")
    counts = np.asarray(counts, dtype=float).reshape(-1, 2)
    if len(counts) != len(directions):
        raise ValueError("need one count pair per direction")
    total = int(counts.sum())
    if total < 1:
        raise ValueError("no samples")
    dirs = np.array([[d.chi, d.psi] for d in directions])
    theta0, phi0 = _moment_estimate(counts, directions, p, q, fixed_phi)
    at_boundary = False

    if fixed_phi is not None:
        phi_hat = float(fixed_phi)

        def ll(t):
            return _log_likelihood(t, phi_hat, counts, dirs, p, q)

        grid = np.append(np.linspace(0.0, math.pi, 181), theta0)
        vals = [ll(t) for t in grid]
        k = int(np.argmax(vals))
        step = math.pi / 180
        lo, hi = max(0.0, grid[k] - step), min(math.pi, grid[k] + step)
        theta_hat = _golden_max(ll, lo, hi)
        # Likelihood values stop resolving the optimum near 1e-8; the score does not.
        a, b = max(0.0, theta_hat - 1e-6), min(math.pi, theta_hat + 1e-6)
        sa, sb = (_score_theta(x, phi_hat, counts, dirs, p, q) for x in (a, b))
        if np.isfinite(sa) and np.isfinite(sb) and sa > 0 > sb:
            theta_hat = brentq(_score_theta, a, b, args=(phi_hat, counts, dirs, p, q), xtol=1e-15)
        best = ll(theta_hat)
        for edge in (0.0, math.pi):
            if ll(edge) >= best:
                theta_hat, best, at_boundary = edge, ll(edge), True
    else:
        if not _is_spanning(directions):
            raise NonIdentifiable("phi is free but all measurement axes are collinear")

        def neg_ll(x):
            return -_log_likelihood(x[0], x[1], counts, dirs, p, q)

        res = minimize(
            neg_ll,
            np.array([theta0, phi0]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
        )
        theta_hat, phi_hat = float(res.x[0]), float(res.x[1])
        # Fold into theta in [0, pi], phi in [0, 2 pi).
        theta_hat %= 2 * math.pi
        if theta_hat > math.pi:
            theta_hat, phi_hat = 2 * math.pi - theta_hat, phi_hat + math.pi
        phi_hat %= 2 * math.pi
        best = -float(res.fun)
        at_boundary = theta_hat <= 1e-9 or theta_hat >= math.pi - 1e-9

    info = ZERO_FISHER
    for (n_m, n_mbar), d in zip(counts, directions):
        try:
            f = fisher_matrix((theta_hat, phi_hat), d, p, q)
        except DegenerateDistribution:
            f = FisherMatrix(math.inf, 0.0, math.inf)
        info = info + f.scaled(n_m + n_mbar)
    if fixed_phi is not None:
        crb_t, crb_p = cramer_rao(info)[0], 0.0
    elif info.det() > EPS_ZERO * max(1.0, info.f_tt * info.f_pp):
        inv = np.linalg.inv(info.as_array())
        crb_t, crb_p = float(inv[0, 0]), float(inv[1, 1])
    else:
        crb_t, crb_p = cramer_rao(info)
    return TomographyEstimate(theta_hat, phi_hat, total, crb_t, crb_p, at_boundary, best)


def simulate_tomography(
    theta: float,
    phi: float,
    directions: Sequence[Direction],
    p: float,
    q: float,
    samples: int,
    runs: int,
    seed: int,
    fix_phi: bool = True,
    workers: int = 1,
) -> list[TomographyEstimate]:
    """Repeat ``runs`` independent tomography experiments and estimate each.

    Run ``r`` draws its outcomes from substream ``r`` of ``seed``; each
    direction receives ``samples`` single-uniform draws.
    """
    if abs(p - q) <= EPS_EXACT:
        raise NonIdentifiable(f"p = q = {p}: outcome statistics do not depend on the state")
    state = state_from_angles(theta, phi)
    p_mbar = [outcome_probabilities(state, build_measurement_along(p, q, d))[1] for d in directions]

    def one_run(rng: np.random.Generator, _n: int) -> TomographyEstimate:
        counts = []
        for pb in p_mbar:
            k = sample_counts(pb, samples, rng)
            counts.append((samples - k, k))
        return mle_estimate(counts, directions, p, q, fixed_phi=phi if fix_phi else None)

    return montecarlo.map_chunks(one_run, seed, runs, workers, chunk_size=1)
