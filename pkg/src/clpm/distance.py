"""Squared-distance rate model: rates, closed-form segment integrals, log-likelihood.

The log-rate for a dyad is beta minus the squared Euclidean distance between
the interpolated positions. On one segment the difference vector is affine in
the local coordinate u, w(u) = w0 + u*delta, so the squared distance is the
quadratic ||w(u)||^2 = c^2 (u - mu)^2 + offset with

    c^2     = ||delta||^2,
    mu      = -<w0, delta> / c^2,
    offset  = ||w0 + mu*delta||^2   (min squared distance on the whole line),

and the rate integrates against the Gaussian kernel: with sigma = 1/(sqrt(2) c),

    integral = L * sqrt(2*pi) * sigma * exp(beta - offset)
                 * [Phi((1 - mu)/sigma) - Phi((0 - mu)/sigma)].

When the relative motion ||delta||^2 vanishes the parameterization degenerates
and the integrand is nearly constant; those segments are handled by 5-point
Gauss-Legendre quadrature of the exact integrand instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

from .trajectories import (
    DISTANCE,
    ChangePointGrid,
    EventIndex,
    EventList,
    ModelState,
    dyad_pairs,
    interpolate,
)

DEGENERATE_DELTA_SQ = 1e-8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)  # map from [-1, 1] to [0, 1]
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


@dataclass(frozen=True)
class SegmentGaussianParams:
    """Complete-the-square parameters of one dyad-segment.

    ``mu``, ``sigma`` and ``offset`` are None on the degenerate branch
    (vanishing relative motion), where the quadratic has no usable vertex.
    """

    mu: float | None
    sigma: float | None
    offset: float | None
    delta_norm_sq: float

    @property
    def degenerate(self) -> bool:
        return self.mu is None


def distance_rate(
    state: ModelState, grid: ChangePointGrid, i: int, j: int, t: float
) -> float:
    """Instantaneous rate exp(beta - ||z_i(t) - z_j(t)||^2)."""
    state.require_variant(DISTANCE, "distance_rate")
    diff = interpolate(state.trajectories, grid, i, t) - interpolate(
        state.trajectories, grid, j, t
    )
    return float(np.exp(state.intercept_beta - diff @ diff))


def segment_params(
    state: ModelState, grid: ChangePointGrid, i: int, j: int, g: int
) -> SegmentGaussianParams:
    """Complete the square for dyad (i, j) on segment g."""
    state.require_variant(DISTANCE, "segment_params")
    if not 0 <= g < grid.num_knots - 1:
        raise ValueError(f"segment index {g} outside [0, {grid.num_knots - 2}]")
    pos = state.trajectories.positions
    w0 = pos[i, g] - pos[j, g]
    delta = (pos[i, g + 1] - pos[j, g + 1]) - w0
    delta_sq = float(delta @ delta)
    if delta_sq < DEGENERATE_DELTA_SQ:
        return SegmentGaussianParams(None, None, None, delta_sq)
    mu = float(-(w0 @ delta) / delta_sq)
    perp = w0 + mu * delta
    offset = float(perp @ perp)
    sigma = 1.0 / np.sqrt(2.0 * delta_sq)
    return SegmentGaussianParams(mu, float(sigma), offset, delta_sq)


def _erf_bracket(y0: np.ndarray, y1: np.ndarray) -> np.ndarray:
    """erf(y1) - erf(y0), computed through erfc when both lie in one tail."""
    plain = erf(y1) - erf(y0)
    upper = erfc(y0) - erfc(y1)
    lower = erfc(-y1) - erfc(-y0)
    return np.where(y0 >= 0.0, upper, np.where(y1 <= 0.0, lower, plain))


def _segment_moments(
    positions: np.ndarray,
    beta: float,
    ii: np.ndarray,
    jj: np.ndarray,
    force_branch: str | None = None,
) -> tuple[np.ndarray, ...]:
    """Per pair and segment: moments M_p = integral of u^p * rate(u) du over
    [0, 1], plus the difference vectors needed for gradients.

    Returns (m0, m1, m2, w0, delta) with shapes (P, K-1[, d]).
    ``force_branch`` ("closed" or "quadrature") overrides the degeneracy
    dispatch; used by branch-agreement tests.
    """
    w0 = positions[ii, :-1] - positions[jj, :-1]
    w1 = positions[ii, 1:] - positions[jj, 1:]
    delta = w1 - w0
    csq = np.einsum("pkd,pkd->pk", delta, delta)
    wsq0 = np.einsum("pkd,pkd->pk", w0, w0)
    wsq1 = np.einsum("pkd,pkd->pk", w1, w1)

    if force_branch == "closed":
        degenerate = np.zeros_like(csq, dtype=bool)
    elif force_branch == "quadrature":
        degenerate = np.ones_like(csq, dtype=bool)
    else:
        degenerate = csq < DEGENERATE_DELTA_SQ
    csq_safe = np.where(degenerate, 1.0, csq)

    c = np.sqrt(csq_safe)
    mu = -np.einsum("pkd,pkd->pk", w0, delta) / csq_safe
    perp = w0 + mu[..., None] * delta
    offset = np.einsum("pkd,pkd->pk", perp, perp)
    bracket = _erf_bracket(c * (0.0 - mu), c * (1.0 - mu))
    m0 = np.exp(beta - offset) * (np.sqrt(np.pi) / (2.0 * c)) * bracket
    # Endpoint rates; exact because offset + c^2 mu^2 = ||w0||^2 and
    # offset + c^2 (1 - mu)^2 = ||w1||^2.
    f0 = np.exp(beta - wsq0)
    f1 = np.exp(beta - wsq1)
    half_inv_csq = 0.5 / csq_safe
    m1 = mu * m0 + (f0 - f1) * half_inv_csq
    m2 = (mu * mu + half_inv_csq) * m0 + (
        mu * f0 - (1.0 + mu) * f1
    ) * half_inv_csq

    if np.any(degenerate):
        p_idx, k_idx = np.nonzero(degenerate)
        w0d = w0[p_idx, k_idx]
        dd = delta[p_idx, k_idx]
        w_u = w0d[:, None, :] + _GL_NODES[None, :, None] * dd[:, None, :]
        f_u = np.exp(beta - np.einsum("mqd,mqd->mq", w_u, w_u))
        m0[p_idx, k_idx] = f_u @ _GL_WEIGHTS
        m1[p_idx, k_idx] = f_u @ (_GL_WEIGHTS * _GL_NODES)
        m2[p_idx, k_idx] = f_u @ (_GL_WEIGHTS * _GL_NODES * _GL_NODES)
    return m0, m1, m2, w0, delta


def _pair_integrals(
    positions: np.ndarray,
    beta: float,
    grid: ChangePointGrid,
    ii: np.ndarray,
    jj: np.ndarray,
    force_branch: str | None = None,
) -> np.ndarray:
    m0, _, _, _, _ = _segment_moments(positions, beta, ii, jj, force_branch)
    return m0 @ grid.segment_lengths


def distance_integral(
    state: ModelState, grid: ChangePointGrid, i: int, j: int
) -> float:
    """Integral of the dyad rate over the whole observation window."""
    state.require_variant(DISTANCE, "distance_integral")
    out = _pair_integrals(
        state.trajectories.positions,
        state.intercept_beta,
        grid,
        np.array([i]),
        np.array([j]),
    )
    return float(out[0])


def loglik_terms(
    positions: np.ndarray,
    beta: float,
    grid: ChangePointGrid,
    eidx: EventIndex,
    node_weights: np.ndarray,
    want_grad: bool = False,
) -> tuple[float, np.ndarray | None, float | None]:
    """Node-weighted squared-distance log-likelihood and its gradient.

    Dyad integrals get weight (m_i + m_j)/2, event terms the same weight of
    their endpoints, so the result equals sum_i m_i * psi_i restricted to the
    likelihood part. Returns (value, d/dpositions, d/dbeta); the gradient
    slots are None unless ``want_grad``.
    """
    n, num_knots, _ = positions.shape
    if num_knots != grid.num_knots:
        raise ValueError("positions and grid disagree on the number of knots")
    ii, jj = dyad_pairs(n)
    m = np.asarray(node_weights, dtype=float)
    wpair = 0.5 * (m[ii] + m[jj])
    seg_len = grid.segment_lengths

    m0, m1, m2, w0, delta = _segment_moments(positions, beta, ii, jj)
    integrals = m0 @ seg_len
    value = -float(np.dot(wpair, integrals))

    ea, eb, g, u = eidx.node_a, eidx.node_b, eidx.seg, eidx.u
    if ea.size and (max(ea.max(), eb.max()) >= n):
        raise ValueError("event node id outside the trajectory set")
    w_tau = (1.0 - u)[:, None] * (positions[ea, g] - positions[eb, g]) + u[
        :, None
    ] * (positions[ea, g + 1] - positions[eb, g + 1])
    dist_sq = np.einsum("ed,ed->e", w_tau, w_tau)
    wev = 0.5 * (m[ea] + m[eb])
    value += float(np.dot(wev, beta - dist_sq))

    if not want_grad:
        return value, None, None

    grad = np.zeros_like(positions)
    # d(-Lambda_g)/dz_i^g = 2 L (V0 - V1), d(-Lambda_g)/dz_i^{g+1} = 2 L V1,
    # where V_p = integral of u^p * w(u) * rate(u) du; the j side is mirrored.
    v0 = w0 * m0[..., None] + delta * m1[..., None]
    v1 = w0 * m1[..., None] + delta * m2[..., None]
    coef = 2.0 * seg_len[None, :, None] * wpair[:, None, None]
    lo = coef * (v0 - v1)
    hi = coef * v1
    gidx = np.arange(num_knots - 1)
    np.add.at(grad, (ii[:, None], gidx[None, :]), lo)
    np.add.at(grad, (ii[:, None], gidx[None, :] + 1), hi)
    np.add.at(grad, (jj[:, None], gidx[None, :]), -lo)
    np.add.at(grad, (jj[:, None], gidx[None, :] + 1), -hi)
    dbeta = -float(np.dot(wpair, integrals))

    ev_lo = (-2.0 * (1.0 - u) * wev)[:, None] * w_tau
    ev_hi = (-2.0 * u * wev)[:, None] * w_tau
    np.add.at(grad, (ea, g), ev_lo)
    np.add.at(grad, (ea, g + 1), ev_hi)
    np.add.at(grad, (eb, g), -ev_lo)
    np.add.at(grad, (eb, g + 1), -ev_hi)
    dbeta += float(wev.sum())
    return value, grad, dbeta


def distance_loglik(
    state: ModelState, grid: ChangePointGrid, events: EventList
) -> float:
    """Log-likelihood: sum over events of (beta - dist^2) minus all integrals."""
    state.require_variant(DISTANCE, "distance_loglik")
    eidx = EventIndex.build(events, grid)
    n = state.trajectories.num_nodes
    value, _, _ = loglik_terms(
        state.trajectories.positions, state.intercept_beta, grid, eidx, np.ones(n)
    )
    return value
