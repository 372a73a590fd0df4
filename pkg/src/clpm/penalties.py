"""Log-penalty (log-prior) terms added to the log-likelihood.

Two smoothness penalties, one per model variant:

- dot-product variant: each node's direction change across a knot is scored
  by a truncated normal on the cosine of the turning angle, TN(mu_angle,
  seg_len * sigma_sq, 0, 1), normalization constant included;
- squared-distance variant: Gaussian shrinkage of the initial position plus a
  Gaussian random walk on the knot increments, with the increment variance
  scaled by the segment length (Brownian-motion scaling).

Both are additive over nodes, which is what makes the per-node objective
split (and the minibatch estimator built on it) exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .trajectories import ChangePointGrid, TrajectorySet

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class PenaltyParams:
    """Penalty hyperparameters.

    ``sigma0_sq``: variance anchoring initial positions to the origin
    (squared-distance variant). ``sigma_sq``: increment variance per unit
    time (both variants). ``mu_angle``: truncated-normal mean for the cosine
    of the turning angle (dot-product variant).
    """

    sigma0_sq: float = 1.0
    sigma_sq: float = 0.1
    mu_angle: float = 1.0

    def __post_init__(self):
        if not (self.sigma0_sq > 0 and self.sigma_sq > 0):
            raise ValueError("penalty variances must be strictly positive")
        if not 0.0 <= self.mu_angle <= 1.0:
            raise ValueError("mu_angle must lie in [0, 1]")


def penalty_projection_terms(
    positions: np.ndarray,
    grid: ChangePointGrid,
    params: PenaltyParams,
    node_weights: np.ndarray,
    want_grad: bool = False,
) -> tuple[float, np.ndarray | None]:
    """Node-weighted angular penalty and (optionally) its position gradient."""
    if positions.shape[1] != grid.num_knots:
        raise ValueError("positions and grid disagree on the number of knots")
    norms = np.linalg.norm(positions, axis=2)
    if np.any(norms == 0.0):
        raise ValueError("angular penalty undefined at a zero-norm knot position")
    unit = positions / norms[..., None]
    cos = np.einsum("nkd,nkd->nk", unit[:, 1:], unit[:, :-1])
    s_sq = grid.segment_lengths * params.sigma_sq
    s = np.sqrt(s_sq)
    log_norm = np.log(ndtr((1.0 - params.mu_angle) / s) - ndtr(-params.mu_angle / s))
    logpdf = (
        -_LOG_SQRT_2PI
        - np.log(s)
        - (cos - params.mu_angle) ** 2 / (2.0 * s_sq)
        - log_norm
    )
    m = np.asarray(node_weights, dtype=float)
    value = float(np.dot(m, logpdf.sum(axis=1)))
    if not want_grad:
        return value, None
    dcos = (-(cos - params.mu_angle) / s_sq) * m[:, None]
    back = (unit[:, 1:] - cos[..., None] * unit[:, :-1]) / norms[:, :-1, None]
    fwd = (unit[:, :-1] - cos[..., None] * unit[:, 1:]) / norms[:, 1:, None]
    grad = np.zeros_like(positions)
    grad[:, :-1] += dcos[..., None] * back
    grad[:, 1:] += dcos[..., None] * fwd
    return value, grad


def penalty_projection(
    trajectories: TrajectorySet, grid: ChangePointGrid, params: PenaltyParams
) -> float:
    """Sum over nodes and knots of the log truncated-normal density of the
    cosine between consecutive knot directions."""
    value, _ = penalty_projection_terms(
        trajectories.positions, grid, params, np.ones(trajectories.num_nodes)
    )
    return value


def penalty_distance_terms(
    positions: np.ndarray,
    grid: ChangePointGrid,
    params: PenaltyParams,
    node_weights: np.ndarray,
    want_grad: bool = False,
) -> tuple[float, np.ndarray | None]:
    """Node-weighted random-walk penalty and (optionally) its gradient."""
    if positions.shape[1] != grid.num_knots:
        raise ValueError("positions and grid disagree on the number of knots")
    seg_len = grid.segment_lengths
    first = positions[:, 0]
    diffs = positions[:, 1:] - positions[:, :-1]
    inc_sq = np.einsum("nkd,nkd->nk", diffs, diffs)
    per_node = -np.einsum("nd,nd->n", first, first) / (2.0 * params.sigma0_sq)
    per_node = per_node - (inc_sq / (2.0 * seg_len * params.sigma_sq)).sum(axis=1)
    m = np.asarray(node_weights, dtype=float)
    value = float(np.dot(m, per_node))
    if not want_grad:
        return value, None
    grad = np.zeros_like(positions)
    grad[:, 0] -= m[:, None] * first / params.sigma0_sq
    scaled = diffs * (m[:, None, None] / (seg_len[None, :, None] * params.sigma_sq))
    grad[:, :-1] += scaled
    grad[:, 1:] -= scaled
    return value, grad


def penalty_distance(
    trajectories: TrajectorySet, grid: ChangePointGrid, params: PenaltyParams
) -> float:
    """Gaussian shrinkage of initial positions plus time-scaled random-walk
    increments, additive constants dropped. Always <= 0."""
    value, _ = penalty_distance_terms(
        trajectories.positions, grid, params, np.ones(trajectories.num_nodes)
    )
    return value
