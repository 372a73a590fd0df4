"""Dot-product rate model: rates, exact segment integrals, log-likelihood.

The rate for a dyad is the dot product of the two interpolated positions.
Because positions are linear in time on each segment, the dot product is a
quadratic polynomial there and integrates in closed form: on a segment of
length L with knot-level dot products S^gh = <z_i(eta_g), z_j(eta_h)>,

    integral = L * (2*S^gg + S^gh + S^hg + 2*S^hh) / 6.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .trajectories import (
    PROJECTION,
    ChangePointGrid,
    EventIndex,
    EventList,
    ModelState,
    dyad_pairs,
    interpolate,
)

RATE_FLOOR = 1e-12


class DegenerateRateWarning(UserWarning):
    """An event fell on a numerically vanishing rate; its log was floored."""


@dataclass(frozen=True)
class DotProductTable:
    """Knot-level dot products for one dyad: table[g, h] = <z_i(eta_g), z_j(eta_h)>."""

    node_i: int
    node_j: int
    table: np.ndarray

    @classmethod
    def build(cls, state: ModelState, i: int, j: int) -> "DotProductTable":
        state.require_variant(PROJECTION, "DotProductTable")
        pos = state.trajectories.positions
        table = pos[i] @ pos[j].T
        table.setflags(write=False)
        return cls(i, j, table)


def projection_rate(
    state: ModelState, grid: ChangePointGrid, i: int, j: int, t: float
) -> float:
    """Instantaneous rate <z_i(t), z_j(t)>."""
    state.require_variant(PROJECTION, "projection_rate")
    zi = interpolate(state.trajectories, grid, i, t)
    zj = interpolate(state.trajectories, grid, j, t)
    return float(zi @ zj)


def projection_integral(
    state: ModelState, grid: ChangePointGrid, i: int, j: int
) -> float:
    """Exact integral of the dyad rate over the whole observation window."""
    state.require_variant(PROJECTION, "projection_integral")
    s = DotProductTable.build(state, i, j).table
    gg = np.arange(grid.num_knots - 1)
    blocks = (
        2.0 * s[gg, gg] + s[gg, gg + 1] + s[gg + 1, gg] + 2.0 * s[gg + 1, gg + 1]
    ) / 6.0
    return float(np.dot(grid.segment_lengths, blocks))


def loglik_terms(
    positions: np.ndarray,
    grid: ChangePointGrid,
    eidx: EventIndex,
    node_weights: np.ndarray,
    want_grad: bool = False,
) -> tuple[float, np.ndarray | None]:
    """Node-weighted dot-product log-likelihood and (optionally) its gradient.

    Each dyad term receives weight (m_i + m_j)/2 and each event term the same
    weight of its endpoints, so that the result equals sum_i m_i * psi_i
    restricted to the likelihood part. ``node_weights = 1`` gives the plain
    log-likelihood.
    """
    n, num_knots, _ = positions.shape
    if num_knots != grid.num_knots:
        raise ValueError("positions and grid disagree on the number of knots")
    ii, jj = dyad_pairs(n)
    m = np.asarray(node_weights, dtype=float)
    wpair = 0.5 * (m[ii] + m[jj])
    seg_len = grid.segment_lengths

    a_knot = positions[ii, :-1]
    b_knot = positions[ii, 1:]
    c_knot = positions[jj, :-1]
    d_knot = positions[jj, 1:]
    s_gg = np.einsum("pkd,pkd->pk", a_knot, c_knot)
    s_gh = np.einsum("pkd,pkd->pk", a_knot, d_knot)
    s_hg = np.einsum("pkd,pkd->pk", b_knot, c_knot)
    s_hh = np.einsum("pkd,pkd->pk", b_knot, d_knot)
    integrals = ((2.0 * s_gg + s_gh + s_hg + 2.0 * s_hh) / 6.0) @ seg_len
    value = -float(np.dot(wpair, integrals))

    ea, eb, g, u = eidx.node_a, eidx.node_b, eidx.seg, eidx.u
    if ea.size and (max(ea.max(), eb.max()) >= n):
        raise ValueError("event node id outside the trajectory set")
    zi_tau = (1.0 - u)[:, None] * positions[ea, g] + u[:, None] * positions[ea, g + 1]
    zj_tau = (1.0 - u)[:, None] * positions[eb, g] + u[:, None] * positions[eb, g + 1]
    rates = np.einsum("ed,ed->e", zi_tau, zj_tau)
    low = rates < RATE_FLOOR
    if np.any(low):
        k = int(np.flatnonzero(low)[0])
        warnings.warn(
            f"{int(low.sum())} event(s) at numerically zero rate, e.g. dyad "
            f"({int(ea[k])},{int(eb[k])}) at t={float(eidx.times[k])}; "
            f"log floored at {RATE_FLOOR}",
            DegenerateRateWarning,
            stacklevel=2,
        )
        rates = np.maximum(rates, RATE_FLOOR)
    wev = 0.5 * (m[ea] + m[eb])
    value += float(np.dot(wev, np.log(rates)))

    if not want_grad:
        return value, None

    grad = np.zeros_like(positions)
    gidx = np.arange(grid.num_knots - 1)
    coef = seg_len[None, :, None] * wpair[:, None, None] / 6.0
    np.add.at(grad, (ii[:, None], gidx[None, :]), -coef * (2.0 * c_knot + d_knot))
    np.add.at(grad, (ii[:, None], gidx[None, :] + 1), -coef * (c_knot + 2.0 * d_knot))
    np.add.at(grad, (jj[:, None], gidx[None, :]), -coef * (2.0 * a_knot + b_knot))
    np.add.at(grad, (jj[:, None], gidx[None, :] + 1), -coef * (a_knot + 2.0 * b_knot))

    # Events floored above contribute no gradient (their value term is constant).
    ga = np.where(low, 0.0, wev / rates)
    np.add.at(grad, (ea, g), ((1.0 - u) * ga)[:, None] * zj_tau)
    np.add.at(grad, (ea, g + 1), (u * ga)[:, None] * zj_tau)
    np.add.at(grad, (eb, g), ((1.0 - u) * ga)[:, None] * zi_tau)
    np.add.at(grad, (eb, g + 1), (u * ga)[:, None] * zi_tau)
    return value, grad


def projection_loglik(
    state: ModelState, grid: ChangePointGrid, events: EventList
) -> float:
    """Log-likelihood: sum over events of log rate minus all dyad integrals."""
    state.require_variant(PROJECTION, "projection_loglik")
    eidx = EventIndex.build(events, grid)
    n = state.trajectories.num_nodes
    value, _ = loglik_terms(state.trajectories.positions, grid, eidx, np.ones(n))
    return value
