"""Synthetic-data generators: piecewise blockmodels and the latent-trajectory
model's own point process.

All generators derive one child generator per dyad from the root seed, so a
run is reproducible and any single dyad can be re-simulated in isolation
(``dyads=...``) with exactly the events it would receive in the full run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trajectories import (
    DISTANCE,
    ChangePointGrid,
    EventList,
    ModelState,
    TrajectorySet,
    _frozen,
    dyad_pairs,
)


@dataclass(frozen=True)
class BlockSchedule:
    """Piecewise-constant blockmodel: per segment, a node->cluster map and a
    symmetric matrix of expected event counts per dyad.

    ``overrides`` lists (node, mean) special behaviors: every dyad touching
    that node uses the override mean instead of the cluster mean; if both
    endpoints carry overrides the smaller mean wins.
    """

    segment_bounds: np.ndarray  # (S+1,) increasing times
    memberships: np.ndarray  # (S, N) cluster ids
    theta: np.ndarray  # (S, C, C) expected counts, symmetric per segment
    overrides: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        bounds = np.asarray(self.segment_bounds, dtype=float).ravel()
        member = np.asarray(self.memberships, dtype=np.int64)
        theta = np.asarray(self.theta, dtype=float)
        if bounds.size < 2 or np.any(np.diff(bounds) <= 0):
            raise ValueError("segment bounds must be strictly increasing, length >= 2")
        if member.ndim != 2 or member.shape[0] != bounds.size - 1:
            raise ValueError("memberships must be (num_segments, num_nodes)")
        if theta.ndim != 3 or theta.shape[0] != bounds.size - 1:
            raise ValueError("theta must be (num_segments, C, C)")
        if theta.shape[1] != theta.shape[2]:
            raise ValueError("theta blocks must be square")
        if np.any(theta < 0):
            raise ValueError("theta entries must be nonnegative")
        if not np.allclose(theta, np.swapaxes(theta, 1, 2)):
            raise ValueError("theta blocks must be symmetric")
        if member.min() < 0 or member.max() >= theta.shape[1]:
            raise ValueError("membership ids must index theta")
        object.__setattr__(self, "segment_bounds", _frozen(bounds))
        object.__setattr__(self, "memberships", _frozen(member))
        object.__setattr__(self, "theta", _frozen(theta))
        object.__setattr__(self, "overrides", tuple(self.overrides))

    @property
    def num_segments(self) -> int:
        return self.segment_bounds.size - 1

    @property
    def num_nodes(self) -> int:
        return self.memberships.shape[1]

    @property
    def horizon(self) -> float:
        return float(self.segment_bounds[-1])


def dyad_segment_mean(schedule: BlockSchedule, i: int, j: int, s: int) -> float:
    """Expected event count for dyad (i, j) in segment s, overrides applied."""
    special = [mean for node, mean in schedule.overrides if node in (i, j)]
    if special:
        return float(min(special))
    ci = schedule.memberships[s, i]
    cj = schedule.memberships[s, j]
    return float(schedule.theta[s, ci, cj])


def _dyad_rng(seed: int, i: int, j: int) -> np.random.Generator:
    return np.random.default_rng([seed, i, j])


def simulate_blockmodel(
    schedule: BlockSchedule,
    seed: int = 0,
    dyads: list[tuple[int, int]] | None = None,
) -> EventList:
    """Draw a Poisson count per dyad-segment with the scheduled mean, then
    place the events i.i.d. uniformly inside the segment."""
    n = schedule.num_nodes
    if dyads is None:
        ii, jj = dyad_pairs(n)
        pairs = zip(ii.tolist(), jj.tolist())
    else:
        pairs = ((min(i, j), max(i, j)) for i, j in dyads)
    bounds = schedule.segment_bounds
    times: list[np.ndarray] = []
    node_a: list[np.ndarray] = []
    node_b: list[np.ndarray] = []
    for i, j in pairs:
        rng = _dyad_rng(seed, i, j)
        for s in range(schedule.num_segments):
            count = int(rng.poisson(dyad_segment_mean(schedule, i, j, s)))
            if count == 0:
                continue
            t = rng.uniform(bounds[s], bounds[s + 1], size=count)
            times.append(t)
            node_a.append(np.full(count, i, dtype=np.int64))
            node_b.append(np.full(count, j, dtype=np.int64))
    if times:
        all_t = np.concatenate(times)
        all_a = np.concatenate(node_a)
        all_b = np.concatenate(node_b)
    else:
        all_t = np.empty(0)
        all_a = np.empty(0, dtype=np.int64)
        all_b = np.empty(0, dtype=np.int64)
    return EventList(all_t, all_a, all_b, schedule.horizon, n)


def make_sim1_schedule() -> BlockSchedule:
    """Four 10-second segments over 60 nodes.

    Segment 1: every dyad mean 1. Segment 2: three communities of 20 nodes
    with within-means 10 / 5 / 1 and between-mean 1. Segment 3: the first
    community splits, halves joining each of the other two, both of which
    interact within at mean 5. Segment 4: back to the flat structure.
    Node 0 is a hub (mean 10 with everyone, always); node 59 is near-silent
    (mean 0.01, always); the hub-to-silent dyad takes the smaller mean.
    """
    n = 60
    bounds = np.array([0.0, 10.0, 20.0, 30.0, 40.0])
    flat = np.zeros(n, dtype=np.int64)
    three = np.repeat([0, 1, 2], 20)
    split = np.concatenate(
        [np.full(10, 1), np.full(10, 2), np.full(20, 1), np.full(20, 2)]
    )
    memberships = np.stack([flat, three, split, flat])
    ones = np.ones((3, 3))
    seg2 = np.ones((3, 3))
    np.fill_diagonal(seg2, [10.0, 5.0, 1.0])
    seg3 = np.ones((3, 3))
    np.fill_diagonal(seg3, [1.0, 5.0, 5.0])
    theta = np.stack([ones, seg2, seg3, ones])
    return BlockSchedule(bounds, memberships, theta, ((0, 10.0), (59, 0.01)))


def make_sim2_schedule(num_nodes: int = 30) -> BlockSchedule:
    """Two equal communities over 40 unit segments; the within-community mean
    steps linearly from 1 up to 5 while the between mean stays 1. Node 0
    defects from the first community to the second at t = 20."""
    if num_nodes < 4 or num_nodes % 2:
        raise ValueError("num_nodes must be even and >= 4")
    s_count = 40
    bounds = np.arange(s_count + 1, dtype=float)
    base = np.repeat([0, 1], num_nodes // 2)
    memberships = np.tile(base, (s_count, 1))
    memberships[s_count // 2 :, 0] = 1
    within = 1.0 + 4.0 * np.arange(s_count) / (s_count - 1.0)
    theta = np.ones((s_count, 2, 2))
    theta[:, 0, 0] = within
    theta[:, 1, 1] = within
    return BlockSchedule(bounds, memberships, theta)


def make_ring_trajectories(
    n: int = 20, radius: float = 1.0, period: float = 10.0
) -> tuple[TrajectorySet, ChangePointGrid]:
    """Nodes equally spaced on a circle, collapsing linearly to the origin by
    period/2 and moving back out to their starting spots by the full period."""
    if n < 2:
        raise ValueError("need at least two nodes")
    angles = 2.0 * np.pi * np.arange(n) / n
    ring = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    positions = np.zeros((n, 3, 2))
    positions[:, 0] = ring
    positions[:, 2] = ring
    grid = ChangePointGrid(np.array([0.0, period / 2.0, period]))
    return TrajectorySet(positions), grid


def make_static_clusters(
    num_nodes: int = 20, separation: float = 2.0, horizon: float = 10.0
) -> tuple[TrajectorySet, ChangePointGrid]:
    """Two motionless clusters of coincident nodes at (+/- separation/2, 0)."""
    if num_nodes < 4 or num_nodes % 2:
        raise ValueError("num_nodes must be even and >= 4")
    half = num_nodes // 2
    centers = np.zeros((num_nodes, 2))
    centers[:half, 0] = -separation / 2.0
    centers[half:, 0] = separation / 2.0
    positions = np.repeat(centers[:, None, :], 2, axis=1)
    grid = ChangePointGrid(np.array([0.0, horizon]))
    return TrajectorySet(positions), grid


def segment_rate_bound(
    state: ModelState, grid: ChangePointGrid, i: int, j: int, g: int
) -> float:
    """Upper bound (actually the maximum) of the dyad rate on segment g.

    Both variants have a quadratic driving the rate over the local coordinate
    u in [0, 1], so the extremum is at an endpoint or the vertex.
    """
    pos = state.trajectories.positions
    if state.variant == DISTANCE:
        w0 = pos[i, g] - pos[j, g]
        delta = (pos[i, g + 1] - pos[j, g + 1]) - w0
        csq = float(delta @ delta)
        candidates = [0.0, 1.0]
        if csq > 0.0:
            candidates.append(min(1.0, max(0.0, float(-(w0 @ delta) / csq))))
        dist_sq = min(
            float(np.sum((w0 + u * delta) ** 2)) for u in candidates
        )
        return float(np.exp(state.intercept_beta - dist_sq))
    a, b = pos[i, g], pos[i, g + 1]
    c, d = pos[j, g], pos[j, g + 1]
    # <z_i(u), z_j(u)> = quad_a u^2 + quad_b u + quad_c
    quad_c = float(a @ c)
    quad_b = float(a @ d + b @ c) - 2.0 * quad_c
    quad_a = float((b - a) @ (d - c))
    candidates = [0.0, 1.0]
    if quad_a != 0.0:
        vertex = -quad_b / (2.0 * quad_a)
        if 0.0 < vertex < 1.0:
            candidates.append(vertex)
    return max(quad_a * u * u + quad_b * u + quad_c for u in candidates)


def _segment_rate(state, i, j, g, u):
    """Dyad rate at local coordinates u (vectorized) inside segment g."""
    pos = state.trajectories.positions
    zi = (1.0 - u)[:, None] * pos[i, g] + u[:, None] * pos[i, g + 1]
    zj = (1.0 - u)[:, None] * pos[j, g] + u[:, None] * pos[j, g + 1]
    if state.variant == DISTANCE:
        diff = zi - zj
        return np.exp(state.intercept_beta - np.einsum("ed,ed->e", diff, diff))
    return np.einsum("ed,ed->e", zi, zj)


def simulate_clpm(
    state: ModelState,
    grid: ChangePointGrid,
    seed: int = 0,
    dyads: list[tuple[int, int]] | None = None,
) -> EventList:
    """Exact draw from the model's inhomogeneous point process by segment-wise
    thinning: propose from a homogeneous process at the segment's maximum
    rate, accept each point with probability rate/maximum."""
    n = state.trajectories.num_nodes
    if dyads is None:
        ii, jj = dyad_pairs(n)
        pairs = zip(ii.tolist(), jj.tolist())
    else:
        pairs = ((min(i, j), max(i, j)) for i, j in dyads)
    knots = grid.knots
    seg_len = grid.segment_lengths
    times: list[np.ndarray] = []
    node_a: list[np.ndarray] = []
    node_b: list[np.ndarray] = []
    for i, j in pairs:
        rng = _dyad_rng(seed, i, j)
        for g in range(grid.num_knots - 1):
            bound = segment_rate_bound(state, grid, i, j, g)
            if bound <= 0.0:
                continue
            count = int(rng.poisson(bound * seg_len[g]))
            if count == 0:
                continue
            u = rng.uniform(0.0, 1.0, size=count)
            keep = rng.uniform(0.0, bound, size=count) < _segment_rate(
                state, i, j, g, u
            )
            if not np.any(keep):
                continue
            t = knots[g] + seg_len[g] * u[keep]
            times.append(t)
            node_a.append(np.full(t.size, i, dtype=np.int64))
            node_b.append(np.full(t.size, j, dtype=np.int64))
    if times:
        all_t = np.concatenate(times)
        all_a = np.concatenate(node_a)
        all_b = np.concatenate(node_b)
    else:
        all_t = np.empty(0)
        all_a = np.empty(0, dtype=np.int64)
        all_b = np.empty(0, dtype=np.int64)
    return EventList(all_t, all_a, all_b, grid.horizon, n)


SCENARIOS = ("sim1_blocks", "sim2_cohesion", "sim3_ring")


@dataclass(frozen=True)
class ScenarioSpec:
    """A named synthetic experiment plus its knobs."""

    scenario: str
    seed: int = 0
    num_nodes: int | None = None
    beta: float = 1.0
    radius: float = 1.0
    period: float = 10.0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(
                f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}"
            )


@dataclass(frozen=True)
class ScenarioData:
    events: EventList
    grid: ChangePointGrid
    truth: ModelState | None = None  # latent-trajectory scenarios only
    schedule: BlockSchedule | None = None  # blockmodel scenarios only


def simulate_scenario(spec: ScenarioSpec) -> ScenarioData:
    if spec.scenario == "sim1_blocks":
        schedule = make_sim1_schedule()
        events = simulate_blockmodel(schedule, spec.seed)
        grid = ChangePointGrid(schedule.segment_bounds)
        return ScenarioData(events, grid, schedule=schedule)
    if spec.scenario == "sim2_cohesion":
        schedule = make_sim2_schedule(spec.num_nodes or 30)
        events = simulate_blockmodel(schedule, spec.seed)
        grid = ChangePointGrid(schedule.segment_bounds)
        return ScenarioData(events, grid, schedule=schedule)
    trajectories, grid = make_ring_trajectories(
        spec.num_nodes or 20, spec.radius, spec.period
    )
    truth = ModelState(DISTANCE, trajectories, spec.beta)
    events = simulate_clpm(truth, grid, spec.seed)
    return ScenarioData(events, grid, truth=truth)
