"""Core data types: event lists, change-point grids, piecewise-linear trajectories.

Latent positions are stored only at the change points; positions at any
other time are linear interpolations between the two surrounding knots.
All containers are frozen after construction (their numpy buffers are
marked read-only), so they can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PROJECTION = "projection"
DISTANCE = "distance"
VARIANTS = (PROJECTION, DISTANCE)


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class EventList:
    """Timestamped undirected interactions on [0, horizon].

    Events are canonicalized on construction: endpoints are swapped so that
    node_a < node_b, and rows are stably sorted by time. ``labels`` maps the
    dense integer ids back to the original node identifiers (defaults to
    stringified ids).
    """

    times: np.ndarray
    node_a: np.ndarray
    node_b: np.ndarray
    horizon: float
    num_nodes: int
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        a = np.asarray(self.node_a, dtype=np.int64).ravel()
        b = np.asarray(self.node_b, dtype=np.int64).ravel()
        if not (times.shape == a.shape == b.shape):
            raise ValueError("times, node_a, node_b must have equal length")
        horizon = float(self.horizon)
        if horizon < 0 or not np.isfinite(horizon):
            raise ValueError(f"horizon must be finite and nonnegative, got {horizon}")
        if times.size:
            if times.min() < 0 or times.max() > horizon:
                raise ValueError("event times must lie in [0, horizon]")
            if np.any(a == b):
                raise ValueError("self loops are not allowed")
            lo = np.minimum(a, b)
            hi = np.maximum(a, b)
            if lo.min() < 0 or hi.max() >= self.num_nodes:
                raise ValueError("node ids must lie in [0, num_nodes)")
            order = np.argsort(times, kind="stable")
            times, a, b = times[order], lo[order], hi[order]
        labels = tuple(self.labels) if self.labels else tuple(
            str(i) for i in range(self.num_nodes)
        )
        if len(labels) != self.num_nodes:
            raise ValueError("labels must have one entry per node")
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "node_a", _frozen(a))
        object.__setattr__(self, "node_b", _frozen(b))
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.times.size

    def __iter__(self):
        return zip(self.times.tolist(), self.node_a.tolist(), self.node_b.tolist())


@dataclass(frozen=True)
class ChangePointGrid:
    """Shared time knots 0 = eta_0 < ... < eta_{K-1} = horizon."""

    knots: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float).ravel()
        if knots.size < 2:
            raise ValueError("grid needs at least two knots")
        if knots[0] != 0.0:
            raise ValueError("first knot must be 0")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "knots", _frozen(knots))

    @property
    def num_knots(self) -> int:
        return self.knots.size

    @property
    def horizon(self) -> float:
        return float(self.knots[-1])

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.diff(self.knots)

    @classmethod
    def uniform(cls, horizon: float, num_knots: int) -> "ChangePointGrid":
        return cls(np.linspace(0.0, horizon, num_knots))


@dataclass(frozen=True)
class TrajectorySet:
    """Latent positions of every node at every knot, shape (N, K, d)."""

    positions: np.ndarray
    dim_d: int = 2

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 3:
            raise ValueError(f"positions must be (N, K, d), got shape {pos.shape}")
        if pos.shape[2] != self.dim_d:
            raise ValueError(
                f"dim_d={self.dim_d} does not match positions shape {pos.shape}"
            )
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "positions", _frozen(pos))

    @property
    def num_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def num_knots(self) -> int:
        return self.positions.shape[1]


@dataclass(frozen=True)
class ModelState:
    """A model variant plus its parameters.

    The projection variant has no free intercept; its ``intercept_beta`` is
    pinned at 0. Positions for a fitted projection model are kept strictly
    positive by the optimizer's softplus parameterization; use
    :meth:`require_positive` before operations that assume the positive
    orthant (angular penalties, rate logs).
    """

    variant: str
    trajectories: TrajectorySet
    intercept_beta: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        beta = float(self.intercept_beta)
        if self.variant == PROJECTION and beta != 0.0:
            raise ValueError("projection variant carries no intercept")
        if not np.isfinite(beta):
            raise ValueError("intercept must be finite")
        object.__setattr__(self, "intercept_beta", beta)

    def require_variant(self, variant: str, op: str) -> None:
        if self.variant != variant:
            raise ValueError(f"{op} requires the {variant} variant, got {self.variant}")

    def require_positive(self) -> None:
        if np.any(self.trajectories.positions <= 0):
            raise ValueError("projection-variant positions must be strictly positive")


def locate_segment(grid: ChangePointGrid, t: float) -> int:
    """Index g of the segment [eta_g, eta_{g+1}) containing t; t = horizon maps
    to the last segment."""
    knots = grid.knots
    if t < knots[0] or t > knots[-1]:
        raise ValueError(f"time {t} outside [0, {knots[-1]}]")
    g = int(np.searchsorted(knots, t, side="right")) - 1
    return min(g, knots.size - 2)


def locate_segments(grid: ChangePointGrid, times: np.ndarray) -> np.ndarray:
    """Vectorized :func:`locate_segment`."""
    knots = grid.knots
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < knots[0] or times.max() > knots[-1]):
        raise ValueError("times outside the grid span")
    g = np.searchsorted(knots, times, side="right") - 1
    return np.minimum(g, knots.size - 2)


def local_coords(grid: ChangePointGrid, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Segment indices and within-segment coordinates u in [0, 1]."""
    times = np.asarray(times, dtype=float)
    g = locate_segments(grid, times)
    knots = grid.knots
    u = (times - knots[g]) / (knots[g + 1] - knots[g])
    return g, u


def interpolate(
    trajectories: TrajectorySet, grid: ChangePointGrid, node: int, t: float
) -> np.ndarray:
    """Position of ``node`` at time t, linearly interpolated between knots."""
    g = locate_segment(grid, t)
    knots = grid.knots
    u = (t - knots[g]) / (knots[g + 1] - knots[g])
    pos = trajectories.positions
    return (1.0 - u) * pos[node, g] + u * pos[node, g + 1]


def interpolate_all(
    trajectories: TrajectorySet, grid: ChangePointGrid, t: float
) -> np.ndarray:
    """Positions of every node at time t, shape (N, d)."""
    g = locate_segment(grid, t)
    knots = grid.knots
    u = (t - knots[g]) / (knots[g + 1] - knots[g])
    pos = trajectories.positions
    return (1.0 - u) * pos[:, g] + u * pos[:, g + 1]


def events_by_dyad(events: EventList) -> dict[tuple[int, int], np.ndarray]:
    """Partition event times per unordered pair. Pairs without events are
    simply absent from the map."""
    out: dict[tuple[int, int], list[float]] = {}
    for t, a, b in events:
        out.setdefault((a, b), []).append(t)
    return {k: np.asarray(v) for k, v in out.items()}


def dyad_pairs(num_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """All unordered pairs i < j in lexicographic order (the canonical
    reduction order used throughout)."""
    ii, jj = np.triu_indices(num_nodes, k=1)
    return ii.astype(np.int64), jj.astype(np.int64)


@dataclass(frozen=True)
class EventIndex:
    """Events resolved against a grid: segment index and local coordinate."""

    times: np.ndarray
    node_a: np.ndarray
    node_b: np.ndarray
    seg: np.ndarray
    u: np.ndarray

    @classmethod
    def build(cls, events: EventList, grid: ChangePointGrid) -> "EventIndex":
        if events.times.size and events.times.max() > grid.horizon:
            raise ValueError("event times exceed the grid horizon")
        seg, u = local_coords(grid, events.times)
        return cls(events.times, events.node_a, events.node_b, seg, u)

    def __len__(self) -> int:
        return self.times.size
