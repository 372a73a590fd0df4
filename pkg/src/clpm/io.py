"""File formats: event-list CSV, snapshot CSV, JSON model persistence.

Event files are CSV with header ``time,source,target``; node labels are
arbitrary strings mapped to dense ids in first-appearance order. All floats
are emitted with 17 significant digits so write -> read round-trips exactly,
and every writer goes through a temp file + rename so partial files are never
left behind.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .penalties import PenaltyParams
from .trajectories import (
    ChangePointGrid,
    EventList,
    ModelState,
    TrajectorySet,
    interpolate_all,
)

EVENT_FIELDS = ("time", "source", "target")
MODEL_FORMAT = "clpm-model"


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_events(path: str, horizon: float | None = None) -> EventList:
    """Parse an event CSV. The horizon defaults to the latest event time."""
    labels: dict[str, int] = {}
    times: list[float] = []
    node_a: list[int] = []
    node_b: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected header "
                             f"{','.join(EVENT_FIELDS)}") from None
        if tuple(h.strip().lower() for h in header) != EVENT_FIELDS:
            raise ValueError(
                f"{path}:1: expected header {','.join(EVENT_FIELDS)}, "
                f"got {','.join(header)}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{line_no}: expected 3 fields, got {len(row)}")
            raw_t, src, dst = (f.strip() for f in row)
            if src == dst:
                raise ValueError(f"{path}:{line_no}: self loop on node {src!r}")
            try:
                t = float(raw_t)
            except ValueError:
                raise ValueError(
                    f"{path}:{line_no}: unparseable time {raw_t!r}"
                ) from None
            for name in (src, dst):
                if name not in labels:
                    labels[name] = len(labels)
            times.append(t)
            node_a.append(labels[src])
            node_b.append(labels[dst])
    if horizon is None:
        horizon = max(times) if times else 0.0
    return EventList(
        np.asarray(times),
        np.asarray(node_a, dtype=np.int64),
        np.asarray(node_b, dtype=np.int64),
        horizon,
        len(labels),
        tuple(labels),
    )


def write_events(events: EventList, path: str) -> None:
    lines = [",".join(EVENT_FIELDS)]
    for t, a, b in events:
        lines.append(f"{_fmt(t)},{events.labels[a]},{events.labels[b]}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_snapshots(
    state: ModelState,
    grid: ChangePointGrid,
    times: np.ndarray,
    path: str,
    labels: tuple[str, ...] | None = None,
) -> None:
    """Interpolated positions of every node at every requested time, one row
    per (time, node): ``time,node,x,y[,...]``."""
    dim = state.trajectories.dim_d
    labels = labels or tuple(str(i) for i in range(state.trajectories.num_nodes))
    header = ["time", "node"] + [f"coord{k}" for k in range(dim)]
    if dim >= 1:
        header[2] = "x"
    if dim >= 2:
        header[3] = "y"
    if dim >= 3:
        header[4] = "z"
    lines = [",".join(header)]
    for t in np.asarray(times, dtype=float).ravel():
        pos = interpolate_all(state.trajectories, grid, t)
        for node, label in enumerate(labels):
            coords = ",".join(_fmt(c) for c in pos[node])
            lines.append(f"{_fmt(t)},{label},{coords}")
    _atomic_write(path, "\n".join(lines) + "\n")


@dataclass(frozen=True)
class ModelFile:
    """Everything needed to reload a (fitted) model and keep working with it."""

    state: ModelState
    grid: ChangePointGrid
    labels: tuple[str, ...]
    penalty_params: PenaltyParams = PenaltyParams()
    metadata: dict = field(default_factory=dict)


def write_model(model: ModelFile, path: str) -> None:
    state = model.state
    payload = {
        "format": MODEL_FORMAT,
        "version": 1,
        "variant": state.variant,
        "intercept_beta": state.intercept_beta,
        "dim": state.trajectories.dim_d,
        "grid_knots": model.grid.knots.tolist(),
        "node_labels": list(model.labels),
        "positions": state.trajectories.positions.tolist(),
        "penalty": {
            "sigma0_sq": model.penalty_params.sigma0_sq,
            "sigma_sq": model.penalty_params.sigma_sq,
            "mu_angle": model.penalty_params.mu_angle,
        },
        "metadata": dict(model.metadata),
    }
    _atomic_write(path, json.dumps(payload, indent=1))


def read_model(path: str) -> ModelFile:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    trajectories = TrajectorySet(
        np.asarray(payload["positions"], dtype=float), int(payload["dim"])
    )
    state = ModelState(
        payload["variant"], trajectories, float(payload["intercept_beta"])
    )
    grid = ChangePointGrid(np.asarray(payload["grid_knots"], dtype=float))
    pen = payload.get("penalty", {})
    params = PenaltyParams(
        sigma0_sq=float(pen.get("sigma0_sq", 1.0)),
        sigma_sq=float(pen.get("sigma_sq", 0.1)),
        mu_angle=float(pen.get("mu_angle", 1.0)),
    )
    return ModelFile(
        state,
        grid,
        tuple(payload["node_labels"]),
        params,
        dict(payload.get("metadata", {})),
    )


def write_trace(trace: np.ndarray, path: str) -> None:
    lines = ["iteration,objective"]
    for it, val in trace:
        lines.append(f"{int(it)},{_fmt(val)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def parse_times_spec(text: str) -> np.ndarray:
    """``start:end:count`` for a uniform grid, or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected start:end:count, got {text!r}")
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 2:
            raise ValueError("a uniform grid needs at least 2 points")
        return np.linspace(start, end, count)
    values = [float(f) for f in text.split(",") if f.strip()]
    if not values:
        raise ValueError(f"no times in {text!r}")
    return np.asarray(values)


def parse_grid_spec(text: str) -> ChangePointGrid:
    return ChangePointGrid(parse_times_spec(text))
