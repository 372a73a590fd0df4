"""Readers for the two CSV interfaces this package consumes.

Snapshot files are long-format CSV with header ``time,node,x,y`` (extra
coordinate columns are tolerated; only the first two are plotted): one row
per node per time, every time listing the same nodes. Color-group files map
``node,color_group``; nodes absent from the file fall back to a default
color at render time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SnapshotTable:
    """All snapshots of one run: times (sorted), node names, and an array of
    coordinates with shape (num_times, num_nodes, 2)."""

    times: np.ndarray
    nodes: tuple[str, ...]
    coords: np.ndarray

    @property
    def num_times(self) -> int:
        return self.times.size

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def frame_index(self, t: float) -> int:
        """Index of the snapshot at time t; raises if t is not a snapshot
        time (frames can only be rendered where positions exist)."""
        hits = np.flatnonzero(
            np.isclose(self.times, t, rtol=1e-9, atol=1e-12)
        )
        if hits.size == 0:
            raise ValueError(
                f"time {t} is not among the snapshot times "
                f"[{self.times[0]:g} .. {self.times[-1]:g}] ({self.num_times} rows)"
            )
        return int(hits[0])

    def bounding_box(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Global ((xmin, xmax), (ymin, ymax)) across every snapshot."""
        xy = self.coords.reshape(-1, 2)
        (xmin, ymin), (xmax, ymax) = xy.min(axis=0), xy.max(axis=0)
        return (float(xmin), float(xmax)), (float(ymin), float(ymax))


def read_snapshots(path: str) -> SnapshotTable:
    by_time: dict[float, dict[str, tuple[float, float]]] = {}
    node_order: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:4]] != [
            "time", "node", "x", "y",
        ]:
            raise ValueError(
                f"{path}: expected snapshot header time,node,x,y[,...], "
                f"got {','.join(header) if header else 'empty file'}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 4:
                raise ValueError(f"{path}:{line_no}: expected >= 4 fields")
            t = float(row[0])
            node = row[1].strip()
            frame = by_time.setdefault(t, {})
            if node in frame:
                raise ValueError(f"{path}:{line_no}: duplicate node {node!r} at t={t}")
            frame[node] = (float(row[2]), float(row[3]))
            if node not in node_order:
                node_order.append(node)
    if not by_time:
        raise ValueError(f"{path}: no snapshot rows")
    times = np.array(sorted(by_time))
    nodes = tuple(node_order)
    coords = np.empty((times.size, len(nodes), 2))
    for k, t in enumerate(times):
        frame = by_time[t]
        if set(frame) != set(nodes):
            raise ValueError(
                f"{path}: snapshot at t={t} lists a different node set"
            )
        for n, name in enumerate(nodes):
            coords[k, n] = frame[name]
    coords.setflags(write=False)
    times.setflags(write=False)
    return SnapshotTable(times, nodes, coords)


def read_color_groups(path: str) -> dict[str, str]:
    """node -> group name; an empty (header-only) file is a valid 'no
    highlights' mapping."""
    groups: dict[str, str] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != [
            "node", "color_group",
        ]:
            raise ValueError(
                f"{path}: expected header node,color_group, "
                f"got {','.join(header) if header else 'empty file'}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{line_no}: expected 2 fields")
            groups[row[0].strip()] = row[1].strip()
    return groups
