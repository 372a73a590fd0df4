"""Frame and animation rendering for latent-position snapshots.

Each requested time becomes one scatter plot of the node positions at that
time; frames can then be stitched into a GIF at a configurable frame rate.
With the default ``axis_policy="fixed"`` every frame shares the global
bounding box of the whole snapshot table (plus a small margin) so that node
motion, not axis rescaling, is what the eye sees between frames.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from PIL import Image

from .snapshots import SnapshotTable, read_color_groups, read_snapshots

DEFAULT_COLOR = "0.6"
DEFAULT_MARGIN = 0.05
_GROUP_CMAP = "tab10"


@dataclass(frozen=True)
class PlotSpec:
    """What to render: which snapshot file, which times, how to choose axis
    limits, and where the images go."""

    snapshot_path: str
    out_dir: str
    label_path: str | None = None
    frame_times: tuple[float, ...] | None = None  # None = every snapshot time
    axis_policy: str = "fixed"  # "fixed" (shared limits) or "auto" (per frame)
    prefix: str = "frame"
    dpi: int = 100
    margin: float = DEFAULT_MARGIN
    point_size: float = field(default=40.0)

    def __post_init__(self) -> None:
        if self.axis_policy not in ("fixed", "auto"):
            raise ValueError(
                f"axis_policy must be 'fixed' or 'auto', got {self.axis_policy!r}"
            )


@dataclass(frozen=True)
class RenderedFrame:
    """One written image plus the state needed to check frame invariants."""

    path: str
    time: float
    xlim: tuple[float, float]
    ylim: tuple[float, float]


def _expand_limits(lo: float, hi: float, margin: float) -> tuple[float, float]:
    span = hi - lo
    pad = margin * span if span > 0 else max(abs(lo), 1.0) * margin
    return lo - pad, hi + pad


def _node_colors(
    nodes: tuple[str, ...], groups: dict[str, str]
) -> tuple[list, dict[str, object]]:
    """Per-node colors. Group names get stable colors by sorted order; nodes
    without a group use the default gray, with a warning when the label file
    named some nodes but missed others."""
    if not groups:
        return [DEFAULT_COLOR] * len(nodes), {}
    names = sorted(set(groups.values()))
    cmap = plt.get_cmap(_GROUP_CMAP)
    palette = {name: cmap(k % cmap.N) for k, name in enumerate(names)}
    missing = [n for n in nodes if n not in groups]
    if missing:
        warnings.warn(
            f"{len(missing)} of {len(nodes)} nodes have no color group; "
            "using the default color for them",
            stacklevel=3,
        )
    colors = [palette[groups[n]] if n in groups else DEFAULT_COLOR for n in nodes]
    return colors, palette


def _frame_limits(
    table: SnapshotTable, spec: PlotSpec, frame_idx: int
) -> tuple[tuple[float, float], tuple[float, float]]:
    if spec.axis_policy == "fixed":
        (xmin, xmax), (ymin, ymax) = table.bounding_box()
    else:
        xy = table.coords[frame_idx]
        xmin, ymin = xy.min(axis=0)
        xmax, ymax = xy.max(axis=0)
    return (
        _expand_limits(float(xmin), float(xmax), spec.margin),
        _expand_limits(float(ymin), float(ymax), spec.margin),
    )


def render_frames(spec: PlotSpec) -> list[RenderedFrame]:
    """Render one PNG per requested time and return them in time order.

    Raises ValueError if a requested time has no snapshot; rendering never
    interpolates.
    """
    table = read_snapshots(spec.snapshot_path)
    groups = read_color_groups(spec.label_path) if spec.label_path else {}
    colors, palette = _node_colors(table.nodes, groups)
    if spec.frame_times is None:
        indices = list(range(table.num_times))
    else:
        indices = [table.frame_index(t) for t in spec.frame_times]
    os.makedirs(spec.out_dir, exist_ok=True)

    rendered: list[RenderedFrame] = []
    for seq, idx in enumerate(indices):
        t = float(table.times[idx])
        xlim, ylim = _frame_limits(table, spec, idx)
        fig, ax = plt.subplots(figsize=(6, 6), dpi=spec.dpi)
        try:
            ax.scatter(
                table.coords[idx, :, 0],
                table.coords[idx, :, 1],
                s=spec.point_size,
                c=colors,
                edgecolors="black",
                linewidths=0.5,
            )
            ax.set_xlim(*xlim)
            ax.set_ylim(*ylim)
            ax.set_aspect("equal")
            ax.set_xlabel("x")
            ax.set_ylabel("y")
            ax.set_title(f"t = {t:g}")
            if palette:
                handles = [
                    plt.Line2D(
                        [], [], linestyle="", marker="o",
                        markerfacecolor=color, markeredgecolor="black",
                        label=name,
                    )
                    for name, color in sorted(palette.items())
                ]
                ax.legend(handles=handles, loc="upper right", fontsize="small")
            path = os.path.join(spec.out_dir, f"{spec.prefix}_{seq:04d}.png")
            fig.savefig(path)
        finally:
            plt.close(fig)
        rendered.append(RenderedFrame(path, t, xlim, ylim))
    return rendered


def render_animation(
    spec: PlotSpec,
    fps: float = 10.0,
    out_path: str | None = None,
    frames: list[RenderedFrame] | None = None,
) -> str:
    """Stitch frames into a GIF at ``fps`` frames per second.

    Frames are rendered from ``spec`` unless an existing list is passed in.
    Zero frames is an error; a single frame produces a one-frame animation
    with a warning (it will not visibly animate).
    """
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    if frames is None:
        frames = render_frames(spec)
    if len(frames) == 0:
        raise ValueError("cannot animate zero frames")
    if len(frames) == 1:
        warnings.warn("animating a single frame; output will be static")
    if out_path is None:
        out_path = os.path.join(spec.out_dir, f"{spec.prefix}_animation.gif")
    images = [Image.open(f.path).convert("P", palette=Image.ADAPTIVE) for f in frames]
    duration_ms = int(round(1000.0 / fps))
    images[0].save(
        out_path,
        save_all=True,
        append_images=images[1:],
        duration=duration_ms,
        loop=0,
    )
    for im in images:
        im.close()
    return out_path
