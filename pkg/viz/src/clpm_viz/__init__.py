"""Visualization companion for latent-position model output.

Consumes the long-format snapshot CSV (``time,node,x,y``) and the optional
``node,color_group`` highlight CSV, producing per-time scatter frames and
GIF animations.
"""

from .render import PlotSpec, RenderedFrame, render_animation, render_frames
from .snapshots import SnapshotTable, read_color_groups, read_snapshots

__all__ = [
    "PlotSpec",
    "RenderedFrame",
    "SnapshotTable",
    "read_color_groups",
    "read_snapshots",
    "render_animation",
    "render_frames",
]

__version__ = "0.1.0"
