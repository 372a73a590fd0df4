"""Command line front end: snapshot CSV in, PNG frames (and optionally a
GIF) out."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, render_animation, render_frames


def _parse_times(text: str) -> tuple[float, ...] | None:
    if text.strip().lower() == "all":
        return None
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clpm-viz",
        description="Render latent-position snapshot CSVs as scatter frames "
        "and animations.",
    )
    parser.add_argument("--snapshots", required=True, help="snapshot CSV (time,node,x,y)")
    parser.add_argument("--out-dir", required=True, help="directory for rendered images")
    parser.add_argument(
        "--labels", default=None, help="optional node,color_group CSV for highlighting"
    )
    parser.add_argument(
        "--times",
        type=_parse_times,
        default=None,
        metavar="T1,T2,... | all",
        help="comma-separated frame times (default: every snapshot time)",
    )
    parser.add_argument(
        "--axis",
        choices=("fixed", "auto"),
        default="fixed",
        help="shared global limits or per-frame limits (default: fixed)",
    )
    parser.add_argument("--prefix", default="frame", help="frame filename prefix")
    parser.add_argument("--dpi", type=int, default=100)
    parser.add_argument(
        "--animation",
        default=None,
        metavar="PATH",
        help="also write a GIF animation to PATH",
    )
    parser.add_argument("--fps", type=float, default=10.0, help="animation frame rate")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        snapshot_path=args.snapshots,
        out_dir=args.out_dir,
        label_path=args.labels,
        frame_times=args.times,
        axis_policy=args.axis,
        prefix=args.prefix,
        dpi=args.dpi,
    )
    try:
        frames = render_frames(spec)
        print(f"wrote {len(frames)} frame(s) to {args.out_dir}")
        if args.animation is not None:
            path = render_animation(spec, fps=args.fps, out_path=args.animation, frames=frames)
            print(f"wrote animation {path} ({len(frames)} frames @ {args.fps:g} fps)")
    except (OSError, ValueError) as exc:
        print(f"clpm-viz: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
