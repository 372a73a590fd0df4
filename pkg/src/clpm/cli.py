"""Command-line interface.

Subcommands: simulate, fit, snapshot, loglik, gradcheck, selftest.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import generators, selftest
from .generators import ScenarioSpec, simulate_clpm, simulate_scenario
from .io import (
    ModelFile,
    parse_grid_spec,
    parse_times_spec,
    read_events,
    read_model,
    write_events,
    write_model,
    write_snapshots,
    write_trace,
)
from .optimizer import (
    ADAPTIVE_MOMENTS,
    FIXED,
    FULL_BATCH,
    MINIBATCH,
    OptimizerConfig,
    fit,
    gradient_discrepancy,
    initial_state,
    objective,
)
from .penalties import PenaltyParams
from .trajectories import DISTANCE, PROJECTION, EventList

_SCENARIO_ALIASES = {
    "sim1": "sim1_blocks",
    "sim2": "sim2_cohesion",
    "sim3": "sim3_ring",
}


def _add_penalty_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--sigma0",
        type=float,
        default=1.0,
        metavar="VAR",
        help="initial-position shrinkage variance (squared-distance variant)",
    )
    parser.add_argument(
        "--sigma",
        type=float,
        default=0.1,
        metavar="VAR",
        help="increment variance per unit time",
    )
    parser.add_argument(
        "--mu-angle",
        type=float,
        default=1.0,
        help="truncated-normal mean for turning-angle cosines (dot-product variant)",
    )


def _penalty_from(args) -> PenaltyParams:
    return PenaltyParams(
        sigma0_sq=args.sigma0, sigma_sq=args.sigma, mu_angle=args.mu_angle
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clpm",
        description=(
            "Fit and simulate continuous latent position models for "
            "timestamped pairwise interactions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic event list")
    p_sim.add_argument(
        "--scenario",
        choices=sorted(_SCENARIO_ALIASES) + sorted(generators.SCENARIOS),
        help="named synthetic experiment (omit when using --model)",
    )
    p_sim.add_argument("--model", help="simulate from a saved model file instead")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--num-nodes", type=int, default=None)
    p_sim.add_argument("--beta", type=float, default=1.0, help="ring-scenario intercept")
    p_sim.add_argument("--radius", type=float, default=1.0)
    p_sim.add_argument("--period", type=float, default=10.0)
    p_sim.add_argument("--out", required=True, help="events CSV path")
    p_sim.add_argument(
        "--truth-out",
        help="write true trajectory snapshots (latent-trajectory scenarios only)",
    )
    p_sim.add_argument(
        "--truth-times",
        default="0:10:101",
        help="snapshot times for --truth-out (start:end:count or list)",
    )

    p_fit = sub.add_parser("fit", help="fit a model to an events CSV")
    p_fit.add_argument("--events", required=True)
    p_fit.add_argument("--variant", choices=(PROJECTION, DISTANCE), required=True)
    p_fit.add_argument(
        "--knots",
        required=True,
        help="change-point grid: start:end:count for uniform, or a comma list",
    )
    _add_penalty_flags(p_fit)
    p_fit.add_argument("--step", type=float, default=0.01)
    p_fit.add_argument("--iters", type=int, default=500)
    p_fit.add_argument(
        "--batch-size",
        type=int,
        default=0,
        help="node-minibatch size; 0 means full-batch",
    )
    p_fit.add_argument("--step-rule", choices=(ADAPTIVE_MOMENTS, FIXED),
                       default=ADAPTIVE_MOMENTS)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--dim", type=int, default=2)
    p_fit.add_argument("--horizon", type=float, default=None,
                       help="override the event-list horizon")
    p_fit.add_argument("--out", required=True, help="model JSON path")
    p_fit.add_argument("--trace-out", help="objective trace CSV path")

    p_snap = sub.add_parser("snapshot", help="interpolate a model onto a time grid")
    p_snap.add_argument("--model", required=True)
    p_snap.add_argument("--times", required=True,
                        help="start:end:count or a comma list")
    p_snap.add_argument("--out", required=True)

    p_ll = sub.add_parser("loglik", help="evaluate a model on an events CSV")
    p_ll.add_argument("--model", required=True)
    p_ll.add_argument("--events", required=True)
    p_ll.add_argument("--horizon", type=float, default=None)

    p_gc = sub.add_parser(
        "gradcheck", help="compare analytic gradients with finite differences"
    )
    p_gc.add_argument("--events", required=True)
    p_gc.add_argument("--model", help="check at a saved model instead of a random one")
    p_gc.add_argument("--variant", choices=(PROJECTION, DISTANCE), default=DISTANCE)
    p_gc.add_argument("--knots", help="grid for the random model (required without --model)")
    _add_penalty_flags(p_gc)
    p_gc.add_argument("--seed", type=int, default=0)
    p_gc.add_argument("--dim", type=int, default=2)
    p_gc.add_argument("--horizon", type=float, default=None)
    p_gc.add_argument("--tol", type=float, default=1e-5)
    p_gc.add_argument("--max-coords", type=int, default=64,
                      help="sample at most this many coordinates")

    p_st = sub.add_parser("selftest", help="run the built-in diagnostic suite")
    p_st.add_argument("--fast", action="store_true")
    return parser


def _cmd_simulate(args) -> int:
    if (args.model is None) == (args.scenario is None):
        print("simulate: pass exactly one of --scenario or --model", file=sys.stderr)
        return 2
    if args.model:
        model = read_model(args.model)
        sim = simulate_clpm(model.state, model.grid, args.seed)
        events = EventList(
            sim.times, sim.node_a, sim.node_b, sim.horizon, sim.num_nodes,
            model.labels,
        )
        write_events(events, args.out)
        print(f"wrote {len(events)} events to {args.out}")
        return 0
    name = _SCENARIO_ALIASES.get(args.scenario, args.scenario)
    spec = ScenarioSpec(
        scenario=name,
        seed=args.seed,
        num_nodes=args.num_nodes,
        beta=args.beta,
        radius=args.radius,
        period=args.period,
    )
    data = simulate_scenario(spec)
    write_events(data.events, args.out)
    print(f"wrote {len(data.events)} events to {args.out}")
    if args.truth_out:
        if data.truth is None:
            print(
                "simulate: --truth-out applies only to latent-trajectory "
                "scenarios (sim3_ring); skipping",
                file=sys.stderr,
            )
        else:
            times = parse_times_spec(args.truth_times)
            write_snapshots(data.truth, data.grid, times, args.truth_out)
            print(f"wrote true snapshots to {args.truth_out}")
    return 0


def _cmd_fit(args) -> int:
    events = read_events(args.events, args.horizon)
    grid = parse_grid_spec(args.knots)
    params = _penalty_from(args)
    config = OptimizerConfig(
        mode=MINIBATCH if args.batch_size else FULL_BATCH,
        batch_size=args.batch_size or None,
        step_rule=args.step_rule,
        step=args.step,
        max_iters=args.iters,
        seed=args.seed,
    )
    result = fit(events, grid, args.variant, params, config, dim=args.dim)
    metadata = {
        "seed": args.seed,
        "iterations": int(result.iterations_run),
        "final_objective": result.best_objective,
        "converged": bool(result.converged),
        "events_file": args.events,
        "num_events": len(events),
    }
    write_model(ModelFile(result.state, grid, events.labels, params, metadata),
                args.out)
    print(
        f"fit {args.variant} model: {result.iterations_run} iterations, "
        f"objective {result.best_objective:.6f} "
        f"(best at iteration {result.best_iteration})"
    )
    print(f"wrote model to {args.out}")
    if args.trace_out:
        write_trace(result.trace, args.trace_out)
        print(f"wrote trace to {args.trace_out}")
    return 0


def _cmd_snapshot(args) -> int:
    model = read_model(args.model)
    times = parse_times_spec(args.times)
    write_snapshots(model.state, model.grid, times, args.out, model.labels)
    print(f"wrote {times.size * model.state.trajectories.num_nodes} rows to {args.out}")
    return 0


def _cmd_loglik(args) -> int:
    model = read_model(args.model)
    events = read_events(args.events, args.horizon)
    if events.num_nodes > model.state.trajectories.num_nodes:
        print("loglik: events reference more nodes than the model", file=sys.stderr)
        return 1
    from . import distance as dist_mod
    from . import penalties as pen_mod
    from . import projection as proj_mod

    if model.state.variant == DISTANCE:
        ll = dist_mod.distance_loglik(model.state, model.grid, events)
        pen = pen_mod.penalty_distance(
            model.state.trajectories, model.grid, model.penalty_params
        )
    else:
        ll = proj_mod.projection_loglik(model.state, model.grid, events)
        pen = pen_mod.penalty_projection(
            model.state.trajectories, model.grid, model.penalty_params
        )
    print(f"log-likelihood: {ll:.10g}")
    print(f"penalty:        {pen:.10g}")
    print(f"objective:      {ll + pen:.10g}")
    return 0


def _cmd_gradcheck(args) -> int:
    events = read_events(args.events, args.horizon)
    if args.model:
        model = read_model(args.model)
        state, grid, params = model.state, model.grid, model.penalty_params
    else:
        if not args.knots:
            print("gradcheck: --knots is required without --model", file=sys.stderr)
            return 2
        grid = parse_grid_spec(args.knots)
        params = _penalty_from(args)
        state = initial_state(events, grid, args.variant, args.dim, args.seed)
    size = state.trajectories.positions.size + (1 if state.variant == DISTANCE else 0)
    if size > args.max_coords:
        rng = np.random.default_rng(args.seed)
        coords = np.unique(rng.integers(0, size, size=args.max_coords))
    else:
        coords = None
    disc = gradient_discrepancy(state, grid, events, params, coords=coords)
    print(f"max relative finite-difference discrepancy: {disc:.3e}")
    ok = disc < args.tol
    print("PASS" if ok else f"FAIL (tolerance {args.tol:g})")
    return 0 if ok else 1


def _cmd_selftest(args) -> int:
    return 0 if selftest.run_selftest(fast=args.fast) else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "fit": _cmd_fit,
        "snapshot": _cmd_snapshot,
        "loglik": _cmd_loglik,
        "gradcheck": _cmd_gradcheck,
        "selftest": _cmd_selftest,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"clpm {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
