"""Continuous latent position models for timestamped pairwise interactions.

Nodes move along piecewise-linear latent trajectories on a shared grid of
change points; each dyad interacts as an inhomogeneous Poisson process whose
rate is either the dot product of the two positions (``projection`` variant)
or exp(intercept minus squared distance) (``distance`` variant). The package
provides exact likelihoods, penalized gradient-ascent fitting with an
unbiased node-minibatch estimator, synthetic-data generators, and CSV/JSON
io, all driveable from the ``clpm`` command line.
"""

from .distance import (
    SegmentGaussianParams,
    distance_integral,
    distance_loglik,
    distance_rate,
    segment_params,
)
from .generators import (
    BlockSchedule,
    ScenarioData,
    ScenarioSpec,
    dyad_segment_mean,
    make_ring_trajectories,
    make_sim1_schedule,
    make_sim2_schedule,
    make_static_clusters,
    segment_rate_bound,
    simulate_blockmodel,
    simulate_clpm,
    simulate_scenario,
)
from .io import (
    ModelFile,
    parse_grid_spec,
    parse_times_spec,
    read_events,
    read_model,
    write_events,
    write_model,
    write_snapshots,
)
from .optimizer import (
    FitDivergedError,
    FitResult,
    NodeObjectiveTerm,
    OptimizerConfig,
    fit,
    finite_difference_gradient,
    gradient,
    gradient_discrepancy,
    initial_state,
    minibatch_gradient_estimate,
    node_term,
    objective,
    pack_state,
    unpack_state,
)
from .penalties import PenaltyParams, penalty_distance, penalty_projection
from .projection import (
    DegenerateRateWarning,
    DotProductTable,
    projection_integral,
    projection_loglik,
    projection_rate,
)
from .trajectories import (
    DISTANCE,
    PROJECTION,
    ChangePointGrid,
    EventIndex,
    EventList,
    ModelState,
    TrajectorySet,
    events_by_dyad,
    interpolate,
    interpolate_all,
    locate_segment,
)

__version__ = "0.1.0"

__all__ = [
    "BlockSchedule",
    "ChangePointGrid",
    "DegenerateRateWarning",
    "DISTANCE",
    "DotProductTable",
    "EventIndex",
    "EventList",
    "FitDivergedError",
    "FitResult",
    "ModelFile",
    "ModelState",
    "NodeObjectiveTerm",
    "OptimizerConfig",
    "PenaltyParams",
    "PROJECTION",
    "ScenarioData",
    "ScenarioSpec",
    "SegmentGaussianParams",
    "TrajectorySet",
    "distance_integral",
    "distance_loglik",
    "distance_rate",
    "dyad_segment_mean",
    "events_by_dyad",
    "finite_difference_gradient",
    "fit",
    "gradient",
    "gradient_discrepancy",
    "initial_state",
    "interpolate",
    "interpolate_all",
    "locate_segment",
    "make_ring_trajectories",
    "make_sim1_schedule",
    "make_sim2_schedule",
    "make_static_clusters",
    "minibatch_gradient_estimate",
    "node_term",
    "objective",
    "pack_state",
    "parse_grid_spec",
    "parse_times_spec",
    "penalty_distance",
    "penalty_projection",
    "projection_integral",
    "projection_loglik",
    "projection_rate",
    "read_events",
    "read_model",
    "segment_params",
    "segment_rate_bound",
    "simulate_blockmodel",
    "simulate_clpm",
    "simulate_scenario",
    "unpack_state",
    "write_events",
    "write_model",
    "write_snapshots",
]
