"""Penalized maximum-likelihood fitting by (stochastic) gradient ascent.

The penalized objective splits into per-node terms psi_i: half of every dyad
term that touches node i plus node i's own penalty. All evaluators here take
a vector of node multiplicities m and compute sum_i m_i * psi_i and its
gradient; the full objective is m = 1, the node terms are unit vectors, and
the minibatch estimator is m = bincount(batch) * n/|batch|. That makes the
estimator's unbiasedness an arithmetic identity rather than a property of
separate code paths.

For the dot-product variant the free parameters are unconstrained reals w
mapped elementwise to strictly positive coordinates via softplus,
z = log(1 + e^w); all gradients are reported in w-space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import distance, penalties, projection
from .penalties import PenaltyParams
from .trajectories import (
    DISTANCE,
    PROJECTION,
    ChangePointGrid,
    EventIndex,
    EventList,
    ModelState,
    TrajectorySet,
)

FULL_BATCH = "full_batch"
MINIBATCH = "minibatch"
FIXED = "fixed"
ADAPTIVE_MOMENTS = "adaptive_moments"


class FitDivergedError(RuntimeError):
    """The objective or gradient became non-finite during fitting."""

    def __init__(self, iteration: int, block: str):
        self.iteration = iteration
        self.block = block
        super().__init__(
            f"non-finite {block} at iteration {iteration}; "
            "reduce the step size or rescale the data"
        )


@dataclass(frozen=True)
class OptimizerConfig:
    mode: str = FULL_BATCH
    batch_size: int | None = None  # minibatch mode; default max(1, n // 10)
    step_rule: str = ADAPTIVE_MOMENTS
    step: float = 0.01
    decay1: float = 0.9
    decay2: float = 0.999
    eps: float = 1e-8
    max_iters: int = 500
    seed: int = 0
    grad_check: bool = False
    convergence_tol: float = 1e-7
    convergence_window: int = 25
    eval_every: int = 1

    def __post_init__(self):
        if self.mode not in (FULL_BATCH, MINIBATCH):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.step_rule not in (FIXED, ADAPTIVE_MOMENTS):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")


@dataclass(frozen=True)
class NodeObjectiveTerm:
    node: int
    value: float


@dataclass(frozen=True)
class FitResult:
    state: ModelState
    trace: np.ndarray  # rows of (iteration, objective)
    best_objective: float
    best_iteration: int
    iterations_run: int
    converged: bool


def softplus(w: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, w)


def inv_softplus(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise ValueError("softplus inverse requires strictly positive input")
    return z + np.log(-np.expm1(-z))


def _softplus_chain(z: np.ndarray) -> np.ndarray:
    """d softplus(w)/dw expressed through z = softplus(w)."""
    return -np.expm1(-z)


def _check_compat(state: ModelState, grid: ChangePointGrid) -> None:
    if state.trajectories.num_knots != grid.num_knots:
        raise ValueError("model and grid disagree on the number of knots")


def pack_state(state: ModelState) -> np.ndarray:
    """Flatten the free parameters: [beta, positions...] for the
    squared-distance variant, pre-softplus coordinates for the dot-product
    variant."""
    z = state.trajectories.positions
    if state.variant == DISTANCE:
        return np.concatenate(([state.intercept_beta], z.ravel()))
    return inv_softplus(z).ravel()


def unpack_state(vec: np.ndarray, template: ModelState) -> ModelState:
    """Inverse of :func:`pack_state`, shaped like ``template``."""
    shape = template.trajectories.positions.shape
    dim = template.trajectories.dim_d
    if template.variant == DISTANCE:
        beta = float(vec[0])
        z = vec[1:].reshape(shape)
    else:
        beta = 0.0
        z = softplus(vec.reshape(shape))
    return ModelState(template.variant, TrajectorySet(z, dim), beta)


def _weighted_objective(
    state: ModelState,
    grid: ChangePointGrid,
    eidx: EventIndex,
    penalty_params: PenaltyParams,
    node_weights: np.ndarray,
    want_grad: bool = False,
) -> tuple[float, np.ndarray | None]:
    """sum_i m_i * psi_i and, if requested, its gradient in packed form."""
    _check_compat(state, grid)
    z = state.trajectories.positions
    if state.variant == DISTANCE:
        value, dz, dbeta = distance.loglik_terms(
            z, state.intercept_beta, grid, eidx, node_weights, want_grad
        )
        pval, pdz = penalties.penalty_distance_terms(
            z, grid, penalty_params, node_weights, want_grad
        )
        value += pval
        if not want_grad:
            return value, None
        dz = dz + pdz
        return value, np.concatenate(([dbeta], dz.ravel()))
    value, dz = projection.loglik_terms(z, grid, eidx, node_weights, want_grad)
    pval, pdz = penalties.penalty_projection_terms(
        z, grid, penalty_params, node_weights, want_grad
    )
    value += pval
    if not want_grad:
        return value, None
    dz = (dz + pdz) * _softplus_chain(z)
    return value, dz.ravel()


def objective(
    state: ModelState,
    grid: ChangePointGrid,
    events: EventList,
    penalty_params: PenaltyParams,
) -> float:
    """Variant log-likelihood plus variant penalty (additive constants dropped)."""
    eidx = EventIndex.build(events, grid)
    ones = np.ones(state.trajectories.num_nodes)
    value, _ = _weighted_objective(state, grid, eidx, penalty_params, ones)
    return value


def node_term(
    state: ModelState,
    grid: ChangePointGrid,
    events: EventList,
    penalty_params: PenaltyParams,
    i: int,
) -> NodeObjectiveTerm:
    """psi_i: half of each dyad term touching node i, plus node i's penalty."""
    n = state.trajectories.num_nodes
    if not 0 <= i < n:
        raise ValueError(f"node id {i} outside [0, {n})")
    eidx = EventIndex.build(events, grid)
    weights = np.zeros(n)
    weights[i] = 1.0
    value, _ = _weighted_objective(state, grid, eidx, penalty_params, weights)
    return NodeObjectiveTerm(i, value)


def gradient(
    state: ModelState,
    grid: ChangePointGrid,
    events: EventList,
    penalty_params: PenaltyParams,
) -> np.ndarray:
    """Exact gradient of the penalized objective with respect to the packed
    free parameters (see :func:`pack_state`)."""
    eidx = EventIndex.build(events, grid)
    ones = np.ones(state.trajectories.num_nodes)
    _, grad = _weighted_objective(state, grid, eidx, penalty_params, ones, True)
    return grad


def minibatch_gradient_estimate(
    state: ModelState,
    grid: ChangePointGrid,
    events: EventList,
    penalty_params: PenaltyParams,
    batch: np.ndarray,
) -> np.ndarray:
    """(n/|batch|) * sum over the batch (with multiplicity) of grad psi_i."""
    batch = np.asarray(batch, dtype=np.int64)
    if batch.size == 0:
        raise ValueError("batch must contain at least one node")
    n = state.trajectories.num_nodes
    if batch.min() < 0 or batch.max() >= n:
        raise ValueError("batch contains node ids outside [0, n)")
    eidx = EventIndex.build(events, grid)
    weights = np.bincount(batch, minlength=n) * (n / batch.size)
    _, grad = _weighted_objective(state, grid, eidx, penalty_params, weights, True)
    return grad


def finite_difference_gradient(
    state: ModelState,
    grid: ChangePointGrid,
    events: EventList,
    penalty_params: PenaltyParams,
    h: float = 1e-5,
    coords: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Central finite differences of the objective over the packed parameters.

    Returns (coords, fd_values); ``coords`` defaults to every parameter.
    """
    eidx = EventIndex.build(events, grid)
    ones = np.ones(state.trajectories.num_nodes)
    vec = pack_state(state)
    if coords is None:
        coords = np.arange(vec.size)

    def value_at(v: np.ndarray) -> float:
        s = unpack_state(v, state)
        val, _ = _weighted_objective(s, grid, eidx, penalty_params, ones)
        return val

    out = np.empty(coords.size)
    for pos, c in enumerate(coords):
        bumped = vec.copy()
        bumped[c] = vec[c] + h
        hi = value_at(bumped)
        bumped[c] = vec[c] - h
        lo = value_at(bumped)
        out[pos] = (hi - lo) / (2.0 * h)
    return coords, out


def gradient_discrepancy(
    state: ModelState,
    grid: ChangePointGrid,
    events: EventList,
    penalty_params: PenaltyParams,
    h: float = 1e-5,
    coords: np.ndarray | None = None,
) -> float:
    """Max relative disagreement |analytic - fd| / max(1, |analytic|, |fd|)."""
    grad = gradient(state, grid, events, penalty_params)
    coords, fd = finite_difference_gradient(
        state, grid, events, penalty_params, h, coords
    )
    ana = grad[coords]
    denom = np.maximum(1.0, np.maximum(np.abs(ana), np.abs(fd)))
    return float(np.max(np.abs(ana - fd) / denom))


def initial_state(
    events: EventList,
    grid: ChangePointGrid,
    variant: str,
    dim: int = 2,
    seed: int = 0,
    init_scale: float = 0.1,
) -> ModelState:
    """Seeded default start: free parameters i.i.d. N(0, init_scale^2); the
    intercept starts at the constant-rate maximum-likelihood value."""
    n = events.num_nodes
    if n < 2:
        raise ValueError("fitting needs at least two nodes")
    rng = np.random.default_rng(seed)
    free = rng.normal(0.0, init_scale, size=(n, grid.num_knots, dim))
    if variant == DISTANCE:
        num_dyads = n * (n - 1) / 2.0
        beta = float(np.log(max(len(events), 0.5) / (grid.horizon * num_dyads)))
        return ModelState(DISTANCE, TrajectorySet(free, dim), beta)
    return ModelState(PROJECTION, TrajectorySet(softplus(free), dim))


def _locate_nonfinite(vec: np.ndarray, variant: str) -> str:
    if variant == DISTANCE and not np.isfinite(vec[0]):
        return "intercept"
    return "position parameters"


def fit(
    events: EventList,
    grid: ChangePointGrid,
    variant: str,
    penalty_params: PenaltyParams | None = None,
    config: OptimizerConfig | None = None,
    init_state: ModelState | None = None,
    dim: int = 2,
) -> FitResult:
    """Maximize the penalized objective; returns the best-objective iterate.

    Deterministic given (config.seed, inputs): initialization and minibatch
    draws use a single seeded generator and the trace is reproducible
    bit-for-bit.
    """
    penalty_params = penalty_params or PenaltyParams()
    config = config or OptimizerConfig()
    if init_state is None:
        init_state = initial_state(events, grid, variant, dim, config.seed)
    elif init_state.variant != variant:
        raise ValueError("init_state variant does not match the requested variant")
    _check_compat(init_state, grid)
    n = init_state.trajectories.num_nodes
    eidx = EventIndex.build(events, grid)
    ones = np.ones(n)
    rng = np.random.default_rng(config.seed)
    batch_size = config.batch_size or max(1, n // 10)

    vec = pack_state(init_state)
    template = init_state

    def full_objective(v: np.ndarray) -> float:
        st = unpack_state(v, template)
        val, _ = _weighted_objective(st, grid, eidx, penalty_params, ones)
        return val

    def ascent_direction(v: np.ndarray) -> np.ndarray:
        st = unpack_state(v, template)
        if config.mode == MINIBATCH:
            batch = rng.integers(0, n, size=batch_size)
            weights = np.bincount(batch, minlength=n) * (n / batch.size)
        else:
            weights = ones
        _, grad = _weighted_objective(st, grid, eidx, penalty_params, weights, True)
        return grad

    if config.grad_check:
        spots = np.linspace(0, vec.size - 1, num=min(8, vec.size), dtype=int)
        disc = gradient_discrepancy(
            template, grid, events, penalty_params, coords=np.unique(spots)
        )
        if disc > 1e-4:
            raise FitDivergedError(0, f"gradient (finite-difference gap {disc:.2e})")

    trace_iters: list[int] = [0]
    trace_vals: list[float] = [full_objective(vec)]
    if not np.isfinite(trace_vals[0]):
        raise FitDivergedError(0, "objective")
    best_val = trace_vals[0]
    best_vec = vec.copy()
    best_iter = 0
    m1 = np.zeros_like(vec)
    m2 = np.zeros_like(vec)
    converged = False
    iteration = 0

    for iteration in range(1, config.max_iters + 1):
        grad = ascent_direction(vec)
        if not np.all(np.isfinite(grad)):
            raise FitDivergedError(iteration, _locate_nonfinite(grad, variant))
        if config.step_rule == ADAPTIVE_MOMENTS:
            m1 = config.decay1 * m1 + (1.0 - config.decay1) * grad
            m2 = config.decay2 * m2 + (1.0 - config.decay2) * grad * grad
            m1_hat = m1 / (1.0 - config.decay1**iteration)
            m2_hat = m2 / (1.0 - config.decay2**iteration)
            vec = vec + config.step * m1_hat / (np.sqrt(m2_hat) + config.eps)
        else:
            vec = vec + config.step * grad
        if not np.all(np.isfinite(vec)):
            raise FitDivergedError(iteration, _locate_nonfinite(vec, variant))

        if iteration % config.eval_every == 0 or iteration == config.max_iters:
            val = full_objective(vec)
            if not np.isfinite(val):
                raise FitDivergedError(iteration, "objective")
            trace_iters.append(iteration)
            trace_vals.append(val)
            if val > best_val:
                best_val = val
                best_vec = vec.copy()
                best_iter = iteration
            # Stop when the objective has moved by less than tol (relative)
            # over the last convergence_window iterations.
            cutoff = iteration - config.convergence_window
            if cutoff >= 0:
                k = int(np.searchsorted(trace_iters, cutoff, side="right")) - 1
                ref = trace_vals[k]
                if trace_iters[k] <= cutoff and (
                    (val - ref) / max(1.0, abs(ref)) < config.convergence_tol
                ):
                    converged = True
                    break

    trace = np.column_stack([np.asarray(trace_iters, float), np.asarray(trace_vals)])
    return FitResult(
        state=unpack_state(best_vec, template),
        trace=trace,
        best_objective=best_val,
        best_iteration=best_iter,
        iterations_run=iteration,
        converged=converged,
    )
