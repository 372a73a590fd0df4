"""Built-in diagnostics: closed-form integrals vs. adaptive quadrature,
analytic gradients vs. finite differences, minibatch-estimator identity, and
a sampler moment check. Used by the ``selftest`` CLI subcommand."""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .distance import distance_integral, distance_rate
from .generators import simulate_clpm
from .optimizer import gradient, gradient_discrepancy, minibatch_gradient_estimate
from .penalties import PenaltyParams
from .projection import projection_integral, projection_rate
from .trajectories import (
    DISTANCE,
    PROJECTION,
    ChangePointGrid,
    EventList,
    ModelState,
    TrajectorySet,
)


def random_instance(
    rng: np.random.Generator,
    variant: str,
    max_nodes: int = 5,
    max_knots: int = 6,
    positive: bool = False,
    with_events: bool = True,
) -> tuple[ModelState, ChangePointGrid, EventList]:
    """A small random model plus a handful of events on random dyads."""
    n = int(rng.integers(2, max_nodes + 1))
    k = int(rng.integers(2, max_knots + 1))
    horizon = float(rng.uniform(0.5, 5.0))
    interior = np.sort(rng.uniform(0.0, horizon, size=k - 2))
    grid = ChangePointGrid(np.concatenate([[0.0], interior, [horizon]]))
    positions = rng.uniform(-2.0, 2.0, size=(n, k, 2))
    if positive:
        positions = np.abs(positions) + 0.05
    beta = float(rng.uniform(-2.0, 2.0)) if variant == DISTANCE else 0.0
    state = ModelState(variant, TrajectorySet(positions), beta)
    if with_events:
        count = int(rng.integers(1, 8))
        times = rng.uniform(0.0, horizon, size=count)
        node_a = rng.integers(0, n, size=count)
        node_b = (node_a + rng.integers(1, n, size=count)) % n
        events = EventList(times, node_a, node_b, horizon, n)
    else:
        events = EventList(np.empty(0), np.empty(0, int), np.empty(0, int), horizon, n)
    return state, grid, events


def quadrature_integral(
    state: ModelState, grid: ChangePointGrid, i: int, j: int
) -> float:
    """Adaptive quadrature of the dyad rate, segment by segment."""
    rate = distance_rate if state.variant == DISTANCE else projection_rate
    total = 0.0
    knots = grid.knots
    for g in range(grid.num_knots - 1):
        val, _ = quad(
            lambda t: rate(state, grid, i, j, t),
            knots[g],
            knots[g + 1],
            epsabs=1e-13,
            epsrel=1e-13,
            limit=200,
        )
        total += val
    return total


def _relerr(a: float, b: float) -> float:
    return abs(a - b) / max(1e-300, abs(a), abs(b))


def check_integrals(instances: int, seed: int = 0) -> float:
    """Worst relative disagreement between closed forms and quadrature."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        for variant in (PROJECTION, DISTANCE):
            state, grid, _ = random_instance(rng, variant, with_events=False)
            n = state.trajectories.num_nodes
            i, j = 0, n - 1
            closed = (
                distance_integral(state, grid, i, j)
                if variant == DISTANCE
                else projection_integral(state, grid, i, j)
            )
            worst = max(worst, _relerr(closed, quadrature_integral(state, grid, i, j)))
    return worst


def check_gradients(instances: int, seed: int = 1) -> float:
    """Worst relative gap between analytic gradients and central differences."""
    rng = np.random.default_rng(seed)
    params = PenaltyParams()
    worst = 0.0
    for _ in range(instances):
        for variant in (PROJECTION, DISTANCE):
            state, grid, events = random_instance(
                rng, variant, positive=(variant == PROJECTION)
            )
            worst = max(worst, gradient_discrepancy(state, grid, events, params))
    return worst


def check_unbiasedness(seed: int = 2) -> float:
    """Relative gap between the full gradient and the average of all
    single-node estimates (an exact identity up to rounding)."""
    rng = np.random.default_rng(seed)
    params = PenaltyParams()
    worst = 0.0
    for variant in (PROJECTION, DISTANCE):
        state, grid, events = random_instance(
            rng, variant, positive=(variant == PROJECTION)
        )
        n = state.trajectories.num_nodes
        full = gradient(state, grid, events, params)
        acc = np.zeros_like(full)
        for i in range(n):
            acc += minibatch_gradient_estimate(state, grid, events, params, [i])
        acc /= n
        denom = max(1.0, float(np.linalg.norm(full)))
        worst = max(worst, float(np.linalg.norm(acc - full)) / denom)
    return worst


def check_sampler(replicates: int = 400, seed: int = 3) -> float:
    """Relative error of the mean event count for a constant-rate dyad."""
    positions = np.zeros((2, 2, 2))
    grid = ChangePointGrid(np.array([0.0, 10.0]))
    state = ModelState(DISTANCE, TrajectorySet(positions), float(np.log(2.0)))
    expected = 2.0 * 10.0
    counts = [
        len(simulate_clpm(state, grid, seed=seed + r)) for r in range(replicates)
    ]
    return abs(float(np.mean(counts)) - expected) / expected


def run_selftest(fast: bool = False, verbose: bool = True) -> bool:
    checks = [
        ("closed-form integrals vs quadrature", check_integrals(4 if fast else 20), 1e-8),
        ("analytic gradient vs finite differences", check_gradients(1 if fast else 3), 1e-5),
        ("minibatch estimator identity", check_unbiasedness(), 1e-10),
        ("sampler mean count", check_sampler(120 if fast else 400), 0.05),
    ]
    ok = True
    for name, err, tol in checks:
        passed = err <= tol
        ok = ok and passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}: {name} ({err:.3e} <= {tol:g})")
    return ok
