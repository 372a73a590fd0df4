"""End-to-end acceptance checks.

Each test exercises one headline guarantee of the package, prints a single
PASS/FAIL line through the ``criterion`` fixture (collected again in the
terminal summary), and fails loudly if the guarantee is missed. The
statistical recoveries run full fits on freshly simulated data, so this file
is slower than the unit-test modules but still finishes in a few minutes.
"""

import time

import numpy as np
from scipy.integrate import quad
from scipy.spatial.distance import pdist
from scipy.stats import kstest

from clpm import (
    ChangePointGrid,
    ModelState,
    OptimizerConfig,
    PenaltyParams,
    ScenarioSpec,
    TrajectorySet,
    fit,
    gradient,
    gradient_discrepancy,
    interpolate_all,
    make_sim1_schedule,
    make_sim2_schedule,
    make_static_clusters,
    minibatch_gradient_estimate,
    simulate_blockmodel,
    simulate_clpm,
    simulate_scenario,
)
from clpm.distance import distance_integral
from clpm.projection import projection_integral
from clpm.selftest import quadrature_integral, random_instance
from clpm.trajectories import DISTANCE, PROJECTION


def relerr(a, b):
    return abs(a - b) / max(1e-300, abs(a), abs(b))


def test_exact_integrals_match_quadrature(criterion):
    start = time.time()
    rng = np.random.default_rng(0)
    worst = 0.0
    for variant in (PROJECTION, DISTANCE):
        closed_form = (
            projection_integral if variant == PROJECTION else distance_integral
        )
        for _ in range(200):
            state, grid, _ = random_instance(rng, variant, with_events=False)
            n = state.trajectories.num_nodes
            i, j = 0, n - 1
            worst = max(
                worst,
                relerr(
                    closed_form(state, grid, i, j),
                    quadrature_integral(state, grid, i, j),
                ),
            )
    elapsed = time.time() - start
    criterion(
        "closed-form dyad integrals match adaptive quadrature on 200 random "
        "instances per variant",
        worst <= 1e-8 and elapsed < 30.0,
        f"worst rel err {worst:.2e} <= 1e-8, {elapsed:.1f}s < 30s",
    )


def test_analytic_gradients_match_finite_differences(criterion):
    start = time.time()
    rng = np.random.default_rng(1)
    params = PenaltyParams()
    worst = 0.0
    for variant in (PROJECTION, DISTANCE):
        for _ in range(20):
            state, grid, events = random_instance(
                rng, variant, positive=(variant == PROJECTION)
            )
            worst = max(
                worst, gradient_discrepancy(state, grid, events, params, h=1e-5)
            )
    elapsed = time.time() - start
    criterion(
        "analytic gradients match central finite differences on 20 random "
        "instances per variant",
        worst <= 1e-5 and elapsed < 60.0,
        f"worst rel err {worst:.2e} <= 1e-5, {elapsed:.1f}s < 60s",
    )


def test_node_minibatch_estimator_is_unbiased(criterion):
    rng = np.random.default_rng(2)
    params = PenaltyParams()
    worst = 0.0
    for variant in (PROJECTION, DISTANCE):
        for _ in range(10):
            state, grid, events = random_instance(
                rng, variant, positive=(variant == PROJECTION)
            )
            n = state.trajectories.num_nodes
            full = gradient(state, grid, events, params)
            acc = np.zeros_like(full)
            for i in range(n):
                acc += minibatch_gradient_estimate(
                    state, grid, events, params, np.array([i])
                )
            acc /= n
            gap = np.linalg.norm(acc - full) / max(1.0, np.linalg.norm(full))
            worst = max(worst, float(gap))
    criterion(
        "averaged single-node gradient estimates reproduce the full gradient",
        worst <= 1e-10,
        f"worst rel gap {worst:.2e} <= 1e-10",
    )


def pairwise_at(state, grid, t):
    return pdist(interpolate_all(state.trajectories, grid, t))


def test_ring_collapse_recovery(criterion):
    start = time.time()
    data = simulate_scenario(ScenarioSpec("sim3_ring", seed=0))
    fit_grid = ChangePointGrid(np.linspace(0.0, 10.0, 11))
    result = fit(
        data.events,
        fit_grid,
        DISTANCE,
        PenaltyParams(sigma_sq=0.02),
        OptimizerConfig(max_iters=3000, step=0.05),
    )
    # Compare configurations through their pairwise distances (the model is
    # only identified up to rigid motions). Times right at the collapse are
    # excluded: with every true distance zero there, correlation is undefined.
    times = np.linspace(0.0, 10.0, 21)
    times = times[np.abs(times - 5.0) > 0.5 + 1e-9]
    corrs = [
        np.corrcoef(
            pairwise_at(data.truth, data.grid, t),
            pairwise_at(result.state, fit_grid, t),
        )[0, 1]
        for t in times
    ]
    mean_corr = float(np.mean(corrs))

    fitted0 = interpolate_all(result.state.trajectories, fit_grid, 0.0)
    radius = float(np.linalg.norm(fitted0 - fitted0.mean(axis=0), axis=1).mean())
    elapsed = time.time() - start
    criterion(
        "collapsing-ring fit recovers the distance geometry and scale",
        mean_corr >= 0.85 and 0.6 <= radius <= 1.4 and elapsed < 300.0,
        f"mean distance corr {mean_corr:.3f} >= 0.85, "
        f"mean start radius {radius:.3f} in [0.6, 1.4], {elapsed:.0f}s < 300s",
    )


def test_three_community_structure_recovery(criterion):
    start = time.time()
    schedule = make_sim1_schedule()
    events = simulate_blockmodel(schedule, seed=0)
    fit_grid = ChangePointGrid(np.linspace(0.0, 40.0, 9))
    result = fit(
        events,
        fit_grid,
        DISTANCE,
        PenaltyParams(),
        OptimizerConfig(max_iters=2000, step=0.05),
    )
    # Middle of the strong-community window.
    pos = interpolate_all(result.state.trajectories, fit_grid, 15.0)
    communities = np.repeat([0, 1, 2], 20)
    dists = pdist(pos)
    ii, jj = np.triu_indices(60, k=1)
    same = communities[ii] == communities[jj]
    tight = communities[ii] == 0
    within_first = float(dists[same & tight].mean())
    between = float(dists[~same].mean())

    full = np.zeros((60, 60))
    full[ii, jj] = full.T[ii, jj] = dists
    per_node = full.sum(axis=1) / 59.0
    population = float(per_node.mean())
    hub, silent = float(per_node[0]), float(per_node[59])
    elapsed = time.time() - start
    criterion(
        "three-community fit separates the tight community, pulls the hub "
        "inward, and pushes the near-silent node outward",
        within_first < 0.5 * between
        and hub < population
        and silent > population
        and elapsed < 900.0,
        f"within/between {within_first / between:.2f} < 0.5, "
        f"hub {hub:.2f} < mean {population:.2f} < silent {silent:.2f}, "
        f"{elapsed:.0f}s < 900s",
    )


def test_intercept_recovery_from_static_clusters(criterion):
    start = time.time()
    truth_traj, truth_grid = make_static_clusters(
        num_nodes=20, separation=2.0, horizon=40.0
    )
    truth = ModelState(DISTANCE, truth_traj, 1.0)
    events = simulate_clpm(truth, truth_grid, seed=0)
    result = fit(
        events,
        truth_grid,
        DISTANCE,
        PenaltyParams(),
        OptimizerConfig(max_iters=2000, step=0.05),
    )
    beta_hat = result.state.intercept_beta
    elapsed = time.time() - start
    criterion(
        "intercept recovered from two static clusters",
        0.8 <= beta_hat <= 1.2 and elapsed < 120.0,
        f"beta-hat {beta_hat:.3f} in [0.8, 1.2], {elapsed:.0f}s < 120s",
    )


def test_sampler_counts_and_time_rescaling(criterion):
    start = time.time()
    # Constant-rate check: two motionless coincident nodes, rate e^beta = 5
    # over a horizon of 10, so the count is Poisson with mean 50.
    state = ModelState(
        DISTANCE, TrajectorySet(np.zeros((2, 2, 2))), float(np.log(5.0))
    )
    grid = ChangePointGrid(np.array([0.0, 10.0]))
    counts = [len(simulate_clpm(state, grid, seed=s)) for s in range(10_000)]
    mean_count = float(np.mean(counts))
    mean_ok = abs(mean_count - 50.0) / 50.0 <= 0.01

    # Time-rescaling check on a genuinely inhomogeneous rate: one node swings
    # in and out of contact, and the rescaled inter-event gaps must be
    # standard exponential.
    pos = np.zeros((2, 3, 2))
    pos[1, 0, 0] = 1.0
    pos[1, 2, 0] = 1.0
    moving = ModelState(DISTANCE, TrajectorySet(pos), 6.5)
    swing_grid = ChangePointGrid(np.array([0.0, 5.0, 10.0]))
    events = simulate_clpm(moving, swing_grid, seed=7)

    def rate(t):
        d = 1.0 - t / 5.0 if t <= 5.0 else (t - 5.0) / 5.0
        return np.exp(6.5 - d * d)

    stamps = np.concatenate([[0.0], events.times])
    gaps = np.array(
        [
            quad(rate, stamps[k], stamps[k + 1], epsabs=1e-10, epsrel=1e-10)[0]
            for k in range(len(events))
        ]
    )
    ks = kstest(gaps, "expon")
    elapsed = time.time() - start
    criterion(
        "sampler reproduces Poisson counts and passes time-rescaling",
        mean_ok and len(events) >= 5000 and ks.pvalue > 0.01,
        f"mean count {mean_count:.2f} within 1% of 50; "
        f"{len(events)} events, KS p {ks.pvalue:.2f} > 0.01, {elapsed:.0f}s",
    )


def test_membership_switch_tracked(criterion):
    start = time.time()
    schedule = make_sim2_schedule()
    events = simulate_blockmodel(schedule, seed=0)
    fit_grid = ChangePointGrid(np.linspace(0.0, 40.0, 21))
    result = fit(
        events,
        fit_grid,
        DISTANCE,
        PenaltyParams(),
        OptimizerConfig(max_iters=2500, step=0.05),
    )

    def switcher_gaps(t):
        pos = interpolate_all(result.state.trajectories, fit_grid, t)
        first = pos[1:15].mean(axis=0)
        second = pos[15:].mean(axis=0)
        return (
            float(np.linalg.norm(pos[0] - first)),
            float(np.linalg.norm(pos[0] - second)),
        )

    before_first, before_second = switcher_gaps(10.0)
    after_first, after_second = switcher_gaps(30.0)
    elapsed = time.time() - start
    criterion(
        "fitted trajectory follows the node that changes community",
        before_first < before_second and after_second < after_first
        and elapsed < 900.0,
        f"at t=10 dist to own {before_first:.2f} < other {before_second:.2f}; "
        f"at t=30 dist to new {after_second:.2f} < old {after_first:.2f}, "
        f"{elapsed:.0f}s",
    )
