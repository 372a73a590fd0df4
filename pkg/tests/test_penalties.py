import numpy as np
import pytest
from scipy.stats import truncnorm

from clpm import (
    ChangePointGrid,
    PenaltyParams,
    TrajectorySet,
    penalty_distance,
    penalty_projection,
)
from clpm.penalties import penalty_distance_terms, penalty_projection_terms


def traj(positions):
    return TrajectorySet(np.asarray(positions, dtype=float))


def truncnorm_logpdf(x, mean, scale):
    a = (0.0 - mean) / scale
    b = (1.0 - mean) / scale
    return truncnorm.logpdf(x, a, b, loc=mean, scale=scale)


class TestParams:
    def test_defaults(self):
        p = PenaltyParams()
        assert (p.sigma0_sq, p.sigma_sq, p.mu_angle) == (1.0, 0.1, 1.0)

    @pytest.mark.parametrize(
        "kwargs",
        [{"sigma0_sq": 0.0}, {"sigma_sq": -1.0}, {"mu_angle": 1.5}],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            PenaltyParams(**kwargs)


class TestAngular:
    def test_straight_path_scores_the_mode(self):
        # Consecutive directions equal => cosine 1; with mu_angle = 1 that is
        # the truncated normal's mode, and the value must equal the proper
        # (renormalized) log-density there.
        grid = ChangePointGrid(np.array([0.0, 2.0]))
        params = PenaltyParams(sigma_sq=0.05)
        value = penalty_projection(traj([[[1.0, 1.0], [2.0, 2.0]]]), grid, params)
        expected = truncnorm_logpdf(1.0, 1.0, np.sqrt(2.0 * 0.05))
        assert value == pytest.approx(expected, rel=1e-12)

    def test_against_reference_density(self):
        grid = ChangePointGrid(np.array([0.0, 1.0]))
        params = PenaltyParams(sigma_sq=0.01, mu_angle=1.0)
        c = 0.9
        s = np.sin(np.arccos(c))
        value = penalty_projection(
            traj([[[1.0, 0.0], [c, s]]]), grid, params
        )
        assert value == pytest.approx(truncnorm_logpdf(c, 1.0, 0.1), rel=1e-12)

    def test_turning_scores_below_straight(self):
        grid = ChangePointGrid(np.array([0.0, 1.0]))
        params = PenaltyParams()
        straight = penalty_projection(traj([[[1.0, 0.0], [2.0, 0.0]]]), grid, params)
        turned = penalty_projection(
            traj([[[1.0, 0.0], [1.0, 1.0]]]), grid, params
        )
        assert turned < straight

    def test_additive_over_nodes_and_segments(self):
        rng = np.random.default_rng(2)
        pos = rng.uniform(0.1, 2.0, size=(3, 4, 2))
        grid = ChangePointGrid(np.array([0.0, 1.0, 3.0, 4.5]))
        params = PenaltyParams(sigma_sq=0.2)
        total = penalty_projection(traj(pos), grid, params)
        by_node = sum(
            penalty_projection(traj(pos[i : i + 1]), grid, params) for i in range(3)
        )
        assert total == pytest.approx(by_node, rel=1e-12)

    def test_invariant_to_per_knot_rescaling(self):
        # The penalty sees only directions, not magnitudes.
        rng = np.random.default_rng(4)
        pos = rng.uniform(0.1, 2.0, size=(2, 3, 2))
        scales = rng.uniform(0.5, 3.0, size=(2, 3, 1))
        grid = ChangePointGrid(np.array([0.0, 1.0, 2.0]))
        params = PenaltyParams()
        assert penalty_projection(traj(pos * scales), grid, params) == pytest.approx(
            penalty_projection(traj(pos), grid, params), rel=1e-12
        )

    def test_zero_norm_rejected(self):
        grid = ChangePointGrid(np.array([0.0, 1.0]))
        with pytest.raises(ValueError, match="zero-norm"):
            penalty_projection(traj([[[0.0, 0.0], [1.0, 0.0]]]), grid, PenaltyParams())

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(8)
        pos = rng.uniform(0.2, 2.0, size=(2, 4, 2))
        grid = ChangePointGrid(np.array([0.0, 0.5, 2.0, 3.0]))
        params = PenaltyParams(sigma_sq=0.3)
        weights = np.array([1.0, 2.5])
        _, grad = penalty_projection_terms(pos, grid, params, weights, want_grad=True)
        h = 1e-6
        for idx in np.ndindex(pos.shape):
            bumped = pos.copy()
            bumped[idx] += h
            hi, _ = penalty_projection_terms(bumped, grid, params, weights)
            bumped[idx] -= 2 * h
            lo, _ = penalty_projection_terms(bumped, grid, params, weights)
            assert grad[idx] == pytest.approx((hi - lo) / (2 * h), rel=1e-5, abs=1e-7)


class TestRandomWalk:
    def test_motionless_at_origin_scores_zero(self):
        grid = ChangePointGrid(np.array([0.0, 1.0]))
        assert penalty_distance(traj(np.zeros((3, 2, 2))), grid, PenaltyParams()) == 0.0

    def test_single_unit_increment(self):
        grid = ChangePointGrid(np.array([0.0, 1.0]))
        params = PenaltyParams(sigma0_sq=1.0, sigma_sq=1.0)
        value = penalty_distance(traj([[[0.0, 0.0], [1.0, 0.0]]]), grid, params)
        assert value == pytest.approx(-0.5)

    def test_initial_position_shrinkage(self):
        grid = ChangePointGrid(np.array([0.0, 1.0]))
        params = PenaltyParams(sigma0_sq=2.0, sigma_sq=1.0)
        value = penalty_distance(traj([[[3.0, 4.0], [3.0, 4.0]]]), grid, params)
        assert value == pytest.approx(-25.0 / 4.0)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(12)
        pos = rng.normal(size=(4, 5, 2))
        knots = np.array([0.0, 0.5, 2.0, 3.5, 6.0])
        grid = ChangePointGrid(knots)
        params = PenaltyParams(sigma0_sq=0.7, sigma_sq=0.3)
        expected = 0.0
        for i in range(4):
            expected -= pos[i, 0] @ pos[i, 0] / (2.0 * params.sigma0_sq)
            for k in range(4):
                step = pos[i, k + 1] - pos[i, k]
                expected -= step @ step / (
                    2.0 * (knots[k + 1] - knots[k]) * params.sigma_sq
                )
        assert penalty_distance(traj(pos), grid, params) == pytest.approx(
            expected, rel=1e-12
        )

    def test_nonpositive_and_zero_only_at_rest(self):
        rng = np.random.default_rng(13)
        grid = ChangePointGrid(np.array([0.0, 1.0, 2.0]))
        params = PenaltyParams()
        for _ in range(20):
            pos = rng.normal(size=(2, 3, 2))
            assert penalty_distance(traj(pos), grid, params) < 0.0

    def test_rotation_invariant_translation_not(self):
        rng = np.random.default_rng(14)
        pos = rng.normal(size=(3, 3, 2))
        grid = ChangePointGrid(np.array([0.0, 1.0, 2.0]))
        params = PenaltyParams()
        base = penalty_distance(traj(pos), grid, params)
        theta = 1.1
        rot = np.array(
            [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
        )
        assert penalty_distance(traj(pos @ rot.T), grid, params) == pytest.approx(
            base, rel=1e-12
        )
        assert penalty_distance(
            traj(pos + np.array([5.0, 0.0])), grid, params
        ) != pytest.approx(base, rel=1e-6)

    def test_doubling_an_increment_quadruples_its_cost(self):
        grid = ChangePointGrid(np.array([0.0, 1.0]))
        params = PenaltyParams(sigma0_sq=1e12, sigma_sq=1.0)  # mute the anchor
        small = penalty_distance(traj([[[0.0, 0.0], [1.0, 0.0]]]), grid, params)
        big = penalty_distance(traj([[[0.0, 0.0], [2.0, 0.0]]]), grid, params)
        assert big == pytest.approx(4.0 * small, rel=1e-9)

    def test_longer_segments_cost_less(self):
        # Brownian scaling: the same displacement over more time is cheaper.
        params = PenaltyParams(sigma0_sq=1.0, sigma_sq=1.0)
        path = traj([[[0.0, 0.0], [1.0, 0.0]]])
        short = penalty_distance(path, ChangePointGrid(np.array([0.0, 1.0])), params)
        long = penalty_distance(path, ChangePointGrid(np.array([0.0, 4.0])), params)
        assert long == pytest.approx(short / 4.0)
        assert long > short

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(15)
        pos = rng.normal(size=(3, 3, 2))
        grid = ChangePointGrid(np.array([0.0, 0.5, 2.0]))
        params = PenaltyParams(sigma0_sq=0.6, sigma_sq=0.25)
        weights = np.array([1.0, 0.0, 2.0])
        _, grad = penalty_distance_terms(pos, grid, params, weights, want_grad=True)
        h = 1e-6
        for idx in np.ndindex(pos.shape):
            bumped = pos.copy()
            bumped[idx] += h
            hi, _ = penalty_distance_terms(bumped, grid, params, weights)
            bumped[idx] -= 2 * h
            lo, _ = penalty_distance_terms(bumped, grid, params, weights)
            assert grad[idx] == pytest.approx((hi - lo) / (2 * h), rel=1e-6, abs=1e-8)
