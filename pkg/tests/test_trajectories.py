import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clpm import (
    ChangePointGrid,
    EventList,
    ModelState,
    TrajectorySet,
    events_by_dyad,
    interpolate,
    locate_segment,
)
from clpm.trajectories import EventIndex, interpolate_all, local_coords


def make_grid(*knots):
    return ChangePointGrid(np.asarray(knots, dtype=float))


class TestLocateSegment:
    def test_left_endpoint(self):
        assert locate_segment(make_grid(0, 10, 20), 0.0) == 0

    def test_horizon_maps_to_last_segment(self):
        assert locate_segment(make_grid(0, 10, 20), 20.0) == 1

    def test_interior_of_first_segment(self):
        assert locate_segment(make_grid(0, 10, 20), 9.999) == 0

    def test_interior_knot_starts_next_segment(self):
        assert locate_segment(make_grid(0, 10, 20), 10.0) == 1

    @pytest.mark.parametrize("t", [-0.5, 20.5])
    def test_outside_domain_rejected(self, t):
        with pytest.raises(ValueError):
            locate_segment(make_grid(0, 10, 20), t)


class TestInterpolate:
    def setup_method(self):
        self.grid = make_grid(0, 10, 20)
        pos = np.zeros((1, 3, 2))
        pos[0] = [[0.0, 0.0], [4.0, 2.0], [1.0, 1.0]]
        self.traj = TrajectorySet(pos)

    def test_exact_at_knots(self):
        for k, t in enumerate(self.grid.knots):
            np.testing.assert_array_equal(
                interpolate(self.traj, self.grid, 0, t), self.traj.positions[0, k]
            )

    def test_midpoint_is_average(self):
        np.testing.assert_allclose(
            interpolate(self.traj, self.grid, 0, 5.0),
            0.5 * (self.traj.positions[0, 0] + self.traj.positions[0, 1]),
        )

    def test_quarter_point(self):
        np.testing.assert_allclose(
            interpolate(self.traj, self.grid, 0, 2.5), [1.0, 0.5]
        )

    def test_boundary_agrees_from_both_segments(self):
        # At an interior knot the two adjacent segments give the same point.
        pos = self.traj.positions
        left = 0.0 * pos[0, 0] + 1.0 * pos[0, 1]
        right = 1.0 * pos[0, 1] + 0.0 * pos[0, 2]
        np.testing.assert_array_equal(left, right)
        np.testing.assert_array_equal(
            interpolate(self.traj, self.grid, 0, 10.0), right
        )

    @given(
        t1=st.floats(0.0, 10.0),
        t2=st.floats(0.0, 10.0),
        alpha=st.floats(0.0, 1.0),
    )
    def test_affine_within_a_segment(self, t1, t2, alpha):
        t_mix = alpha * t1 + (1.0 - alpha) * t2
        p1 = interpolate(self.traj, self.grid, 0, t1)
        p2 = interpolate(self.traj, self.grid, 0, t2)
        mixed = interpolate(self.traj, self.grid, 0, t_mix)
        np.testing.assert_allclose(
            mixed, alpha * p1 + (1.0 - alpha) * p2, rtol=1e-12, atol=1e-12
        )

    def test_interpolate_all_matches_per_node(self):
        pos = np.arange(2 * 3 * 2, dtype=float).reshape(2, 3, 2)
        traj = TrajectorySet(pos)
        t = 7.5
        allpos = interpolate_all(traj, self.grid, t)
        for node in range(2):
            np.testing.assert_array_equal(
                allpos[node], interpolate(traj, self.grid, node, t)
            )


class TestEventList:
    def test_canonicalizes_direction_and_order(self):
        ev = EventList([2.0, 1.0], [1, 0], [0, 1], 5.0, 2)
        assert ev.times.tolist() == [1.0, 2.0]
        assert ev.node_a.tolist() == [0, 0]
        assert ev.node_b.tolist() == [1, 1]

    def test_self_loops_rejected(self):
        with pytest.raises(ValueError, match="self loop"):
            EventList([1.0], [2], [2], 5.0, 3)

    def test_times_outside_horizon_rejected(self):
        with pytest.raises(ValueError):
            EventList([6.0], [0], [1], 5.0, 2)

    def test_node_ids_validated(self):
        with pytest.raises(ValueError):
            EventList([1.0], [0], [5], 5.0, 2)

    def test_arrays_are_frozen(self):
        ev = EventList([1.0], [0], [1], 5.0, 2)
        with pytest.raises(ValueError):
            ev.times[0] = 0.0

    @given(
        st.lists(
            st.tuples(
                st.floats(0.0, 10.0),
                st.integers(0, 4),
                st.integers(0, 4),
            ).filter(lambda e: e[1] != e[2]),
            max_size=30,
        )
    )
    def test_canonical_form_preserves_events(self, raw):
        times = [t for t, _, _ in raw]
        ev = EventList(
            times, [a for _, a, _ in raw], [b for _, _, b in raw], 10.0, 5
        )
        assert np.all(ev.node_a < ev.node_b)
        assert np.all(np.diff(ev.times) >= 0)
        want = sorted((t, min(a, b), max(a, b)) for t, a, b in raw)
        assert sorted(ev) == want


class TestEventsByDyad:
    def test_empty(self):
        ev = EventList([], [], [], 1.0, 3)
        assert events_by_dyad(ev) == {}

    def test_directions_merge(self):
        ev = EventList([1.0, 2.0], [0, 1], [1, 0], 5.0, 2)
        out = events_by_dyad(ev)
        assert list(out) == [(0, 1)]
        assert out[(0, 1)].tolist() == [1.0, 2.0]

    def test_distinct_dyads_split(self):
        ev = EventList([1.0, 1.0], [0, 0], [1, 2], 5.0, 3)
        out = events_by_dyad(ev)
        assert {k: v.tolist() for k, v in out.items()} == {
            (0, 1): [1.0],
            (0, 2): [1.0],
        }

    def test_total_count_preserved(self):
        rng = np.random.default_rng(0)
        n = 6
        a = rng.integers(0, n, 40)
        b = (a + rng.integers(1, n, 40)) % n
        ev = EventList(rng.uniform(0, 9, 40), a, b, 9.0, n)
        assert sum(len(v) for v in events_by_dyad(ev).values()) == 40


class TestGridAndState:
    def test_grid_must_start_at_zero(self):
        with pytest.raises(ValueError):
            make_grid(1, 2)

    def test_grid_strictly_increasing(self):
        with pytest.raises(ValueError):
            make_grid(0, 5, 5)

    def test_uniform_constructor(self):
        g = ChangePointGrid.uniform(40.0, 17)
        assert g.num_knots == 17
        np.testing.assert_allclose(g.segment_lengths, 2.5)

    def test_projection_state_carries_no_intercept(self):
        traj = TrajectorySet(np.ones((2, 2, 2)))
        with pytest.raises(ValueError):
            ModelState("projection", traj, 1.0)

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            ModelState("cosine", TrajectorySet(np.ones((2, 2, 2))))

    def test_positions_must_be_finite(self):
        pos = np.ones((2, 2, 2))
        pos[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            TrajectorySet(pos)


class TestEventIndex:
    def test_local_coordinates(self):
        grid = make_grid(0, 10, 20)
        ev = EventList([2.5, 10.0, 20.0], [0, 0, 0], [1, 1, 1], 20.0, 2)
        idx = EventIndex.build(ev, grid)
        assert idx.seg.tolist() == [0, 1, 1]
        np.testing.assert_allclose(idx.u, [0.25, 0.0, 1.0])

    def test_rejects_events_beyond_grid(self):
        grid = make_grid(0, 5)
        ev = EventList([7.0], [0], [1], 10.0, 2)
        with pytest.raises(ValueError):
            EventIndex.build(ev, grid)

    def test_local_coords_roundtrip(self):
        grid = make_grid(0, 4, 10)
        times = np.array([0.0, 1.0, 4.0, 7.0, 10.0])
        seg, u = local_coords(grid, times)
        knots = grid.knots
        recon = knots[seg] + u * (knots[seg + 1] - knots[seg])
        np.testing.assert_allclose(recon, times)
