import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from PIL import Image

from guideplan import (GridMap, PlanningTask, State, load_map, load_task_image,
                       save_map, save_task_image, segment_cells, segment_free)
from guideplan.map_core import SAMPLE_INTERVAL

from testutil import png_bytes, white_image


def brute_force_segment_free(occ: np.ndarray, a, b, interval=SAMPLE_INTERVAL) -> bool:
    """Independent supersampling oracle (vectorized, no shared code paths).

    Same mathematical definition as the committed collision model: put the
    endpoints in canonical order, sample ceil(len/interval)+1 points, a
    point is blocked iff the cell (floor(x), floor(y)) is an obstacle,
    with indices clamped into the raster.
    """
    h, w = occ.shape
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if bx < ax or (bx == ax and by < ay):
        ax, ay, bx, by = bx, by, ax, ay
    dx, dy = bx - ax, by - ay
    dist = math.sqrt(dx * dx + dy * dy)
    n = max(2, int(math.ceil(dist / interval)) + 1)
    t = np.arange(n, dtype=np.float64) / float(n - 1)
    cx = np.clip(np.floor(ax + t * dx).astype(np.int64), 0, w - 1)
    cy = np.clip(np.floor(ay + t * dy).astype(np.int64), 0, h - 1)
    return not occ[cy, cx].any()


def grid_with_wall():
    # vertical 1-cell wall at x=8, door-free
    occ = np.zeros((16, 16), dtype=bool)
    occ[:, 8] = True
    return GridMap(occ)


states = st.tuples(st.floats(0.0, 15.999), st.floats(0.0, 15.999))


class TestGridMap:
    def test_rejects_small_maps(self):
        with pytest.raises(ValueError):
            GridMap(np.zeros((4, 40), dtype=bool))

    def test_rejects_non_2d(self):
        with pytest.raises(ValueError):
            GridMap(np.zeros((8, 8, 3), dtype=bool))

    def test_occupancy_is_immutable(self):
        g = GridMap(np.zeros((8, 8), dtype=bool))
        with pytest.raises(ValueError):
            g.occupancy[0, 0] = True

    def test_state_cell_mapping(self):
        occ = np.zeros((8, 8), dtype=bool)
        occ[3, 5] = True
        g = GridMap(occ)
        assert g.cell_blocked(5.9, 3.1)
        assert not g.cell_blocked(5.0 - 1e-9, 3.5)
        assert not g.state_free(State(5.5, 3.5))
        assert g.state_free(State(0.0, 0.0))


class TestPlanningTask:
    def test_goal_radius_must_be_positive(self):
        with pytest.raises(ValueError):
            PlanningTask(start=State(1, 1), goal=State(5, 5), goal_radius=0.0)

    def test_validate_rejects_blocked_endpoints(self):
        occ = np.zeros((8, 8), dtype=bool)
        occ[2, 2] = True
        g = GridMap(occ)
        with pytest.raises(ValueError, match="start"):
            PlanningTask(start=State(2.5, 2.5), goal=State(6, 6)).validate(g)
        with pytest.raises(ValueError, match="goal"):
            PlanningTask(start=State(6, 6), goal=State(2.5, 2.5)).validate(g)
        with pytest.raises(ValueError, match="outside"):
            PlanningTask(start=State(6, 6), goal=State(9.0, 1.0)).validate(g)


class TestLoadMap:
    def test_all_white_has_no_obstacles(self):
        g = load_map(png_bytes(white_image(128, 128)))
        assert g.width == g.height == 128
        assert int(g.occupancy.sum()) == 0

    def test_all_black_is_full(self):
        arr = np.zeros((128, 128, 3), dtype=np.uint8)
        g = load_map(png_bytes(arr))
        assert int(g.occupancy.sum()) == 16384

    def test_black_block_at_origin_counts_100_cells(self):
        arr = white_image(128, 128)
        arr[:10, :10] = 0
        g = load_map(png_bytes(arr))
        assert int(g.occupancy.sum()) == 100
        assert g.occupancy[:10, :10].all()

    def test_overlay_colors_are_free(self):
        arr = white_image(16, 16)
        arr[2, 2] = (0, 0, 255)   # start marker: luma 29, but free
        arr[3, 3] = (255, 0, 0)   # goal marker: luma 76
        arr[4, 4] = (0, 255, 0)
        g = load_map(png_bytes(arr))
        assert int(g.occupancy.sum()) == 0

    def test_luminance_threshold(self):
        arr = white_image(8, 8)
        arr[0, 0] = (127, 127, 127)  # luma 127 -> obstacle
        arr[0, 1] = (128, 128, 128)  # luma 128 -> free
        g = load_map(png_bytes(arr))
        assert g.occupancy[0, 0]
        assert not g.occupancy[0, 1]

    def test_rejects_garbage_bytes(self):
        with pytest.raises(ValueError, match="decode"):
            load_map(b"this is not a png")

    def test_save_load_round_trip(self):
        rng = np.random.default_rng(5)
        occ = rng.random((24, 40)) < 0.3
        g = GridMap(occ)
        assert load_map(save_map(g)) == g


class TestTaskImage:
    task = PlanningTask(start=State(10.5, 10.5), goal=State(25.5, 20.5))

    def test_disc_radius_2_paints_13_pixels(self):
        g = GridMap(np.zeros((32, 32), dtype=bool))
        data = save_task_image(g, self.task)
        arr = np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))
        blue = np.all(arr == (0, 0, 255), axis=2)
        red = np.all(arr == (255, 0, 0), axis=2)
        assert int(blue.sum()) == 13
        assert int(red.sum()) == 13

    def test_round_trips_occupancy(self):
        rng = np.random.default_rng(9)
        occ = rng.random((32, 32)) < 0.25
        occ[10, 10] = False
        occ[20, 25] = False
        g = GridMap(occ)
        assert load_map(save_task_image(g, self.task)) == g

    def test_load_task_image_recovers_cells(self):
        g = GridMap(np.zeros((32, 32), dtype=bool))
        task = load_task_image(save_task_image(g, self.task), goal_radius=3.0)
        assert task.start == State(10.5, 10.5)
        assert task.goal == State(25.5, 20.5)
        assert task.goal_radius == 3.0

    def test_markers_never_overwrite_obstacles(self):
        occ = np.zeros((32, 32), dtype=bool)
        occ[9, 10] = True  # directly above the start cell
        g = GridMap(occ)
        data = save_task_image(g, self.task)
        assert load_map(data).occupancy[9, 10]

    def test_out_of_bounds_task_rejected(self):
        g = GridMap(np.zeros((16, 16), dtype=bool))
        bad = PlanningTask(start=State(1, 1), goal=State(20.0, 1.0))
        with pytest.raises(ValueError):
            save_task_image(g, bad)

    def test_missing_marker_rejected(self):
        with pytest.raises(ValueError, match="start"):
            load_task_image(png_bytes(white_image(16, 16)))


class TestSegmentFree:
    def test_empty_map_always_free(self, empty_grid):
        assert segment_free(empty_grid, State(0.2, 0.7), State(31.4, 30.9))

    def test_degenerate_segment_checks_single_cell(self):
        g = grid_with_wall()
        s = State(3.5, 3.5)
        assert segment_free(g, s, s)
        blocked = State(8.5, 3.5)
        assert not segment_free(g, blocked, blocked)

    def test_crossing_wall_is_blocked(self):
        g = grid_with_wall()
        a, b = State(2.5, 7.5), State(13.5, 7.5)
        assert not segment_free(g, a, b)
        assert not brute_force_segment_free(g.occupancy, a, b)

    def test_out_of_bounds_endpoint_rejected(self, empty_grid):
        with pytest.raises(ValueError):
            segment_free(empty_grid, State(1, 1), State(32.0, 5.0))

    @given(a=states, b=states)
    def test_symmetry(self, a, b):
        g = grid_with_wall()
        assert segment_free(g, State(*a), State(*b)) == \
            segment_free(g, State(*b), State(*a))

    @given(a=states, b=states, seed=st.integers(0, 2**16))
    def test_agrees_with_brute_force_oracle(self, a, b, seed):
        rng = np.random.default_rng(seed)
        occ = rng.random((16, 16)) < 0.3
        g = GridMap(occ)
        assert segment_free(g, State(*a), State(*b)) == \
            brute_force_segment_free(occ, a, b)


class TestSegmentCells:
    def test_contains_both_endpoint_cells(self):
        cells = segment_cells(State(1.5, 2.5), State(10.2, 7.8), 16, 16)
        pairs = {tuple(c) for c in cells}
        assert (1, 2) in pairs and (10, 7) in pairs

    def test_cells_unique_and_in_bounds(self):
        cells = segment_cells(State(0.1, 0.1), State(15.9, 15.9), 16, 16)
        pairs = [tuple(c) for c in cells]
        assert len(pairs) == len(set(pairs))
        assert all(0 <= x < 16 and 0 <= y < 16 for x, y in pairs)

    def test_direction_independent(self):
        a, b = State(1.2, 14.3), State(13.8, 2.2)
        fwd = segment_cells(a, b, 16, 16)
        rev = segment_cells(b, a, 16, 16)
        assert np.array_equal(fwd, rev)

    def test_footprint_of_free_segment_is_free(self):
        # the raster footprint uses the same sample points as the collision
        # test, so a free segment can never touch an obstacle cell
        rng = np.random.default_rng(3)
        occ = rng.random((16, 16)) < 0.3
        g = GridMap(occ)
        hits = 0
        for _ in range(300):
            a = State(rng.uniform(0, 16), rng.uniform(0, 16))
            b = State(rng.uniform(0, 16), rng.uniform(0, 16))
            if not segment_free(g, a, b):
                continue
            hits += 1
            cells = segment_cells(a, b, 16, 16)
            assert not occ[cells[:, 1], cells[:, 0]].any()
        assert hits > 10
