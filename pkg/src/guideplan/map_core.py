"""Occupancy-grid world model and PNG encodings.

Maps are binary rasters: white pixels are free space, black pixels are
obstacles, one pixel per cell. Coordinates are continuous cell units with
the origin at the top-left corner and y growing downward; a state (x, y)
occupies cell (floor(x), floor(y)), so each cell covers the half-open
square [i, i+1) x [j, j+1).

Task overlays mark the start cell with a blue disc and the goal cell with
a red disc, painted only over free pixels so the underlying occupancy
survives a round trip. Any pixel that is not one of the pure marker
colours is classified by luminance: darker than mid-grey is an obstacle.

Collision checks supersample segments at a fixed interval
(``SAMPLE_INTERVAL`` cells) and demand every sampled point be free; this
sampling is the committed collision model, shared by the planners and by
path rasterisation.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image

from . import _kernels

# Sampling interval (cells) for segment collision tests and rasterisation.
SAMPLE_INTERVAL = 0.01

MIN_MAP_SIZE = 8

FREE_COLOR = (255, 255, 255)
OBSTACLE_COLOR = (0, 0, 0)
START_COLOR = (0, 0, 255)
GOAL_COLOR = (255, 0, 0)
GUIDANCE_COLOR = (0, 255, 0)
MARKER_RADIUS = 2
DEFAULT_GOAL_RADIUS = 2.0

# ITU-R 601 luma threshold, scaled by 1000 so the test is exact integer
# arithmetic (float weights would misclassify gray 128 by one ulp).
_LUMA_THRESHOLD_MILLI = 128_000


class State(NamedTuple):
    """A continuous planar state in cell units."""

    x: float
    y: float


class GridMap:
    """Immutable binary occupancy grid. True marks an obstacle cell."""

    def __init__(self, occupancy) -> None:
        occ = np.ascontiguousarray(occupancy, dtype=bool)
        if occ.ndim != 2:
            raise ValueError(f"occupancy must be 2-D, got shape {occ.shape}")
        h, w = occ.shape
        if h < MIN_MAP_SIZE or w < MIN_MAP_SIZE:
            raise ValueError(
                f"map must be at least {MIN_MAP_SIZE}x{MIN_MAP_SIZE} cells, got {w}x{h}"
            )
        occ.setflags(write=False)
        self.occupancy = occ
        self.height = h
        self.width = w

    def in_bounds(self, x: float, y: float) -> bool:
        return 0.0 <= x < self.width and 0.0 <= y < self.height

    def cell_blocked(self, x: float, y: float) -> bool:
        """Occupancy of the cell containing the state (bounds are a precondition)."""
        return bool(self.occupancy[int(math.floor(y)), int(math.floor(x))])

    def state_free(self, s: State) -> bool:
        return self.in_bounds(s[0], s[1]) and not self.cell_blocked(s[0], s[1])

    def free_fraction(self) -> float:
        return 1.0 - float(np.count_nonzero(self.occupancy)) / (self.width * self.height)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridMap):
            return NotImplemented
        return np.array_equal(self.occupancy, other.occupancy)

    def __repr__(self) -> str:
        return f"GridMap({self.width}x{self.height}, free={self.free_fraction():.3f})"


@dataclass(frozen=True)
class PlanningTask:
    """Start/goal query; the goal counts as reached within goal_radius cells."""

    start: State
    goal: State
    goal_radius: float = DEFAULT_GOAL_RADIUS

    def __post_init__(self) -> None:
        if self.goal_radius <= 0:
            raise ValueError("goal_radius must be positive")

    def validate(self, grid: GridMap) -> None:
        """Raise ValueError unless both endpoints lie in free cells."""
        for name, s in (("start", self.start), ("goal", self.goal)):
            if not grid.in_bounds(s[0], s[1]):
                raise ValueError(f"{name} {s} is outside the {grid.width}x{grid.height} map")
            if grid.cell_blocked(s[0], s[1]):
                raise ValueError(f"{name} {s} lies in an obstacle cell")


def load_map(data: bytes) -> GridMap:
    """Decode a PNG into a GridMap.

    Pure task-overlay colours (blue start, red goal, green guidance) count
    as free; every other pixel is an obstacle iff its luminance is below
    mid-grey. Raises ValueError for undecodable or degenerate images.
    """
    arr = _decode_rgb(data)
    r = arr[:, :, 0].astype(np.int64)
    g = arr[:, :, 1].astype(np.int64)
    b = arr[:, :, 2].astype(np.int64)
    luma_milli = 299 * r + 587 * g + 114 * b
    obstacle = luma_milli < _LUMA_THRESHOLD_MILLI
    for color in (START_COLOR, GOAL_COLOR, GUIDANCE_COLOR):
        overlay = np.all(arr == np.asarray(color, dtype=np.uint8), axis=2)
        obstacle &= ~overlay
    return GridMap(obstacle)


def save_map(grid: GridMap) -> bytes:
    """Encode the bare occupancy raster (white free, black obstacle) as PNG."""
    return _encode_png(_base_image(grid))


def save_task_image(grid: GridMap, task: PlanningTask,
                    marker_radius: int = MARKER_RADIUS) -> bytes:
    """Render the map with start/goal marker discs and return PNG bytes.

    Markers are painted only over free pixels, so occupancy round-trips
    through load_map exactly.
    """
    task.validate(grid)
    arr = _base_image(grid)
    free = ~grid.occupancy
    _paint_disc(arr, free, task.start, marker_radius, START_COLOR)
    _paint_disc(arr, free, task.goal, marker_radius, GOAL_COLOR)
    return _encode_png(arr)


def load_task_image(data: bytes, goal_radius: float = DEFAULT_GOAL_RADIUS) -> PlanningTask:
    """Recover the task from a rendered overlay.

    The start (goal) state is the centre of the cell nearest the centroid
    of pure-blue (pure-red) pixels. Raises ValueError if either marker is
    missing.
    """
    arr = _decode_rgb(data)
    start = _marker_state(arr, START_COLOR, "start")
    goal = _marker_state(arr, GOAL_COLOR, "goal")
    return PlanningTask(start=start, goal=goal, goal_radius=goal_radius)


def segment_free(grid: GridMap, a: State, b: State) -> bool:
    """True iff every supersampled point of segment a-b lies in a free cell."""
    for s in (a, b):
        if not grid.in_bounds(s[0], s[1]):
            raise ValueError(f"segment endpoint {s} is out of bounds")
    return bool(_kernels.segment_free(
        grid.occupancy, grid.height, grid.width,
        float(a[0]), float(a[1]), float(b[0]), float(b[1]), SAMPLE_INTERVAL))


def segment_cells(a, b, width: int, height: int) -> np.ndarray:
    """Cells swept by segment a-b under the collision sampling model.

    Returns an (n, 2) int array of unique (col, row) pairs: the footprint
    of the same sample points segment_free checks, so every returned cell
    of a collision-free segment is known free.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if bx < ax or (bx == ax and by < ay):
        ax, ay, bx, by = bx, by, ax, ay  # canonical order, as in segment_free
    dx = bx - ax
    dy = by - ay
    dist = math.sqrt(dx * dx + dy * dy)
    n = max(2, int(math.ceil(dist / SAMPLE_INTERVAL)) + 1)
    t = np.arange(n, dtype=np.float64) / float(n - 1)
    cx = np.floor(ax + t * dx).astype(np.int64)
    cy = np.floor(ay + t * dy).astype(np.int64)
    np.clip(cx, 0, width - 1, out=cx)
    np.clip(cy, 0, height - 1, out=cy)
    flat = np.unique(cy * width + cx)
    return np.stack([flat % width, flat // width], axis=1)


def _decode_rgb(data: bytes) -> np.ndarray:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise ValueError(f"could not decode PNG image: {exc}") from None
    if img.width == 0 or img.height == 0:
        raise ValueError("image has zero area")
    return np.asarray(img.convert("RGB"))


def _encode_png(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def _base_image(grid: GridMap) -> np.ndarray:
    arr = np.empty((grid.height, grid.width, 3), dtype=np.uint8)
    arr[:] = np.asarray(FREE_COLOR, dtype=np.uint8)
    arr[grid.occupancy] = np.asarray(OBSTACLE_COLOR, dtype=np.uint8)
    return arr


def _paint_disc(arr: np.ndarray, free: np.ndarray, s: State,
                radius: int, color) -> None:
    h, w = free.shape
    cx = int(math.floor(s[0]))
    cy = int(math.floor(s[1]))
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx * dx + dy * dy > radius * radius:
                continue
            px, py = cx + dx, cy + dy
            if 0 <= px < w and 0 <= py < h and free[py, px]:
                arr[py, px] = color


def _marker_state(arr: np.ndarray, color, name: str) -> State:
    mask = np.all(arr == np.asarray(color, dtype=np.uint8), axis=2)
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise ValueError(f"no {name} marker pixels found in task image")
    cx = int(round(float(xs.mean())))
    cy = int(round(float(ys.mean())))
    return State(cx + 0.5, cy + 0.5)
