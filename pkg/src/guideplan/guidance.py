"""Guidance maps: per-cell sampling weights and their PNG encoding.

A guidance map assigns every cell a weight in [0, 1]; the hybrid sampler
draws cells proportionally to weight. On disk, guided cells are tinted
green over the free/obstacle raster: a cell of weight w becomes the pixel
(255-g, 255, 255-g) with g = round(w * 255), so white stays weight 0,
pure green is weight 1, and the tint never darkens a free pixel into an
obstacle. Decoding measures greenness as G - max(R, B), which ignores the
white background and the blue/red task markers.

The expert-stack oracle produces ground-truth guidance for a task by
running plain RRT several times with derived seeds, rasterising each
found path, dilating the union by one cell, and masking out obstacles.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

import numpy as np
from scipy import ndimage

from .map_core import GridMap, PlanningTask, _base_image, _decode_rgb, _encode_png, segment_cells
from .planner import PlannerConfig, plan_rrt
from .rng import mix64

DEFAULT_ORACLE_RUNS = 50
DEFAULT_LOAD_THRESHOLD = 0.5

_DILATION_STRUCTURE = np.ones((3, 3), dtype=bool)  # 8-neighbour square, not the cross


class GuidanceMap:
    """Immutable per-cell weight field in [0, 1]."""

    def __init__(self, weight) -> None:
        arr = np.ascontiguousarray(weight, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"guidance weights must be 2-D, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("guidance weights must be non-empty")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("guidance weights must be finite and within [0, 1]")
        arr.setflags(write=False)
        self.weight = arr
        self.height, self.width = arr.shape
        self._cdf: Optional[np.ndarray] = None

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    @property
    def cdf(self) -> np.ndarray:
        """Row-major cumulative weights, cached for repeated sampling."""
        if self._cdf is None:
            cdf = np.cumsum(self.weight.ravel(), dtype=np.float64)
            cdf.setflags(write=False)
            self._cdf = cdf
        return self._cdf

    def active_cells(self) -> int:
        return int(np.count_nonzero(self.weight))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GuidanceMap):
            return NotImplemented
        return np.array_equal(self.weight, other.weight)

    def __repr__(self) -> str:
        return f"GuidanceMap({self.width}x{self.height}, active={self.active_cells()})"


def save_guidance(guidance: GuidanceMap, grid: GridMap) -> bytes:
    """Render guidance over the map raster and return PNG bytes.

    Obstacle cells are always black regardless of weight; free cells get
    the green tint for their weight (white when zero).
    """
    _check_dims(guidance, grid)
    g = np.round(guidance.weight * 255.0).astype(np.uint8)
    arr = _base_image(grid)
    free = ~grid.occupancy
    fade = 255 - g[free]
    arr[free, 0] = fade
    arr[free, 1] = 255
    arr[free, 2] = fade
    return _encode_png(arr)


def load_guidance(data: bytes, grid: GridMap,
                  threshold: float = DEFAULT_LOAD_THRESHOLD) -> GuidanceMap:
    """Decode a guidance PNG against its map.

    Greenness (G - max(R, B)) / 255 becomes the weight wherever it
    exceeds `threshold`; everything else, and every obstacle cell, gets
    weight 0. Raises ValueError on size mismatch or undecodable data.
    """
    arr = _decode_rgb(data)
    h, w = arr.shape[:2]
    if h != grid.height or w != grid.width:
        raise ValueError(
            f"guidance image is {w}x{h} but map is {grid.width}x{grid.height}")
    chan = arr.astype(np.int16)
    greenness = chan[:, :, 1] - np.maximum(chan[:, :, 0], chan[:, :, 2])
    weight = np.clip(greenness, 0, 255).astype(np.float64) / 255.0
    weight[weight <= threshold] = 0.0
    weight[grid.occupancy] = 0.0
    return GuidanceMap(weight)


def stack_paths(grid: GridMap, paths) -> GuidanceMap:
    """Binary guidance from a pile of paths.

    Every cell swept by any path segment is marked, the union is dilated
    by one cell with the 3x3 square so sampling can stray slightly off
    the demonstrated lines, and obstacle cells are cleared.
    """
    mask = np.zeros((grid.height, grid.width), dtype=bool)
    for path in paths:
        for a, b in zip(path[:-1], path[1:]):
            cells = segment_cells(a, b, grid.width, grid.height)
            mask[cells[:, 1], cells[:, 0]] = True
    if mask.any():
        mask = ndimage.binary_dilation(mask, structure=_DILATION_STRUCTURE)
        mask &= ~grid.occupancy
    return GuidanceMap(mask.astype(np.float64))


def expert_stack_oracle(grid: GridMap, task: PlanningTask,
                        runs: int = DEFAULT_ORACLE_RUNS,
                        config: Optional[PlannerConfig] = None) -> GuidanceMap:
    """Ground-truth guidance: stack the paths of `runs` seeded RRT searches.

    Run k uses the derived seed mix64(config.rng_seed, k); runs that find
    no path contribute nothing. Results merge in seed order, so the
    output is independent of any execution interleaving.
    """
    if runs < 1:
        raise ValueError("oracle needs at least one run")
    if config is None:
        config = PlannerConfig()
    task.validate(grid)
    paths = []
    for k in range(runs):
        rec = plan_rrt(grid, task, None,
                       replace(config, rng_seed=mix64(config.rng_seed, k)))
        if rec.found:
            paths.append(rec.path)
    return stack_paths(grid, paths)


def _check_dims(guidance: GuidanceMap, grid: GridMap) -> None:
    if guidance.height != grid.height or guidance.width != grid.width:
        raise ValueError(
            f"guidance is {guidance.width}x{guidance.height} but map is "
            f"{grid.width}x{grid.height}")
