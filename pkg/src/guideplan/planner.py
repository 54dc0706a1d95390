"""Sampling-based planners over occupancy grids.

Both planners share one hybrid sampler: with probability ``bias_factor``
a draw lands inside a guidance-weighted cell (uniform within the cell,
cells chosen proportionally to weight), otherwise it is uniform over the
whole map. Without a guidance map every draw is uniform. plan_rrt stops
at the first node inside the goal disc; plan_rrt_star spends its whole
iteration budget and keeps improving the best goal path (anytime), using
a shrinking neighbourhood radius

    r = min(rewire_radius_scale * sqrt(log(n+1)/(n+1)) * sqrt(w*h),
            4 * step_size).

All randomness comes from an explicit 64-bit seed; records are fully
reproducible, byte for byte, for a given seed and inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from . import _kernels
from .map_core import SAMPLE_INTERVAL, GridMap, PlanningTask, State
from .rng import MASK64, PortableRng

if TYPE_CHECKING:
    from .guidance import GuidanceMap

DEFAULT_RRT_ITERATIONS = 10_000
DEFAULT_RRT_STAR_ITERATIONS = 5_000
COST_SNAPSHOT_EVERY = 100


@dataclass(frozen=True)
class PlannerConfig:
    """Knobs shared by both planners.

    bias_factor is the probability that a single draw consults the
    guidance map; it is ignored when planning without guidance.
    """

    step_size: float = 2.0
    bias_factor: float = 0.9
    max_iterations: int = DEFAULT_RRT_ITERATIONS
    goal_radius: float = 2.0
    rewire_radius_scale: float = 1.5
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not (self.step_size > 0 and math.isfinite(self.step_size)):
            raise ValueError("step_size must be positive and finite")
        if not 0.0 <= self.bias_factor <= 1.0:
            raise ValueError("bias_factor must lie in [0, 1]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if not (self.goal_radius > 0 and math.isfinite(self.goal_radius)):
            raise ValueError("goal_radius must be positive and finite")
        if not (self.rewire_radius_scale > 0 and math.isfinite(self.rewire_radius_scale)):
            raise ValueError("rewire_radius_scale must be positive and finite")


@dataclass
class SearchTree:
    """Flat tree arrays: nodes[i] connects to nodes[parent[i]] (root has -1)."""

    nodes: np.ndarray
    parent: np.ndarray
    cost_to_come: np.ndarray

    def __len__(self) -> int:
        return int(self.nodes.shape[0])


@dataclass
class TrialRecord:
    """Outcome of one planning run.

    sampled_nodes counts the draws made up to and including the one that
    produced the first goal-reaching node (total draws when no solution
    was found); tree_size is the final node count; cost_history holds the
    best goal cost after every 100 iterations for the anytime planner
    (None entries before the first solution) and is None for plain RRT.
    """

    found: bool
    path: list[State]
    path_length: float
    sampled_nodes: int
    tree_size: int
    iterations_used: int
    seed: int
    cost_history: Optional[list[Optional[float]]] = None
    tree: Optional[SearchTree] = field(default=None, repr=False, compare=False)

    def to_json(self) -> str:
        """Stable JSON encoding (tree excluded); equal records give equal bytes."""
        payload = {
            "found": self.found,
            "path": [[s[0], s[1]] for s in self.path],
            "path_length": self.path_length,
            "sampled_nodes": self.sampled_nodes,
            "tree_size": self.tree_size,
            "iterations_used": self.iterations_used,
            "seed": self.seed,
            "cost_history": self.cost_history,
        }
        return json.dumps(payload, separators=(",", ":"), allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "TrialRecord":
        d = json.loads(text)
        return cls(
            found=d["found"],
            path=[State(x, y) for x, y in d["path"]],
            path_length=d["path_length"],
            sampled_nodes=d["sampled_nodes"],
            tree_size=d["tree_size"],
            iterations_used=d["iterations_used"],
            seed=d["seed"],
            cost_history=d.get("cost_history"),
        )


def path_cost(path) -> float:
    """Total Euclidean length of a state sequence; rejects empty paths."""
    if len(path) == 0:
        raise ValueError("path_cost of an empty path is undefined")
    total = 0.0
    for a, b in zip(path[:-1], path[1:]):
        total += math.hypot(b[0] - a[0], b[1] - a[1])
    return total


def hybrid_sample(grid: GridMap, guidance: Optional["GuidanceMap"],
                  config: PlannerConfig, rng: PortableRng) -> State:
    """Draw one state with the planners' exact sampling rule."""
    has_g, cdf, total = _guidance_arrays(grid, guidance)
    x, y = _kernels._draw_state(
        rng.state_array(), float(grid.width), float(grid.height),
        has_g, config.bias_factor, cdf, total, grid.width)
    return State(float(x), float(y))


def plan_rrt(grid: GridMap, task: PlanningTask,
             guidance: Optional["GuidanceMap"] = None,
             config: Optional[PlannerConfig] = None,
             keep_tree: bool = False) -> TrialRecord:
    """Plain RRT: grow until the goal disc is hit or the budget runs out."""
    return _plan(grid, task, guidance, config, keep_tree, star=False)


def plan_rrt_star(grid: GridMap, task: PlanningTask,
                  guidance: Optional["GuidanceMap"] = None,
                  config: Optional[PlannerConfig] = None,
                  keep_tree: bool = False) -> TrialRecord:
    """RRT*: spend the full budget, rewiring toward cheaper paths (anytime)."""
    return _plan(grid, task, guidance, config, keep_tree, star=True)


def _plan(grid: GridMap, task: PlanningTask, guidance, config,
          keep_tree: bool, star: bool) -> TrialRecord:
    if config is None:
        config = PlannerConfig()
    task.validate(grid)
    has_g, cdf, total = _guidance_arrays(grid, guidance)
    goal_r = task.goal_radius
    seed = np.uint64(config.rng_seed & MASK64)
    if star:
        (nodes, parent, cost, n, goal_idx, iters, draws, disc,
         snapshots, snap_count) = _kernels.plan_rrt_star(
            grid.occupancy, task.start[0], task.start[1],
            task.goal[0], task.goal[1], goal_r,
            config.step_size, config.bias_factor, config.max_iterations,
            seed, has_g, cdf, total, SAMPLE_INTERVAL,
            config.rewire_radius_scale, COST_SNAPSHOT_EVERY)
        history: Optional[list[Optional[float]]] = [
            None if math.isinf(c) else float(c) for c in snapshots[:snap_count]
        ]
    else:
        nodes, parent, cost, n, goal_idx, iters, draws, disc = _kernels.plan_rrt(
            grid.occupancy, task.start[0], task.start[1],
            task.goal[0], task.goal[1], goal_r,
            config.step_size, config.bias_factor, config.max_iterations,
            seed, has_g, cdf, total, SAMPLE_INTERVAL)
        history = None
    found = goal_idx >= 0
    if found:
        chain = []
        i = int(goal_idx)
        while i >= 0:
            chain.append(i)
            i = int(parent[i])
        chain.reverse()
        path = [State(float(nodes[i, 0]), float(nodes[i, 1])) for i in chain]
        length = path_cost(path)
    else:
        path = []
        length = 0.0
    tree = None
    if keep_tree:
        tree = SearchTree(nodes=nodes[:n].copy(), parent=parent[:n].copy(),
                          cost_to_come=cost[:n].copy())
    return TrialRecord(
        found=found,
        path=path,
        path_length=length,
        sampled_nodes=int(disc) if disc >= 0 else int(draws),
        tree_size=int(n),
        iterations_used=int(iters),
        seed=config.rng_seed,
        cost_history=history,
        tree=tree,
    )


def _guidance_arrays(grid: GridMap, guidance):
    """Validate guidance against the map and return (has_g, cdf, total)."""
    if guidance is None:
        return False, np.zeros(1, dtype=np.float64), 0.0
    if guidance.height != grid.height or guidance.width != grid.width:
        raise ValueError(
            f"guidance is {guidance.width}x{guidance.height} but map is "
            f"{grid.width}x{grid.height}")
    total = guidance.total_weight
    if total <= 0.0:
        raise ValueError("guidance map has no positive weight to sample from")
    return True, guidance.cdf, float(total)
