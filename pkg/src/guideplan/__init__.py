"""Guided sampling-based motion planning on 2-D occupancy grids.

The package plans paths with RRT and RRT* whose samplers can be biased
toward a guidance map: a per-cell weight field marking where useful
samples probably live. Guidance can come from an expert-stack oracle
(stacked paths of many plain RRT runs) or from any external generator
that writes the documented PNG encoding. Procedural scenario families,
segmentation-style metrics, and a benchmark CLI round out the toolkit.

Conventions shared by everything here:

- maps are PNGs, one pixel per cell, white free / black obstacle;
- a state (x, y) occupies cell (floor(x), floor(y));
- task overlays mark start/goal with pure blue/red discs;
- guidance tints cells green in proportion to weight;
- all randomness flows from explicit 64-bit seeds through a portable
  generator, so every result reproduces exactly.
"""

from .map_core import (
    DEFAULT_GOAL_RADIUS,
    GUIDANCE_COLOR,
    GOAL_COLOR,
    MARKER_RADIUS,
    SAMPLE_INTERVAL,
    START_COLOR,
    GridMap,
    PlanningTask,
    State,
    load_map,
    load_task_image,
    save_map,
    save_task_image,
    segment_cells,
    segment_free,
)
from .planner import (
    DEFAULT_RRT_ITERATIONS,
    DEFAULT_RRT_STAR_ITERATIONS,
    PlannerConfig,
    SearchTree,
    TrialRecord,
    hybrid_sample,
    path_cost,
    plan_rrt,
    plan_rrt_star,
)
from .guidance import (
    DEFAULT_ORACLE_RUNS,
    GuidanceMap,
    expert_stack_oracle,
    load_guidance,
    save_guidance,
    stack_paths,
)
from .metrics import BinaryMask, StatBlock, TrialSummary, binarize, dice, iou, summarize
from .rng import PortableRng, mix64
from .scenario_gen import (
    FAMILIES,
    CorpusManifest,
    ManifestEntry,
    ScenarioSpec,
    build_corpus,
    generate_map,
    sample_task,
)
from .bench_cli import (
    BenchmarkConfig,
    BenchmarkResult,
    cmd_benchmark,
    cmd_evaluate,
    cmd_generate_dataset,
    cmd_plan,
    render_overlay,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GOAL_RADIUS", "GUIDANCE_COLOR", "GOAL_COLOR", "MARKER_RADIUS",
    "SAMPLE_INTERVAL", "START_COLOR", "GridMap", "PlanningTask", "State",
    "load_map", "load_task_image", "save_map", "save_task_image",
    "segment_cells", "segment_free",
    "DEFAULT_RRT_ITERATIONS", "DEFAULT_RRT_STAR_ITERATIONS", "PlannerConfig",
    "SearchTree", "TrialRecord", "hybrid_sample", "path_cost", "plan_rrt",
    "plan_rrt_star",
    "DEFAULT_ORACLE_RUNS", "GuidanceMap", "expert_stack_oracle",
    "load_guidance", "save_guidance", "stack_paths",
    "BinaryMask", "StatBlock", "TrialSummary", "binarize", "dice", "iou",
    "summarize",
    "PortableRng", "mix64",
    "FAMILIES", "CorpusManifest", "ManifestEntry", "ScenarioSpec",
    "build_corpus", "generate_map", "sample_task",
    "BenchmarkConfig", "BenchmarkResult", "cmd_benchmark", "cmd_evaluate",
    "cmd_generate_dataset", "cmd_plan", "render_overlay",
    "__version__",
]
