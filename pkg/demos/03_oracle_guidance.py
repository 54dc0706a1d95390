"""
Expert-stack guidance and biased sampling
=========================================

The expert-stack oracle runs RRT many times and overlays every path it
finds into a binary guidance map.  Feeding that map back into the
planner concentrates samples where paths actually go, which cuts the
number of samples needed to reach the goal.
"""

import statistics
from pathlib import Path

from guideplan import (PlannerConfig, ScenarioSpec, expert_stack_oracle,
                       generate_map, load_guidance, plan_rrt, sample_task,
                       save_guidance)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

spec = ScenarioSpec(family="corridor", rng_seed=19, resolution=64)
grid = generate_map(spec)
task = sample_task(grid, rng_seed=19)

# 50 stacked runs, exactly like corpus building does.
oracle_cfg = PlannerConfig(max_iterations=50_000, rng_seed=3)
guidance = expert_stack_oracle(grid, task, runs=50, config=oracle_cfg)
print(f"oracle marked {guidance.active_cells()} of "
      f"{grid.width * grid.height} cells")

# Guidance maps serialize as green-on-white PNG; obstacles stay black.
png = save_guidance(guidance, grid)
(out / "guidance.png").write_bytes(png)
reloaded = load_guidance(png, grid)
assert reloaded == guidance
print("guidance PNG round trip: identical weights")

# Same seeds, with and without the guidance map.  bias_factor 0.9 sends
# nine of ten draws into the marked region.
plain, guided = [], []
for k in range(20):
    cfg = PlannerConfig(bias_factor=0.9, max_iterations=10_000, rng_seed=100 + k)
    plain.append(plan_rrt(grid, task, None, cfg).sampled_nodes)
    guided.append(plan_rrt(grid, task, guidance, cfg).sampled_nodes)

print(f"median samples to reach the goal: "
      f"plain {statistics.median(plain):.0f}, "
      f"guided {statistics.median(guided):.0f}")
