"""
Planning with RRT and RRT*
==========================

Generate a scenario, sample a solvable task on it, and run both
planners with the same seed.  RRT stops at the first path; RRT* spends
its whole budget improving the best one it has found.
"""

from pathlib import Path

from guideplan import (PlannerConfig, ScenarioSpec, generate_map, plan_rrt,
                       plan_rrt_star, render_overlay, sample_task, save_task_image)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

spec = ScenarioSpec(family="rooms", rng_seed=7, resolution=64)
grid = generate_map(spec)
task = sample_task(grid, rng_seed=7)
print(f"rooms map, start {tuple(task.start)}, goal {tuple(task.goal)}")
(out / "task.png").write_bytes(save_task_image(grid, task))

config = PlannerConfig(step_size=2.0, max_iterations=5000, rng_seed=42)

rec = plan_rrt(grid, task, None, config, keep_tree=True)
print(f"RRT : found={rec.found} length={rec.path_length:.1f} "
      f"after {rec.iterations_used} iterations, tree {rec.tree_size} nodes")

star = plan_rrt_star(grid, task, None, config, keep_tree=True)
print(f"RRT*: found={star.found} length={star.path_length:.1f} "
      f"tree {star.tree_size} nodes")

# cost_history samples the best goal cost every 100 iterations; None
# means no path yet.  It never increases once finite.
first = next(i for i, c in enumerate(star.cost_history) if c is not None)
print(f"RRT* first path at snapshot {first}, "
      f"cost {star.cost_history[first]:.1f} -> {star.cost_history[-1]:.1f}")

# Records serialize to stable JSON (tree excluded), handy for archiving.
(out / "rrt_star_record.json").write_text(star.to_json())

# Overlays draw the tree in gray, the path in orange, markers as discs.
render_overlay(grid, task, rec).save(out / "rrt_overlay.png")
render_overlay(grid, task, star).save(out / "rrt_star_overlay.png")
print(f"wrote overlays to {out}")
