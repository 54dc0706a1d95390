"""Command-line front end: dataset generation, planning, benchmarks, scoring.

Subcommands:

- ``generate-dataset``: build a seeded corpus (maps, tasks, oracle
  guidance, manifest) under an output directory.
- ``plan``: run one planner on a map/task, write a JSON trial record and
  optionally a rendered overlay PNG.
- ``benchmark``: run paired uniform/guided trials over a corpus and write
  per-trial rows plus a summary, both CSV.
- ``evaluate``: score predicted guidance PNGs against the corpus oracle
  guidance (IoU / Dice on binarised masks) and write a JSON report.

A planner finding no path is a result, not an error. Exit codes: 0 on
success, 1 on operational errors (missing or malformed files, failed
trials), 2 on argument errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .guidance import GuidanceMap, load_guidance
from .map_core import (MARKER_RADIUS, GridMap, PlanningTask, State, _paint_disc,
                       load_map, load_task_image, segment_cells)
from .metrics import binarize, dice, iou, summarize
from .planner import (DEFAULT_RRT_ITERATIONS, DEFAULT_RRT_STAR_ITERATIONS,
                      PlannerConfig, TrialRecord, plan_rrt, plan_rrt_star)
from .rng import mix64
from .scenario_gen import (DEFAULT_ORACLE_ITERATIONS, DEFAULT_RESOLUTION,
                           DEFAULT_RUNS_PER_MAP, DEFAULT_SPLIT_RATIO, FAMILIES,
                           CorpusManifest, ScenarioSpec, build_corpus)

TRIAL_COLUMNS = ["instance", "family", "planner", "guidance_source", "seed",
                 "found", "path_length", "sampled_nodes", "tree_size"]

TREE_EDGE_COLOR = (176, 176, 176)
PATH_COLOR = (255, 140, 0)
GUIDANCE_TINT = (210, 245, 210)

_PLANNERS = {"rrt": plan_rrt, "rrt-star": plan_rrt_star}


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything one benchmark sweep needs; CLI flags mirror these fields."""

    manifest_path: Path
    out_dir: Path
    planner: str = "rrt"  # rrt, rrt-star, or both
    guidance_source: str = "oracle"  # none, oracle, or file
    seeds: int = 20
    base_seed: int = 0
    split: str = "all"
    limit: Optional[int] = None
    workers: int = 1
    predictions_dir: Optional[Path] = None
    step_size: float = 2.0
    bias_factor: float = 0.9
    max_iterations: Optional[int] = None  # per-planner default when None
    goal_radius: float = 2.0

    def __post_init__(self) -> None:
        if self.seeds < 1:
            raise ValueError("seeds must be at least 1")
        if self.planner not in ("rrt", "rrt-star", "both"):
            raise ValueError(f"unknown planner {self.planner!r}")
        if self.guidance_source not in ("none", "oracle", "file"):
            raise ValueError(f"unknown guidance source {self.guidance_source!r}")
        if self.guidance_source == "file" and self.predictions_dir is None:
            raise ValueError("guidance_source 'file' needs predictions_dir")


@dataclass
class BenchmarkResult:
    trials_path: Path
    summary_path: Path
    n_rows: int
    n_failed: int


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guideplan",
        description="Guided sampling-based motion planning on occupancy grids.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-dataset", help="build a seeded scenario corpus")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--families", default=",".join(FAMILIES),
                   help="comma-separated families (default: all five)")
    g.add_argument("--count", type=_positive_int, default=500, help="number of maps")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    g.add_argument("--runs-per-map", type=_positive_int, default=DEFAULT_RUNS_PER_MAP)
    g.add_argument("--split-ratio", type=float, default=DEFAULT_SPLIT_RATIO)
    g.add_argument("--oracle-iterations", type=_positive_int,
                   default=DEFAULT_ORACLE_ITERATIONS,
                   help="iteration budget for each oracle RRT run")
    g.add_argument("--fresh-task-per-run", action="store_true",
                   help="draw a new task for every oracle run instead of one per map")
    g.set_defaults(run=_run_generate_dataset)

    p = sub.add_parser("plan", help="run one planner on a map/task")
    p.add_argument("--map", required=True, help="map PNG")
    p.add_argument("--task", help="task overlay PNG with start/goal markers")
    p.add_argument("--start", help="start as X,Y (alternative to --task)")
    p.add_argument("--goal", help="goal as X,Y (alternative to --task)")
    p.add_argument("--guidance", help="guidance PNG to bias sampling")
    p.add_argument("--planner", choices=sorted(_PLANNERS), default="rrt")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-size", type=float, default=2.0)
    p.add_argument("--bias-factor", type=float, default=0.9)
    p.add_argument("--max-iterations", type=int, default=None,
                   help="default 10000 for rrt, 5000 for rrt-star")
    p.add_argument("--goal-radius", type=float, default=2.0)
    p.add_argument("--record", help="write the trial record JSON here")
    p.add_argument("--image", help="write a rendered overlay PNG here")
    p.set_defaults(run=_run_plan)

    b = sub.add_parser("benchmark", help="paired uniform/guided trials over a corpus")
    b.add_argument("--manifest", required=True)
    b.add_argument("--out", required=True, help="output directory for CSVs")
    b.add_argument("--planner", choices=["rrt", "rrt-star", "both"], default="rrt")
    b.add_argument("--guidance-source", choices=["none", "oracle", "file"],
                   default="oracle")
    b.add_argument("--predictions", help="directory of {id}.png (guidance-source=file)")
    b.add_argument("--seeds", type=_positive_int, default=20,
                   help="trials per map and arm")
    b.add_argument("--seed", type=int, default=0, help="base seed for derivation")
    b.add_argument("--split", choices=["train", "test", "all"], default="all")
    b.add_argument("--limit", type=int, default=None, help="use only the first N entries")
    b.add_argument("--workers", type=_positive_int, default=1)
    b.add_argument("--step-size", type=float, default=2.0)
    b.add_argument("--bias-factor", type=float, default=0.9)
    b.add_argument("--max-iterations", type=int, default=None,
                   help="default 10000 for rrt, 5000 for rrt-star")
    b.add_argument("--goal-radius", type=float, default=2.0)
    b.set_defaults(run=_run_benchmark)

    e = sub.add_parser("evaluate", help="score predicted guidance against the oracle")
    e.add_argument("--manifest", required=True)
    e.add_argument("--predictions", required=True, help="directory of {id}.png")
    e.add_argument("--threshold", type=float, default=0.5)
    e.add_argument("--split", choices=["train", "test", "all"], default="test")
    e.add_argument("--report", help="write the JSON report here")
    e.set_defaults(run=_run_evaluate)
    return parser


# ---------------------------------------------------------------- dataset


def cmd_generate_dataset(args) -> CorpusManifest:
    """Build the corpus an argument namespace describes."""
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    for fam in families:
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {fam!r}, expected one of {FAMILIES}")
    if not families:
        raise ValueError("no families given")
    specs = [ScenarioSpec(family=families[i % len(families)],
                          rng_seed=mix64(args.seed, i),
                          resolution=args.resolution)
             for i in range(args.count)]
    cfg = PlannerConfig(max_iterations=args.oracle_iterations)
    return build_corpus(specs, args.out, runs_per_map=args.runs_per_map,
                        split_ratio=args.split_ratio, oracle_config=cfg,
                        fresh_task_per_run=args.fresh_task_per_run)


def _run_generate_dataset(args) -> int:
    manifest = cmd_generate_dataset(args)
    print(f"wrote {len(manifest.entries)} entries "
          f"({len(manifest.train())} train / {len(manifest.test())} test) "
          f"under {manifest.root}")
    print(manifest.root / "manifest")
    return 0


# ------------------------------------------------------------------- plan


def _parse_state(text: str, what: str) -> State:
    try:
        xs, ys = text.split(",")
        return State(float(xs), float(ys))
    except Exception:
        raise ValueError(f"{what} must look like X,Y, got {text!r}") from None


def cmd_plan(args) -> TrialRecord:
    """Run the single seeded trial an argument namespace describes."""
    grid = load_map(Path(args.map).read_bytes())
    if args.task:
        task = load_task_image(Path(args.task).read_bytes(), goal_radius=args.goal_radius)
    elif args.start and args.goal:
        task = PlanningTask(start=_parse_state(args.start, "--start"),
                            goal=_parse_state(args.goal, "--goal"),
                            goal_radius=args.goal_radius)
    else:
        raise ValueError("give either --task or both --start and --goal")
    guidance = None
    if args.guidance:
        guidance = load_guidance(Path(args.guidance).read_bytes(), grid)
    iters = args.max_iterations
    if iters is None:
        iters = DEFAULT_RRT_ITERATIONS if args.planner == "rrt" else DEFAULT_RRT_STAR_ITERATIONS
    config = PlannerConfig(step_size=args.step_size, bias_factor=args.bias_factor,
                           max_iterations=iters, goal_radius=args.goal_radius,
                           rng_seed=args.seed)
    record = _PLANNERS[args.planner](grid, task, guidance, config,
                                     keep_tree=bool(args.image))
    if args.record:
        Path(args.record).write_text(record.to_json() + "\n")
    if args.image:
        img = render_overlay(grid, task, record, guidance)
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        Path(args.image).write_bytes(buf.getvalue())
    return record


def _run_plan(args) -> int:
    record = cmd_plan(args)
    status = "found" if record.found else "no path"
    print(f"{status}: length={record.path_length:.3f} "
          f"sampled_nodes={record.sampled_nodes} tree_size={record.tree_size}")
    return 0


def render_overlay(grid: GridMap, task: PlanningTask, record: TrialRecord,
                   guidance: Optional[GuidanceMap] = None,
                   scale: int = 4) -> Image.Image:
    """Pixel-exact rendering of map, guidance, tree, path, and markers."""
    arr = np.full((grid.height, grid.width, 3), 255, dtype=np.uint8)
    if guidance is not None:
        arr[guidance.weight > 0] = GUIDANCE_TINT
    arr[grid.occupancy] = (0, 0, 0)
    if record.tree is not None:
        nodes = record.tree.nodes
        parent = record.tree.parent
        for i in range(1, len(record.tree)):
            cells = segment_cells(nodes[parent[i]], nodes[i], grid.width, grid.height)
            arr[cells[:, 1], cells[:, 0]] = TREE_EDGE_COLOR
    for a, b in zip(record.path[:-1], record.path[1:]):
        cells = segment_cells(a, b, grid.width, grid.height)
        arr[cells[:, 1], cells[:, 0]] = PATH_COLOR
    free = ~grid.occupancy
    _paint_disc(arr, free, task.start, MARKER_RADIUS, (0, 0, 255))
    _paint_disc(arr, free, task.goal, MARKER_RADIUS, (255, 0, 0))
    img = Image.fromarray(arr, mode="RGB")
    if scale > 1:
        img = img.resize((grid.width * scale, grid.height * scale), Image.NEAREST)
    return img


# -------------------------------------------------------------- benchmark


@dataclass
class _TrialSpec:
    entry_id: str
    family: str
    planner: str
    arm: str
    config: PlannerConfig
    grid: Optional[GridMap] = None
    task: Optional[PlanningTask] = None
    guidance: Optional[GuidanceMap] = None
    load_error: Optional[str] = None
    record: Optional[TrialRecord] = None
    error: Optional[str] = None

    def row(self) -> dict:
        row = {"instance": self.entry_id, "family": self.family,
               "planner": self.planner, "guidance_source": self.arm,
               "seed": self.config.rng_seed}
        if self.record is not None:
            row.update(found=int(self.record.found),
                       path_length=repr(self.record.path_length),
                       sampled_nodes=self.record.sampled_nodes,
                       tree_size=self.record.tree_size)
        else:
            # operational failure: empty metric fields, found stays 0
            row.update(found=0, path_length="", sampled_nodes="", tree_size="")
        return row


def cmd_benchmark(config: BenchmarkConfig) -> BenchmarkResult:
    """Run the sweep: paired {uniform, guided} x planner x seeds per entry.

    Both arms of a pair share a derived trial seed, so they see identical
    random streams. Per-trial operational failures (bad files, invalid
    guidance) are recorded as rows with empty metric fields and the sweep
    continues. Rows are ordered by (instance, planner, sampler, seed).
    """
    manifest = CorpusManifest.read(config.manifest_path)
    entries = {"train": manifest.train(), "test": manifest.test(),
               "all": manifest.entries}[config.split]
    if config.limit is not None:
        entries = entries[:config.limit]
    if not entries:
        raise ValueError(f"no {config.split} entries in manifest")
    planners = ["rrt", "rrt-star"] if config.planner == "both" else [config.planner]

    specs: list[_TrialSpec] = []
    for entry in entries:
        map_path, task_path, guidance_path = manifest.paths(entry)
        # a guidance load failure only poisons the guided arm, not the pair
        entry_error = guidance_error = None
        grid = task = gmap = None
        try:
            grid = load_map(map_path.read_bytes())
            task = load_task_image(task_path.read_bytes(),
                                   goal_radius=config.goal_radius)
        except (ValueError, OSError) as exc:
            entry_error = str(exc)
        if entry_error is None and config.guidance_source != "none":
            try:
                if config.guidance_source == "oracle":
                    gmap = load_guidance(guidance_path.read_bytes(), grid)
                else:
                    pred = config.predictions_dir / f"{entry.entry_id}.png"
                    if not pred.is_file():
                        raise ValueError(f"missing prediction {pred}")
                    gmap = load_guidance(pred.read_bytes(), grid)
            except (ValueError, OSError) as exc:
                guidance_error = str(exc)
        arms = ["uniform"]
        if config.guidance_source != "none":
            arms.append(config.guidance_source)
        for planner_name in planners:
            iters = config.max_iterations
            if iters is None:
                iters = (DEFAULT_RRT_ITERATIONS if planner_name == "rrt"
                         else DEFAULT_RRT_STAR_ITERATIONS)
            for k in range(config.seeds):
                trial_seed = mix64(config.base_seed, entry.seed,
                                   0 if planner_name == "rrt" else 1, k)
                cfg = PlannerConfig(step_size=config.step_size,
                                    bias_factor=config.bias_factor,
                                    max_iterations=iters,
                                    goal_radius=config.goal_radius,
                                    rng_seed=trial_seed)
                for arm in arms:
                    err = entry_error
                    if err is None and arm != "uniform":
                        err = guidance_error
                    specs.append(_TrialSpec(
                        entry_id=entry.entry_id, family=entry.family,
                        planner=planner_name, arm=arm, config=cfg,
                        grid=grid, task=task,
                        guidance=gmap if arm != "uniform" else None,
                        load_error=err))

    def run_one(spec: _TrialSpec) -> _TrialSpec:
        if spec.load_error is not None:
            spec.error = spec.load_error
            return spec
        try:
            spec.record = _PLANNERS[spec.planner](spec.grid, spec.task,
                                                  spec.guidance, spec.config)
        except (ValueError, OSError) as exc:
            spec.error = str(exc)
        return spec

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            done = list(pool.map(run_one, specs))
    else:
        done = [run_one(s) for s in specs]

    rows = [s.row() for s in done]
    rows.sort(key=lambda r: (r["instance"], r["planner"], r["guidance_source"],
                             r["seed"]))
    n_failed = sum(1 for s in done if s.error is not None)
    for s in done:
        if s.error is not None:
            print(f"trial failed ({s.entry_id}/{s.planner}/{s.arm}): {s.error}",
                  file=sys.stderr)

    config.out_dir.mkdir(parents=True, exist_ok=True)
    trials_path = config.out_dir / "trials.csv"
    with trials_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRIAL_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    grouped: dict[tuple[str, str], list[TrialRecord]] = {}
    for s in done:
        if s.record is not None:
            grouped.setdefault((s.planner, s.arm), []).append(s.record)
    summary_path = config.out_dir / "summary.csv"
    with summary_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["planner", "guidance_source", "n_trials", "n_success",
                         "success_rate",
                         "path_length_median", "path_length_mean",
                         "path_length_q1", "path_length_q3",
                         "sampled_nodes_median", "sampled_nodes_mean",
                         "sampled_nodes_q1", "sampled_nodes_q3"])
        for key in sorted(grouped):
            s = summarize(grouped[key])
            writer.writerow([key[0], key[1], s.n_trials, s.n_success,
                             repr(s.success_rate),
                             repr(s.path_length.median), repr(s.path_length.mean),
                             repr(s.path_length.q1), repr(s.path_length.q3),
                             repr(s.sampled_nodes.median), repr(s.sampled_nodes.mean),
                             repr(s.sampled_nodes.q1), repr(s.sampled_nodes.q3)])
    return BenchmarkResult(trials_path=trials_path, summary_path=summary_path,
                           n_rows=len(rows), n_failed=n_failed)


def _run_benchmark(args) -> int:
    config = BenchmarkConfig(
        manifest_path=Path(args.manifest), out_dir=Path(args.out),
        planner=args.planner, guidance_source=args.guidance_source,
        seeds=args.seeds, base_seed=args.seed, split=args.split,
        limit=args.limit, workers=args.workers,
        predictions_dir=Path(args.predictions) if args.predictions else None,
        step_size=args.step_size, bias_factor=args.bias_factor,
        max_iterations=args.max_iterations, goal_radius=args.goal_radius)
    result = cmd_benchmark(config)
    for line in result.summary_path.read_text().splitlines():
        print(line)
    print(result.trials_path)
    if result.n_failed:
        print(f"{result.n_failed} of {result.n_rows} trials failed operationally",
              file=sys.stderr)
        return 1
    return 0


# --------------------------------------------------------------- evaluate


def cmd_evaluate(manifest: CorpusManifest, predictions_dir,
                 threshold: float = 0.5, split: str = "test") -> dict:
    """Score prediction PNGs against oracle guidance; returns the report dict."""
    entries = {"train": manifest.train(), "test": manifest.test(),
               "all": manifest.entries}[split]
    if not entries:
        raise ValueError(f"no {split} entries in manifest")
    pred_dir = Path(predictions_dir)
    per_image = {}
    missing = []
    for entry in entries:
        map_path, _, guidance_path = manifest.paths(entry)
        grid = load_map(map_path.read_bytes())
        truth = binarize(load_guidance(guidance_path.read_bytes(), grid), threshold)
        pred_path = pred_dir / f"{entry.entry_id}.png"
        if not pred_path.is_file():
            missing.append(entry.entry_id)
            continue
        pred = binarize(load_guidance(pred_path.read_bytes(), grid), threshold)
        per_image[entry.entry_id] = {"iou": iou(pred, truth), "dice": dice(pred, truth)}
    if not per_image:
        raise ValueError(f"no predictions found under {pred_dir}")
    return {
        "split": split,
        "n_entries": len(entries),
        "n_scored": len(per_image),
        "missing": missing,
        "mean_iou": sum(v["iou"] for v in per_image.values()) / len(per_image),
        "mean_dice": sum(v["dice"] for v in per_image.values()) / len(per_image),
        "per_image": per_image,
    }


def _run_evaluate(args) -> int:
    manifest = CorpusManifest.read(args.manifest)
    report = cmd_evaluate(manifest, args.predictions, threshold=args.threshold,
                          split=args.split)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    for entry_id in sorted(report["per_image"]):
        v = report["per_image"][entry_id]
        print(f"{entry_id}  iou={v['iou']:.4f}  dice={v['dice']:.4f}")
    if report["missing"]:
        print(f"missing predictions for {len(report['missing'])} of "
              f"{report['n_entries']} entries", file=sys.stderr)
    print(f"mean_iou={report['mean_iou']:.4f} mean_dice={report['mean_dice']:.4f} "
          f"({report['n_scored']}/{report['n_entries']} scored)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
