"""
Benchmarking and scoring guidance quality
=========================================

The benchmark runner pairs a uniform-sampling arm against a guided arm
on every corpus entry, sharing per-trial seeds so the comparison is
paired.  Guidance images from any source can be scored against the
corpus ground truth with IoU/Dice.
"""

import csv
from pathlib import Path

from guideplan import (BenchmarkConfig, BinaryMask, CorpusManifest, FAMILIES,
                       ScenarioSpec, build_corpus, cmd_benchmark, cmd_evaluate,
                       dice, iou, load_guidance, load_map)

out = Path(__file__).parent / "out"
corpus = out / "bench_corpus"

specs = [ScenarioSpec(family=FAMILIES[i % 5], rng_seed=900 + i, resolution=48)
         for i in range(10)]
manifest = build_corpus(specs, corpus, runs_per_map=10)

# Paired trials: 5 seeds x 10 entries x {uniform, oracle-guided}.
config = BenchmarkConfig(manifest_path=corpus / "manifest",
                         out_dir=out / "bench_results",
                         planner="rrt", seeds=5, max_iterations=8000)
result = cmd_benchmark(config)
print(f"wrote {result.n_rows} trial rows ({result.n_failed} failed) "
      f"to {result.trials_path.name} and {result.summary_path.name}")

with open(result.summary_path) as fh:
    for row in csv.DictReader(fh):
        print(f"  {row['planner']:4s} {row['guidance_source']:8s} "
              f"success {float(row['success_rate']):.2f} "
              f"median nodes {float(row['sampled_nodes_median']):.0f}")

# Scoring externally produced guidance: here the "prediction" is just
# the oracle file itself for the first test entry, so IoU and Dice hit 1.
entry = next(e for e in manifest.entries if e.split == "test")
map_path, _, guidance_path = manifest.paths(entry)
grid = load_map(map_path.read_bytes())
truth = load_guidance(guidance_path.read_bytes(), grid)
pred = load_guidance(guidance_path.read_bytes(), grid)
a = BinaryMask(truth.weight > 0.5)
b = BinaryMask(pred.weight > 0.5)
print(f"{entry.entry_id}: iou {iou(a, b):.3f}, dice {dice(a, b):.3f}")

# cmd_evaluate does the same over a whole directory of predictions.
preds = out / "predictions"
preds.mkdir(exist_ok=True)
for e in manifest.entries:
    if e.split == "test":
        _, _, gp = manifest.paths(e)
        (preds / f"{e.entry_id}.png").write_bytes(gp.read_bytes())
report = cmd_evaluate(CorpusManifest.read(corpus / "manifest"), preds)
print(f"evaluate over test split: mean iou {report['mean_iou']:.3f} "
      f"across {report['n_scored']} images")
