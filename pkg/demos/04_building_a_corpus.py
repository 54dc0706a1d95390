"""
Building a reproducible scenario corpus
=======================================

A corpus is a directory of map/task/guidance PNG triples plus a
manifest.  Everything derives from the spec list, so rebuilding with
the same specs reproduces every file byte for byte.
"""

from pathlib import Path

from guideplan import CorpusManifest, FAMILIES, ScenarioSpec, build_corpus

out = Path(__file__).parent / "out" / "corpus"

# Four maps per family at a small resolution keeps this quick.
specs = [ScenarioSpec(family=FAMILIES[i % 5], rng_seed=400 + i, resolution=48)
         for i in range(20)]
manifest = build_corpus(specs, out, runs_per_map=10)
print(f"built {len(manifest.entries)} entries under {out}")

# The manifest is one headerless CSV line per entry:
#   id,family,seed,split,map,task,guidance
for line in (out / "manifest").read_text().splitlines()[:3]:
    print(" ", line)

train = [e for e in manifest.entries if e.split == "train"]
test = [e for e in manifest.entries if e.split == "test"]
print(f"split {len(train)} train / {len(test)} test "
      f"(round(0.85 * {len(specs)}) = {round(0.85 * len(specs))})")

# Reading a manifest back validates ids, splits, and file existence.
again = CorpusManifest.read(out / "manifest")
assert [e.entry_id for e in again.entries] == [e.entry_id for e in manifest.entries]
map_path, task_path, guidance_path = again.paths(again.entries[0])
print(f"first entry files: {map_path.name}, {task_path.name}, {guidance_path.name}")
