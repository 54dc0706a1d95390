"""Procedural scenario families, task sampling, and corpus building.

Five map families, all seeded and fully reproducible:

- ``maze``: recursive-division walls with narrow doorways,
- ``corridor``: parallel walls pierced by a few doors,
- ``rooms``: the same divider tuned to chunky chambers with wide doors,
- ``junction``: crossing corridor bands carved out of solid rock,
- ``columns``: scattered non-overlapping convex obstacles on open ground.

A corpus pairs each generated map with one sampled task and an
expert-stack guidance map, written as PNGs plus a ``manifest`` file: one
comma-separated line per entry with the fields

    id,family,seed,split,map,task,guidance

(paths relative to the manifest's directory, no header line).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from .guidance import expert_stack_oracle, save_guidance, stack_paths
from .map_core import DEFAULT_GOAL_RADIUS, GridMap, PlanningTask, State, save_map, save_task_image
from .planner import PlannerConfig, plan_rrt
from .rng import MASK64, mix64

FAMILIES = ("maze", "corridor", "rooms", "junction", "columns")

MIN_RESOLUTION = 32
DEFAULT_RESOLUTION = 128
DEFAULT_RUNS_PER_MAP = 50
DEFAULT_SPLIT_RATIO = 0.85
# Oracle runs get a deeper budget than interactive planning so that even
# hard maze tasks almost surely contribute a few stacked paths.
DEFAULT_ORACLE_ITERATIONS = 50_000

# Which family_params keys each family understands.
_FAMILY_PARAMS = {
    "maze": {"wall", "door", "min_room"},
    "corridor": {"wall", "door", "n_walls"},
    "rooms": {"wall", "door", "min_room"},
    "junction": {"n_horizontal", "n_vertical"},
    "columns": {"n_columns", "size_range", "shapes"},
}

_CROSS4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for one map: family, seed, resolution, optional overrides."""

    family: str
    rng_seed: int
    resolution: int = DEFAULT_RESOLUTION
    family_params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.resolution < MIN_RESOLUTION:
            raise ValueError(f"resolution must be at least {MIN_RESOLUTION}")
        unknown = set(self.family_params) - _FAMILY_PARAMS[self.family]
        if unknown:
            raise ValueError(f"unknown {self.family} params: {sorted(unknown)}")


def generate_map(spec: ScenarioSpec) -> GridMap:
    """Deterministically generate the map a spec describes."""
    rng = np.random.default_rng(spec.rng_seed & MASK64)
    r = spec.resolution
    p = spec.family_params
    if spec.family == "maze":
        occ = _divided_walls(rng, r, wall=p.get("wall", 2), door=p.get("door", 6),
                             min_room=p.get("min_room", 14))
    elif spec.family == "rooms":
        occ = _divided_walls(rng, r, wall=p.get("wall", 2), door=p.get("door", 8),
                             min_room=p.get("min_room", 26))
    elif spec.family == "corridor":
        occ = _corridor(rng, r, wall=p.get("wall", 2), door=p.get("door", 6),
                        n_walls=p.get("n_walls"))
    elif spec.family == "junction":
        occ = _junction(rng, r, n_h=p.get("n_horizontal"), n_v=p.get("n_vertical"))
    else:
        occ = _columns(rng, r, n_columns=p.get("n_columns"),
                       size_range=p.get("size_range", (8, 20)),
                       shapes=p.get("shapes", ("circle", "triangle", "square")))
    return GridMap(occ)


def _divided_walls(rng, r: int, wall: int, door: int, min_room: int) -> np.ndarray:
    """Recursive division with doors that later walls may never block.

    A new wall is only placed where both of its ends abut solid wall, so
    every carved door keeps a clear approach; the free space stays one
    connected component by induction.
    """
    occ = np.zeros((r, r), dtype=bool)
    occ[:wall, :] = True
    occ[-wall:, :] = True
    occ[:, :wall] = True
    occ[:, -wall:] = True

    def divide(x0: int, y0: int, x1: int, y1: int) -> None:
        w = x1 - x0
        h = y1 - y0
        can_v = w >= 2 * min_room + wall
        can_h = h >= 2 * min_room + wall
        if not can_v and not can_h:
            return
        if can_v and can_h:
            vertical = w > h if w != h else bool(rng.integers(2))
        else:
            vertical = can_v
        for _ in range(24):
            if vertical:
                wx = int(rng.integers(x0 + min_room, x1 - min_room - wall + 1))
                if occ[y0 - 1, wx:wx + wall].all() and occ[y1, wx:wx + wall].all():
                    occ[y0:y1, wx:wx + wall] = True
                    dy = int(rng.integers(y0, y1 - door + 1))
                    occ[dy:dy + door, wx:wx + wall] = False
                    divide(x0, y0, wx, y1)
                    divide(wx + wall, y0, x1, y1)
                    return
            else:
                wy = int(rng.integers(y0 + min_room, y1 - min_room - wall + 1))
                if occ[wy:wy + wall, x0 - 1].all() and occ[wy:wy + wall, x1].all():
                    occ[wy:wy + wall, x0:x1] = True
                    dx = int(rng.integers(x0, x1 - door + 1))
                    occ[wy:wy + wall, dx:dx + door] = False
                    divide(x0, y0, x1, wy)
                    divide(x0, wy + wall, x1, y1)
                    return

    divide(wall, wall, r - wall, r - wall)
    return occ


def _corridor(rng, r: int, wall: int, door: int, n_walls: Optional[int]) -> np.ndarray:
    occ = np.zeros((r, r), dtype=bool)
    occ[:wall, :] = True
    occ[-wall:, :] = True
    occ[:, :wall] = True
    occ[:, -wall:] = True
    if n_walls is None:
        n_walls = int(rng.integers(3, 7))
    horizontal = bool(rng.integers(2))
    span = r - 2 * wall
    for i in range(n_walls):
        base = wall + (i + 1) * span // (n_walls + 1)
        jitter = int(rng.integers(-span // (4 * (n_walls + 1)), span // (4 * (n_walls + 1)) + 1))
        pos = min(max(base + jitter, wall + 1), r - wall - wall - 1)
        n_doors = int(rng.integers(1, 3))
        doors = [int(rng.integers(wall, r - wall - door + 1)) for _ in range(n_doors)]
        if horizontal:
            occ[pos:pos + wall, :] = True
            for d in doors:
                occ[pos:pos + wall, d:d + door] = False
        else:
            occ[:, pos:pos + wall] = True
            for d in doors:
                occ[d:d + door, pos:pos + wall] = False
    return occ


def _junction(rng, r: int, n_h: Optional[int], n_v: Optional[int]) -> np.ndarray:
    """Solid map with carved corridor bands; every band crosses the others."""
    occ = np.ones((r, r), dtype=bool)
    if n_h is None:
        n_h = 1 + int(rng.integers(0, 2))
    if n_v is None:
        n_v = 1 + int(rng.integers(0, 2))
    lo, hi = max(6, r // 10), max(8, r // 6)
    for _ in range(max(1, n_h)):
        width = int(rng.integers(lo, hi + 1))
        y = int(rng.integers(2, r - width - 1))
        occ[y:y + width, :] = False
    for _ in range(max(1, n_v)):
        width = int(rng.integers(lo, hi + 1))
        x = int(rng.integers(2, r - width - 1))
        occ[:, x:x + width] = False
    return occ


def _columns(rng, r: int, n_columns: Optional[int], size_range, shapes) -> np.ndarray:
    occ = np.zeros((r, r), dtype=bool)
    if n_columns is None:
        n_columns = int(rng.integers(6, 15))
    shapes = tuple(shapes)
    if n_columns and not shapes:
        raise ValueError("columns family needs at least one shape")
    lo, hi = size_range
    margin = 2
    placed: list[tuple[int, int, int]] = []  # (x, y, size) bounding boxes
    for _ in range(n_columns):
        for _ in range(200):
            s = int(rng.integers(lo, hi + 1))
            if r - margin - s <= margin:
                continue
            x = int(rng.integers(margin, r - margin - s))
            y = int(rng.integers(margin, r - margin - s))
            if any(x < px + ps + margin and px < x + s + margin and
                   y < py + ps + margin and py < y + s + margin
                   for px, py, ps in placed):
                continue
            shape = shapes[int(rng.integers(len(shapes)))]
            _raster_column(occ, rng, shape, x, y, s)
            placed.append((x, y, s))
            break
    return occ


def _raster_column(occ, rng, shape: str, x: int, y: int, s: int) -> None:
    if shape == "square":
        occ[y:y + s, x:x + s] = True
        return
    yy, xx = np.mgrid[y:y + s, x:x + s]
    cx = xx + 0.5
    cy = yy + 0.5
    if shape == "circle":
        rad = s / 2.0
        inside = (cx - (x + rad)) ** 2 + (cy - (y + rad)) ** 2 <= rad * rad
    elif shape == "triangle":
        corners = [(x, y), (x + s, y), (x + s, y + s), (x, y + s)]
        drop = int(rng.integers(4))  # cut one corner off the box
        v = [c for i, c in enumerate(corners) if i != drop]
        inside = _in_triangle(cx, cy, v[0], v[1], v[2])
    else:
        raise ValueError(f"unknown column shape {shape!r}")
    occ[yy[inside], xx[inside]] = True


def _in_triangle(px, py, a, b, c) -> np.ndarray:
    def cross(o, d):
        return (d[0] - o[0]) * (py - o[1]) - (d[1] - o[1]) * (px - o[0])

    d1 = cross(a, b)
    d2 = cross(b, c)
    d3 = cross(c, a)
    neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    return ~(neg & pos)


def sample_task(grid: GridMap, rng_seed: int,
                goal_radius: float = DEFAULT_GOAL_RADIUS) -> PlanningTask:
    """Draw a reachable start/goal pair on the map.

    Both endpoints are centres of distinct free cells in the same
    4-connected component. Separation starts at a quarter of the map
    diagonal and halves whenever a bounded number of draws fails, down to
    any connected pair; raises ValueError only when no such pair exists.
    """
    rng = np.random.default_rng(mix64(rng_seed))
    free = ~grid.occupancy
    ys, xs = np.nonzero(free)
    if xs.size < 2:
        raise ValueError("map has fewer than two free cells")
    labels, _ = ndimage.label(free, structure=_CROSS4)
    flat_labels = labels[ys, xs]
    sep = 0.25 * math.hypot(grid.width, grid.height)
    while sep >= 1.0:
        for _ in range(500):
            i = int(rng.integers(xs.size))
            j = int(rng.integers(xs.size))
            if i == j or flat_labels[i] != flat_labels[j]:
                continue
            dx = float(xs[i]) - float(xs[j])
            dy = float(ys[i]) - float(ys[j])
            if math.hypot(dx, dy) >= sep:
                return _task_from_cells(xs, ys, i, j, goal_radius)
        sep *= 0.5
    # no separation constraint left: use the largest component directly
    sizes = np.bincount(flat_labels)
    sizes[0] = 0
    best = int(sizes.argmax())
    members = np.nonzero(flat_labels == best)[0]
    if members.size < 2:
        raise ValueError("no connected pair of distinct free cells exists")
    i, j = (int(v) for v in rng.choice(members, size=2, replace=False))
    return _task_from_cells(xs, ys, i, j, goal_radius)


def _task_from_cells(xs, ys, i: int, j: int, goal_radius: float) -> PlanningTask:
    return PlanningTask(
        start=State(float(xs[i]) + 0.5, float(ys[i]) + 0.5),
        goal=State(float(xs[j]) + 0.5, float(ys[j]) + 0.5),
        goal_radius=goal_radius,
    )


@dataclass(frozen=True)
class ManifestEntry:
    """One corpus row; paths are relative to the manifest's directory."""

    entry_id: str
    family: str
    seed: int
    split: str
    map_path: str
    task_path: str
    guidance_path: str

    def line(self) -> str:
        return ",".join([self.entry_id, self.family, str(self.seed), self.split,
                         self.map_path, self.task_path, self.guidance_path])


@dataclass
class CorpusManifest:
    """Parsed ``manifest`` file plus its directory root."""

    root: Path
    entries: list[ManifestEntry]

    def train(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == "train"]

    def test(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == "test"]

    def paths(self, entry: ManifestEntry) -> tuple[Path, Path, Path]:
        return (self.root / entry.map_path, self.root / entry.task_path,
                self.root / entry.guidance_path)

    def write(self) -> Path:
        out = self.root / "manifest"
        out.write_text("".join(e.line() + "\n" for e in self.entries))
        return out

    @classmethod
    def read(cls, manifest_path) -> "CorpusManifest":
        manifest_path = Path(manifest_path)
        root = manifest_path.parent
        entries = []
        seen = set()
        for lineno, line in enumerate(manifest_path.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            fields = line.split(",")
            if len(fields) != 7:
                raise ValueError(f"manifest line {lineno}: expected 7 fields, got {len(fields)}")
            entry = ManifestEntry(fields[0], fields[1], int(fields[2]), fields[3],
                                  fields[4], fields[5], fields[6])
            if entry.split not in ("train", "test"):
                raise ValueError(f"manifest line {lineno}: bad split {entry.split!r}")
            if entry.entry_id in seen:
                raise ValueError(f"manifest line {lineno}: duplicate id {entry.entry_id!r}")
            seen.add(entry.entry_id)
            for rel in (entry.map_path, entry.task_path, entry.guidance_path):
                if not (root / rel).is_file():
                    raise ValueError(f"manifest line {lineno}: missing file {rel!r}")
            entries.append(entry)
        return cls(root=root, entries=entries)


def build_corpus(specs, out_dir, runs_per_map: int = DEFAULT_RUNS_PER_MAP,
                 split_ratio: float = DEFAULT_SPLIT_RATIO,
                 oracle_config: Optional[PlannerConfig] = None,
                 fresh_task_per_run: bool = False) -> CorpusManifest:
    """Generate maps, tasks, and oracle guidance; write PNGs and the manifest.

    Exactly round(split_ratio * n) entries become train, the rest test,
    assigned by a shuffle seeded from the spec seeds themselves, so the
    whole corpus (splits included) is a pure function of the spec list.
    Each entry derives its task and oracle seeds from its spec seed, so
    rebuilding a corpus reproduces every file byte for byte. With
    fresh_task_per_run, every oracle run draws its own task (the saved
    task file is the first of them) instead of reusing one task for all
    runs.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("cannot build an empty corpus")
    if not 0.0 <= split_ratio <= 1.0:
        raise ValueError("split_ratio must lie in [0, 1]")
    if runs_per_map < 1:
        raise ValueError("runs_per_map must be at least 1")
    if oracle_config is None:
        oracle_config = PlannerConfig(max_iterations=DEFAULT_ORACLE_ITERATIONS)
    out = Path(out_dir)
    for sub in ("maps", "tasks", "guidance"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    n_train = int(round(split_ratio * len(specs)))
    split_rng = np.random.default_rng(
        mix64(len(specs), *(s.rng_seed for s in specs)))
    train_idx = set(int(i) for i in split_rng.permutation(len(specs))[:n_train])
    entries = []
    for idx, spec in enumerate(specs):
        entry_id = f"{idx:05d}-{spec.family}"
        try:
            grid = generate_map(spec)
            if fresh_task_per_run:
                tasks = [sample_task(grid, mix64(spec.rng_seed, 1, k))
                         for k in range(runs_per_map)]
                paths = []
                for k, t in enumerate(tasks):
                    cfg = replace(oracle_config, rng_seed=mix64(spec.rng_seed, 2, k))
                    rec = plan_rrt(grid, t, None, cfg)
                    if rec.found:
                        paths.append(rec.path)
                task = tasks[0]
                gmap = stack_paths(grid, paths)
            else:
                task = sample_task(grid, mix64(spec.rng_seed, 1))
                cfg = replace(oracle_config, rng_seed=mix64(spec.rng_seed, 2))
                gmap = expert_stack_oracle(grid, task, runs=runs_per_map, config=cfg)
            if gmap.active_cells() == 0:
                raise ValueError(
                    "oracle found no path in any run; raise runs_per_map or the "
                    "oracle iteration budget")
        except ValueError as exc:
            raise ValueError(f"corpus entry {entry_id}: {exc}") from exc
        rel_map = f"maps/{entry_id}.png"
        rel_task = f"tasks/{entry_id}.png"
        rel_guidance = f"guidance/{entry_id}.png"
        (out / rel_map).write_bytes(save_map(grid))
        (out / rel_task).write_bytes(save_task_image(grid, task))
        (out / rel_guidance).write_bytes(save_guidance(gmap, grid))
        entries.append(ManifestEntry(
            entry_id=entry_id, family=spec.family, seed=spec.rng_seed,
            split="train" if idx in train_idx else "test",
            map_path=rel_map, task_path=rel_task, guidance_path=rel_guidance))
    manifest = CorpusManifest(root=out, entries=entries)
    manifest.write()
    return manifest
