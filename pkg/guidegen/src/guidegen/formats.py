"""On-disk contracts shared with the planning package.

The generator deliberately shares no code with the planner; the two
packages meet only at files. This module reimplements the planner's
published formats:

- map PNG: black is obstacle, white is free; any pixel decodes by
  luminance (obstacle iff below mid-grey), except the pure overlay
  colours blue/red/green, which always count as free.
- task PNG: the map plus a blue disc at the start and a red disc at the
  goal, painted over free pixels only.
- guidance PNG: a cell of weight w in [0, 1] renders as the pixel
  (255-g, 255, 255-g) with g = round(255 w); obstacle cells stay black.
- manifest: one headerless CSV line per corpus entry,
  ``id,family,seed,split,map,task,guidance``, paths relative to the
  manifest's directory.

Luminance uses the ITU-R 601 integer weights (299, 587, 114 per mille)
so the obstacle test is exact, matching the planner bit for bit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

START_COLOR = (0, 0, 255)
GOAL_COLOR = (255, 0, 0)
GUIDANCE_COLOR = (0, 255, 0)

_LUMA_THRESHOLD_MILLI = 128_000


@dataclass(frozen=True)
class CorpusEntry:
    """One manifest row with paths resolved against the manifest directory."""

    entry_id: str
    family: str
    seed: int
    split: str
    map_path: Path
    task_path: Path
    guidance_path: Path


def read_manifest(manifest_path) -> list[CorpusEntry]:
    """Parse a corpus manifest; every referenced file must exist."""
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    entries = []
    seen = set()
    for lineno, line in enumerate(manifest_path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 7:
            raise ValueError(
                f"manifest line {lineno}: expected 7 fields, got {len(fields)}")
        entry = CorpusEntry(fields[0], fields[1], int(fields[2]), fields[3],
                            root / fields[4], root / fields[5], root / fields[6])
        if entry.split not in ("train", "test"):
            raise ValueError(f"manifest line {lineno}: bad split {entry.split!r}")
        if entry.entry_id in seen:
            raise ValueError(f"manifest line {lineno}: duplicate id {entry.entry_id!r}")
        seen.add(entry.entry_id)
        for p in (entry.map_path, entry.task_path, entry.guidance_path):
            if not p.is_file():
                raise ValueError(f"manifest line {lineno}: missing file {p}")
        entries.append(entry)
    return entries


def _decode_rgb(data: bytes) -> np.ndarray:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise ValueError(f"could not decode PNG image: {exc}") from None
    return np.asarray(img.convert("RGB"))


def decode_obstacles(data: bytes) -> np.ndarray:
    """Boolean (H, W) obstacle mask from a map or task PNG."""
    arr = _decode_rgb(data)
    chan = arr.astype(np.int64)
    luma_milli = 299 * chan[:, :, 0] + 587 * chan[:, :, 1] + 114 * chan[:, :, 2]
    obstacle = luma_milli < _LUMA_THRESHOLD_MILLI
    for color in (START_COLOR, GOAL_COLOR, GUIDANCE_COLOR):
        obstacle &= ~np.all(arr == np.asarray(color, dtype=np.uint8), axis=2)
    return obstacle


def decode_task_masks(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (start, goal) marker masks from a task PNG.

    Markers are the pure-blue and pure-red pixels; both must be present.
    """
    arr = _decode_rgb(data)
    start = np.all(arr == np.asarray(START_COLOR, dtype=np.uint8), axis=2)
    goal = np.all(arr == np.asarray(GOAL_COLOR, dtype=np.uint8), axis=2)
    if not start.any():
        raise ValueError("no start marker pixels found in task image")
    if not goal.any():
        raise ValueError("no goal marker pixels found in task image")
    return start, goal


def decode_guidance_weights(data: bytes) -> np.ndarray:
    """Float (H, W) weights in [0, 1]: greenness G - max(R, B) over 255."""
    chan = _decode_rgb(data).astype(np.int16)
    greenness = chan[:, :, 1] - np.maximum(chan[:, :, 0], chan[:, :, 2])
    return np.clip(greenness, 0, 255).astype(np.float64) / 255.0


def encode_guidance_png(weight: np.ndarray, obstacle: np.ndarray) -> bytes:
    """Render weights over the occupancy raster as a guidance PNG.

    Free cells get the green tint for their weight (white at zero);
    obstacle cells are black whatever the weight says.
    """
    w = np.asarray(weight, dtype=np.float64)
    if w.ndim != 2 or w.shape != obstacle.shape:
        raise ValueError(
            f"weights {w.shape} and obstacle mask {obstacle.shape} must be "
            "matching 2-D arrays")
    if not np.all(np.isfinite(w)) or w.min() < 0.0 or w.max() > 1.0:
        raise ValueError("guidance weights must be finite and within [0, 1]")
    g = np.round(w * 255.0).astype(np.uint8)
    arr = np.zeros(w.shape + (3,), dtype=np.uint8)
    free = ~obstacle
    fade = 255 - g[free]
    arr[free, 0] = fade
    arr[free, 1] = 255
    arr[free, 2] = fade
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
