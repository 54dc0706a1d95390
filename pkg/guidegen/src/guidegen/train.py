"""Training loop and inference for the guidance generator.

Training alternates discriminator and generator updates with Adam, the
generator at the faster rate, recording per-epoch loss terms and mean
Dice on the train and validation splits. Everything random (weight
init, batch order, noise dropout) flows from one seed, so a run is
reproducible bit for bit on the same software stack. A non-finite loss
aborts the run instead of letting a diverged model train on.

Inference loads a checkpoint, validates that the inputs match the
trained resolution, and writes a guidance PNG in the planner's format.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from .formats import (CorpusEntry, decode_guidance_weights, decode_obstacles,
                      decode_task_masks, encode_guidance_png, read_manifest)
from .losses import (LossWeights, adversarial_loss, dice_loss, fake_score_term,
                     joint_objective, l1_loss)
from .model import (DOWNSAMPLE_FACTOR, GuidanceGenerator, PatchDiscriminator,
                    count_parameters)

# keep discriminator scores off the log singularities
SCORE_EPS = 1e-6

DEFAULT_EPOCHS = 25
DEFAULT_G_LR = 0.005
DEFAULT_D_LR = 0.001
DEFAULT_BATCH_SIZE = 4


@dataclass(frozen=True)
class TrainConfig:
    manifest: Path
    out_dir: Path
    epochs: int = DEFAULT_EPOCHS
    g_lr: float = DEFAULT_G_LR
    d_lr: float = DEFAULT_D_LR
    batch_size: int = DEFAULT_BATCH_SIZE
    weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    noise_rate: float = 0.5
    units_per_stage: int = 2

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.g_lr <= 0 or self.d_lr <= 0:
            raise ValueError("learning rates must be positive")


@dataclass
class EpochStats:
    epoch: int
    d_loss: float
    g_adversarial: float
    g_l1: float
    g_dice: float
    g_total: float
    train_mdice: float
    val_mdice: Optional[float]


@dataclass
class TrainResult:
    checkpoint_path: Path
    curves_path: Path
    stats: list[EpochStats]
    parameters: int


CURVE_COLUMNS = ["epoch", "d_loss", "g_adversarial", "g_l1", "g_dice",
                 "g_total", "train_mdice", "val_mdice"]


def load_entry_arrays(entry: CorpusEntry):
    """(obstacle, start, goal, truth) arrays for one corpus entry."""
    obstacle = decode_obstacles(entry.map_path.read_bytes())
    start, goal = decode_task_masks(entry.task_path.read_bytes())
    truth = decode_guidance_weights(entry.guidance_path.read_bytes())
    for name, arr in (("task", start), ("guidance", truth)):
        if arr.shape != obstacle.shape:
            raise ValueError(
                f"{entry.entry_id}: {name} raster {arr.shape} does not match "
                f"map {obstacle.shape}")
    return obstacle, start, goal, truth


def to_input_tensors(obstacle, start, goal):
    """Batch-1 (env, task) float tensors from boolean masks."""
    env = torch.from_numpy(np.ascontiguousarray(obstacle, dtype=np.float32))
    task = torch.from_numpy(np.stack([np.asarray(start, dtype=np.float32),
                                      np.asarray(goal, dtype=np.float32)]))
    return env.unsqueeze(0).unsqueeze(0), task.unsqueeze(0)


def _load_split(entries):
    envs, tasks, truths = [], [], []
    shape = None
    for entry in entries:
        obstacle, start, goal, truth = load_entry_arrays(entry)
        if shape is None:
            shape = obstacle.shape
        elif obstacle.shape != shape:
            raise ValueError(
                f"{entry.entry_id}: corpus mixes sizes {shape} and {obstacle.shape}")
        env, task = to_input_tensors(obstacle, start, goal)
        envs.append(env[0])
        tasks.append(task[0])
        truths.append(torch.from_numpy(truth.astype(np.float32)).unsqueeze(0))
    return torch.stack(envs), torch.stack(tasks), torch.stack(truths)


def mask_dice(pred_mask, truth_mask) -> float:
    """Dice overlap of two boolean masks; empty vs empty counts as 1."""
    inter = int(np.logical_and(pred_mask, truth_mask).sum())
    total = int(pred_mask.sum()) + int(truth_mask.sum())
    if total == 0:
        return 1.0
    return 2.0 * inter / total


def dataset_mdice(generator, envs, tasks, truths, threshold: float = 0.5) -> float:
    """Mean Dice of thresholded predictions over a split, one image at a time."""
    scores = []
    with torch.no_grad():
        for i in range(envs.shape[0]):
            pred = generator(envs[i:i + 1], tasks[i:i + 1])[0, 0].numpy()
            truth = truths[i, 0].numpy()
            scores.append(mask_dice(pred > threshold, truth > threshold))
    return float(np.mean(scores))


def build_models(gen_config: dict):
    generator = GuidanceGenerator(**gen_config)
    discriminator = PatchDiscriminator()
    return generator, discriminator


def train(config: TrainConfig, progress=None) -> TrainResult:
    """Run the full loop and write checkpoint.pt plus curves.csv.

    `progress`, when given, is called with each epoch's EpochStats as
    soon as the epoch finishes.
    """
    entries = read_manifest(config.manifest)
    train_entries = [e for e in entries if e.split == "train"]
    val_entries = [e for e in entries if e.split == "test"]
    if not train_entries:
        raise ValueError("corpus has no train entries")

    envs, tasks, truths = _load_split(train_entries)
    h, w = envs.shape[2:]
    if h % DOWNSAMPLE_FACTOR or w % DOWNSAMPLE_FACTOR:
        raise ValueError(
            f"corpus resolution {w}x{h} must be a multiple of {DOWNSAMPLE_FACTOR}")
    val_data = _load_split(val_entries) if val_entries else None
    if val_data is not None and val_data[0].shape[2:] != (h, w):
        raise ValueError("validation entries differ in size from train entries")

    torch.manual_seed(config.seed)
    gen_config = {"units_per_stage": config.units_per_stage,
                  "noise_rate": config.noise_rate}
    generator, discriminator = build_models(gen_config)
    generator.train()
    discriminator.train()
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.g_lr,
                             betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=config.d_lr,
                             betas=(0.5, 0.999))

    n = envs.shape[0]
    stats: list[EpochStats] = []
    for epoch in range(1, config.epochs + 1):
        order = torch.randperm(n)
        sums = {"d_loss": 0.0, "g_adversarial": 0.0, "g_l1": 0.0,
                "g_dice": 0.0, "g_total": 0.0}
        batches = 0
        for lo in range(0, n, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            env_b, task_b, truth_b = envs[idx], tasks[idx], truths[idx]
            pred = generator(env_b, task_b)

            d_real = discriminator(env_b, task_b, truth_b)
            d_fake = discriminator(env_b, task_b, pred.detach())
            d_value = adversarial_loss(d_real.clamp(SCORE_EPS, 1.0 - SCORE_EPS),
                                       d_fake.clamp(SCORE_EPS, 1.0 - SCORE_EPS))
            d_loss = -d_value  # the discriminator maximises the value
            if not bool(torch.isfinite(d_loss)):
                raise ValueError(f"non-finite discriminator loss at epoch {epoch}")
            opt_d.zero_grad()
            d_loss.backward()
            opt_d.step()

            d_fake = discriminator(env_b, task_b, pred)
            g_adv = fake_score_term(d_fake.clamp(SCORE_EPS, 1.0 - SCORE_EPS))
            g_l1 = l1_loss(pred, truth_b)
            g_dice = dice_loss(pred, truth_b, config.weights.gamma)
            g_total = joint_objective(g_adv, g_l1, g_dice, config.weights)
            opt_g.zero_grad()
            g_total.backward()
            opt_g.step()

            sums["d_loss"] += float(d_loss.detach())
            sums["g_adversarial"] += float(g_adv.detach())
            sums["g_l1"] += float(g_l1.detach())
            sums["g_dice"] += float(g_dice.detach())
            sums["g_total"] += float(g_total.detach())
            batches += 1

        means = {k: v / batches for k, v in sums.items()}
        train_mdice = dataset_mdice(generator, envs, tasks, truths)
        val_mdice = (dataset_mdice(generator, *val_data)
                     if val_data is not None else None)
        stats.append(EpochStats(epoch=epoch, train_mdice=train_mdice,
                                val_mdice=val_mdice, **means))
        if progress is not None:
            progress(stats[-1])

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves_path = out / "curves.csv"
    with curves_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for s in stats:
            writer.writerow([s.epoch, repr(s.d_loss), repr(s.g_adversarial),
                             repr(s.g_l1), repr(s.g_dice), repr(s.g_total),
                             repr(s.train_mdice),
                             "" if s.val_mdice is None else repr(s.val_mdice)])

    checkpoint_path = out / "checkpoint.pt"
    torch.save({
        "generator": generator.state_dict(),
        "discriminator": discriminator.state_dict(),
        "generator_config": generator.config(),
        "weights": asdict(config.weights),
        "resolution": (int(h), int(w)),
        "epochs": config.epochs,
        "seed": config.seed,
    }, checkpoint_path)
    return TrainResult(checkpoint_path=checkpoint_path, curves_path=curves_path,
                       stats=stats, parameters=count_parameters(generator))


def load_generator(checkpoint_path):
    """Rebuild the generator of a checkpoint; returns (model, resolution)."""
    ckpt = torch.load(Path(checkpoint_path), weights_only=True)
    generator = GuidanceGenerator(**ckpt["generator_config"])
    generator.load_state_dict(ckpt["generator"])
    generator.train()
    return generator, tuple(ckpt["resolution"])


def infer(checkpoint_path, map_data: bytes, task_data: bytes,
          seed: int = 0) -> bytes:
    """Predict guidance for one map/task pair; returns PNG bytes.

    The map and task must match the checkpoint's trained resolution.
    The noise dropout stays active, so the seed picks one sample from
    the model's output distribution.
    """
    generator, (h, w) = load_generator(checkpoint_path)
    obstacle = decode_obstacles(map_data)
    if obstacle.shape != (h, w):
        raise ValueError(
            f"map is {obstacle.shape[1]}x{obstacle.shape[0]} but the checkpoint "
            f"was trained at {w}x{h}")
    start, goal = decode_task_masks(task_data)
    if start.shape != (h, w):
        raise ValueError("task raster does not match the trained resolution")
    env, task = to_input_tensors(obstacle, start, goal)
    torch.manual_seed(seed)
    with torch.no_grad():
        pred = generator(env, task)[0, 0].numpy()
    weight = np.clip(pred.astype(np.float64), 0.0, 1.0)
    weight[obstacle] = 0.0
    return encode_guidance_png(weight, obstacle)
