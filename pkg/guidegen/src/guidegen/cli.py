"""Command-line front end: train, infer, report-size.

Exit codes follow the planner tools' convention: 0 on success, 1 on
operational errors (missing or malformed files, diverged training), 2
on argument errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import torch

from .losses import LossWeights
from .model import (GuidanceGenerator, PatchDiscriminator, count_params_flops,
                    depthwise_blocks)
from .train import TrainConfig, infer, train


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guidegen",
        description="Train and run the neural guidance generator.")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train on a planner corpus")
    t.add_argument("--manifest", required=True, help="corpus manifest file")
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--epochs", type=_nonnegative_int, default=25)
    t.add_argument("--g-lr", type=float, default=0.005,
                   help="generator Adam learning rate")
    t.add_argument("--d-lr", type=float, default=0.001,
                   help="discriminator Adam learning rate")
    t.add_argument("--batch-size", type=_positive_int, default=4)
    t.add_argument("--lambda1", type=float, default=1.0,
                   help="adversarial term weight")
    t.add_argument("--lambda2", type=float, default=100.0, help="L1 term weight")
    t.add_argument("--lambda3", type=float, default=1.0, help="dice term weight")
    t.add_argument("--gamma", type=float, default=1.0, help="dice smoothing")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--noise-rate", type=float, default=0.5,
                   help="bottleneck dropout rate (the conditional noise)")
    t.add_argument("--units-per-stage", type=_positive_int, default=2)
    t.set_defaults(run=_run_train)

    i = sub.add_parser("infer", help="predict guidance for one map/task pair")
    i.add_argument("--checkpoint", required=True)
    i.add_argument("--map", required=True, help="map PNG")
    i.add_argument("--task", required=True, help="task overlay PNG")
    i.add_argument("--out", required=True, help="guidance PNG to write")
    i.add_argument("--seed", type=int, default=0)
    i.set_defaults(run=_run_infer)

    r = sub.add_parser("report-size", help="parameter and MAC counts")
    r.add_argument("--resolution", type=_positive_int, default=128,
                   help="input side length for the MAC count")
    r.add_argument("--units-per-stage", type=_positive_int, default=2)
    r.set_defaults(run=_run_report_size)
    return parser


def _run_train(args) -> int:
    config = TrainConfig(
        manifest=Path(args.manifest), out_dir=Path(args.out),
        epochs=args.epochs, g_lr=args.g_lr, d_lr=args.d_lr,
        batch_size=args.batch_size,
        weights=LossWeights(lambda1=args.lambda1, lambda2=args.lambda2,
                            lambda3=args.lambda3, gamma=args.gamma),
        seed=args.seed, noise_rate=args.noise_rate,
        units_per_stage=args.units_per_stage)

    def show(s):
        val = "" if s.val_mdice is None else f" val_mdice={s.val_mdice:.3f}"
        print(f"epoch {s.epoch}/{config.epochs}: d={s.d_loss:.3f} "
              f"adv={s.g_adversarial:.3f} l1={s.g_l1:.4f} dice={s.g_dice:.3f} "
              f"train_mdice={s.train_mdice:.3f}{val}")

    result = train(config, progress=show)
    print(f"generator parameters: {result.parameters}")
    print(result.checkpoint_path)
    print(result.curves_path)
    return 0


def _run_infer(args) -> int:
    data = infer(Path(args.checkpoint),
                 Path(args.map).read_bytes(),
                 Path(args.task).read_bytes(),
                 seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    print(out)
    return 0


def _run_report_size(args) -> int:
    side = args.resolution
    generator = GuidanceGenerator(units_per_stage=args.units_per_stage)
    env = torch.zeros(1, 1, side, side)
    task = torch.zeros(1, 2, side, side)
    g_params, g_macs = count_params_flops(generator, env, task)

    blocks = list(depthwise_blocks(generator))
    mismatched = [name for name, n_in, n_out, block in blocks
                  if block.weight_count() != 9 * n_in + n_in * n_out]
    discriminator = PatchDiscriminator()
    d_params, d_macs = count_params_flops(
        discriminator, env, task, torch.zeros(1, 1, side, side))

    print(f"generator: {g_params} parameters, {g_macs} MACs at {side}x{side}")
    print(f"discriminator: {d_params} parameters, {d_macs} MACs at {side}x{side}")
    print(f"depthwise separable blocks: {len(blocks)}, "
          f"closed-form mismatches: {len(mismatched)}")
    for name in mismatched:
        print(f"  mismatch: {name}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
