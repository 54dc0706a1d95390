"""Toy conditional-GAN guidance generator for grid motion planning.

Trains an image-to-image model on corpora produced by the planning
package's dataset tools and emits guidance PNGs its planners accept.
The two packages share file formats, never code.
"""

from .formats import (CorpusEntry, decode_guidance_weights, decode_obstacles,
                      decode_task_masks, encode_guidance_png, read_manifest)
from .losses import (LossWeights, adversarial_loss, dice_loss, fake_score_term,
                     joint_objective, l1_loss)
from .model import (CBAM, AtrousFusion, DepthwiseSeparable, GuidanceGenerator,
                    PatchDiscriminator, ShuffleDown, ShuffleUnit, channel_shuffle,
                    count_params_flops, count_parameters, depthwise_blocks)
from .train import (EpochStats, TrainConfig, TrainResult, dataset_mdice, infer,
                    load_generator, mask_dice, train)

__all__ = [
    "CorpusEntry", "decode_guidance_weights", "decode_obstacles",
    "decode_task_masks", "encode_guidance_png", "read_manifest",
    "LossWeights", "adversarial_loss", "dice_loss", "fake_score_term",
    "joint_objective", "l1_loss",
    "CBAM", "AtrousFusion", "DepthwiseSeparable", "GuidanceGenerator",
    "PatchDiscriminator", "ShuffleDown", "ShuffleUnit", "channel_shuffle",
    "count_params_flops", "count_parameters", "depthwise_blocks",
    "EpochStats", "TrainConfig", "TrainResult", "dataset_mdice", "infer",
    "load_generator", "mask_dice", "train",
]
