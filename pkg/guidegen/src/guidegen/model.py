"""Generator and discriminator networks, toy sized.

The generator is an image-to-image translator from an occupancy raster
plus start/goal markers to a per-cell guidance weight raster. Its
encoder is built from shuffle units (channel split, pointwise conv, 3x3
depthwise conv, pointwise conv, concat, channel shuffle; the
downsampling variant runs two strided branches over the full input). A
multi-scale fusion of four parallel atrous convolutions with dilation
rates 1, 2, 3, 5 sits right behind the environment input so long-range
obstacle structure survives the cheap extractors. A lean task branch of
ordinary conv + max-pool stages feeds the start/goal masks into the
matching encoder stage by concatenation. The decoder interleaves
depthwise separable blocks with transposed convolutions and takes skip
connections from every encoder scale; dropout at the bottleneck is the
conditional-GAN noise source and stays active at inference.

The discriminator is a four-layer patch classifier (conv + batch norm +
ReLU + max pooling per layer, channel-spatial attention after layer
two) scoring an (environment, task, guidance) triple as an NxN grid of
real/fake probabilities rather than one scalar.

All normalisation uses batch statistics without running averages, so a
forward pass computes the same function whatever the module mode; the
noise dropout likewise ignores eval mode. Inference is therefore
reproducible from a seed alone.
"""

from __future__ import annotations

import torch
from torch import nn

DEFAULT_STAGE_WIDTHS = (24, 48, 96, 192)
DEFAULT_TASK_WIDTHS = (8, 12, 16, 24)
DEFAULT_STEM_WIDTH = 12
DEFAULT_UNITS_PER_STAGE = 2
DEFAULT_NOISE_RATE = 0.5
ATROUS_RATES = (1, 2, 3, 5)
DISCRIMINATOR_WIDTHS = (24, 48, 96, 96)

# four stride-2 stages in both networks
DOWNSAMPLE_FACTOR = 16


def channel_shuffle(x, groups: int = 2):
    """Interleave channel groups; a pure permutation of the channels."""
    n, c, h, w = x.shape
    if c % groups:
        raise ValueError(f"{c} channels cannot shuffle into {groups} groups")
    return (x.view(n, groups, c // groups, h, w)
            .transpose(1, 2).reshape(n, c, h, w))


def _norm(channels: int) -> nn.Module:
    # batch statistics only: train and eval modes compute the same thing
    return nn.BatchNorm2d(channels, track_running_stats=False)


class AlwaysDropout(nn.Module):
    """Dropout that ignores eval mode: the generator's noise source."""

    def __init__(self, rate: float) -> None:
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.rate = rate

    def forward(self, x):
        if self.rate == 0.0:
            return x
        return nn.functional.dropout(x, self.rate, training=True)


class DepthwiseSeparable(nn.Module):
    """3x3 depthwise then 1x1 pointwise conv, both bias-free.

    With N input and n output channels the block holds exactly
    9*N + N*n weights, the closed-form count the size check verifies.
    """

    def __init__(self, n_in: int, n_out: int) -> None:
        super().__init__()
        self.depthwise = nn.Conv2d(n_in, n_in, 3, padding=1, groups=n_in, bias=False)
        self.pointwise = nn.Conv2d(n_in, n_out, 1, bias=False)

    def weight_count(self) -> int:
        return self.depthwise.weight.numel() + self.pointwise.weight.numel()

    def forward(self, x):
        return self.pointwise(self.depthwise(x))


class ShuffleUnit(nn.Module):
    """Stride-1 shuffle block: half the channels bypass the conv branch."""

    def __init__(self, channels: int) -> None:
        super().__init__()
        if channels % 2:
            raise ValueError("shuffle unit needs an even channel count")
        half = channels // 2
        self.branch = nn.Sequential(
            nn.Conv2d(half, half, 1, bias=False), _norm(half), nn.ReLU(inplace=True),
            nn.Conv2d(half, half, 3, padding=1, groups=half, bias=False), _norm(half),
            nn.Conv2d(half, half, 1, bias=False), _norm(half), nn.ReLU(inplace=True))

    def forward(self, x):
        keep, work = x.chunk(2, dim=1)
        return channel_shuffle(torch.cat([keep, self.branch(work)], dim=1))


class ShuffleDown(nn.Module):
    """Stride-2 shuffle block; both branches process the full input."""

    def __init__(self, n_in: int, n_out: int) -> None:
        super().__init__()
        if n_out % 2:
            raise ValueError("downsample unit needs an even output width")
        half = n_out // 2
        self.short = nn.Sequential(
            nn.Conv2d(n_in, n_in, 3, stride=2, padding=1, groups=n_in, bias=False),
            _norm(n_in),
            nn.Conv2d(n_in, half, 1, bias=False), _norm(half), nn.ReLU(inplace=True))
        self.main = nn.Sequential(
            nn.Conv2d(n_in, half, 1, bias=False), _norm(half), nn.ReLU(inplace=True),
            nn.Conv2d(half, half, 3, stride=2, padding=1, groups=half, bias=False),
            _norm(half),
            nn.Conv2d(half, half, 1, bias=False), _norm(half), nn.ReLU(inplace=True))

    def forward(self, x):
        return channel_shuffle(torch.cat([self.short(x), self.main(x)], dim=1))


class AtrousFusion(nn.Module):
    """Four parallel atrous 3x3 convs, concatenated and mixed back down."""

    def __init__(self, channels: int, rates=ATROUS_RATES) -> None:
        super().__init__()
        branch_out = max(channels // 2, 2)
        self.branches = nn.ModuleList(
            nn.Sequential(
                nn.Conv2d(channels, branch_out, 3, padding=r, dilation=r, bias=False),
                _norm(branch_out), nn.ReLU(inplace=True))
            for r in rates)
        self.mix = nn.Sequential(
            nn.Conv2d(len(rates) * branch_out, channels, 1, bias=False),
            _norm(channels), nn.ReLU(inplace=True))

    def forward(self, x):
        return self.mix(torch.cat([b(x) for b in self.branches], dim=1))


class TaskStage(nn.Module):
    """Ordinary conv + max pooling, one stage of the task branch."""

    def __init__(self, n_in: int, n_out: int) -> None:
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(n_in, n_out, 3, padding=1, bias=False),
            _norm(n_out), nn.ReLU(inplace=True), nn.MaxPool2d(2))

    def forward(self, x):
        return self.block(x)


class UpStage(nn.Module):
    """One decoder step: depthwise refine, transposed-conv up, skip fuse."""

    def __init__(self, n_in: int, n_skip: int, n_out: int) -> None:
        super().__init__()
        self.refine = nn.Sequential(
            DepthwiseSeparable(n_in, n_in), _norm(n_in), nn.ReLU(inplace=True))
        self.up = nn.Sequential(
            nn.ConvTranspose2d(n_in, n_out, 2, stride=2, bias=False),
            _norm(n_out), nn.ReLU(inplace=True))
        self.fuse = nn.Sequential(
            DepthwiseSeparable(n_out + n_skip, n_out), _norm(n_out),
            nn.ReLU(inplace=True))

    def forward(self, x, skip):
        x = self.up(self.refine(x))
        return self.fuse(torch.cat([x, skip], dim=1))


class GuidanceGenerator(nn.Module):
    """Dual-input encoder/decoder emitting a weight raster in [0, 1]."""

    def __init__(self, stage_widths=DEFAULT_STAGE_WIDTHS,
                 task_widths=DEFAULT_TASK_WIDTHS,
                 stem_width: int = DEFAULT_STEM_WIDTH,
                 units_per_stage: int = DEFAULT_UNITS_PER_STAGE,
                 noise_rate: float = DEFAULT_NOISE_RATE) -> None:
        super().__init__()
        if len(stage_widths) != 4 or len(task_widths) != 4:
            raise ValueError("both width tuples must name four stages")
        if units_per_stage < 1:
            raise ValueError("units_per_stage must be at least 1")
        self.stage_widths = tuple(stage_widths)
        self.task_widths = tuple(task_widths)
        self.stem_width = stem_width
        self.units_per_stage = units_per_stage
        self.noise_rate = noise_rate

        self.stem = nn.Sequential(
            nn.Conv2d(1, stem_width, 3, padding=1, bias=False),
            _norm(stem_width), nn.ReLU(inplace=True))
        self.fusion = AtrousFusion(stem_width)

        stages = []
        task_stages = []
        prev = stem_width
        prev_task = 2
        for width, task_width in zip(stage_widths, task_widths):
            units = [ShuffleDown(prev, width)]
            units += [ShuffleUnit(width) for _ in range(units_per_stage - 1)]
            stages.append(nn.Sequential(*units))
            task_stages.append(TaskStage(prev_task, task_width))
            prev = width + task_width
            prev_task = task_width
        self.stages = nn.ModuleList(stages)
        self.task_stages = nn.ModuleList(task_stages)

        self.noise = AlwaysDropout(noise_rate)

        # skip widths, deepest first: stage3..stage1 concats, then the stem
        skips = [stage_widths[i] + task_widths[i] for i in (2, 1, 0)] + [stem_width]
        outs = [stage_widths[2], stage_widths[1], stage_widths[0], stem_width]
        ups = []
        prev = stage_widths[3] + task_widths[3]
        for n_skip, n_out in zip(skips, outs):
            ups.append(UpStage(prev, n_skip, n_out))
            prev = n_out
        self.ups = nn.ModuleList(ups)
        self.head = nn.Conv2d(stem_width, 1, 1)

    def config(self) -> dict:
        """Constructor arguments, for checkpointing."""
        return {"stage_widths": self.stage_widths, "task_widths": self.task_widths,
                "stem_width": self.stem_width, "units_per_stage": self.units_per_stage,
                "noise_rate": self.noise_rate}

    def forward(self, env, task):
        if env.ndim != 4 or env.shape[1] != 1:
            raise ValueError(f"env must be (N, 1, H, W), got {tuple(env.shape)}")
        if task.ndim != 4 or task.shape[1] != 2:
            raise ValueError(f"task must be (N, 2, H, W), got {tuple(task.shape)}")
        if env.shape[2:] != task.shape[2:]:
            raise ValueError("env and task rasters must share a size")
        h, w = env.shape[2:]
        if h % DOWNSAMPLE_FACTOR or w % DOWNSAMPLE_FACTOR or h == 0 or w == 0:
            raise ValueError(
                f"input size {w}x{h} must be a positive multiple of "
                f"{DOWNSAMPLE_FACTOR}")
        f0 = self.fusion(self.stem(env))
        feats = [f0]
        x = f0
        t = task
        for stage, task_stage in zip(self.stages, self.task_stages):
            t = task_stage(t)
            x = torch.cat([stage(x), t], dim=1)
            feats.append(x)
        x = self.noise(x)
        # feats[3], feats[2], feats[1] are the stage skips, feats[0] the stem's
        for up, skip in zip(self.ups, (feats[3], feats[2], feats[1], feats[0])):
            x = up(x, skip)
        return torch.sigmoid(self.head(x))


class CBAM(nn.Module):
    """Channel attention then spatial attention, the usual composition."""

    def __init__(self, channels: int, reduction: int = 8) -> None:
        super().__init__()
        hidden = max(channels // reduction, 4)
        self.mlp = nn.Sequential(
            nn.Conv2d(channels, hidden, 1, bias=False), nn.ReLU(inplace=True),
            nn.Conv2d(hidden, channels, 1, bias=False))
        self.spatial = nn.Conv2d(2, 1, 7, padding=3, bias=False)

    def forward(self, x):
        gate = torch.sigmoid(self.mlp(x.mean(dim=(2, 3), keepdim=True))
                             + self.mlp(x.amax(dim=(2, 3), keepdim=True)))
        x = x * gate
        stats = torch.cat([x.mean(dim=1, keepdim=True),
                           x.amax(dim=1, keepdim=True)], dim=1)
        return x * torch.sigmoid(self.spatial(stats))


class PatchDiscriminator(nn.Module):
    """Four conv+norm+ReLU+pool layers scoring patches as real or fake.

    Channel-spatial attention follows the second layer's conv block.
    The head maps the coarsest features to one sigmoid score per patch,
    an (N/16)x(N/16) grid for an NxN input.
    """

    def __init__(self, in_channels: int = 4, widths=DISCRIMINATOR_WIDTHS) -> None:
        super().__init__()
        if len(widths) != 4:
            raise ValueError("the discriminator has exactly four layers")
        layers = []
        prev = in_channels
        for i, width in enumerate(widths):
            layers.append(nn.Sequential(
                nn.Conv2d(prev, width, 3, padding=1, bias=False),
                _norm(width), nn.ReLU(inplace=True)))
            if i == 1:
                layers.append(CBAM(width))
            layers.append(nn.MaxPool2d(2))
            prev = width
        self.features = nn.Sequential(*layers)
        self.head = nn.Conv2d(prev, 1, 1)

    def forward(self, env, task, guidance):
        for name, t in (("env", env), ("task", task), ("guidance", guidance)):
            if t.ndim != 4:
                raise ValueError(f"{name} must be a 4-D batch tensor")
        x = torch.cat([env, task, guidance], dim=1)
        return torch.sigmoid(self.head(self.features(x)))


def depthwise_blocks(model: nn.Module):
    """All DepthwiseSeparable blocks in a model, with their channel counts."""
    for name, module in model.named_modules():
        if isinstance(module, DepthwiseSeparable):
            yield name, module.depthwise.in_channels, module.pointwise.out_channels, module


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def count_params_flops(model: nn.Module, *example_inputs) -> tuple[int, int]:
    """(trainable parameters, conv multiply-accumulates for one sample).

    MACs follow the usual analytic convention: a convolution output
    element costs k*k*C_in/groups multiply-accumulates, a transposed
    convolution scatters k*k*C_out/groups from every input element.
    Elementwise work (norms, gates, activations) is not counted.
    """
    params = count_parameters(model)
    macs = 0

    def conv_hook(module, args, output):
        nonlocal macs
        kh, kw = module.kernel_size
        macs += output.numel() * (module.in_channels // module.groups) * kh * kw

    def conv_transpose_hook(module, args, output):
        nonlocal macs
        kh, kw = module.kernel_size
        macs += args[0].numel() * (module.out_channels // module.groups) * kh * kw

    handles = []
    for module in model.modules():
        if isinstance(module, nn.ConvTranspose2d):
            handles.append(module.register_forward_hook(conv_transpose_hook))
        elif isinstance(module, nn.Conv2d):
            handles.append(module.register_forward_hook(conv_hook))
    try:
        with torch.no_grad():
            model(*example_inputs)
    finally:
        for h in handles:
            h.remove()
    return params, macs
