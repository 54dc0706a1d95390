"""Architecture invariants: shapes, bounds, shuffles, parameter counts."""

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st
from torch import nn

from guidegen.model import (DepthwiseSeparable, GuidanceGenerator,
                            PatchDiscriminator, channel_shuffle,
                            count_params_flops, count_parameters,
                            depthwise_blocks)


def _inputs(n, side, seed=0):
    rng = torch.Generator().manual_seed(seed)
    env = (torch.rand(n, 1, side, side, generator=rng) > 0.8).float()
    task = torch.zeros(n, 2, side, side)
    task[:, 0, 2, 2] = 1.0
    task[:, 1, side - 3, side - 3] = 1.0
    return env, task


@pytest.mark.parametrize("side", [32, 64])
def test_generator_output_shape_and_range(side):
    torch.manual_seed(4)
    gen = GuidanceGenerator()
    env, task = _inputs(2, side)
    with torch.no_grad():
        out = gen(env, task)
    assert out.shape == (2, 1, side, side)
    assert float(out.min()) >= 0.0 and float(out.max()) <= 1.0


def test_generator_rejects_bad_inputs():
    torch.manual_seed(4)
    gen = GuidanceGenerator()
    with pytest.raises(ValueError, match="multiple"):
        gen(torch.zeros(1, 1, 20, 20), torch.zeros(1, 2, 20, 20))
    with pytest.raises(ValueError, match="env"):
        gen(torch.zeros(1, 3, 32, 32), torch.zeros(1, 2, 32, 32))
    with pytest.raises(ValueError, match="task"):
        gen(torch.zeros(1, 1, 32, 32), torch.zeros(1, 1, 32, 32))
    with pytest.raises(ValueError, match="share"):
        gen(torch.zeros(1, 1, 32, 32), torch.zeros(1, 2, 64, 64))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), st.integers(1, 4),
       st.integers(0, 2**32 - 1))
def test_channel_shuffle_is_a_permutation(half_c, h, w, seed):
    rng = np.random.default_rng(seed)
    x = torch.from_numpy(rng.normal(size=(2, 2 * half_c, h, w)))
    y = channel_shuffle(x)
    assert y.shape == x.shape
    assert np.array_equal(np.sort(x.numpy(), axis=1), np.sort(y.numpy(), axis=1))


def test_channel_shuffle_rejects_odd_channels():
    with pytest.raises(ValueError):
        channel_shuffle(torch.zeros(1, 3, 2, 2))


def test_depthwise_block_closed_form():
    block = DepthwiseSeparable(32, 64)
    assert block.weight_count() == 9 * 32 + 32 * 64 == 2336
    assert count_parameters(block) == 2336
    # and the 1x1 side alone: N=16 -> n=16 is 256 weights
    assert nn.Conv2d(16, 16, 1, bias=False).weight.numel() == 256


def test_generator_depthwise_blocks_all_match_closed_form():
    gen = GuidanceGenerator()
    blocks = list(depthwise_blocks(gen))
    assert len(blocks) == 8  # refine + fuse per decoder stage
    for name, n_in, n_out, block in blocks:
        assert block.weight_count() == 9 * n_in + n_in * n_out, name


@pytest.mark.parametrize("side,patches", [(64, 4), (128, 8)])
def test_discriminator_patch_grid(side, patches):
    torch.manual_seed(6)
    disc = PatchDiscriminator()
    env, task = _inputs(1, side)
    with torch.no_grad():
        scores = disc(env, task, torch.rand(1, 1, side, side))
    assert scores.shape == (1, 1, patches, patches)
    assert float(scores.min()) > 0.0 and float(scores.max()) < 1.0


def test_seeded_construction_and_forward_are_deterministic():
    def build():
        torch.manual_seed(5)
        return GuidanceGenerator()

    g1, g2 = build(), build()
    for a, b in zip(g1.state_dict().values(), g2.state_dict().values()):
        assert torch.equal(a, b)
    env, task = _inputs(1, 32)
    torch.manual_seed(9)
    out1 = g1(env, task)
    torch.manual_seed(9)
    out2 = g2(env, task)
    assert torch.equal(out1, out2)
    torch.manual_seed(10)  # different noise draw
    assert not torch.equal(g1(env, task), out1)


def test_count_params_flops_on_a_known_conv():
    model = nn.Conv2d(2, 4, 3, padding=1, bias=False)
    params, macs = count_params_flops(model, torch.zeros(1, 2, 16, 16))
    assert params == 2 * 4 * 9
    assert macs == 16 * 16 * 4 * 9 * 2


def test_count_params_flops_counts_transposed_convs():
    model = nn.ConvTranspose2d(3, 5, 2, stride=2, bias=False)
    params, macs = count_params_flops(model, torch.zeros(1, 3, 8, 8))
    assert params == 3 * 5 * 4
    assert macs == 8 * 8 * 3 * 4 * 5


def test_generator_under_parameter_budget():
    params = count_parameters(GuidanceGenerator())
    assert params < 6_000_000
