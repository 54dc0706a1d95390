"""Loss terms for the guidance GAN.

Three terms make up the joint objective: the conditional adversarial
value over patch scores, a mean absolute difference that pins the
predicted raster to the demonstrated one, and a smoothed soft-Dice loss
that counters the class imbalance between thin guidance regions and the
blank background. The generator minimises the weighted sum while the
discriminator maximises the adversarial term.

The dice term is the plain smoothed soft-Dice,
``1 - (2 sum(p y) + gamma) / (sum(p) + sum(y) + gamma)``: it is 0 for a
perfect confident prediction and approaches 1 for a total miss, with
gamma keeping the empty/empty case defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch


@dataclass(frozen=True)
class LossWeights:
    """Term weights lambda1..3 plus the dice smoothing constant."""

    lambda1: float = 1.0
    lambda2: float = 100.0
    lambda3: float = 1.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        for name in ("lambda1", "lambda2", "lambda3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.lambda1 == self.lambda2 == self.lambda3 == 0:
            raise ValueError("at least one lambda must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


def _check_same_shape(a, b, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what}: shapes {tuple(a.shape)} and {tuple(b.shape)} differ")


def adversarial_loss(d_real, d_fake):
    """Conditional-GAN value E[log d_real] + E[log(1 - d_fake)].

    The discriminator maximises this; the generator minimises the fake
    term (see ``fake_score_term``). Scores must lie in (0, 1] and
    [0, 1) respectively, which the training loop guarantees by clamping.
    """
    _check_same_shape(d_real, d_fake, "adversarial_loss")
    return torch.log(d_real).mean() + torch.log(1.0 - d_fake).mean()


def fake_score_term(d_fake):
    """E[log(1 - d_fake)], the part of the adversarial value G minimises."""
    return torch.log(1.0 - d_fake).mean()


def l1_loss(pred, truth):
    """Mean absolute difference between rasters."""
    _check_same_shape(pred, truth, "l1_loss")
    return (pred - truth).abs().mean()


def dice_loss(pred, truth, gamma: float = 1.0):
    """Smoothed soft-Dice loss between a [0, 1] raster and a binary truth."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    _check_same_shape(pred, truth, "dice_loss")
    overlap = (pred * truth).sum()
    return 1.0 - (2.0 * overlap + gamma) / (pred.sum() + truth.sum() + gamma)


def joint_objective(adversarial, l1, dice, weights: LossWeights):
    """lambda1 * adversarial + lambda2 * l1 + lambda3 * dice.

    Raises ValueError when any term is non-finite; a NaN or infinite
    loss means training has diverged and must stop rather than continue
    silently.
    """
    for name, term in (("adversarial", adversarial), ("l1", l1), ("dice", dice)):
        if not bool(torch.isfinite(torch.as_tensor(term)).all()):
            raise ValueError(f"non-finite {name} loss term")
    return (weights.lambda1 * adversarial
            + weights.lambda2 * l1
            + weights.lambda3 * dice)
