"""Least-squares adversarial objectives.

The generator drives its patch scores toward 1; the discriminator drives
real-image scores toward 1 and generated-image scores toward 0, each side
weighted by one half.
"""
from __future__ import annotations

import torch


def generator_loss(fake_scores: torch.Tensor) -> torch.Tensor:
    """Mean squared shortfall of generated-patch scores from 1."""
    return ((fake_scores - 1.0) ** 2).mean()


def discriminator_loss(real_scores: torch.Tensor, fake_scores: torch.Tensor) -> torch.Tensor:
    """Half the real-score miss from 1 plus half the fake-score miss from 0."""
    return 0.5 * ((real_scores - 1.0) ** 2).mean() + 0.5 * (fake_scores**2).mean()
