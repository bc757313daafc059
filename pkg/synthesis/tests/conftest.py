"""Shared toy fixtures: smooth condition layers and a small trained model."""
from __future__ import annotations

import numpy as np
import pytest
import torch

from streetsynth import SynthesisConfig, train


def smooth_condition_tensor(size: int, seed: int = 0) -> torch.Tensor:
    """A (1, 3, size, size) condition stack of gentle gradients in [0, 1]."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / size
    elevation = np.clip(0.3 + 0.4 * xx + 0.1 * rng.uniform(-1, 1), 0, 1)
    population = np.clip(0.2 + 0.5 * yy * rng.uniform(0.5, 1.5), 0, 1)
    landuse = np.clip(0.5 + 0.3 * np.sin(np.pi * xx * rng.uniform(0.5, 1.5)), 0, 1)
    stack = np.stack([elevation, population, landuse]).astype(np.float32)
    return torch.from_numpy(stack).unsqueeze(0)


def cross_street_tensor(size: int, seed: int = 0) -> torch.Tensor:
    """A (1, 1, size, size) target: one horizontal and one vertical street."""
    rng = np.random.default_rng(1000 + seed)
    street = np.zeros((size, size), dtype=np.float32)
    r = int(rng.integers(8, size - 8))
    c = int(rng.integers(8, size - 8))
    street[r - 1 : r + 2, :] = 1.0
    street[:, c - 1 : c + 2] = 1.0
    return torch.from_numpy(street).unsqueeze(0).unsqueeze(0)


def toy_config(**overrides) -> SynthesisConfig:
    defaults = dict(
        image_size=64,
        base_width=8,
        feature_channels=16,
        discriminator_patch=16,
        seed=5,
    )
    defaults.update(overrides)
    return SynthesisConfig(**defaults)


def toy_dataset(size: int = 64, n: int = 4):
    return [(smooth_condition_tensor(size, s), cross_street_tensor(size, s)) for s in range(n)]


@pytest.fixture(scope="session")
def trained_toy():
    """One shared 4-sample training run: 300 pretrain + 200 adversarial steps."""
    cfg = toy_config()
    dataset = toy_dataset(cfg.image_size, 4)
    result = train(dataset, cfg, pretrain_steps=300, gan_steps=200)
    return cfg, dataset, result
