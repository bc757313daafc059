"""Configuration for the synthesis networks and their training."""
from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path


@dataclass(frozen=True)
class SynthesisConfig:
    """Network widths, dropout placement, and optimizer settings.

    The networks are fully convolutional: any ``image_size`` divisible by 16
    works, with the fused feature map at ``image_size // 8``. Defaults match
    the full 512-px patch format; tests shrink ``image_size`` and widths.
    """

    image_size: int = 512
    condition_channels: int = 3
    feature_channels: int = 8
    base_width: int = 16
    encoder_residual_blocks: int = 2
    generator_residual_blocks: int = 6
    generator_upsample_blocks: int = 4
    dropout_rate: float = 0.5
    residual_dropout_blocks: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    upsample_dropout_blocks: tuple[int, ...] = (2, 3)
    discriminator_dropout: float = 0.5
    discriminator_patch: int = 64
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    lr_decay_every: int = 300
    lr_decay_factor: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.image_size % 16 != 0:
            raise ValueError(f"image_size must be divisible by 16, got {self.image_size}")
        if self.image_size % self.discriminator_patch != 0:
            raise ValueError(
                f"discriminator patch {self.discriminator_patch} must divide "
                f"image size {self.image_size}"
            )
        p = self.discriminator_patch
        if p < 8 or p & (p - 1) != 0:
            raise ValueError(f"discriminator patch must be a power of two >= 8, got {p}")
        bad = [i for i in self.residual_dropout_blocks if not 0 <= i < self.generator_residual_blocks]
        bad += [i for i in self.upsample_dropout_blocks if not 0 <= i < self.generator_upsample_blocks]
        if bad:
            raise ValueError(f"dropout placement indices out of range: {bad}")

    @property
    def feature_size(self) -> int:
        return self.image_size // 8

    @property
    def score_grid(self) -> int:
        return self.image_size // self.discriminator_patch

    def lr_for_step(self, step: int) -> float:
        """Step-decayed learning rate; step 0 is the first update."""
        return self.learning_rate * self.lr_decay_factor ** (step // self.lr_decay_every)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["residual_dropout_blocks"] = list(self.residual_dropout_blocks)
        data["upsample_dropout_blocks"] = list(self.upsample_dropout_blocks)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SynthesisConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        for key in ("residual_dropout_blocks", "upsample_dropout_blocks"):
            if key in known:
                known[key] = tuple(known[key])
        return cls(**known)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "SynthesisConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
