"""The three synthesis networks: autoencoder, generator, patch discriminator.

All are fully convolutional conv-BatchNorm-ReLU stacks with residual blocks.
The generator carries dropout layers that stay active at inference; masking
high-level (residual) features varies structure, masking low-level
(upsampling) features varies texture.
"""
from __future__ import annotations

import torch
from torch import nn
import torch.nn.functional as F

from .config import SynthesisConfig


class InferenceDropout(nn.Module):
    """Dropout applied regardless of train/eval mode while its rate is > 0.

    Variability of generated layouts is controlled purely by this rate; a
    rate of 0 makes the layer an exact identity so outputs stay
    deterministic.
    """

    def __init__(self, rate: float):
        super().__init__()
        self.rate = float(rate)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.rate <= 0.0:
            return x
        return F.dropout(x, p=self.rate, training=True)

    def extra_repr(self) -> str:
        return f"rate={self.rate}"


def _conv_block(in_ch: int, out_ch: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
    )


def _up_block(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.ConvTranspose2d(in_ch, out_ch, 4, stride=2, padding=1),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
    )


class ResidualBlock(nn.Module):
    def __init__(self, channels: int, dropout: InferenceDropout | None = None):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.bn1 = nn.BatchNorm2d(channels)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)
        self.bn2 = nn.BatchNorm2d(channels)
        self.dropout = dropout

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = F.relu(self.bn1(self.conv1(x)), inplace=True)
        if self.dropout is not None:
            h = self.dropout(h)
        h = self.bn2(self.conv2(h))
        return F.relu(x + h, inplace=True)


def _init_weights(module: nn.Module) -> None:
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
        nn.init.normal_(module.weight, 0.0, 0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, nn.BatchNorm2d):
        nn.init.normal_(module.weight, 1.0, 0.02)
        nn.init.zeros_(module.bias)


class Encoder(nn.Module):
    """Compresses the stacked condition layers into the fused feature map."""

    def __init__(self, cfg: SynthesisConfig):
        super().__init__()
        w = cfg.base_width
        self.stem = _conv_block(cfg.condition_channels, w)
        self.down = nn.Sequential(
            _conv_block(w, 2 * w, stride=2),
            _conv_block(2 * w, 4 * w, stride=2),
            _conv_block(4 * w, 4 * w, stride=2),
        )
        self.blocks = nn.Sequential(
            *[ResidualBlock(4 * w) for _ in range(cfg.encoder_residual_blocks)]
        )
        self.head = nn.Conv2d(4 * w, cfg.feature_channels, 3, padding=1)
        self.apply(_init_weights)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.blocks(self.down(self.stem(x))))


class Decoder(nn.Module):
    """Structurally symmetric to the encoder; used only for pretraining."""

    def __init__(self, cfg: SynthesisConfig):
        super().__init__()
        w = cfg.base_width
        self.stem = _conv_block(cfg.feature_channels, 4 * w)
        self.blocks = nn.Sequential(
            *[ResidualBlock(4 * w) for _ in range(cfg.encoder_residual_blocks)]
        )
        self.up = nn.Sequential(
            _up_block(4 * w, 2 * w),
            _up_block(2 * w, w),
            _up_block(w, w),
        )
        self.head = nn.Conv2d(w, cfg.condition_channels, 3, padding=1)
        self.apply(_init_weights)

    def forward(self, f: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.head(self.up(self.blocks(self.stem(f)))))


class Autoencoder(nn.Module):
    def __init__(self, cfg: SynthesisConfig):
        super().__init__()
        self.encoder = Encoder(cfg)
        self.decoder = Decoder(cfg)

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        return self.encoder(x)

    def reconstruct(self, f: torch.Tensor) -> torch.Tensor:
        return self.decoder(f)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.decoder(self.encoder(x))


class Generator(nn.Module):
    """Maps the feature map to a single-band street-layout image.

    Takes no noise input; all output variability comes from the inference
    dropout layers in the residual and upsampling blocks.
    """

    def __init__(self, cfg: SynthesisConfig):
        super().__init__()
        w = cfg.base_width
        self.stem = _conv_block(cfg.feature_channels, w)
        self.down = _conv_block(w, 2 * w, stride=2)

        def res_dropout(i: int) -> InferenceDropout | None:
            if i in cfg.residual_dropout_blocks:
                return InferenceDropout(cfg.dropout_rate)
            return None

        self.blocks = nn.Sequential(
            *[ResidualBlock(2 * w, res_dropout(i)) for i in range(cfg.generator_residual_blocks)]
        )
        ups: list[nn.Module] = []
        channels = 2 * w
        for i in range(cfg.generator_upsample_blocks):
            out_ch = max(w, channels // 2) if i > 0 else channels
            ups.append(_up_block(channels, out_ch))
            if i in cfg.upsample_dropout_blocks:
                ups.append(InferenceDropout(cfg.dropout_rate))
            channels = out_ch
        self.up = nn.Sequential(*ups)
        self.head = nn.Conv2d(channels, 1, 3, padding=1)
        self.apply(_init_weights)

    def set_dropout_rate(self, rate: float) -> None:
        """Adjust every inference-dropout layer in place."""
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        for module in self.modules():
            if isinstance(module, InferenceDropout):
                module.rate = float(rate)

    def forward(self, f: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.head(self.up(self.blocks(self.down(self.stem(f))))))


class PatchDiscriminator(nn.Module):
    """Scores each image patch separately, conditioned on the feature map.

    The image is reduced to the feature-map resolution, fused with it, and
    reduced further so each output cell answers for one patch of
    ``cfg.discriminator_patch`` pixels.
    """

    def __init__(self, cfg: SynthesisConfig):
        super().__init__()
        w = cfg.base_width
        self.image_path = nn.Sequential(
            nn.Conv2d(1, w, 3, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            _conv_block(w, 2 * w, stride=2),
            _conv_block(2 * w, 4 * w, stride=2),
        )
        # The image path lands at the feature-map resolution (1/8); the tail
        # reduces by patch/8 more so each score covers one patch. No BN here:
        # the tail may legitimately reach 1x1 spatial size.
        extra = (cfg.discriminator_patch // 8).bit_length() - 1
        tail: list[nn.Module] = [
            nn.Conv2d(4 * w + cfg.feature_channels, 4 * w, 3, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Dropout(cfg.discriminator_dropout),
        ]
        for _ in range(extra):
            tail.append(nn.Conv2d(4 * w, 4 * w, 3, stride=2, padding=1))
            tail.append(nn.LeakyReLU(0.2, inplace=True))
        self.merged_path = nn.Sequential(*tail)
        self.head = nn.Conv2d(4 * w, 1, 3, padding=1)
        self.apply(_init_weights)

    def forward(self, image: torch.Tensor, f: torch.Tensor) -> torch.Tensor:
        h = self.image_path(image)
        h = torch.cat([h, f], dim=1)
        h = self.merged_path(h)
        return self.head(h).squeeze(1)


def make_models(cfg: SynthesisConfig) -> tuple[Autoencoder, Generator, PatchDiscriminator]:
    """Seeded construction of the three networks."""
    torch.manual_seed(cfg.seed)
    return Autoencoder(cfg), Generator(cfg), PatchDiscriminator(cfg)
