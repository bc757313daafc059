"""Two-phase training: autoencoder pretraining, then adversarial training.

Phase 1 fits the autoencoder with an L2 reconstruction objective. Phase 2
freezes the encoder byte-for-byte and alternates one discriminator step
with one generator step under the least-squares objectives. Both phases use
Adam with momentum (0.5, 0.999) and a learning rate that decays tenfold
every 300 steps.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from .config import SynthesisConfig
from .losses import discriminator_loss, generator_loss
from .models import Autoencoder, Generator, PatchDiscriminator, make_models


class TrainingDivergedError(RuntimeError):
    """A loss became non-finite; training is aborted rather than continued."""


def parameter_digest(module: nn.Module) -> str:
    """Order-stable sha256 over every named parameter and buffer."""
    h = hashlib.sha256()
    state = module.state_dict()
    for name in sorted(state):
        h.update(name.encode("utf-8"))
        h.update(state[name].detach().cpu().numpy().tobytes())
    return h.hexdigest()


def _make_optimizer(params, cfg: SynthesisConfig) -> torch.optim.Adam:
    return torch.optim.Adam(params, lr=cfg.learning_rate, betas=(cfg.beta1, cfg.beta2))


def _apply_lr(optimizer: torch.optim.Optimizer, cfg: SynthesisConfig, step: int) -> None:
    lr = cfg.lr_for_step(step)
    for group in optimizer.param_groups:
        group["lr"] = lr


def _check_finite(value: float, what: str, step: int) -> None:
    if not math.isfinite(value):
        raise TrainingDivergedError(f"{what} loss is {value} at step {step}")


def pretrain_autoencoder(
    autoencoder: Autoencoder,
    conditions: list[torch.Tensor],
    cfg: SynthesisConfig,
    steps: int,
    target_loss: float | None = None,
) -> list[float]:
    """Minimize L2 reconstruction over the samples; returns per-step losses.

    Stops early once ``target_loss`` is reached, when one is given.
    """
    torch.manual_seed(cfg.seed)
    autoencoder.train()
    optimizer = _make_optimizer(autoencoder.parameters(), cfg)
    criterion = nn.MSELoss()
    history: list[float] = []
    for step in range(steps):
        _apply_lr(optimizer, cfg, step)
        batch = conditions[step % len(conditions)]
        optimizer.zero_grad()
        loss = criterion(autoencoder(batch), batch)
        loss.backward()
        optimizer.step()
        value = float(loss.detach())
        _check_finite(value, "autoencoder", step)
        history.append(value)
        if target_loss is not None and value < target_loss:
            break
    return history


@dataclass
class GanHistory:
    discriminator: list[float] = field(default_factory=list)
    generator: list[float] = field(default_factory=list)
    encoder_digest_before: str = ""
    encoder_digest_after: str = ""


def train_gan(
    autoencoder: Autoencoder,
    generator: Generator,
    discriminator: PatchDiscriminator,
    pairs: list[tuple[torch.Tensor, torch.Tensor]],
    cfg: SynthesisConfig,
    steps: int,
) -> GanHistory:
    """Alternating least-squares steps with the encoder frozen throughout.

    ``pairs`` holds (condition tensor, target street image tensor) tuples.
    One step means one discriminator update followed by one generator
    update on the same sample.
    """
    torch.manual_seed(cfg.seed + 1)
    encoder = autoencoder.encoder
    encoder.eval()
    for param in encoder.parameters():
        param.requires_grad_(False)

    history = GanHistory(encoder_digest_before=parameter_digest(encoder))
    opt_d = _make_optimizer(discriminator.parameters(), cfg)
    opt_g = _make_optimizer(generator.parameters(), cfg)
    generator.train()
    discriminator.train()

    for step in range(steps):
        _apply_lr(opt_d, cfg, step)
        _apply_lr(opt_g, cfg, step)
        condition, target = pairs[step % len(pairs)]
        with torch.no_grad():
            feature = encoder(condition)

        opt_d.zero_grad()
        fake = generator(feature)
        d_loss = discriminator_loss(
            discriminator(target, feature), discriminator(fake.detach(), feature)
        )
        d_loss.backward()
        opt_d.step()
        d_value = float(d_loss.detach())
        _check_finite(d_value, "discriminator", step)
        history.discriminator.append(d_value)

        opt_g.zero_grad()
        g_loss = generator_loss(discriminator(generator(feature), feature))
        g_loss.backward()
        opt_g.step()
        g_value = float(g_loss.detach())
        _check_finite(g_value, "generator", step)
        history.generator.append(g_value)

    history.encoder_digest_after = parameter_digest(encoder)
    return history


@dataclass
class TrainResult:
    autoencoder: Autoencoder
    generator: Generator
    discriminator: PatchDiscriminator
    pretrain_losses: list[float]
    gan: GanHistory


def train(
    dataset: list[tuple[torch.Tensor, torch.Tensor]],
    cfg: SynthesisConfig,
    pretrain_steps: int = 2000,
    gan_steps: int = 200,
    pretrain_target: float | None = None,
) -> TrainResult:
    """Full two-phase run on (condition, target) pairs."""
    autoencoder, generator, discriminator = make_models(cfg)
    conditions = [c for c, _ in dataset]
    pretrain_losses = pretrain_autoencoder(
        autoencoder, conditions, cfg, pretrain_steps, target_loss=pretrain_target
    )
    gan = train_gan(autoencoder, generator, discriminator, dataset, cfg, gan_steps)
    if gan.encoder_digest_before != gan.encoder_digest_after:
        raise TrainingDivergedError("frozen encoder parameters changed during training")
    return TrainResult(
        autoencoder=autoencoder,
        generator=generator,
        discriminator=discriminator,
        pretrain_losses=pretrain_losses,
        gan=gan,
    )


def save_checkpoint(result: TrainResult, cfg: SynthesisConfig, path: str | Path) -> Path:
    """One-file checkpoint: config dict plus the three state dicts."""
    path = Path(path)
    torch.save(
        {
            "config": cfg.to_dict(),
            "autoencoder": result.autoencoder.state_dict(),
            "generator": result.generator.state_dict(),
            "discriminator": result.discriminator.state_dict(),
            "pretrain_losses": result.pretrain_losses,
            "gan_discriminator_losses": result.gan.discriminator,
            "gan_generator_losses": result.gan.generator,
            "encoder_digest": result.gan.encoder_digest_after,
        },
        path,
    )
    return path


def load_checkpoint(path: str | Path) -> tuple[SynthesisConfig, Autoencoder, Generator, PatchDiscriminator]:
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    cfg = SynthesisConfig.from_dict(payload["config"])
    autoencoder, generator, discriminator = make_models(cfg)
    autoencoder.load_state_dict(payload["autoencoder"])
    generator.load_state_dict(payload["generator"])
    discriminator.load_state_dict(payload["discriminator"])
    return cfg, autoencoder, generator, discriminator
