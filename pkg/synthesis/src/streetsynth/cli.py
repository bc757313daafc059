"""Command line: train on a patch-manifest directory, generate layout PNGs."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import torch

from .config import SynthesisConfig
from .data import load_manifest_dataset, save_png_unit
from .train import TrainingDivergedError, load_checkpoint, save_checkpoint, train


def _config_from_args(args: argparse.Namespace) -> SynthesisConfig:
    overrides = {}
    for name in ("image_size", "base_width", "feature_channels", "dropout_rate", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return SynthesisConfig(**overrides)


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    samples = load_manifest_dataset(args.manifest_dir)
    pairs = []
    for s in samples:
        if s.target is None:
            continue
        if s.conditions.shape != (cfg.image_size, cfg.image_size):
            raise ValueError(
                f"patch {s.patch_id}: expected {cfg.image_size} px layers, got {s.conditions.shape}"
            )
        target = torch.from_numpy(s.target).unsqueeze(0).unsqueeze(0)
        pairs.append((s.conditions.to_tensor(), target))
    if not pairs:
        raise ValueError(f"{args.manifest_dir}: no patches with both layers and street image")

    result = train(
        pairs,
        cfg,
        pretrain_steps=args.pretrain_steps,
        gan_steps=args.gan_steps,
        pretrain_target=args.pretrain_target,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(result, cfg, out_dir / "checkpoint.pt")
    cfg.save(out_dir / "config.json")
    (out_dir / "history.json").write_text(
        json.dumps(
            {
                "pretrain": result.pretrain_losses,
                "discriminator": result.gan.discriminator,
                "generator": result.gan.generator,
                "encoder_digest": result.gan.encoder_digest_after,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    print(
        f"trained on {len(pairs)} pair(s): pretrain {len(result.pretrain_losses)} steps "
        f"(final L2 {result.pretrain_losses[-1]:.2e}), gan {len(result.gan.generator)} steps "
        f"-> {out_dir / 'checkpoint.pt'}"
    )
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    cfg, autoencoder, generator, _ = load_checkpoint(Path(args.checkpoint))
    samples = load_manifest_dataset(args.manifest_dir)
    if not samples:
        raise ValueError(f"{args.manifest_dir}: manifest lists no patches with layers")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    autoencoder.eval()
    generator.eval()
    generator.set_dropout_rate(args.dropout)
    torch.manual_seed(args.seed)
    written = []
    for s in samples:
        with torch.no_grad():
            feature = autoencoder.encode(s.conditions.to_tensor())
            for k in range(args.count):
                image = generator(feature)[0, 0].numpy()
                name = f"{s.patch_id}_gen{k}.png"
                save_png_unit(
                    image,
                    out_dir / name,
                    resolution=s.resolution,
                    metadata={"dropout_rate": args.dropout, "seed": args.seed, "sample": k},
                )
                written.append(name)
    print(f"generated {len(written)} image(s) -> {out_dir}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streetsynth",
        description="Toy-scale conditional adversarial street-layout synthesis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="two-phase training on a patch manifest directory")
    p.add_argument("manifest_dir", help="directory containing manifest.json and patch PNGs")
    p.add_argument("--out", required=True, help="output directory for checkpoint and history")
    p.add_argument("--pretrain-steps", dest="pretrain_steps", type=int, default=2000)
    p.add_argument("--pretrain-target", dest="pretrain_target", type=float, default=None)
    p.add_argument("--gan-steps", dest="gan_steps", type=int, default=200)
    p.add_argument("--image-size", dest="image_size", type=int)
    p.add_argument("--base-width", dest="base_width", type=int)
    p.add_argument("--feature-channels", dest="feature_channels", type=int)
    p.add_argument("--dropout-rate", dest="dropout_rate", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="synthesize street layouts for manifest conditions")
    p.add_argument("checkpoint", help="checkpoint.pt from training")
    p.add_argument("manifest_dir", help="directory containing manifest.json and layer PNGs")
    p.add_argument("--out", required=True, help="output directory for generated PNGs")
    p.add_argument("--dropout", type=float, default=0.95, help="inference dropout rate")
    p.add_argument("--count", type=int, default=1, help="samples per condition set")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TrainingDivergedError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
