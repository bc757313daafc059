"""streetsynth: toy-scale conditional adversarial street-layout synthesis."""
from .config import SynthesisConfig
from .data import ConditionSet, Sample, load_manifest_dataset, load_png_unit, save_png_unit
from .losses import discriminator_loss, generator_loss
from .models import (
    Autoencoder,
    Decoder,
    Encoder,
    Generator,
    InferenceDropout,
    PatchDiscriminator,
    make_models,
)
from .train import (
    GanHistory,
    TrainingDivergedError,
    TrainResult,
    load_checkpoint,
    parameter_digest,
    pretrain_autoencoder,
    save_checkpoint,
    train,
    train_gan,
)

__version__ = "0.1.0"

__all__ = [
    "SynthesisConfig",
    "ConditionSet",
    "Sample",
    "load_manifest_dataset",
    "load_png_unit",
    "save_png_unit",
    "discriminator_loss",
    "generator_loss",
    "Autoencoder",
    "Decoder",
    "Encoder",
    "Generator",
    "InferenceDropout",
    "PatchDiscriminator",
    "make_models",
    "GanHistory",
    "TrainingDivergedError",
    "TrainResult",
    "load_checkpoint",
    "parameter_digest",
    "pretrain_autoencoder",
    "save_checkpoint",
    "train",
    "train_gan",
]
