"""Training runs on a :class:`~classical_limit.dataset.Dataset`."""

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from classical_limit import _random, nn
from classical_limit.dataset import split
from classical_limit.estimator import TrajectoryMLPRegressor
from classical_limit.validation import (
    ValidationError,
    check_fraction,
    check_positive,
    check_positive_int,
)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.001
    seed: int = 0
    val_fraction: float = 0.1
    hidden_layer_sizes: tuple = (64, 128)

    def __post_init__(self):
        check_positive_int(self.epochs, "epochs", allow_zero=True)
        check_positive_int(self.batch_size, "batch_size")
        check_positive(self.learning_rate, "learning_rate")
        _random.check_seed(self.seed)
        check_fraction(self.val_fraction, "val_fraction")
        object.__setattr__(self, "hidden_layer_sizes", tuple(self.hidden_layer_sizes))


@dataclass
class TrainReport:
    train_loss: list
    val_loss: list
    wall_time: float
    parameter_digest: str
    n_train: int = 0
    n_val: int = 0
    gradient_samples: int = 0
    config: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def manifest_digest(manifest):
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def parameter_digest(mlp):
    h = hashlib.sha256()
    for p in mlp.parameters():
        h.update(np.ascontiguousarray(p, dtype="<f8").tobytes())
    return h.hexdigest()


def _check_dataset(mlp_or_dims_out, dataset):
    if len(dataset) == 0:
        raise ValidationError("dataset is empty")
    if mlp_or_dims_out != len(dataset.grid):
        raise ValidationError(
            f"network outputs {mlp_or_dims_out} values but the dataset grid has {len(dataset.grid)} points"
        )


def split_for_training(dataset, config):
    """The train/validation partition a given config trains on."""
    return split(dataset, config.val_fraction, _random.substream(config.seed, _random.SPLIT_STREAM))


def train(dataset, config):
    """Split ``dataset`` by ``hbar``, fit a network on the training part.

    Returns ``(mlp, report)``; ``mlp.time_grid`` is the dataset grid.
    """
    if len(dataset) == 0:
        raise ValidationError("dataset is empty")
    train_set, val_set = split_for_training(dataset, config)
    if len(train_set) == 0:
        raise ValidationError("no training samples left after the validation split")

    est = TrajectoryMLPRegressor(
        hidden_layer_sizes=config.hidden_layer_sizes,
        epochs=config.epochs,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        random_state=config.seed,
        time_grid=dataset.grid.points,
    )
    started = time.perf_counter()
    validation = (val_set.features, val_set.labels) if len(val_set) else None
    est.fit(train_set.features, train_set.labels, validation_data=validation)
    elapsed = time.perf_counter() - started

    report = TrainReport(
        train_loss=list(est.train_loss_),
        val_loss=list(est.val_loss_),
        wall_time=elapsed,
        parameter_digest=parameter_digest(est.mlp_),
        n_train=len(train_set),
        n_val=len(val_set),
        gradient_samples=est.n_samples_seen_,
        config=asdict(config),
    )
    return est.mlp_, report


def evaluate_loss(mlp, dataset):
    """Mean MSE of ``mlp`` over the whole dataset."""
    _check_dataset(mlp.dims[-1], dataset)
    return nn.mse_loss(nn.predict(mlp, dataset.features), dataset.labels)[0]


def checkpoint_metadata(config, dataset, adam=None):
    adam = dict(nn.ADAM_DEFAULTS) if adam is None else adam
    adam["alpha"] = config.learning_rate
    return {
        "seed": config.seed,
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "val_fraction": config.val_fraction,
        "hidden_layer_sizes": list(config.hidden_layer_sizes),
        "adam": adam,
        "precision": "float64",
        "initialization": "glorot_uniform, zero bias",
        "dataset_manifest_sha256": manifest_digest(dataset.manifest),
        "dataset_config": dataset.manifest.get("config"),
    }


def write_report(report, path):
    Path(path).write_text(report.to_json(), encoding="utf-8")
