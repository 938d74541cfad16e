"""Training data: sampled initial conditions mapped to ``<x(t)>`` labels.

A dataset is stored as a CSV file with header ``x0,p0,hbar,x_t_000,...`` and a
sibling ``<basename>.manifest.json`` that records the generation config and the
explicit time grid.
"""

import copy
import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from classical_limit import _random
from classical_limit.dynamics import OscillatorParams, TimeGrid, Trajectory, integrate_many
from classical_limit.validation import (
    ValidationError,
    check_finite_array,
    check_finite_scalar,
    check_fraction,
    check_positive,
    check_positive_int,
)

FORMAT_VERSION = 1
FEATURE_COLUMNS = ("x0", "p0", "hbar")


class DatasetFormatError(ValidationError):
    """A dataset or manifest file could not be parsed."""


@dataclass(frozen=True)
class GenerationConfig:
    hbar_values: tuple
    num_ic_per_hbar: int
    ic_low: float
    ic_high: float
    t_max: float
    t_steps: int
    m: float
    omega: float
    seed: int

    def __post_init__(self):
        hbars = tuple(check_positive(h, "hbar") for h in self.hbar_values)
        if not hbars:
            raise ValidationError("hbar_values must not be empty")
        if len(set(hbars)) != len(hbars):
            raise ValidationError(f"hbar_values must be distinct, got {hbars}")
        object.__setattr__(self, "hbar_values", hbars)
        object.__setattr__(
            self, "num_ic_per_hbar", check_positive_int(self.num_ic_per_hbar, "num_ic_per_hbar")
        )
        low = check_finite_scalar(self.ic_low, "ic_low")
        high = check_finite_scalar(self.ic_high, "ic_high")
        if not low < high:
            raise ValidationError(f"ic_low must be < ic_high, got [{low}, {high})")
        object.__setattr__(self, "ic_low", low)
        object.__setattr__(self, "ic_high", high)
        object.__setattr__(self, "t_max", check_positive(self.t_max, "t_max"))
        t_steps = check_positive_int(self.t_steps, "t_steps")
        if t_steps < 2:
            raise ValidationError("t_steps must be at least 2")
        object.__setattr__(self, "t_steps", t_steps)
        object.__setattr__(self, "m", check_positive(self.m, "m"))
        object.__setattr__(self, "omega", check_positive(self.omega, "omega"))
        object.__setattr__(self, "seed", _random.check_seed(self.seed))

    @property
    def grid(self):
        return TimeGrid.uniform(self.t_max, self.t_steps)

    def to_dict(self):
        d = asdict(self)
        d["hbar_values"] = list(self.hbar_values)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True, eq=False)
class Sample:
    x0: float
    p0: float
    hbar: float
    label: Trajectory


class Dataset:
    """Feature matrix ``(n, 3)`` of ``(x0, p0, hbar)`` rows with ``(n, T)`` labels.

    Arrays are read-only after construction.
    """

    def __init__(self, features, labels, grid, manifest=None):
        features = check_finite_array(features, "features").reshape(-1, len(FEATURE_COLUMNS))
        labels = check_finite_array(labels, "labels")
        if labels.ndim != 2 and labels.size == 0:
            labels = labels.reshape(0, len(grid))
        if labels.ndim != 2 or labels.shape != (features.shape[0], len(grid)):
            raise ValidationError(
                f"labels have shape {labels.shape}, expected ({features.shape[0]}, {len(grid)})"
            )
        features = features.copy()
        labels = labels.copy()
        features.flags.writeable = False
        labels.flags.writeable = False
        self.features = features
        self.labels = labels
        self.grid = grid
        self.manifest = dict(manifest or {})
        self.manifest["format_version"] = FORMAT_VERSION
        self.manifest["time_grid"] = grid.points.tolist()
        self.manifest["num_samples"] = features.shape[0]

    def __len__(self):
        return self.features.shape[0]

    @property
    def hbar(self):
        return self.features[:, 2]

    @property
    def samples(self):
        return [
            Sample(float(x0), float(p0), float(h), Trajectory(self.grid, label))
            for (x0, p0, h), label in zip(self.features, self.labels)
        ]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[indices], self.labels[indices], self.grid, self.manifest)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and self.manifest == other.manifest
        )

    def __repr__(self):
        return f"Dataset(n={len(self)}, t_steps={len(self.grid)})"


def sample_initial_conditions(n, low, high, rng):
    """Draw ``n`` pairs ``(x0, p0)``, each coordinate uniform on ``[low, high)``.

    Returns an array of shape ``(n, 2)``. ``rng`` is a numpy ``Generator`` or a seed.
    """
    n = check_positive_int(n, "n", allow_zero=True)
    low = check_finite_scalar(low, "low")
    high = check_finite_scalar(high, "high")
    if not low < high:
        raise ValidationError(f"low must be < high, got [{low}, {high})")
    rng = _random.as_generator(rng)
    draws = rng.uniform(low, high, size=(n, 2))
    # uniform() can round up to ``high`` for some (low, high) pairs
    return np.where(draws < high, draws, np.nextafter(high, low))


def _sample_ic(config, index):
    rng = _random.substream(config.seed, _random.SAMPLE_STREAM, index)
    return sample_initial_conditions(1, config.ic_low, config.ic_high, rng)[0]


def build_manifest(config, grid):
    from classical_limit import __version__

    return {
        "format_version": FORMAT_VERSION,
        "config": config.to_dict(),
        "time_grid": grid.points.tolist(),
        "seed": config.seed,
        "rng": "numpy PCG64, SeedSequence(seed, spawn_key=(3, sample_index))",
        "generator": f"classical_limit {__version__}",
        "integrator": "rk4, 10 substeps per output interval",
    }


def generate(config, threads=1):
    """Generate ``len(hbar_values) * num_ic_per_hbar`` labelled samples.

    Every sample draws its own initial condition from a sub-stream keyed by its
    global index, so the output is the same for any ``threads``.
    """
    threads = check_positive_int(threads, "threads")
    grid = config.grid
    params = OscillatorParams(config.m, config.omega)
    n_per = config.num_ic_per_hbar
    n = n_per * len(config.hbar_values)

    ics = np.array([_sample_ic(config, k) for k in range(n)]).reshape(n, 2)
    hbars = np.repeat(np.asarray(config.hbar_values), n_per)

    chunks = np.array_split(np.arange(n), threads) if n else [np.arange(0)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(
            pool.map(lambda idx: integrate_many(ics[idx, 0], ics[idx, 1], grid, params)[0], chunks)
        )
    labels = np.concatenate(parts, axis=0)

    features = np.column_stack([ics, hbars])
    return Dataset(features, labels, grid, build_manifest(config, grid))


def split(dataset, val_fraction, rng):
    """Stratified random train/validation partition by ``hbar``.

    Within each stratum ``round(val_fraction * size)`` samples go to validation.
    Both parts keep the original sample order.
    """
    if len(dataset) == 0:
        raise ValidationError("cannot split an empty dataset")
    val_fraction = check_fraction(val_fraction, "val_fraction")
    rng = _random.as_generator(rng)

    hbar = dataset.hbar
    _, first = np.unique(hbar, return_index=True)
    val_idx = []
    for h in hbar[np.sort(first)]:
        stratum = np.flatnonzero(hbar == h)
        n_val = int(math.floor(val_fraction * stratum.size + 0.5))
        val_idx.append(rng.permutation(stratum)[:n_val])
    val_mask = np.zeros(len(dataset), dtype=bool)
    val_mask[np.concatenate(val_idx)] = True
    return dataset.subset(np.flatnonzero(~val_mask)), dataset.subset(np.flatnonzero(val_mask))


def manifest_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def label_columns(t_steps):
    width = max(3, len(str(t_steps - 1)))
    return [f"x_t_{k:0{width}d}" for k in range(t_steps)]


def write_dataset(dataset, path):
    """Write the CSV and its manifest. Floats use ``repr`` so they read back exactly."""
    path = Path(path)
    header = list(FEATURE_COLUMNS) + label_columns(len(dataset.grid))
    manifest = dataset.manifest
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(",".join(header) + "\n")
        for feat, label in zip(dataset.features.tolist(), dataset.labels.tolist()):
            f.write(",".join(map(repr, feat + label)) + "\n")
    manifest_path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_manifest(path):
    mpath = manifest_path(path)
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{mpath}: malformed manifest ({exc})") from None
    if not isinstance(manifest, dict):
        raise DatasetFormatError(f"{mpath}: manifest must be a JSON object")
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"{mpath}: unsupported format_version {version!r}")
    if "time_grid" not in manifest:
        raise ValidationError(f"{mpath}: manifest is missing field 'time_grid'")
    try:
        grid = TimeGrid(manifest["time_grid"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{mpath}: invalid field 'time_grid': {exc}") from None
    t_steps = manifest.get("config", {}).get("t_steps")
    if t_steps is not None and t_steps != len(grid):
        raise ValidationError(
            f"{mpath}: field 'config.t_steps'={t_steps} disagrees with time_grid length {len(grid)}"
        )
    return manifest, grid


def read_dataset(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    manifest, grid = read_manifest(path)
    expected = list(FEATURE_COLUMNS) + label_columns(len(grid))

    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise DatasetFormatError(f"{path}: empty file, expected a header line")
        if header[: len(FEATURE_COLUMNS)] != list(FEATURE_COLUMNS):
            raise DatasetFormatError(f"{path}:1: header must start with {','.join(FEATURE_COLUMNS)}")
        if header != expected:
            n_label = len(header) - len(FEATURE_COLUMNS)
            raise ValidationError(
                f"{path}:1: header has {n_label} x_t columns but the manifest time grid has "
                f"{len(grid)} points"
            )
        rows = []
        for row in reader:
            line = reader.line_num
            if len(row) != len(expected):
                raise DatasetFormatError(
                    f"{path}:{line}: expected {len(expected)} fields, found {len(row)}"
                )
            try:
                values = [float(v) for v in row]
            except ValueError:
                bad = next(i for i, v in enumerate(row) if not _is_float(v))
                raise DatasetFormatError(
                    f"{path}:{line}: field '{expected[bad]}' is not a number: {row[bad]!r}"
                ) from None
            if not all(map(math.isfinite, values)):
                bad = next(i for i, v in enumerate(values) if not math.isfinite(v))
                raise DatasetFormatError(f"{path}:{line}: field '{expected[bad]}' is not finite")
            rows.append(values)

    expected_rows = manifest.get("num_samples")
    if expected_rows is not None and expected_rows != len(rows):
        raise DatasetFormatError(
            f"{path}: file holds {len(rows)} samples but the manifest records {expected_rows} "
            "(truncated file?)"
        )
    data = np.array(rows, dtype=np.float64).reshape(-1, len(expected))
    n_feat = len(FEATURE_COLUMNS)
    return Dataset(data[:, :n_feat], data[:, n_feat:], grid, copy.deepcopy(manifest))


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True
