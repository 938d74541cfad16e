"""hbar sweeps: network predictions at one initial condition vs the classical trajectory."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from classical_limit import nn
from classical_limit.dynamics import OscillatorParams, PhaseState, TimeGrid, Trajectory, classical_closed_form
from classical_limit.validation import ValidationError, check_finite_scalar


def rmse(a, b):
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(np.sqrt(np.mean(d * d)))


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))))


def hbar_label(hbar):
    """Column suffix for an hbar: strings are kept verbatim, numbers use ``repr``."""
    if isinstance(hbar, str):
        return hbar.strip()
    return repr(float(hbar))


@dataclass(frozen=True, eq=False)
class SweepTable:
    grid: TimeGrid
    classical: np.ndarray
    predictions: dict  # label -> predicted series, in request order
    hbars: dict  # label -> hbar value
    x0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        n = len(self.grid)
        if np.shape(self.classical) != (n,):
            raise ValidationError("classical column does not match the grid")
        for label, series in self.predictions.items():
            if np.shape(series) != (n,):
                raise ValidationError(f"prediction column {label!r} does not match the grid")

    @property
    def t(self):
        return self.grid.points

    def summary(self):
        """Per-hbar RMSE and max absolute deviation from the classical column."""
        return {
            label: {
                "hbar": self.hbars[label],
                "rmse": rmse(series, self.classical),
                "max_abs": max_abs(series, self.classical),
            }
            for label, series in self.predictions.items()
        }

    def columns(self):
        return ["t", "classical"] + [f"pred_hbar_{label}" for label in self.predictions]

    def __eq__(self, other):
        if not isinstance(other, SweepTable):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.classical, other.classical)
            and list(self.predictions) == list(other.predictions)
            and all(np.array_equal(self.predictions[k], other.predictions[k]) for k in self.predictions)
        )


def predict_trajectory(mlp, x0, p0, hbar):
    """Single forward pass of ``(x0, p0, hbar)``, bound to the network's time grid."""
    if mlp.time_grid is None:
        raise ValidationError("network has no time grid; load it from a checkpoint or attach one")
    x = [check_finite_scalar(v, name) for v, name in ((x0, "x0"), (p0, "p0"), (hbar, "hbar"))]
    out = nn.predict(mlp, np.array([x]))
    return Trajectory(mlp.time_grid, out[0])


def hbar_sweep(mlp, x0, p0, hbars, params=None):
    """Predict one trajectory per hbar and attach the closed-form classical one."""
    hbars = list(hbars)
    if not hbars:
        raise ValidationError("hbars must not be empty")
    params = params if params is not None else OscillatorParams()
    if mlp.time_grid is None:
        raise ValidationError("network has no time grid; load it from a checkpoint or attach one")
    classical = classical_closed_form(PhaseState(x0, p0), mlp.time_grid, params).x_values
    predictions, values = {}, {}
    for h in hbars:
        label = hbar_label(h)
        if label in predictions:
            raise ValidationError(f"duplicate hbar {label!r} in sweep")
        values[label] = float(h)
        predictions[label] = predict_trajectory(mlp, x0, p0, values[label]).x_values
    return SweepTable(mlp.time_grid, classical, predictions, values, float(x0), float(p0))


def window(table, t_lo, t_hi):
    """Restrict a table to grid points with ``t_lo <= t <= t_hi``."""
    t_lo = check_finite_scalar(t_lo, "t_lo")
    t_hi = check_finite_scalar(t_hi, "t_hi")
    if not t_lo < t_hi:
        raise ValidationError(f"window needs t_lo < t_hi, got [{t_lo}, {t_hi}]")
    keep = (table.t >= t_lo) & (table.t <= t_hi)
    if keep.sum() < 2:
        raise ValidationError(
            f"window [{t_lo}, {t_hi}] holds {int(keep.sum())} grid points; the grid spans "
            f"[{table.t[0]}, {table.t[-1]}]"
        )
    return SweepTable(
        TimeGrid(table.t[keep]),
        table.classical[keep],
        {label: series[keep] for label, series in table.predictions.items()},
        dict(table.hbars),
        table.x0,
        table.p0,
    )


def summary_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".summary.json")


def emit_csv(table, path):
    """Write the sweep CSV and a ``<stem>.summary.json`` with per-hbar metrics."""
    path = Path(path)
    cols = [table.t, table.classical] + list(table.predictions.values())
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(",".join(table.columns()) + "\n")
        for row in zip(*(c.tolist() for c in cols)):
            f.write(",".join(map(repr, row)) + "\n")
    summary = {
        "x0": table.x0,
        "p0": table.p0,
        "t_range": [float(table.t[0]), float(table.t[-1])],
        "n_points": len(table.grid),
        "metrics": table.summary(),
    }
    summary_path(path).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
