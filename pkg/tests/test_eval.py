import csv
import json

import numpy as np
import pytest

from classical_limit import nn
from classical_limit.dynamics import TimeGrid
from classical_limit.eval import emit_csv, hbar_sweep, predict_trajectory, summary_path, window
from classical_limit.validation import ValidationError

PAPER_HBARS = [5.0, 2.0, 1.0, 0.5, 0.1, 0.01]


@pytest.fixture
def mlp():
    return nn.init([3, 16, 100], ["relu", "identity"], 0, time_grid=TimeGrid.uniform(10.0, 100))


def test_predict_requires_grid():
    with pytest.raises(ValidationError):
        predict_trajectory(nn.init([3, 100], ["identity"], 0), 1.0, 0.0, 0.1)


def test_predict_zero_network(mlp):
    for p in mlp.parameters():
        p[...] = 0.0
    traj = predict_trajectory(mlp, 0.0, 0.0, 1.0)
    assert np.all(traj.x_values == 0.0) and traj.grid == mlp.time_grid


def test_predict_pure(mlp):
    a = predict_trajectory(mlp, 0.3, -1.0, 0.5)
    b = predict_trajectory(mlp, 0.3, -1.0, 0.5)
    assert a == b
    np.testing.assert_array_equal(a.x_values, nn.predict(mlp, np.array([[0.3, -1.0, 0.5]]))[0])


def test_predict_rejects_nan(mlp):
    with pytest.raises(ValidationError):
        predict_trajectory(mlp, float("nan"), 0.0, 0.1)


def test_sweep_table(mlp):
    table = hbar_sweep(mlp, 1.0, 0.0, PAPER_HBARS)
    assert table.columns() == ["t", "classical"] + [f"pred_hbar_{h}" for h in PAPER_HBARS]
    assert len(table.predictions) == 6 and len(table.grid) == 100
    assert np.max(np.abs(table.classical - np.cos(table.t))) <= 1e-12
    for label, row in table.summary().items():
        assert row["rmse"] >= 0 and row["max_abs"] >= row["rmse"] - 1e-15


def test_sweep_labels_keep_request_text(mlp):
    table = hbar_sweep(mlp, 1.0, 0.0, ["5", "0.010"])
    assert list(table.predictions) == ["5", "0.010"]
    assert table.hbars == {"5": 5.0, "0.010": 0.01}


def test_sweep_deterministic_and_classical_hbar_free(mlp):
    assert hbar_sweep(mlp, 1.0, 0.0, [0.5]) == hbar_sweep(mlp, 1.0, 0.0, [0.5])
    a = hbar_sweep(mlp, 1.0, 0.0, [0.5]).classical
    b = hbar_sweep(mlp, 1.0, 0.0, PAPER_HBARS).classical
    assert a.tobytes() == b.tobytes()


def test_sweep_errors(mlp):
    with pytest.raises(ValidationError):
        hbar_sweep(mlp, 1.0, 0.0, [])
    with pytest.raises(ValidationError):
        hbar_sweep(mlp, 1.0, 0.0, [1.0, 1.0])


def test_window_counts(mlp):
    table = hbar_sweep(mlp, 1.0, 0.0, PAPER_HBARS)
    # k * 10/99 in [2, 4]  <=>  k in 20..39
    expected = [k for k in range(100) if 2.0 <= k * 10 / 99 <= 4.0]
    assert len(expected) == 20
    win = window(table, 2.0, 4.0)
    assert len(win.grid) == 20
    np.testing.assert_array_equal(win.t, table.t[20:40])


def test_full_window_is_identity(mlp):
    table = hbar_sweep(mlp, 1.0, 0.0, PAPER_HBARS)
    full = window(table, 0.0, 10.0)
    assert full == table
    assert full.summary() == table.summary()


@pytest.mark.parametrize("lo,hi", [(100.0, 200.0), (4.0, 2.0), (2.0, 2.0), (2.01, 2.02)])
def test_window_errors(mlp, lo, hi):
    with pytest.raises(ValidationError):
        window(hbar_sweep(mlp, 1.0, 0.0, [1.0]), lo, hi)


def test_emit_csv(mlp, tmp_path):
    table = hbar_sweep(mlp, 1.0, 0.0, PAPER_HBARS)
    path = tmp_path / "sweep.csv"
    emit_csv(table, path)
    with path.open() as f:
        rows = list(csv.reader(f))
    assert len(rows[0]) == 8 and len(rows) == 101
    data = np.array(rows[1:], dtype=float)
    np.testing.assert_array_equal(data[:, 0], table.t)
    np.testing.assert_array_equal(data[:, 1], table.classical)

    summary = json.loads(summary_path(path).read_text())["metrics"]
    for j, h in enumerate(PAPER_HBARS):
        recomputed = np.sqrt(np.mean((data[:, 2 + j] - data[:, 1]) ** 2))
        assert abs(summary[repr(h)]["rmse"] - recomputed) <= 1e-12
        assert summary[repr(h)]["rmse"] >= 0

    emit_csv(table, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_emit_unwritable(mlp, tmp_path):
    with pytest.raises(OSError):
        emit_csv(hbar_sweep(mlp, 1.0, 0.0, [1.0]), tmp_path / "missing" / "x.csv")
