"""scikit-learn compatible wrappers.

``TrajectoryMLPRegressor`` fits the numpy network in :mod:`classical_limit.nn`
with mini-batch Adam; ``ClassicalTrajectoryTransformer`` turns ``(x0, p0, hbar)``
rows into reference trajectories, so both compose with sklearn tooling.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from classical_limit import _random, nn
from classical_limit.dynamics import OscillatorParams, TimeGrid, closed_form_many, integrate_many
from classical_limit.validation import (
    ValidationError,
    check_non_negative,
    check_positive,
    check_positive_int,
)


class TrajectoryMLPRegressor(RegressorMixin, BaseEstimator):
    """Multi-output MLP regressor trained with MSE and Adam.

    Parameters
    ----------
    hidden_layer_sizes : tuple of int
        Width of each ReLU hidden layer. The output layer is linear and as wide
        as ``y`` has columns.
    epochs : int
        Passes over the training data. ``0`` leaves the initialised network as is.
    batch_size : int
        Mini-batch size. The last, partial batch of each epoch is trained on.
    learning_rate, beta1, beta2, epsilon : float
        Adam hyperparameters.
    random_state : int
        Seeds weight initialisation and the per-epoch shuffles.
    time_grid : array-like, optional
        Times the output columns correspond to; attached to the fitted network.
    """

    def __init__(
        self,
        hidden_layer_sizes=(64, 128),
        epochs=100,
        batch_size=32,
        learning_rate=0.001,
        beta1=0.9,
        beta2=0.999,
        epsilon=1e-7,
        random_state=0,
        time_grid=None,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.random_state = random_state
        self.time_grid = time_grid

    def _validate_params(self):
        check_positive_int(self.epochs, "epochs", allow_zero=True)
        check_positive_int(self.batch_size, "batch_size")
        check_positive(self.learning_rate, "learning_rate")
        check_non_negative(self.epsilon, "epsilon")
        for name in ("beta1", "beta2"):
            beta = getattr(self, name)
            if not 0.0 <= beta < 1.0:
                raise ValidationError(f"{name} must lie in [0, 1), got {beta!r}")
        for width in self.hidden_layer_sizes:
            check_positive_int(width, "hidden layer size")
        _random.check_seed(self.random_state)

    def fit(self, X, y, validation_data=None):
        """Train on ``(X, y)``.

        ``validation_data`` is an optional ``(X_val, y_val)`` pair whose loss is
        recorded after every epoch; it never contributes to an update.
        """
        self._validate_params()
        X, y = check_X_y(X, y, multi_output=True, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        n = X.shape[0]
        if self.batch_size > n:
            raise ValidationError(f"batch_size {self.batch_size} exceeds the {n} training samples")
        grid = None if self.time_grid is None else TimeGrid(self.time_grid)
        if grid is not None and len(grid) != y.shape[1]:
            raise ValidationError(f"time grid has {len(grid)} points but y has {y.shape[1]} columns")
        if validation_data is not None:
            X_val, y_val = check_X_y(*validation_data, multi_output=True, dtype=np.float64)
            y_val = y_val.reshape(X_val.shape[0], -1)
            if X_val.shape[1] != X.shape[1] or y_val.shape[1] != y.shape[1]:
                raise ValidationError("validation data shape does not match training data")
        else:
            X_val = y_val = None

        dims = [X.shape[1], *self.hidden_layer_sizes, y.shape[1]]
        acts = ["relu"] * len(self.hidden_layer_sizes) + ["identity"]
        self.mlp_ = nn.init(dims, acts, self.random_state, time_grid=grid)
        self.adam_state_ = nn.AdamState.zeros_like(
            self.mlp_, alpha=self.learning_rate, beta1=self.beta1, beta2=self.beta2, epsilon=self.epsilon
        )
        self.n_features_in_ = X.shape[1]
        self.n_outputs_ = y.shape[1]
        self.train_loss_ = []
        self.val_loss_ = []
        self.n_samples_seen_ = 0

        for epoch in range(self.epochs):
            order = _random.substream(self.random_state, _random.SHUFFLE_STREAM, epoch).permutation(n)
            total = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                out, cache = nn.forward(self.mlp_, X[idx])
                loss, grad = nn.mse_loss(out, y[idx])
                nn.adam_step(self.mlp_, nn.backward(self.mlp_, cache, grad), self.adam_state_)
                total += loss * idx.size
                self.n_samples_seen_ += idx.size
            self.train_loss_.append(total / n)
            if X_val is not None and X_val.shape[0]:
                self.val_loss_.append(nn.mse_loss(nn.predict(self.mlp_, X_val), y_val)[0])
            else:
                self.val_loss_.append(None)
        return self

    def predict(self, X):
        check_is_fitted(self, "mlp_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return nn.predict(self.mlp_, X)

    @classmethod
    def from_mlp(cls, mlp, **params):
        """Wrap an already trained network, e.g. one restored from a checkpoint."""
        est = cls(
            hidden_layer_sizes=tuple(mlp.dims[1:-1]),
            time_grid=None if mlp.time_grid is None else mlp.time_grid.points,
            **params,
        )
        est.mlp_ = mlp
        est.n_features_in_ = mlp.dims[0]
        est.n_outputs_ = mlp.dims[-1]
        return est


class ClassicalTrajectoryTransformer(TransformerMixin, BaseEstimator):
    """Map ``(x0, p0, hbar)`` rows to ``<x(t)>`` on a fixed time grid.

    ``method="closed_form"`` uses the analytic solution, ``"rk4"`` the numerical
    integrator. The ``hbar`` column is accepted and ignored, as in the dynamics.
    Stateless: ``fit`` only validates.
    """

    def __init__(self, time_grid, m=1.0, omega=1.0, method="closed_form"):
        self.time_grid = time_grid
        self.m = m
        self.omega = omega
        self.method = method

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 3:
            raise ValidationError(f"expected 3 columns (x0, p0, hbar), got {X.shape[1]}")
        if self.method not in ("closed_form", "rk4"):
            raise ValidationError(f"unknown method {self.method!r}")
        self.grid_ = TimeGrid(self.time_grid)
        self.params_ = OscillatorParams(self.m, self.omega)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 3:
            raise ValidationError(f"expected 3 columns (x0, p0, hbar), got {X.shape[1]}")
        if self.method == "rk4":
            return integrate_many(X[:, 0], X[:, 1], self.grid_, self.params_)[0]
        return closed_form_many(X[:, 0], X[:, 1], self.grid_, self.params_)
