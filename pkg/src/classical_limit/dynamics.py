"""Expectation-value dynamics of the one-dimensional harmonic oscillator.

For a quadratic potential the Ehrenfest equations close on ``<x>`` and ``<p>``
and coincide with Hamilton's equations, so ``hbar`` is carried through every
signature but never read by the right-hand side.
"""

from dataclasses import dataclass

import numpy as np

from classical_limit.validation import (
    ValidationError,
    check_finite_array,
    check_finite_scalar,
    check_non_negative,
    check_positive,
)

#: RK4 substeps taken inside every output interval of the time grid.
SUBSTEPS = 10


@dataclass(frozen=True)
class PhaseState:
    """Expectation values ``(<x>, <p>)`` at a single instant."""

    x: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "x", check_finite_scalar(self.x, "x"))
        object.__setattr__(self, "p", check_finite_scalar(self.p, "p"))


@dataclass(frozen=True)
class OscillatorParams:
    m: float = 1.0
    omega: float = 1.0
    hbar: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "m", check_positive(self.m, "m"))
        object.__setattr__(self, "omega", check_positive(self.omega, "omega"))
        object.__setattr__(self, "hbar", check_non_negative(self.hbar, "hbar"))


class TimeGrid:
    """Strictly increasing sample times, starting at or after zero."""

    __slots__ = ("points",)

    def __init__(self, points):
        points = check_finite_array(points, "time grid").ravel().copy()
        if points.size < 2:
            raise ValidationError("time grid needs at least 2 points")
        if points[0] < 0:
            raise ValidationError(f"time grid must start at t >= 0, got {points[0]!r}")
        if np.any(np.diff(points) <= 0):
            raise ValidationError("time grid must be strictly increasing")
        points.flags.writeable = False
        self.points = points

    @classmethod
    def uniform(cls, t_max, t_steps, t_min=0.0):
        """``t_steps`` evenly spaced points on ``[t_min, t_max]``, endpoints included."""
        return cls(np.linspace(t_min, t_max, int(t_steps)))

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"TimeGrid(n={len(self)}, t0={self.points[0]!r}, t1={self.points[-1]!r})"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """``<x(t)>`` sampled on a time grid."""

    grid: TimeGrid
    x_values: np.ndarray

    def __post_init__(self):
        values = check_finite_array(self.x_values, "trajectory").ravel().copy()
        if values.size != len(self.grid):
            raise ValidationError(
                f"trajectory has {values.size} values but the grid has {len(self.grid)} points"
            )
        values.flags.writeable = False
        object.__setattr__(self, "x_values", values)

    @property
    def t(self):
        return self.grid.points

    def __len__(self):
        return self.x_values.size

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.x_values, other.x_values)


def _rhs(x, p, m, omega):
    return p / m, -m * omega**2 * x


def ehrenfest_rhs(state, params):
    """Time derivative ``(d<x>/dt, d<p>/dt)`` of the expectation values."""
    dx, dp = _rhs(state.x, state.p, params.m, params.omega)
    return PhaseState(dx, dp)


def _coerce_grid(grid):
    return grid if isinstance(grid, TimeGrid) else TimeGrid(grid)


def integrate_many(x0, p0, grid, params):
    """Integrate a batch of initial conditions with fixed-step RK4.

    Each output interval is split into ``SUBSTEPS`` equal steps. All arithmetic is
    elementwise, so a row of the result does not depend on the other rows.

    Returns ``(x, p)``, two arrays of shape ``(n, len(grid))``.
    """
    grid = _coerce_grid(grid)
    x = check_finite_array(np.atleast_1d(x0), "x0").astype(np.float64, copy=True)
    p = check_finite_array(np.atleast_1d(p0), "p0").astype(np.float64, copy=True)
    if x.shape != p.shape or x.ndim != 1:
        raise ValidationError("x0 and p0 must be 1-D arrays of equal length")
    m, omega = params.m, params.omega

    n_t = len(grid)
    xs = np.empty((x.size, n_t))
    ps = np.empty((x.size, n_t))
    xs[:, 0] = x
    ps[:, 0] = p
    for k in range(n_t - 1):
        h = (grid.points[k + 1] - grid.points[k]) / SUBSTEPS
        for _ in range(SUBSTEPS):
            k1x, k1p = _rhs(x, p, m, omega)
            k2x, k2p = _rhs(x + 0.5 * h * k1x, p + 0.5 * h * k1p, m, omega)
            k3x, k3p = _rhs(x + 0.5 * h * k2x, p + 0.5 * h * k2p, m, omega)
            k4x, k4p = _rhs(x + h * k3x, p + h * k3p, m, omega)
            x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        xs[:, k + 1] = x
        ps[:, k + 1] = p
    return xs, ps


def integrate_phase(initial, grid, params):
    """Like :func:`integrate_trajectory` but returns both ``x(t)`` and ``p(t)`` arrays.

    Plain-float loop with the same operation order as :func:`integrate_many`, so
    the two agree bitwise; it avoids numpy call overhead for a single sample.
    """
    grid = _coerce_grid(grid)
    m, omega = params.m, params.omega
    x, p = initial.x, initial.p
    times = grid.points.tolist()
    xs, ps = [x], [p]
    for t0, t1 in zip(times[:-1], times[1:]):
        h = (t1 - t0) / SUBSTEPS
        for _ in range(SUBSTEPS):
            k1x, k1p = _rhs(x, p, m, omega)
            k2x, k2p = _rhs(x + 0.5 * h * k1x, p + 0.5 * h * k1p, m, omega)
            k3x, k3p = _rhs(x + 0.5 * h * k2x, p + 0.5 * h * k2p, m, omega)
            k4x, k4p = _rhs(x + h * k3x, p + h * k3p, m, omega)
            x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        xs.append(x)
        ps.append(p)
    return np.array(xs), np.array(ps)


def integrate_trajectory(initial, grid, params):
    grid = _coerce_grid(grid)
    xs, _ = integrate_phase(initial, grid, params)
    return Trajectory(grid, xs)


def closed_form_many(x0, p0, grid, params):
    grid = _coerce_grid(grid)
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))[:, None]
    p0 = np.atleast_1d(np.asarray(p0, dtype=np.float64))[:, None]
    wt = params.omega * (grid.points - grid.points[0])[None, :]
    return x0 * np.cos(wt) + p0 / (params.m * params.omega) * np.sin(wt)


def classical_closed_form(initial, grid, params):
    """Analytic classical trajectory ``x0 cos(wt) + p0/(m w) sin(wt)``.

    Time is measured from the first grid point, which is where ``initial`` applies.
    """
    grid = _coerce_grid(grid)
    return Trajectory(grid, closed_form_many(initial.x, initial.p, grid, params)[0])


def energy(state, params):
    """Classical Hamiltonian ``p^2/2m + m w^2 x^2 / 2``."""
    return state.p**2 / (2.0 * params.m) + 0.5 * params.m * params.omega**2 * state.x**2
