import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classical_limit.dynamics import (
    OscillatorParams,
    PhaseState,
    TimeGrid,
    Trajectory,
    classical_closed_form,
    ehrenfest_rhs,
    energy,
    integrate_many,
    integrate_phase,
    integrate_trajectory,
)
from classical_limit.validation import ValidationError

coord = st.floats(-2.0, 2.0, allow_nan=False)
hbar = st.floats(0.0, 10.0, allow_nan=False)


def test_rhs_examples():
    assert ehrenfest_rhs(PhaseState(1, 0), OscillatorParams(1, 1, 5)) == PhaseState(0, -1)
    assert ehrenfest_rhs(PhaseState(0, 0), OscillatorParams(3, 2, 0.1)) == PhaseState(0, 0)
    assert ehrenfest_rhs(PhaseState(2, 3), OscillatorParams(2, 3)) == PhaseState(1.5, -36)


@given(coord, coord, hbar, hbar)
def test_rhs_ignores_hbar(x, p, h1, h2):
    a = ehrenfest_rhs(PhaseState(x, p), OscillatorParams(1.3, 0.7, h1))
    b = ehrenfest_rhs(PhaseState(x, p), OscillatorParams(1.3, 0.7, h2))
    assert (a.x, a.p) == (b.x, b.p)


@pytest.mark.parametrize(
    "kwargs",
    [dict(m=0), dict(m=-1), dict(omega=0), dict(hbar=-0.1), dict(m=float("nan")), dict(omega=float("inf"))],
)
def test_params_invariants(kwargs):
    with pytest.raises(ValidationError):
        OscillatorParams(**kwargs)


def test_phase_state_rejects_non_finite():
    with pytest.raises(ValidationError):
        PhaseState(float("nan"), 0.0)


@pytest.mark.parametrize("points", [[0.0], [0.0, 0.0, 1.0], [0.0, 2.0, 1.0], [-1.0, 0.0]])
def test_grid_invariants(points):
    with pytest.raises(ValidationError):
        TimeGrid(points)


def test_integrate_rejects_bad_grid(unit_params):
    with pytest.raises(ValidationError):
        integrate_trajectory(PhaseState(1, 0), [0.0, 1.0, 0.5], unit_params)


def test_trajectory_length_checked(paper_grid):
    with pytest.raises(ValidationError):
        Trajectory(paper_grid, np.zeros(99))


def test_cos_at_pi(unit_params):
    grid = TimeGrid(np.linspace(0.0, math.pi, 50))
    traj = integrate_trajectory(PhaseState(1.0, 0.0), grid, unit_params)
    assert traj.x_values[-1] == pytest.approx(-1.0, abs=1e-6)


def test_fixed_point_is_exact(paper_grid, unit_params):
    traj = integrate_trajectory(PhaseState(0.0, 0.0), paper_grid, unit_params)
    assert np.all(traj.x_values == 0.0)


def test_first_value_is_initial_x(paper_grid, unit_params):
    traj = integrate_trajectory(PhaseState(0.123456789, -1.5), paper_grid, unit_params)
    assert traj.x_values[0] == 0.123456789


def test_trajectories_bitwise_equal_across_hbar(paper_grid):
    a = integrate_trajectory(PhaseState(1.0, 0.0), paper_grid, OscillatorParams(hbar=5.0))
    b = integrate_trajectory(PhaseState(1.0, 0.0), paper_grid, OscillatorParams(hbar=0.01))
    assert a == b
    assert a.x_values.tobytes() == b.x_values.tobytes()


def test_closed_form_examples(unit_params):
    grid = TimeGrid([0.0, math.pi / 2, 2 * math.pi])
    a = classical_closed_form(PhaseState(1.0, 0.0), grid, unit_params).x_values
    assert a[0] == 1.0
    assert a[2] == pytest.approx(1.0, abs=1e-12)
    b = classical_closed_form(PhaseState(0.0, 1.0), grid, unit_params).x_values
    assert b[1] == pytest.approx(1.0, abs=1e-15)


def test_closed_form_general_mass_frequency():
    # x(t) = x0 cos(wt) + p0/(m w) sin(wt)
    params = OscillatorParams(m=2.0, omega=3.0)
    grid = TimeGrid([0.0, 0.5])
    x = classical_closed_form(PhaseState(0.5, 1.2), grid, params).x_values[1]
    assert x == pytest.approx(0.5 * math.cos(1.5) + 1.2 / 6.0 * math.sin(1.5), abs=1e-15)


def test_energy_examples():
    assert energy(PhaseState(1, 0), OscillatorParams(1, 1)) == 0.5
    assert energy(PhaseState(0, 0), OscillatorParams(1, 1)) == 0.0
    assert energy(PhaseState(0, 2), OscillatorParams(1, 3)) == 2.0


def test_oracle_agreement_100_random(paper_grid, unit_params, rng):
    ics = rng.uniform(-2, 2, size=(100, 2))
    for x0, p0 in ics:
        num = integrate_trajectory(PhaseState(x0, p0), paper_grid, unit_params).x_values
        ref = classical_closed_form(PhaseState(x0, p0), paper_grid, unit_params).x_values
        assert np.max(np.abs(num - ref)) <= 1e-6


def test_non_unit_params_match_closed_form(paper_grid):
    params = OscillatorParams(m=0.5, omega=2.0)
    num = integrate_trajectory(PhaseState(1.0, -1.0), paper_grid, params).x_values
    ref = classical_closed_form(PhaseState(1.0, -1.0), paper_grid, params).x_values
    assert np.max(np.abs(num - ref)) <= 1e-6


@settings(max_examples=50, deadline=None)
@given(coord, coord, st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_energy_conserved(x0, p0, m, omega):
    params = OscillatorParams(m, omega)
    xs, ps = integrate_phase(PhaseState(x0, p0), TimeGrid.uniform(10.0, 100), params)
    e0 = energy(PhaseState(x0, p0), params)
    e = np.array([energy(PhaseState(x, p), params) for x, p in zip(xs, ps)])
    assert np.max(np.abs(e - e0)) <= 1e-6 * max(1.0, e0)


@settings(max_examples=30, deadline=None)
@given(coord, coord, st.sampled_from([-1.0, 0.5, 2.0]))
def test_linearity(x0, p0, alpha):
    grid = TimeGrid.uniform(10.0, 100)
    params = OscillatorParams()
    base = integrate_trajectory(PhaseState(x0, p0), grid, params).x_values
    scaled = integrate_trajectory(PhaseState(alpha * x0, alpha * p0), grid, params).x_values
    np.testing.assert_allclose(scaled, alpha * base, rtol=0, atol=1e-9)


@pytest.mark.parametrize("x0,p0", [(1.0, 0.0), (-0.7, 1.9), (2.0, -2.0)])
def test_periodicity(x0, p0, unit_params):
    # step 2*pi/60, so t_k and t_{k+60} are one period apart
    grid = TimeGrid(np.arange(81) * (2 * math.pi / 60))
    xs = integrate_trajectory(PhaseState(x0, p0), grid, unit_params).x_values
    np.testing.assert_allclose(xs[60:], xs[:21], rtol=0, atol=1e-6)


def test_batched_rows_equal_single_integration(paper_grid, unit_params, rng):
    ics = rng.uniform(-2, 2, size=(7, 2))
    xs, _ = integrate_many(ics[:, 0], ics[:, 1], paper_grid, unit_params)
    for row, (x0, p0) in zip(xs, ics):
        single = integrate_trajectory(PhaseState(x0, p0), paper_grid, unit_params).x_values
        assert row.tobytes() == single.tobytes()


def test_grid_offset_start(unit_params):
    grid = TimeGrid(np.linspace(1.0, 1.0 + math.pi / 2, 20))
    num = integrate_trajectory(PhaseState(0.0, 1.0), grid, unit_params).x_values
    ref = classical_closed_form(PhaseState(0.0, 1.0), grid, unit_params).x_values
    assert num[-1] == pytest.approx(1.0, abs=1e-6)
    assert ref[-1] == pytest.approx(1.0, abs=1e-15)
