import dataclasses
import math

import numpy as np
import polars as pl
import pytest

from Errors.glidecast_errors import InvalidInputError, SingularSpeedError
from Flight.Kinematic_State import KinematicState
from Flight.Physical_Constants import PhysicalConstants
from Flight.Sim_Config import SimConfig, ManeuverSchedule
from Flight.Trajectory import Trajectory
from Flight.flight_integrator import euler_step, initial_state, simulate


def test_single_euler_step(constants):
    state = initial_state(SimConfig())
    stepped = euler_step(state, constants, 0.0, 0.1)
    assert stepped.x == pytest.approx(508.06, abs=5e-3)
    assert stepped.z == pytest.approx(79955.55, abs=5e-3)
    assert stepped.v == pytest.approx(5100.0736, abs=5e-5)
    assert stepped.theta == pytest.approx(-0.0874506, abs=5e-8)
    assert stepped.t == 0.1


def test_zero_step_leaves_state_unchanged(constants):
    state = initial_state(SimConfig())
    assert euler_step(state, constants, 0.0, 0.0) == state


def test_negative_step_rejected(constants):
    with pytest.raises(InvalidInputError):
        euler_step(initial_state(SimConfig()), constants, 0.0, -0.1)


def test_step_propagates_singular_speed(constants):
    with pytest.raises(SingularSpeedError):
        euler_step(KinematicState(v=0.0), constants, 0.0, 0.1)


def test_integration_loop_matches_repeated_euler_step(constants):
    config = SimConfig(t_total=20.0, maneuver=ManeuverSchedule(((1.05, 6.05, 0.02),)))
    trajectory = simulate(config, constants)

    state = initial_state(config)
    expected = [state.as_array()]
    for k in range(config.max_steps):
        state = euler_step(state, constants, config.maneuver.phi_rate_at(state.t), config.dt)
        # Grid time, as the simulation records it
        state = dataclasses.replace(state, t=(k + 1) * config.dt)
        expected.append(state.as_array())

    assert trajectory.termination_reason == "horizon"
    np.testing.assert_allclose(trajectory.states_df.to_numpy(), np.array(expected), rtol=1e-12, atol=1e-9)


def test_default_run_shape(default_trajectory):
    first = default_trajectory.samples_df.row(0)
    assert first == (0.0, 0.0, 0.0, 80_000.0)
    assert len(default_trajectory) <= 3001
    times = default_trajectory.times()
    assert np.all(np.diff(times) > 0)
    assert np.allclose(np.diff(times), 0.1, atol=1e-9)


def test_default_run_physical_sanity(default_trajectory):
    summary = default_trajectory.summary()
    assert summary["final_altitude_m"] < 80_000.0
    assert summary["downrange_m"] > 0
    if summary["termination_reason"] == "horizon":
        assert len(default_trajectory) == 3001
        assert summary["glide_angle_sign_changes"] >= 1


def test_empty_schedule_keeps_flight_in_plane(default_trajectory):
    assert np.max(np.abs(default_trajectory.positions()[:, 1])) == 0.0


def test_zero_horizon_records_initial_state_only():
    trajectory = simulate(SimConfig(t_total=0.0))
    assert len(trajectory) == 1
    assert trajectory.termination_reason == "horizon"


def test_sample_count_bound():
    trajectory = simulate(SimConfig(dt=0.25, t_total=10.0))
    assert len(trajectory) == math.floor(10.0 / 0.25) + 1


def test_maneuver_turns_heading():
    schedule = ManeuverSchedule(((1.0, 2.0, 0.05),))
    trajectory = simulate(SimConfig(t_total=5.0, maneuver=schedule))
    phi = trajectory.states_df["phi"].to_numpy()
    times = trajectory.times()
    assert np.all(phi[times <= 1.0 + 1e-9] == 0.0)
    assert phi[-1] == pytest.approx(0.05, rel=1e-6)
    assert trajectory.positions()[-1, 1] > 0


def test_simulation_is_deterministic():
    config = SimConfig(t_total=20.0, maneuver=ManeuverSchedule(((2.0, 8.0, -0.01),)))
    first = simulate(config)
    second = simulate(config)
    assert first.states_df.equals(second.states_df)


def test_first_order_convergence():
    def state_at_50s(dt):
        trajectory = simulate(SimConfig(dt=dt, t_total=50.0))
        assert trajectory.times()[-1] == pytest.approx(50.0, abs=1e-9)
        return trajectory.positions()[-1]

    reference = state_at_50s(0.001)
    coarse_error = np.linalg.norm(state_at_50s(0.1) - reference)
    fine_error = np.linalg.norm(state_at_50s(0.05) - reference)
    assert 1.7 <= coarse_error / fine_error <= 2.3


def test_ground_impact_guard():
    dt = 0.1
    vacuum = PhysicalConstants(Cd=0.0, Cl=0.0)
    trajectory = simulate(SimConfig(dt=dt, h0=5_000.0, theta0=math.radians(-60.0)), vacuum)
    assert trajectory.termination_reason == "ground_impact"

    z = trajectory.positions()[:, 2]
    assert z[-1] <= 0.0
    assert np.all(z[:-1] > 0.0)
    speed = trajectory.states_df["v"].to_numpy()
    assert z[-1] >= -speed[-2] * dt


def test_full_state_export_has_mach(tmp_path, short_trajectory):
    path = tmp_path / "full.csv"
    short_trajectory.write_csv(path, full_state=True)
    loaded = Trajectory.from_csv(path)
    assert len(loaded) == len(short_trajectory)
    assert short_trajectory.full_state_df()["mach"][0] == pytest.approx(5100.0 / 295.0)


def test_trajectory_rejects_unordered_times():
    frame = pl.DataFrame({"t": [0.0, 0.2, 0.1], "x": [0.0] * 3, "y": [0.0] * 3, "z": [1.0] * 3})
    with pytest.raises(InvalidInputError):
        Trajectory(samples_df=frame)


@pytest.mark.parametrize(
    "segments",
    [((2.0, 1.0, 0.1),), ((0.0, 2.0, 0.1), (1.0, 3.0, 0.1)), ((0.0, 1.0),)],
)
def test_bad_maneuver_schedules(segments):
    with pytest.raises(InvalidInputError):
        ManeuverSchedule(segments)


@pytest.mark.parametrize(
    "overrides",
    [{"dt": 0.0}, {"dt": -0.1}, {"t_total": -1.0}, {"v0": 0.0}, {"h0": 0.0}, {"h0": -5_000.0}, {"h0": -6_371_000.0}],
)
def test_bad_sim_config(overrides):
    with pytest.raises(InvalidInputError):
        SimConfig(**overrides)


def test_vacuum_ballistic_arc_matches_kinematics():
    vacuum = PhysicalConstants(Cd=0.0, Cl=0.0)
    trajectory = simulate(SimConfig(dt=0.01, t_total=2.0, v0=100.0, h0=1000.0, theta0=0.0), vacuum)
    # Near-constant gravity over 2 s of drop: z ≈ h0 - g t² / 2
    g = 3.98e14 / (6_371_000.0 + 1000.0) ** 2
    assert trajectory.positions()[-1, 2] == pytest.approx(1000.0 - 0.5 * g * 4.0, abs=0.5)
