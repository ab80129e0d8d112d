import logging

import numpy as np
import polars as pl

from numba import njit

from Errors.glidecast_errors import InvalidInputError
from Flight.flight_dynamics import V_MIN, jit_state_derivative, state_derivative
from Flight.Kinematic_State import KinematicState
from Flight.Physical_Constants import PhysicalConstants
from Flight.Sim_Config import SimConfig
from Flight.Trajectory import Trajectory, SAMPLE_COLUMNS, STATE_COLUMNS

# Termination codes returned by the jitted loop
STATUS_HORIZON = 0
STATUS_GROUND_IMPACT = 1
STATUS_SINGULAR_SPEED = 2

TERMINATION_REASONS = {
    STATUS_HORIZON: "horizon",
    STATUS_GROUND_IMPACT: "ground_impact",
    STATUS_SINGULAR_SPEED: "singular_speed",
}

# Column order of the state rows: t, v, theta, phi, x, y, z
T, V, THETA, PHI, X, Y, Z = range(7)


def euler_step(
    state: KinematicState, constants: PhysicalConstants, phi_rate: float, dt: float
) -> KinematicState:
    """
    Advance the state by one explicit Euler step.

    Args:
        state (KinematicState): Current state, speed above V_MIN.
        constants (PhysicalConstants): Flight constants.
        phi_rate (float): Heading rate over the step in rad/s.
        dt (float): Step length in seconds (s).

    Returns:
        KinematicState: State at t + dt.
    """
    if not dt >= 0:
        raise InvalidInputError(f"Timestep must be non-negative, got {dt}")

    rates = state_derivative(state, constants, phi_rate)

    return KinematicState(
        t=state.t + dt,
        v=state.v + dt * rates.v_dot,
        theta=state.theta + dt * rates.theta_dot,
        phi=state.phi + dt * rates.phi_dot,
        x=state.x + dt * rates.x_dot,
        y=state.y + dt * rates.y_dot,
        z=state.z + dt * rates.z_dot,
    )


@njit
def jit_phi_rate_at(t: float, starts: np.ndarray, ends: np.ndarray, rates: np.ndarray) -> float:
    for i in range(len(starts)):
        if starts[i] <= t < ends[i]:
            return rates[i]
    return 0.0


@njit
def jit_flight_integration_model(
    states: np.ndarray,
    constants: np.ndarray,
    dt: float,
    max_steps: int,
    segment_starts: np.ndarray,
    segment_ends: np.ndarray,
    segment_rates: np.ndarray,
    v_min: float,
):
    """
    Fill `states` row by row from the initial row until the horizon, ground
    impact or singular speed. Returns (rows_recorded, status).
    """
    t0 = states[0, T]
    recorded = 1
    status = STATUS_HORIZON

    for k in range(max_steps):
        t = states[k, T]
        v = states[k, V]
        theta = states[k, THETA]
        phi = states[k, PHI]
        z = states[k, Z]

        if v <= v_min:
            status = STATUS_SINGULAR_SPEED
            break

        phi_rate = jit_phi_rate_at(t, segment_starts, segment_ends, segment_rates)
        v_dot, theta_dot, phi_dot, x_dot, y_dot, z_dot = jit_state_derivative(
            v, theta, phi, z, phi_rate, constants
        )

        # Time is taken from the grid so it never drifts from k * dt
        states[k + 1, T] = t0 + (k + 1) * dt
        states[k + 1, V] = v + dt * v_dot
        states[k + 1, THETA] = theta + dt * theta_dot
        states[k + 1, PHI] = phi + dt * phi_dot
        states[k + 1, X] = states[k, X] + dt * x_dot
        states[k + 1, Y] = states[k, Y] + dt * y_dot
        states[k + 1, Z] = z + dt * z_dot
        recorded = k + 2

        # Keep the first non-positive altitude sample and stop
        if states[k + 1, Z] <= 0.0:
            status = STATUS_GROUND_IMPACT
            break

    return recorded, status


def initial_state(sim_config: SimConfig) -> KinematicState:
    return KinematicState(
        t=0.0,
        v=sim_config.v0,
        theta=sim_config.theta0,
        phi=sim_config.phi0,
        x=0.0,
        y=0.0,
        z=sim_config.h0,
    )


def simulate(
    sim_config: SimConfig = None, constants: PhysicalConstants = None
) -> Trajectory:
    """
    Integrate the glide model with fixed-step explicit Euler and record the flight path.

    Args:
        sim_config (SimConfig): Timestep, horizon, initial conditions and maneuver schedule.
        constants (PhysicalConstants): Flight constants.

    Returns:
        Trajectory: Samples (t, x, y, z) plus the full state history and termination reason.
    """
    if sim_config is None:
        sim_config = SimConfig()
    if constants is None:
        constants = PhysicalConstants()

    max_steps = sim_config.max_steps
    states = np.zeros((max_steps + 1, len(STATE_COLUMNS)), dtype=np.float64)
    states[0] = initial_state(sim_config).as_array()

    segment_starts, segment_ends, segment_rates = sim_config.maneuver.as_arrays()

    recorded, status = jit_flight_integration_model(
        states,
        constants.as_array(),
        sim_config.dt,
        max_steps,
        segment_starts,
        segment_ends,
        segment_rates,
        V_MIN,
    )
    states = states[:recorded]

    states_df = pl.DataFrame(
        {name: states[:, i] for i, name in enumerate(STATE_COLUMNS)}
    )
    trajectory = Trajectory(
        samples_df=states_df.select(SAMPLE_COLUMNS),
        states_df=states_df,
        termination_reason=TERMINATION_REASONS[int(status)],
        dt=sim_config.dt,
    )

    summary = trajectory.summary()
    logging.info(
        f"Trajectory Simulated: {summary['samples']} samples over {summary['duration_s']:.1f}s, "
        f"Termination: {summary['termination_reason']}, Downrange: {summary['downrange_m'] / 1000:.1f}km, "
        f"Final Altitude: {summary['final_altitude_m'] / 1000:.2f}km"
    )

    return trajectory
