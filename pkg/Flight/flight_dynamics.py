import math

from numba import njit

from Errors.glidecast_errors import InvalidInputError, SingularSpeedError
from Flight.Kinematic_State import KinematicState, ForcesSample, StateDerivative
from Flight.Physical_Constants import PhysicalConstants

# Speeds at or below this make the path-angle rate (division by v) unusable
V_MIN = 1e-3

# Index of each constant inside PhysicalConstants.as_array()
G_IDX, R_IDX, RHO0_IDX, K_IDX, A_IDX, M_IDX, CD_IDX, CL_IDX = range(8)


@njit
def jit_gravity(altitude_m: float, G: float, R: float) -> float:
    """
    Gravitational acceleration from the inverse-square law.

    Args:
        altitude_m (float): Altitude above the surface in meters (m).
        G (float): Gravitational parameter in m³/s².
        R (float): Earth radius in meters (m).

    Returns:
        float: Acceleration in m/s².
    """
    radius_m = R + altitude_m
    return G / (radius_m * radius_m)  # g = G / (R + h)²


@njit
def jit_air_density(altitude_m: float, rho0: float, k: float) -> float:
    """
    Air density from the exponential atmosphere.

    Args:
        altitude_m (float): Altitude above the surface in meters (m).
        rho0 (float): Sea-level air density in kg/m³.
        k (float): Density decay constant in 1/m.

    Returns:
        float: Air density in kg/m³.
    """
    return rho0 * math.exp(-k * altitude_m)  # ρ = ρ0 * e^(-k h)


@njit
def jit_aerodynamic_force(
    coefficient: float, speed_m_s: float, altitude_m: float, rho0: float, k: float, area_m2: float
) -> float:
    """
    Dynamic-pressure force shared by drag and lift: ½ * C * ρ(h) * v² * A.

    Args:
        coefficient (float): Drag or lift coefficient (dimensionless).
        speed_m_s (float): Speed in m/s.
        altitude_m (float): Altitude in meters (m).
        rho0 (float): Sea-level air density in kg/m³.
        k (float): Density decay constant in 1/m.
        area_m2 (float): Cross-sectional area in m².

    Returns:
        float: Force in Newtons (N).
    """
    rho = jit_air_density(altitude_m, rho0, k)
    return 0.5 * coefficient * rho * speed_m_s * speed_m_s * area_m2


@njit
def jit_state_derivative(
    speed_m_s: float,
    theta_rad: float,
    phi_rad: float,
    altitude_m: float,
    phi_rate: float,
    constants,
):
    """
    Rates of change of (v, theta, phi, x, y, z) for the point-mass glide model.
    Caller guarantees speed_m_s > V_MIN.

    Returns:
        tuple: (v_dot, theta_dot, phi_dot, x_dot, y_dot, z_dot)
    """
    g = jit_gravity(altitude_m, constants[G_IDX], constants[R_IDX])
    mass = constants[M_IDX]
    drag_n = jit_aerodynamic_force(
        constants[CD_IDX], speed_m_s, altitude_m, constants[RHO0_IDX], constants[K_IDX], constants[A_IDX]
    )
    lift_n = jit_aerodynamic_force(
        constants[CL_IDX], speed_m_s, altitude_m, constants[RHO0_IDX], constants[K_IDX], constants[A_IDX]
    )

    sin_theta = math.sin(theta_rad)
    cos_theta = math.cos(theta_rad)

    v_dot = -drag_n / mass - g * sin_theta
    theta_dot = lift_n / (mass * speed_m_s) - g * cos_theta / speed_m_s

    horizontal_speed = speed_m_s * cos_theta
    x_dot = horizontal_speed * math.cos(phi_rad)
    y_dot = horizontal_speed * math.sin(phi_rad)
    z_dot = speed_m_s * sin_theta

    return v_dot, theta_dot, phi_rate, x_dot, y_dot, z_dot


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value}")
    return value


def _require_speed(speed_m_s: float) -> float:
    speed_m_s = _require_finite("Speed", speed_m_s)
    if speed_m_s < 0:
        raise InvalidInputError(f"Speed must be non-negative, got {speed_m_s}")
    return speed_m_s


def gravity_at(altitude_m: float, constants: PhysicalConstants) -> float:
    """
    Gravitational acceleration at altitude, decreasing with height.

    Args:
        altitude_m (float): Altitude in meters (m).
        constants (PhysicalConstants): Flight constants.

    Returns:
        float: Acceleration in m/s².
    """
    altitude_m = _require_finite("Altitude", altitude_m)
    if constants.R + altitude_m <= 0:
        raise InvalidInputError(f"Altitude {altitude_m} m lies at or below the Earth's centre")
    return jit_gravity(altitude_m, constants.G, constants.R)


def air_density(altitude_m: float, constants: PhysicalConstants) -> float:
    """
    Air density at altitude in kg/m³.
    """
    altitude_m = _require_finite("Altitude", altitude_m)
    return jit_air_density(altitude_m, constants.rho0, constants.k)


def drag_force(speed_m_s: float, altitude_m: float, constants: PhysicalConstants) -> float:
    """
    Drag force opposing the motion, in Newtons (N).
    """
    speed_m_s = _require_speed(speed_m_s)
    altitude_m = _require_finite("Altitude", altitude_m)
    return jit_aerodynamic_force(
        constants.Cd, speed_m_s, altitude_m, constants.rho0, constants.k, constants.A
    )


def lift_force(speed_m_s: float, altitude_m: float, constants: PhysicalConstants) -> float:
    """
    Lift force perpendicular to the motion, in Newtons (N).
    """
    speed_m_s = _require_speed(speed_m_s)
    altitude_m = _require_finite("Altitude", altitude_m)
    return jit_aerodynamic_force(
        constants.Cl, speed_m_s, altitude_m, constants.rho0, constants.k, constants.A
    )


def forces_at(speed_m_s: float, altitude_m: float, constants: PhysicalConstants) -> ForcesSample:
    return ForcesSample(
        g=gravity_at(altitude_m, constants),
        rho=air_density(altitude_m, constants),
        Fd=drag_force(speed_m_s, altitude_m, constants),
        Fl=lift_force(speed_m_s, altitude_m, constants),
    )


def state_derivative(
    state: KinematicState, constants: PhysicalConstants, phi_rate: float = 0.0
) -> StateDerivative:
    """
    Evaluate the glide model's state derivative.

    Args:
        state (KinematicState): Current state; speed must exceed V_MIN.
        constants (PhysicalConstants): Flight constants.
        phi_rate (float): Heading rate in rad/s from the maneuver schedule.

    Returns:
        StateDerivative: Rates for speed, path angle, heading and position.
    """
    if not state.v > V_MIN:
        raise SingularSpeedError(f"Speed {state.v} m/s is at or below the {V_MIN} m/s minimum")
    for name in ("theta", "phi", "z"):
        _require_finite(name, getattr(state, name))

    rates = jit_state_derivative(
        state.v, state.theta, state.phi, state.z, float(phi_rate), constants.as_array()
    )
    return StateDerivative(*rates)
