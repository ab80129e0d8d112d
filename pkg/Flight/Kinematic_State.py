from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KinematicState:
    t: float = 0.0          # Time (s)
    v: float = 5100.0       # Speed (m/s)
    theta: float = 0.0      # Glide path angle (rad)
    phi: float = 0.0        # Heading angle (rad)
    x: float = 0.0          # Horizontal position (m)
    y: float = 0.0          # Horizontal position (m)
    z: float = 80_000.0     # Altitude (m)

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.t, self.v, self.theta, self.phi, self.x, self.y, self.z], dtype=np.float64
        )

    @classmethod
    def from_array(cls, values: np.ndarray) -> "KinematicState":
        t, v, theta, phi, x, y, z = (float(value) for value in values)
        return cls(t=t, v=v, theta=theta, phi=phi, x=x, y=y, z=z)


@dataclass(frozen=True)
class ForcesSample:
    g: float        # Gravitational acceleration (m/s²)
    rho: float      # Air density (kg/m³)
    Fd: float       # Drag force (N)
    Fl: float       # Lift force (N)


@dataclass(frozen=True)
class StateDerivative:
    v_dot: float        # m/s²
    theta_dot: float    # rad/s
    phi_dot: float      # rad/s
    x_dot: float        # m/s
    y_dot: float        # m/s
    z_dot: float        # m/s
