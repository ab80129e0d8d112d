import math
from dataclasses import dataclass, fields, asdict

import numpy as np

from Errors.glidecast_errors import InvalidInputError


@dataclass(frozen=True)
class PhysicalConstants:
    G: float = 3.98e14          # Gravitational parameter (m³/s²)
    R: float = 6_371_000.0      # Earth radius (m)
    rho0: float = 1.225         # Sea-level air density (kg/m³)
    k: float = 1.41e-4          # Density decay constant (1/m)
    A: float = 0.88             # Cross-sectional area (m²)
    m: float = 907.0            # Mass (kg)
    Cd: float = 0.5             # Drag coefficient
    Cl: float = 0.7             # Lift coefficient

    def __post_init__(self):
        for constant in fields(self):
            value = getattr(self, constant.name)
            # Aerodynamic coefficients may be zero to model vacuum flight
            lower_ok = value >= 0 if constant.name in ("Cd", "Cl") else value > 0
            if not math.isfinite(value) or not lower_ok:
                raise InvalidInputError(
                    f"Physical constant '{constant.name}' out of range, got {value}"
                )

    def as_array(self) -> np.ndarray:
        """Constants packed in field order (G, R, rho0, k, A, m, Cd, Cl) for the jitted kernels."""
        return np.array(
            [self.G, self.R, self.rho0, self.k, self.A, self.m, self.Cd, self.Cl],
            dtype=np.float64,
        )

    def to_dict(self) -> dict:
        return asdict(self)
