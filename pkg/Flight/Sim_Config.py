import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from Errors.glidecast_errors import InvalidInputError


@dataclass(frozen=True)
class ManeuverSchedule:
    """
    Piecewise-constant heading rate. Each segment is (t_start_s, t_end_s, phi_rate_rad_s)
    and applies on t_start <= t < t_end. An empty schedule holds the heading constant.
    """
    segments: Tuple[Tuple[float, float, float], ...] = ()

    def __post_init__(self):
        segments = tuple(tuple(float(v) for v in segment) for segment in self.segments)
        object.__setattr__(self, "segments", segments)

        previous_end = -math.inf
        for segment in segments:
            if len(segment) != 3:
                raise InvalidInputError(f"Maneuver segment must be (t_start, t_end, phi_rate), got {segment}")
            t_start, t_end, phi_rate = segment
            if not all(math.isfinite(v) for v in segment):
                raise InvalidInputError(f"Maneuver segment values must be finite, got {segment}")
            if t_end <= t_start:
                raise InvalidInputError(f"Maneuver segment ends before it starts: {segment}")
            if t_start < previous_end:
                raise InvalidInputError("Maneuver segments must be time-sorted and non-overlapping")
            previous_end = t_end

    def phi_rate_at(self, t: float) -> float:
        for t_start, t_end, phi_rate in self.segments:
            if t_start <= t < t_end:
                return phi_rate
        return 0.0

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Segment starts, ends and rates as float64 arrays for the jitted integration loop."""
        if not self.segments:
            empty = np.zeros(0, dtype=np.float64)
            return empty, empty.copy(), empty.copy()
        table = np.array(self.segments, dtype=np.float64)
        return (
            np.ascontiguousarray(table[:, 0]),
            np.ascontiguousarray(table[:, 1]),
            np.ascontiguousarray(table[:, 2]),
        )

    def to_list(self) -> List[List[float]]:
        return [list(segment) for segment in self.segments]


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.1                              # Timestep (s)
    t_total: float = 300.0                       # Total simulated time (s)
    v0: float = 5100.0                           # Initial speed (m/s)
    h0: float = 80_000.0                         # Initial altitude (m)
    theta0: float = math.radians(-5.0)           # Initial glide path angle (rad)
    phi0: float = 0.0                            # Initial heading (rad)
    maneuver: ManeuverSchedule = field(default_factory=ManeuverSchedule)

    def __post_init__(self):
        for name in ("dt", "t_total", "v0", "h0", "theta0", "phi0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidInputError(f"Simulation setting '{name}' must be finite, got {value}")
        if self.dt <= 0:
            raise InvalidInputError(f"Simulation setting 'dt' must be positive, got {self.dt}")
        if self.t_total < 0:
            raise InvalidInputError(f"Simulation setting 't_total' must be non-negative, got {self.t_total}")
        if self.v0 <= 0:
            raise InvalidInputError(f"Simulation setting 'v0' must be positive, got {self.v0}")
        if self.h0 <= 0:
            raise InvalidInputError(f"Simulation setting 'h0' must be above ground, got {self.h0}")

    @property
    def max_steps(self) -> int:
        # Tolerance absorbs representation error, e.g. 300 / 0.1
        return int(math.floor(self.t_total / self.dt + 1e-9))

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_total": self.t_total,
            "v0": self.v0,
            "h0": self.h0,
            "theta0_deg": math.degrees(self.theta0),
            "phi0_deg": math.degrees(self.phi0),
            "maneuver": self.maneuver.to_list(),
        }
