from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import polars as pl

from Errors.glidecast_errors import InvalidInputError

# Fixed reference speed of sound used only for the Mach column of the full-state export
SPEED_OF_SOUND_M_S = 295.0

SAMPLE_COLUMNS = ["t", "x", "y", "z"]
STATE_COLUMNS = ["t", "v", "theta", "phi", "x", "y", "z"]


@dataclass(frozen=True)
class Trajectory:
    samples_df: pl.DataFrame
    states_df: Optional[pl.DataFrame] = None
    termination_reason: str = "horizon"
    dt: Optional[float] = None

    def __post_init__(self):
        if self.samples_df.columns != SAMPLE_COLUMNS:
            raise InvalidInputError(
                f"Trajectory samples must have columns {SAMPLE_COLUMNS}, got {self.samples_df.columns}"
            )
        if self.samples_df.height == 0:
            raise InvalidInputError("Trajectory must hold at least one sample")
        if not np.all(np.isfinite(self.samples_df.to_numpy())):
            raise InvalidInputError("Trajectory samples must be finite")
        if self.samples_df.height > 1 and not np.all(np.diff(self.times()) > 0):
            raise InvalidInputError("Trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return self.samples_df.height

    def times(self) -> np.ndarray:
        return self.samples_df["t"].to_numpy().astype(np.float64)

    def positions(self) -> np.ndarray:
        """Positions as a (T, 3) float64 array of x, y, z in meters."""
        return np.ascontiguousarray(
            self.samples_df.select(["x", "y", "z"]).to_numpy().astype(np.float64)
        )

    def full_state_df(self) -> pl.DataFrame:
        if self.states_df is None:
            raise InvalidInputError("Trajectory was loaded without full states")
        return self.states_df.with_columns(
            (pl.col("v") / SPEED_OF_SOUND_M_S).alias("mach")
        )

    def summary(self) -> dict:
        positions = self.positions()
        final_x, final_y, final_z = positions[-1]
        summary = {
            "samples": len(self),
            "duration_s": float(self.times()[-1] - self.times()[0]),
            "termination_reason": self.termination_reason,
            "downrange_m": float(np.hypot(final_x, final_y)),
            "final_altitude_m": float(final_z),
            "apex_altitude_m": float(positions[:, 2].max()),
            "min_altitude_m": float(positions[:, 2].min()),
        }
        if self.states_df is not None:
            theta = self.states_df["theta"].to_numpy()
            signs = np.sign(theta)
            signs = signs[signs != 0]
            summary["final_speed_m_s"] = float(self.states_df["v"][-1])
            summary["glide_angle_sign_changes"] = int(np.count_nonzero(np.diff(signs)))
        return summary

    def write_csv(self, path: str | Path, full_state: bool = False) -> None:
        frame = self.full_state_df() if full_state else self.samples_df
        frame.write_csv(path)

    @classmethod
    def from_csv(cls, path: str | Path) -> "Trajectory":
        samples_df = pl.read_csv(path, schema_overrides={name: pl.Float64 for name in SAMPLE_COLUMNS})
        samples_df = samples_df.select(SAMPLE_COLUMNS)
        times = samples_df["t"].to_numpy()
        dt = float(times[1] - times[0]) if len(times) > 1 else None
        return cls(samples_df=samples_df, termination_reason="loaded", dt=dt)
