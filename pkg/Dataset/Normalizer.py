from dataclasses import dataclass
from typing import Union

import numpy as np

from Errors.glidecast_errors import InvalidInputError

CHANNELS = ("x", "y", "z")

# Channels whose fitted range is below this are treated as constant
DEGENERATE_RANGE = 1e-9


def channel_index(channel: Union[str, int]) -> int:
    if isinstance(channel, str) and channel in CHANNELS:
        return CHANNELS.index(channel)
    if isinstance(channel, (int, np.integer)) and not isinstance(channel, bool) and 0 <= channel < len(CHANNELS):
        return int(channel)
    raise InvalidInputError(f"Unknown channel {channel!r}, expected one of {CHANNELS}")


@dataclass(frozen=True)
class Normalizer:
    """Per-channel min-max scaling to [0, 1], fitted on training inputs only."""
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64).reshape(len(CHANNELS))
        maxs = np.asarray(self.maxs, dtype=np.float64).reshape(len(CHANNELS))
        if np.any(maxs < mins):
            raise InvalidInputError("Normalizer max must be >= min for every channel")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def ranges(self) -> np.ndarray:
        return self.maxs - self.mins

    @property
    def degenerate(self) -> np.ndarray:
        return self.ranges < DEGENERATE_RANGE

    def apply_array(self, values: np.ndarray) -> np.ndarray:
        """Scale an array whose last axis holds the x, y, z channels."""
        values = np.asarray(values, dtype=np.float64)
        safe_ranges = np.where(self.degenerate, 1.0, self.ranges)
        scaled = (values - self.mins) / safe_ranges
        return np.where(self.degenerate, 0.0, scaled)

    def invert_array(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        restored = values * self.ranges + self.mins
        return np.where(self.degenerate, self.mins, restored)

    def to_dict(self) -> dict:
        return {
            channel: {
                "min": float(self.mins[i]),
                "max": float(self.maxs[i]),
                "degenerate": bool(self.degenerate[i]),
            }
            for i, channel in enumerate(CHANNELS)
        }

    @classmethod
    def from_dict(cls, params: dict) -> "Normalizer":
        return cls(
            mins=np.array([params[channel]["min"] for channel in CHANNELS]),
            maxs=np.array([params[channel]["max"] for channel in CHANNELS]),
        )

    @classmethod
    def identity(cls) -> "Normalizer":
        return cls(mins=np.zeros(len(CHANNELS)), maxs=np.ones(len(CHANNELS)))
