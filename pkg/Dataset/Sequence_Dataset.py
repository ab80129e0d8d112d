from dataclasses import dataclass

import numpy as np

from Dataset.Normalizer import Normalizer, channel_index
from Errors.glidecast_errors import InvalidInputError, ShapeError


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    policy: str = "chronological"

    def __post_init__(self):
        if not 0.0 <= self.train_fraction <= 1.0:
            raise InvalidInputError(f"train_fraction must lie in [0, 1], got {self.train_fraction}")
        if self.policy != "chronological":
            raise InvalidInputError(f"Only the chronological split policy is supported, got {self.policy!r}")


@dataclass(frozen=True)
class SequenceDataset:
    """
    Windowed supervised pairs. `inputs` is (N, L, 3); `targets` is (N, 3) with one
    column per axis. `start_index` is the trajectory index of window 0's first sample.
    """
    inputs: np.ndarray
    targets: np.ndarray
    sequence_length: int
    start_index: int = 0

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        if inputs.ndim != 3 or inputs.shape[1:] != (self.sequence_length, 3):
            raise ShapeError(f"Inputs must be (N, {self.sequence_length}, 3), got {inputs.shape}")
        if targets.shape != (inputs.shape[0], 3):
            raise ShapeError(f"Targets must be ({inputs.shape[0]}, 3), got {targets.shape}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def target(self, axis) -> np.ndarray:
        return self.targets[:, channel_index(axis)]

    def target_indices(self) -> np.ndarray:
        """Trajectory index of each pair's target sample."""
        return self.start_index + np.arange(len(self)) + self.sequence_length

    def subset(self, start: int, stop: int) -> "SequenceDataset":
        return SequenceDataset(
            inputs=self.inputs[start:stop],
            targets=self.targets[start:stop],
            sequence_length=self.sequence_length,
            start_index=self.start_index + start,
        )


@dataclass(frozen=True)
class DatasetSplit:
    """Normalized train/test partitions plus the normalizer fitted on the train inputs."""
    train: SequenceDataset
    test: SequenceDataset
    normalizer: Normalizer
