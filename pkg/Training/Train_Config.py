import math
from dataclasses import dataclass, field, asdict
from typing import Dict

import numpy as np

from Errors.glidecast_errors import InvalidInputError


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    shuffle_seed: int = 42
    parallel_axes: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise InvalidInputError(f"epochs must be non-negative, got {self.epochs}")
        if self.batch_size < 1:
            raise InvalidInputError(f"batch_size must be at least 1, got {self.batch_size}")
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise InvalidInputError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1), got {value}")
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AdamState:
    """First and second moment estimates per parameter name plus the step counter."""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


@dataclass(frozen=True)
class EvalReport:
    """
    Single-step forecast accuracy in meters. Headline values pool every axis and
    sample; MAPE skips targets with |t| < 1 m and counts them in mape_excluded_count.
    """
    rmse: float
    mae: float
    mape_percent: float
    mape_excluded_count: int
    n_samples: int
    per_axis: Dict[str, dict]

    def to_dict(self, config_echo: dict = None) -> dict:
        report = {
            "rmse": self.rmse,
            "mae": self.mae,
            "mape_percent": self.mape_percent,
            "mape_excluded_count": self.mape_excluded_count,
            "n_samples": self.n_samples,
            "aggregation": "pooled over axes and samples; per_axis holds each axis alone",
            "per_axis": self.per_axis,
        }
        if config_echo is not None:
            report["config_echo"] = config_echo
        return report
