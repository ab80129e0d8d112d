import copy
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from Dataset.Sequence_Dataset import SplitSpec
from Errors.glidecast_errors import ConfigError
from Flight.Physical_Constants import PhysicalConstants
from Flight.Sim_Config import SimConfig, ManeuverSchedule
from Training.Train_Config import TrainConfig

DEFAULT_CONFIG = {
    "constants": PhysicalConstants().to_dict(),
    "simulation": {
        "dt": 0.1,
        "t_total": 300.0,
        "v0": 5100.0,
        "h0": 80000.0,
        "theta0_deg": -5.0,
        "phi0_deg": 0.0,
        "maneuver": [],
    },
    "dataset": {
        "sequence_length": 10,
        "train_fraction": 0.8,
    },
    "training": {
        "epochs": 50,
        "batch_size": 16,
        "learning_rate": 1e-3,
        "beta1": 0.9,
        "beta2": 0.999,
        "epsilon": 1e-8,
        "parallel_axes": False,
    },
    "seeds": {
        "model": {"x": 42, "y": 43, "z": 44},
        "shuffle": 42,
    },
}


def _check_type(path: str, value, default):
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
    elif isinstance(default, list):
        ok = isinstance(value, list)
    elif isinstance(default, dict):
        ok = isinstance(value, dict)
    else:
        ok = True
    if not ok:
        raise ConfigError(f"Config field '{path}' has invalid value {value!r}")


def merge_over_defaults(document: dict, defaults: dict = DEFAULT_CONFIG, prefix: str = "") -> dict:
    """Overlay a partial document on the defaults, rejecting unknown keys and wrong types."""
    if not isinstance(document, dict):
        raise ConfigError(f"Config section '{prefix or '<root>'}' must be a JSON object")
    merged = copy.deepcopy(defaults)
    for key, value in document.items():
        path = f"{prefix}{key}"
        if key not in defaults:
            raise ConfigError(f"Unknown config key '{path}'")
        default = defaults[key]
        _check_type(path, value, default)
        if isinstance(default, dict):
            merged[key] = merge_over_defaults(value, default, prefix=f"{path}.")
        else:
            merged[key] = copy.deepcopy(value)
    return merged


@dataclass(frozen=True)
class RunConfig:
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    simulation: SimConfig = field(default_factory=SimConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    sequence_length: int = 10
    training: TrainConfig = field(default_factory=TrainConfig)
    model_seeds: dict = field(default_factory=lambda: dict(DEFAULT_CONFIG["seeds"]["model"]))
    echo: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_CONFIG), repr=False)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.echo)

    def with_seed(self, seed: int) -> "RunConfig":
        """Model seeds seed, seed+1, seed+2 for x, y, z and shuffle seed `seed`."""
        document = self.to_dict()
        document["seeds"] = {"model": {"x": seed, "y": seed + 1, "z": seed + 2}, "shuffle": seed}
        return config_from_document(document)


def _seed_entries(seeds: dict):
    for axis, seed in seeds["model"].items():
        yield f"seeds.model.{axis}", seed
    yield "seeds.shuffle", seeds["shuffle"]


def config_from_document(document: dict) -> RunConfig:
    merged = merge_over_defaults(document)
    simulation = merged["simulation"]
    dataset = merged["dataset"]
    seeds = merged["seeds"]

    try:
        maneuver = ManeuverSchedule(tuple(tuple(segment) for segment in simulation["maneuver"]))
        sim_config = SimConfig(
            dt=float(simulation["dt"]),
            t_total=float(simulation["t_total"]),
            v0=float(simulation["v0"]),
            h0=float(simulation["h0"]),
            theta0=math.radians(simulation["theta0_deg"]),
            phi0=math.radians(simulation["phi0_deg"]),
            maneuver=maneuver,
        )
        constants = PhysicalConstants(**{name: float(value) for name, value in merged["constants"].items()})
        split = SplitSpec(train_fraction=float(dataset["train_fraction"]))
        training = TrainConfig(shuffle_seed=seeds["shuffle"], **merged["training"])
    except (TypeError, ValueError) as error:
        raise ConfigError(f"Invalid config: {error}") from error

    if dataset["sequence_length"] < 3:
        raise ConfigError(f"Config field 'dataset.sequence_length' must be at least 3, got {dataset['sequence_length']}")

    for path, seed in _seed_entries(seeds):
        if seed < 0 or seed >= 2**64:
            raise ConfigError(f"Config field '{path}' must be an integer in [0, 2**64), got {seed}")

    return RunConfig(
        constants=constants,
        simulation=sim_config,
        split=split,
        sequence_length=dataset["sequence_length"],
        training=training,
        model_seeds=dict(seeds["model"]),
        echo=merged,
    )


def parse_config(path: Optional[str | Path], allow_defaults: bool = False) -> RunConfig:
    """
    Read a JSON run configuration, merging partial sections over the defaults.

    Args:
        path (str | Path | None): Config document; None means no file was given.
        allow_defaults (bool): Fall back to defaults, with a warning, when the file is missing.

    Returns:
        RunConfig: Validated configuration.
    """
    if path is None or not Path(path).exists():
        if not allow_defaults:
            raise ConfigError(f"Config file not found: {path} (pass --allow-defaults to run on defaults)")
        logging.warning(f"No config file at {path}, running on defaults")
        return config_from_document({})

    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except (json.JSONDecodeError, UnicodeDecodeError) as error:
        raise ConfigError(f"Malformed config {path}: {error}") from error
    except OSError as error:
        raise ConfigError(f"Cannot read config {path}: {error}") from error

    return config_from_document(document)
