import argparse
import json
import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import polars as pl

from Dataset.Sequence_Dataset import SequenceDataset
from Dataset.sequence_windows import (
    build_dataset_split,
    chronological_split,
    dataset_to_frame,
    make_windows,
    normalize_dataset,
)
from Errors.glidecast_errors import ConfigError, GlidecastError
from Flight.Trajectory import Trajectory
from Flight.flight_integrator import simulate
from Network.Hybrid_Model import AxisModelSet
from Network.hybrid_model_functions import build_model_set, rollout
from Network.model_files import save_model, load_model
from Pipeline.Run_Config import RunConfig, parse_config
from Training.training_functions import train, evaluate, teacher_forced_predictions

# Exit statuses
EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_USAGE_ERROR = 2

COMMANDS = ("simulate", "make-dataset", "train", "evaluate", "rollout", "plot-data")

DEFAULT_OUTPUTS = {
    "simulate": "trajectory.csv",
    "make-dataset": "dataset.csv",
    "train": "models",
    "evaluate": "metrics.json",
    "rollout": "rollout.csv",
    "plot-data": "plot_data.csv",
}

PREDICTION_MODES = ("teacher-forced", "autoregressive")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glidecast",
        description="Simulate glide-vehicle trajectories and train per-axis CNN-LSTM-GRU forecasters.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="Base seed for model init, dropout and shuffling")
    parser.add_argument("--out", default=None, help="Output file (directory for train)")
    parser.add_argument("--allow-defaults", action="store_true", help="Run on defaults when the config is missing")
    parser.add_argument("--trajectory", default=None, help="Trajectory CSV to use instead of simulating")
    parser.add_argument("--models", default=DEFAULT_OUTPUTS["train"], help="Directory holding model_{x,y,z}.json")
    parser.add_argument("--mode", choices=PREDICTION_MODES, default="teacher-forced", help="plot-data prediction mode")
    parser.add_argument("--steps", type=int, default=None, help="Rollout horizon, defaults to the test length")
    parser.add_argument("--full-state", action="store_true", help="simulate: write t, v, theta, phi, x, y, z, mach")
    return parser


def write_sidecar(artifact: Path, run_config: RunConfig, **extra) -> Path:
    """Config echo written next to a CSV artifact as <artifact>.config.json."""
    sidecar = artifact.with_name(artifact.name + ".config.json")
    document = {"config_echo": run_config.to_dict(), **extra}
    with open(sidecar, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(document, handle, indent=2)
    return sidecar


def load_trajectory(args, run_config: RunConfig) -> Trajectory:
    if args.trajectory is not None:
        logging.info(f"Reading trajectory from {args.trajectory}")
        return Trajectory.from_csv(args.trajectory)
    return simulate(run_config.simulation, run_config.constants)


def held_out_partition(trajectory: Trajectory, run_config: RunConfig, model_set: AxisModelSet) -> SequenceDataset:
    """Held-out pairs normalized with the normalizer stored alongside the models."""
    if model_set.sequence_length != run_config.sequence_length:
        raise ConfigError(
            f"Models were trained with window length {model_set.sequence_length}, "
            f"config asks for {run_config.sequence_length}"
        )
    raw_pairs = make_windows(trajectory, run_config.sequence_length)
    _, raw_test = chronological_split(raw_pairs, run_config.split)
    return normalize_dataset(raw_test, model_set.normalizer)


def _target_times(trajectory: Trajectory, first_index: int, count: int) -> np.ndarray:
    """Sample times for indices first_index onward, extrapolated past the trajectory end."""
    times = trajectory.times()
    dt = trajectory.dt if trajectory.dt is not None else 0.0
    indices = first_index + np.arange(count)
    within = indices < len(times)
    beyond = times[-1] + (indices - (len(times) - 1)) * dt
    return np.where(within, times[np.minimum(indices, len(times) - 1)], beyond)


def run_simulate(args, run_config: RunConfig, out: Path) -> None:
    trajectory = simulate(run_config.simulation, run_config.constants)
    trajectory.write_csv(out, full_state=args.full_state)
    write_sidecar(out, run_config, summary=trajectory.summary())


def run_make_dataset(args, run_config: RunConfig, out: Path) -> None:
    trajectory = load_trajectory(args, run_config)
    split = build_dataset_split(trajectory, run_config.sequence_length, run_config.split)
    pl.concat([dataset_to_frame(split.train), dataset_to_frame(split.test)]).write_csv(out)
    write_sidecar(
        out,
        run_config,
        normalizer=split.normalizer.to_dict(),
        train_pairs=len(split.train),
        test_pairs=len(split.test),
    )


def run_train(args, run_config: RunConfig, out: Path) -> None:
    trajectory = load_trajectory(args, run_config)
    split = build_dataset_split(trajectory, run_config.sequence_length, run_config.split)
    model_set = build_model_set(run_config.sequence_length, split.normalizer, run_config.model_seeds)
    model_set, history_df = train(model_set, split.train, run_config.training)

    save_model(model_set, out, config_echo=run_config.to_dict())
    history_path = out / "history.csv"
    history_df.write_csv(history_path)
    write_sidecar(history_path, run_config)


def run_evaluate(args, run_config: RunConfig, out: Path) -> None:
    trajectory = load_trajectory(args, run_config)
    model_set = load_model(args.models)
    report = evaluate(model_set, held_out_partition(trajectory, run_config, model_set))
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(report.to_dict(config_echo=run_config.to_dict()), handle, indent=2)


def run_rollout(args, run_config: RunConfig, out: Path) -> None:
    trajectory = load_trajectory(args, run_config)
    model_set = load_model(args.models)
    test_data = held_out_partition(trajectory, run_config, model_set)
    if len(test_data) == 0:
        raise GlidecastError("Test partition is empty; nothing to seed a rollout from")

    first_target = int(test_data.target_indices()[0])
    length = run_config.sequence_length
    seed_window = trajectory.positions()[first_target - length: first_target]
    steps = len(test_data) if args.steps is None else args.steps

    predictions = rollout(model_set, seed_window, steps)
    pl.DataFrame(
        {
            "step": np.arange(1, steps + 1),
            "t": _target_times(trajectory, first_target, steps),
            "x_pred": predictions[:, 0],
            "y_pred": predictions[:, 1],
            "z_pred": predictions[:, 2],
        }
    ).write_csv(out)
    write_sidecar(out, run_config, mode="autoregressive", seed_window_end_index=first_target, steps=steps)


def run_plot_data(args, run_config: RunConfig, out: Path) -> None:
    trajectory = load_trajectory(args, run_config)
    model_set = load_model(args.models)
    test_data = held_out_partition(trajectory, run_config, model_set)
    target_indices = test_data.target_indices()
    if len(test_data) == 0:
        raise GlidecastError("Test partition is empty; nothing to plot")

    if args.mode == "teacher-forced":
        predictions, _ = teacher_forced_predictions(model_set, test_data)
    else:
        first_target = int(target_indices[0])
        seed_window = trajectory.positions()[first_target - run_config.sequence_length: first_target]
        predictions = rollout(model_set, seed_window, len(test_data))

    # Predictions sit on the row of the sample they forecast; other rows stay empty
    predicted = np.full((len(trajectory), 3), np.nan)
    predicted[target_indices] = predictions

    plot_df = trajectory.samples_df.with_columns(
        [
            pl.Series(name, predicted[:, i]).fill_nan(None)
            for i, name in enumerate(("x_pred", "y_pred", "z_pred"))
        ]
    )
    plot_df.write_csv(out)
    write_sidecar(out, run_config, mode=args.mode, predicted_rows=int(len(target_indices)))


RUNNERS = {
    "simulate": run_simulate,
    "make-dataset": run_make_dataset,
    "train": run_train,
    "evaluate": run_evaluate,
    "rollout": run_rollout,
    "plot-data": run_plot_data,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse the command line, run one pipeline stage and return the exit status:
    0 on success, 1 on runtime failure, 2 on usage or configuration errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return EXIT_OK if exit_request.code == 0 else EXIT_USAGE_ERROR

    try:
        run_config = parse_config(args.config, allow_defaults=args.allow_defaults)
        if args.seed is not None:
            run_config = run_config.with_seed(args.seed)
        if args.steps is not None and args.steps < 0:
            raise ConfigError(f"--steps must be non-negative, got {args.steps}")
    except ConfigError as error:
        logging.error(f"{args.command}: {error}")
        return EXIT_USAGE_ERROR

    out = Path(args.out if args.out is not None else DEFAULT_OUTPUTS[args.command])
    try:
        RUNNERS[args.command](args, run_config, out)
    except ConfigError as error:
        logging.error(f"{args.command}: {error}")
        return EXIT_USAGE_ERROR
    except (GlidecastError, OSError, pl.exceptions.PolarsError) as error:
        logging.error(f"{args.command} failed: {error}")
        return EXIT_RUNTIME_ERROR

    logging.info(f"{args.command} finished -> {out}")
    return EXIT_OK
