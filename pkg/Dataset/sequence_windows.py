import logging
import math
from typing import Tuple, Union

import numpy as np
import polars as pl

from Dataset.Normalizer import Normalizer, CHANNELS, channel_index
from Dataset.Sequence_Dataset import SequenceDataset, SplitSpec, DatasetSplit
from Errors.glidecast_errors import InsufficientDataError, InvalidWindowError, InvalidInputError
from Flight.Trajectory import Trajectory

# Narrowest window the width-3 convolution can consume
MIN_SEQUENCE_LENGTH = 3
DEFAULT_SEQUENCE_LENGTH = 10


def sliding_windows(series: np.ndarray, sequence_length: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Slide a window of `sequence_length` samples along the first axis of a series.

    Args:
        series (np.ndarray): (T,) or (T, C) time-ordered values.
        sequence_length (int): Samples per window (>= 1).

    Returns:
        tuple: windows of shape (T - L, L[, C]) and the sample following each window.
    """
    series = np.asarray(series, dtype=np.float64)
    total = series.shape[0]
    if sequence_length < 1:
        raise InvalidWindowError(f"Window length must be at least 1, got {sequence_length}")
    if total <= sequence_length:
        raise InsufficientDataError(
            f"Need more than {sequence_length} samples to form a window pair, got {total}"
        )

    windows = np.lib.stride_tricks.sliding_window_view(series, sequence_length, axis=0)
    # sliding_window_view appends the window axis last; move it next to the pair axis
    if series.ndim == 2:
        windows = np.moveaxis(windows, -1, 1)
    windows = np.ascontiguousarray(windows[: total - sequence_length])
    targets = np.ascontiguousarray(series[sequence_length:])
    return windows, targets


def make_windows(
    trajectory: Union[Trajectory, np.ndarray], sequence_length: int = DEFAULT_SEQUENCE_LENGTH
) -> SequenceDataset:
    """
    Raw (unnormalized) window/next-position pairs over the x, y, z channels.

    Args:
        trajectory (Trajectory | np.ndarray): Flight path, or a (T, 3) position array.
        sequence_length (int): Window length L, at least 3.

    Returns:
        SequenceDataset: N = T - L pairs, window i covering samples [i, i + L).
    """
    if sequence_length < MIN_SEQUENCE_LENGTH:
        raise InvalidWindowError(
            f"Window length must be at least {MIN_SEQUENCE_LENGTH}, got {sequence_length}"
        )
    positions = trajectory.positions() if isinstance(trajectory, Trajectory) else trajectory
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 2 or positions.shape[1] != len(CHANNELS):
        raise InvalidInputError(f"Positions must be a (T, 3) array, got {positions.shape}")

    inputs, targets = sliding_windows(positions, sequence_length)
    return SequenceDataset(inputs=inputs, targets=targets, sequence_length=sequence_length)


def chronological_split(
    pairs: SequenceDataset, split_spec: SplitSpec = None
) -> Tuple[SequenceDataset, SequenceDataset]:
    """
    First floor(train_fraction * N) pairs train, the remainder test, order preserved.
    Input windows of the first test pairs may reach back into the train region.
    """
    if split_spec is None:
        split_spec = SplitSpec()
    # Tolerance absorbs representation error, e.g. 0.29 * 100
    n_train = min(len(pairs), int(math.floor(split_spec.train_fraction * len(pairs) + 1e-9)))
    return pairs.subset(0, n_train), pairs.subset(n_train, len(pairs))


def fit_normalizer(train_inputs: Union[SequenceDataset, np.ndarray]) -> Normalizer:
    """Per-channel min/max over every timestep of every training window."""
    if isinstance(train_inputs, SequenceDataset):
        train_inputs = train_inputs.inputs
    train_inputs = np.asarray(train_inputs, dtype=np.float64)
    if train_inputs.size == 0:
        raise InsufficientDataError("Cannot fit a normalizer on an empty training set")

    flat = train_inputs.reshape(-1, train_inputs.shape[-1])
    return Normalizer(mins=flat.min(axis=0), maxs=flat.max(axis=0))


def normalize_apply(normalizer: Normalizer, value: float, channel) -> float:
    i = channel_index(channel)
    if normalizer.degenerate[i]:
        return 0.0
    return (float(value) - normalizer.mins[i]) / normalizer.ranges[i]


def normalize_invert(normalizer: Normalizer, value: float, channel) -> float:
    i = channel_index(channel)
    if normalizer.degenerate[i]:
        return float(normalizer.mins[i])
    return float(value) * normalizer.ranges[i] + normalizer.mins[i]


def normalize_dataset(pairs: SequenceDataset, normalizer: Normalizer) -> SequenceDataset:
    return SequenceDataset(
        inputs=normalizer.apply_array(pairs.inputs),
        targets=normalizer.apply_array(pairs.targets),
        sequence_length=pairs.sequence_length,
        start_index=pairs.start_index,
    )


def build_dataset_split(
    trajectory: Trajectory,
    sequence_length: int = DEFAULT_SEQUENCE_LENGTH,
    split_spec: SplitSpec = None,
) -> DatasetSplit:
    """Window the trajectory, split chronologically, fit on train and normalize both partitions."""
    raw_pairs = make_windows(trajectory, sequence_length)
    raw_train, raw_test = chronological_split(raw_pairs, split_spec)
    normalizer = fit_normalizer(raw_train)

    logging.info(
        f"Dataset Built: {len(raw_pairs)} pairs of length {sequence_length}, "
        f"Train: {len(raw_train)}, Test: {len(raw_test)}, "
        f"Degenerate Channels: {[c for c, d in zip(CHANNELS, normalizer.degenerate) if d]}"
    )

    return DatasetSplit(
        train=normalize_dataset(raw_train, normalizer),
        test=normalize_dataset(raw_test, normalizer),
        normalizer=normalizer,
    )


def dataset_to_frame(pairs: SequenceDataset) -> pl.DataFrame:
    """
    Long-format inspection table: one row per (window, step, target axis) with
    columns window_index, step, xn, yn, zn, target_axis, target_value.
    """
    n_pairs, length, _ = pairs.inputs.shape
    n_axes = len(CHANNELS)

    window_index = np.repeat(np.arange(n_pairs) + pairs.start_index, length * n_axes)
    step = np.tile(np.repeat(np.arange(length), n_axes), n_pairs)
    axis_index = np.tile(np.arange(n_axes), n_pairs * length)
    values = np.repeat(pairs.inputs.reshape(-1, n_axes), n_axes, axis=0)
    target_value = np.repeat(pairs.targets, length, axis=0).reshape(-1)

    return pl.DataFrame(
        {
            "window_index": window_index,
            "step": step,
            "xn": values[:, 0],
            "yn": values[:, 1],
            "zn": values[:, 2],
            "target_axis": np.array(CHANNELS)[axis_index],
            "target_value": target_value,
        }
    )
