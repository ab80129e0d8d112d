import numpy as np
import pytest

from Dataset.Normalizer import Normalizer
from Dataset.Sequence_Dataset import SplitSpec, SequenceDataset
from Dataset.sequence_windows import (
    build_dataset_split,
    chronological_split,
    dataset_to_frame,
    fit_normalizer,
    make_windows,
    normalize_apply,
    normalize_invert,
    sliding_windows,
)
from Errors.glidecast_errors import (
    InsufficientDataError,
    InvalidInputError,
    InvalidWindowError,
)


def ramp_positions(samples: int) -> np.ndarray:
    steps = np.arange(samples, dtype=np.float64)
    return np.column_stack([10.0 * steps, np.zeros(samples), 80_000.0 - 3.0 * steps])


def test_pair_count_for_default_horizon():
    pairs = make_windows(ramp_positions(3001), 10)
    assert len(pairs) == 2991
    assert pairs.inputs.shape == (2991, 10, 3)
    assert pairs.targets.shape == (2991, 3)


def test_minimal_trajectory_gives_one_pair():
    pairs = make_windows(ramp_positions(11), 10)
    assert len(pairs) == 1
    assert np.array_equal(pairs.targets[0], ramp_positions(11)[10])


def test_single_axis_hand_enumeration():
    windows, targets = sliding_windows(np.array([0.0, 1.0, 2.0, 3.0]), 2)
    assert windows.tolist() == [[0.0, 1.0], [1.0, 2.0]]
    assert targets.tolist() == [2.0, 3.0]


def test_window_target_alignment():
    positions = ramp_positions(50)
    pairs = make_windows(positions, 4)
    for i in (0, 17, len(pairs) - 1):
        assert np.array_equal(pairs.inputs[i], positions[i: i + 4])
        assert np.array_equal(pairs.targets[i], positions[i + 4])
    assert pairs.target_indices()[0] == 4


def test_window_errors():
    with pytest.raises(InsufficientDataError):
        make_windows(ramp_positions(10), 10)
    with pytest.raises(InvalidWindowError):
        make_windows(ramp_positions(50), 2)
    with pytest.raises(InvalidInputError):
        make_windows(np.zeros((50, 2)), 3)


@pytest.mark.parametrize(
    "samples, fraction, n_train, n_test",
    [(3001, 0.8, 2392, 599), (20, 0.8, 8, 2), (20, 1.0, 10, 0), (110, 0.29, 29, 71), (110, 0.57, 57, 43)],
)
def test_chronological_split_sizes(samples, fraction, n_train, n_test):
    pairs = make_windows(ramp_positions(samples), 10)
    train, test = chronological_split(pairs, SplitSpec(train_fraction=fraction))
    assert (len(train), len(test)) == (n_train, n_test)
    if n_test:
        assert np.array_equal(test.inputs[0], pairs.inputs[n_train])
        assert test.start_index == n_train


def test_split_fraction_validated():
    with pytest.raises(InvalidInputError):
        SplitSpec(train_fraction=1.5)


def test_normalizer_examples():
    normalizer = Normalizer(mins=np.array([0.0, 5.0, 0.0]), maxs=np.array([100.0, 5.0, 1.0]))
    assert normalize_apply(normalizer, 50.0, "x") == 0.5
    assert normalize_apply(normalizer, 100.0, "x") == 1.0
    # Degenerate channel
    assert normalizer.degenerate.tolist() == [False, True, False]
    assert normalize_apply(normalizer, 123.0, "y") == 0.0
    assert normalize_invert(normalizer, 0.7, "y") == 5.0
    # No clamping outside the fitted range
    assert normalize_apply(normalizer, 200.0, "x") == 2.0


@pytest.mark.parametrize("value", [0.0, 50.0, 100.0])
def test_normalizer_round_trip(value):
    normalizer = Normalizer(mins=np.array([0.0, 0.0, 0.0]), maxs=np.array([100.0, 1.0, 1.0]))
    restored = normalize_invert(normalizer, normalize_apply(normalizer, value, "x"), "x")
    assert restored == pytest.approx(value, rel=1e-9, abs=1e-12)


def test_unknown_channel():
    with pytest.raises(InvalidInputError):
        normalize_apply(Normalizer.identity(), 1.0, "w")


def test_fit_normalizer_uses_every_timestep():
    pairs = make_windows(ramp_positions(30), 5)
    normalizer = fit_normalizer(pairs)
    # 25 windows of 5 reach sample 28
    assert normalizer.mins.tolist() == [0.0, 0.0, 80_000.0 - 3.0 * 28]
    assert normalizer.maxs.tolist() == [280.0, 0.0, 80_000.0]
    refit = fit_normalizer(pairs)
    assert np.array_equal(refit.mins, normalizer.mins) and np.array_equal(refit.maxs, normalizer.maxs)


def test_fit_normalizer_rejects_empty():
    empty = SequenceDataset(inputs=np.zeros((0, 5, 3)), targets=np.zeros((0, 3)), sequence_length=5)
    with pytest.raises(InsufficientDataError):
        fit_normalizer(empty)


def test_no_leakage_from_test_partition():
    positions = ramp_positions(200)
    pairs = make_windows(positions, 10)
    train, _ = chronological_split(pairs)
    with_test = fit_normalizer(train)

    # Wildly different test region, same training region
    altered = positions.copy()
    altered[180:] *= 1000.0
    altered_train, _ = chronological_split(make_windows(altered, 10))
    assert np.array_equal(fit_normalizer(altered_train).mins, with_test.mins)
    assert np.array_equal(fit_normalizer(altered_train).maxs, with_test.maxs)


def test_dataset_split_on_simulated_flight(short_trajectory):
    split = build_dataset_split(short_trajectory, 5)
    assert len(split.train) + len(split.test) == len(short_trajectory) - 5
    assert split.normalizer.degenerate.tolist() == [False, True, False]
    assert np.all(split.train.inputs[..., 0] >= 0.0) and np.all(split.train.inputs[..., 0] <= 1.0)

    # Inverting a normalized target recovers the raw sample
    raw = short_trajectory.positions()
    restored = split.normalizer.invert_array(split.test.targets)
    assert np.allclose(restored, raw[split.test.target_indices()], rtol=1e-9, atol=1e-9)


def test_dataset_frame_layout():
    pairs = make_windows(ramp_positions(8), 3)
    frame = dataset_to_frame(pairs)
    assert frame.columns == ["window_index", "step", "xn", "yn", "zn", "target_axis", "target_value"]
    assert frame.height == len(pairs) * 3 * 3
    first_window = frame.filter((frame["window_index"] == 0) & (frame["target_axis"] == "z"))
    assert first_window["step"].to_list() == [0, 1, 2]
    assert first_window["xn"].to_list() == [0.0, 10.0, 20.0]
    assert first_window["target_value"].to_list() == [80_000.0 - 9.0] * 3
