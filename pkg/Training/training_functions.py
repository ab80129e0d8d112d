import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional, Tuple

import numpy as np
import polars as pl

from Dataset.Normalizer import CHANNELS
from Dataset.Sequence_Dataset import SequenceDataset
from Errors.glidecast_errors import InvalidInputError, InsufficientDataError
from Network.Hybrid_Model import AxisModelSet, HybridModel
from Network.hybrid_model_functions import model_forward, model_backward, predict_normalized
from Network.tensor_ops import Parameter, RngStream
from Training.Train_Config import TrainConfig, AdamState, EvalReport

# Targets smaller than this (m) are left out of MAPE
MAPE_MIN_TARGET_M = 1.0

HISTORY_COLUMNS = ["epoch", "axis", "loss", "mae"]


def mse_loss(predictions: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean squared error and its gradient with respect to each prediction.

    Args:
        predictions (np.ndarray): (n,) predicted values.
        targets (np.ndarray): (n,) true values.

    Returns:
        tuple: loss = mean((p - t)²) and dloss/dp = 2 (p - t) / n.
    """
    predictions = np.atleast_1d(np.asarray(predictions, dtype=np.float64))
    targets = np.atleast_1d(np.asarray(targets, dtype=np.float64))
    if predictions.size == 0 or predictions.shape != targets.shape:
        raise InvalidInputError(
            f"Loss needs equal, non-empty batches, got {predictions.shape} and {targets.shape}"
        )
    errors = predictions - targets
    n = predictions.size
    return float(np.mean(errors * errors)), 2.0 * errors / n


def adam_step(
    params: Dict[str, Parameter],
    grads: Optional[Dict[str, np.ndarray]],
    state: AdamState,
    train_config: TrainConfig,
) -> AdamState:
    """
    One bias-corrected Adam update, applied to the parameter values in place.

        m <- β1 m + (1 - β1) g          v <- β2 v + (1 - β2) g²
        m̂ = m / (1 - β1^t)              v̂ = v / (1 - β2^t)
        w <- w - lr m̂ / (√v̂ + ε)
    """
    if grads is None:
        grads = {name: parameter.grad for name, parameter in params.items()}

    state.t += 1
    beta1, beta2 = train_config.beta1, train_config.beta2
    bias_correction1 = 1.0 - beta1 ** state.t
    bias_correction2 = 1.0 - beta2 ** state.t

    for name, parameter in params.items():
        g = grads[name]
        if g.shape != parameter.shape:
            raise InvalidInputError(f"Gradient for '{name}' has shape {g.shape}, expected {parameter.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(parameter.value)
            state.v[name] = np.zeros_like(parameter.value)

        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * (g * g)
        m_hat = state.m[name] / bias_correction1
        v_hat = state.v[name] / bias_correction2
        parameter.value -= train_config.learning_rate * m_hat / (np.sqrt(v_hat) + train_config.epsilon)

    return state


def train_axis_model(
    model: HybridModel, train_data: SequenceDataset, train_config: TrainConfig
) -> pl.DataFrame:
    """
    Fit one axis model with shuffled mini-batches and one Adam step per batch.

    Returns:
        pl.DataFrame: Per-epoch mean training loss and MAE (normalized space).
    """
    axis_index = CHANNELS.index(model.axis)
    inputs = train_data.inputs
    targets = train_data.targets[:, axis_index]
    n_pairs = len(train_data)

    shuffle_rng = RngStream(train_config.shuffle_seed)
    adam_state = AdamState()
    history = {name: [] for name in HISTORY_COLUMNS}

    for epoch in range(1, train_config.epochs + 1):
        order = shuffle_rng.permutation(n_pairs)
        squared_error_sum = 0.0
        absolute_error_sum = 0.0

        for start in range(0, n_pairs, train_config.batch_size):
            batch_index = order[start: start + train_config.batch_size]

            model.zero_grad()
            predictions = model_forward(model, inputs[batch_index], training=True)
            loss, grad_predictions = mse_loss(predictions, targets[batch_index])
            model_backward(model, grad_predictions)
            adam_step(model.parameters, None, adam_state, train_config)

            squared_error_sum += loss * len(batch_index)
            absolute_error_sum += float(np.sum(np.abs(predictions - targets[batch_index])))

        epoch_loss = squared_error_sum / n_pairs
        epoch_mae = absolute_error_sum / n_pairs
        history["epoch"].append(epoch)
        history["axis"].append(model.axis)
        history["loss"].append(epoch_loss)
        history["mae"].append(epoch_mae)
        logging.info(f"Epoch {epoch}/{train_config.epochs} [{model.axis}]: Loss: {epoch_loss:.6e}, MAE: {epoch_mae:.6e}")

    model.cache = None
    return pl.DataFrame(history, schema={"epoch": pl.Int64, "axis": pl.Utf8, "loss": pl.Float64, "mae": pl.Float64})


def train(
    model_set: AxisModelSet, train_data: SequenceDataset, train_config: TrainConfig = None
) -> Tuple[AxisModelSet, pl.DataFrame]:
    """
    Train the x, y and z models independently on the training partition.

    Args:
        model_set (AxisModelSet): Models to train in place.
        train_data (SequenceDataset): Normalized training pairs.
        train_config (TrainConfig): Epochs, batch size, Adam settings and shuffle seed.

    Returns:
        tuple: the trained set and the combined history (epoch, axis, loss, mae).
    """
    if train_config is None:
        train_config = TrainConfig()
    if len(train_data) == 0:
        raise InsufficientDataError("Cannot train on an empty training partition")

    logging.info(
        f"Training: {len(train_data)} pairs, {train_config.epochs} epochs, batch size {train_config.batch_size}, "
        f"{'parallel' if train_config.parallel_axes else 'sequential'} axes"
    )

    models = list(model_set.models.values())
    if train_config.parallel_axes:
        with ThreadPoolExecutor(max_workers=len(models)) as pool:
            histories = list(pool.map(lambda model: train_axis_model(model, train_data, train_config), models))
    else:
        histories = [train_axis_model(model, train_data, train_config) for model in models]

    return model_set, pl.concat(histories)


def _error_summary(errors: np.ndarray, targets: np.ndarray) -> dict:
    valid = np.abs(targets) >= MAPE_MIN_TARGET_M
    excluded = int(errors.size - np.count_nonzero(valid))
    mape = float(100.0 * np.mean(np.abs(errors[valid] / targets[valid]))) if np.any(valid) else 0.0
    return {
        "rmse": float(np.sqrt(np.mean(errors * errors))),
        "mae": float(np.mean(np.abs(errors))),
        "mape_percent": mape,
        "mape_excluded_count": excluded,
    }


def evaluate_predictions(predictions_m: np.ndarray, targets_m: np.ndarray) -> EvalReport:
    """
    Score physical-unit predictions against targets, both (N, 3) or (N,) for a single axis.
    """
    predictions_m = np.asarray(predictions_m, dtype=np.float64)
    targets_m = np.asarray(targets_m, dtype=np.float64)
    if predictions_m.shape != targets_m.shape:
        raise InvalidInputError(f"Prediction shape {predictions_m.shape} differs from target shape {targets_m.shape}")
    if predictions_m.shape[0] == 0:
        raise InsufficientDataError("Cannot evaluate an empty test partition")
    if predictions_m.ndim == 1:
        predictions_m = predictions_m[:, np.newaxis]
        targets_m = targets_m[:, np.newaxis]

    errors = predictions_m - targets_m
    pooled = _error_summary(errors.ravel(), targets_m.ravel())
    per_axis = {}
    if errors.shape[1] == len(CHANNELS):
        per_axis = {axis: _error_summary(errors[:, i], targets_m[:, i]) for i, axis in enumerate(CHANNELS)}

    if pooled["mape_excluded_count"]:
        logging.warning(f"MAPE skipped {pooled['mape_excluded_count']} targets below {MAPE_MIN_TARGET_M} m")

    return EvalReport(
        rmse=pooled["rmse"],
        mae=pooled["mae"],
        mape_percent=pooled["mape_percent"],
        mape_excluded_count=pooled["mape_excluded_count"],
        n_samples=int(predictions_m.shape[0]),
        per_axis=per_axis,
    )


def teacher_forced_predictions(model_set: AxisModelSet, test_data: SequenceDataset) -> Tuple[np.ndarray, np.ndarray]:
    """Single-step predictions from true windows, returned with the targets, both in meters."""
    if len(test_data) == 0:
        raise InsufficientDataError("Cannot evaluate an empty test partition")
    normalizer = model_set.normalizer
    predictions_m = normalizer.invert_array(predict_normalized(model_set, test_data.inputs))
    targets_m = normalizer.invert_array(test_data.targets)
    return predictions_m, targets_m


def evaluate(model_set: AxisModelSet, test_data: SequenceDataset) -> EvalReport:
    """
    Teacher-forced single-step evaluation on the test partition, in meters.
    """
    predictions_m, targets_m = teacher_forced_predictions(model_set, test_data)
    report = evaluate_predictions(predictions_m, targets_m)
    logging.info(
        f"Evaluation: {report.n_samples} windows, RMSE: {report.rmse:.2f}m, "
        f"MAE: {report.mae:.2f}m, MAPE: {report.mape_percent:.3f}%"
    )
    return report
