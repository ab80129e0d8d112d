from typing import Dict, Optional

import numpy as np

from Dataset.Normalizer import Normalizer, CHANNELS
from Errors.glidecast_errors import InvalidInputError, InvalidWindowError, ModelStateError, ShapeError
from Network.Hybrid_Model import (
    HybridModel,
    AxisModelSet,
    parameter_shapes,
    CONV_FILTERS,
    N_CHANNELS,
    KERNEL_WIDTH,
    DENSE_UNITS,
    LSTM_UNITS,
    GRU_UNITS,
)
from Network.recurrent_layers import (
    init_lstm_params,
    init_gru_params,
    lstm_layer_forward,
    lstm_layer_backward,
    gru_layer_forward,
    gru_layer_backward,
)
from Network.tensor_ops import (
    Parameter,
    RngStream,
    init_params,
    conv1d_forward,
    conv1d_backward,
    dense_forward,
    dense_backward,
    relu_forward,
    relu_backward,
    dropout_forward,
    dropout_backward,
    flatten_concat_forward,
    flatten_concat_backward,
)


def build_model(sequence_length: int, axis: str, rng: RngStream) -> HybridModel:
    """
    Create a freshly initialized hybrid model. Weights are Glorot-uniform, biases zero
    except the LSTM forget gate. The stream keeps serving the model's dropout masks.

    Args:
        sequence_length (int): Window length L, at least the kernel width.
        axis (str): Axis the model predicts ("x", "y" or "z").
        rng (RngStream): Seeded stream; its seed is recorded on the model.

    Returns:
        HybridModel: Model with every canonical parameter allocated.
    """
    if sequence_length < KERNEL_WIDTH:
        raise InvalidWindowError(f"Window length must be at least {KERNEL_WIDTH}, got {sequence_length}")

    shapes = parameter_shapes(sequence_length)
    parameters: Dict[str, Parameter] = {}

    parameters["conv.kernels"] = Parameter(init_params(
        shapes["conv.kernels"], N_CHANNELS * KERNEL_WIDTH, CONV_FILTERS * KERNEL_WIDTH, rng
    ))
    parameters["conv.bias"] = Parameter(np.zeros(shapes["conv.bias"]))

    lstm = init_lstm_params(N_CHANNELS, LSTM_UNITS, rng)
    parameters.update({f"lstm.{name}": p for name, p in lstm.parameters.items()})
    gru = init_gru_params(N_CHANNELS, GRU_UNITS, rng)
    parameters.update({f"gru.{name}": p for name, p in gru.parameters.items()})

    dense1_in = shapes["head.dense1.weights"][1]
    parameters["head.dense1.weights"] = Parameter(init_params(
        shapes["head.dense1.weights"], dense1_in, DENSE_UNITS, rng
    ))
    parameters["head.dense1.bias"] = Parameter(np.zeros(shapes["head.dense1.bias"]))
    parameters["head.dense2.weights"] = Parameter(init_params(
        shapes["head.dense2.weights"], DENSE_UNITS, 1, rng
    ))
    parameters["head.dense2.bias"] = Parameter(np.zeros(shapes["head.dense2.bias"]))

    # Reorder to the canonical serialization order
    parameters = {name: parameters[name] for name in shapes}
    return HybridModel(
        sequence_length=sequence_length, axis=axis, seed=rng.seed, parameters=parameters, rng=rng
    )


def _window_batch(model: HybridModel, window: np.ndarray):
    window = np.asarray(window, dtype=np.float64)
    expected = (model.sequence_length, N_CHANNELS)
    if window.ndim == 2 and window.shape == expected:
        return window[np.newaxis], False
    if window.ndim == 3 and window.shape[1:] == expected:
        return window, True
    raise ShapeError(f"Window must be {expected} or (B, *{expected}), got {window.shape}")


def model_forward(
    model: HybridModel,
    window: np.ndarray,
    training: bool = False,
    rng: RngStream = None,
    keep_cache: Optional[bool] = None,
):
    """
    Run the conv, LSTM and GRU branches on the same window, concatenate and apply the head.

    Args:
        model (HybridModel): Network to evaluate.
        window (np.ndarray): Normalized (L, 3) window or (B, L, 3) batch.
        training (bool): Apply dropout when True; evaluation is deterministic.
        rng (RngStream): Dropout stream, defaults to the model's own.
        keep_cache (bool): Store activations on the model for model_backward. Defaults to `training`,
            so evaluation leaves the model untouched.

    Returns:
        float | np.ndarray: Scalar prediction, or (B,) predictions for a batch.
    """
    batch, batched = _window_batch(model, window)
    p = model.parameters
    rate = model.dropout_rate
    if rng is None:
        rng = model.rng

    # Conv branch
    conv_pre, conv_cache = conv1d_forward(batch, p["conv.kernels"].value, p["conv.bias"].value)
    conv_act, conv_active = relu_forward(conv_pre)
    conv_drop, conv_mask = dropout_forward(conv_act, rate, training, rng)

    # LSTM branch, every timestep kept
    lstm_out, lstm_cache = lstm_layer_forward(batch, model.lstm_params())
    lstm_drop, lstm_mask = dropout_forward(lstm_out, rate, training, rng)

    # GRU branch, final state only
    gru_out, gru_cache = gru_layer_forward(batch, model.gru_params())
    gru_drop, gru_mask = dropout_forward(gru_out, rate, training, rng)

    # Head
    features, concat_cache = flatten_concat_forward([conv_drop, lstm_drop, gru_drop], batched=True)
    hidden_pre, dense1_cache = dense_forward(
        features, p["head.dense1.weights"].value, p["head.dense1.bias"].value
    )
    hidden_act, hidden_active = relu_forward(hidden_pre)
    hidden_drop, hidden_mask = dropout_forward(hidden_act, rate, training, rng)
    output, dense2_cache = dense_forward(
        hidden_drop, p["head.dense2.weights"].value, p["head.dense2.bias"].value
    )

    if keep_cache is None:
        keep_cache = training
    if keep_cache:
        model.cache = {
            "batched": batched,
            "batch_size": batch.shape[0],
            "conv": (conv_cache, conv_active, conv_mask),
            "lstm": (lstm_cache, lstm_mask),
            "gru": (gru_cache, gru_mask),
            "concat": concat_cache,
            "head": (dense1_cache, hidden_active, hidden_mask, dense2_cache),
        }

    predictions = output[:, 0]
    return predictions if batched else float(predictions[0])


def model_backward(model: HybridModel, upstream) -> Dict[str, np.ndarray]:
    """
    Backpropagate a loss gradient through the cached forward pass, reusing its dropout masks.
    Gradients are added to each Parameter.grad and also returned by canonical name.

    Args:
        model (HybridModel): Model holding a forward cache.
        upstream (float | np.ndarray): dLoss/dprediction, scalar or (B,).
    """
    if model.cache is None:
        raise ModelStateError("model_backward called before model_forward")
    cache = model.cache
    p = model.parameters

    upstream = np.asarray(upstream, dtype=np.float64)
    grad_output = upstream.reshape(-1, 1)
    batch_size = cache["batch_size"]
    if grad_output.shape[0] != batch_size:
        raise ShapeError(f"Upstream gradient has {grad_output.shape[0]} entries for a batch of {batch_size}")

    grads: Dict[str, np.ndarray] = {}
    dense1_cache, hidden_active, hidden_mask, dense2_cache = cache["head"]

    grad_hidden, grads["head.dense2.weights"], grads["head.dense2.bias"] = dense_backward(grad_output, dense2_cache)
    grad_hidden = relu_backward(dropout_backward(grad_hidden, hidden_mask), hidden_active)
    grad_features, grads["head.dense1.weights"], grads["head.dense1.bias"] = dense_backward(grad_hidden, dense1_cache)

    grad_conv, grad_lstm, grad_gru = flatten_concat_backward(grad_features, cache["concat"])

    conv_cache, conv_active, conv_mask = cache["conv"]
    grad_conv = relu_backward(dropout_backward(grad_conv, conv_mask), conv_active)
    _, grads["conv.kernels"], grads["conv.bias"] = conv1d_backward(grad_conv, conv_cache)

    lstm_cache, lstm_mask = cache["lstm"]
    _, lstm_grads = lstm_layer_backward(dropout_backward(grad_lstm, lstm_mask), lstm_cache)
    grads.update({f"lstm.{name}": grad for name, grad in lstm_grads.items()})

    gru_cache, gru_mask = cache["gru"]
    _, gru_grads = gru_layer_backward(dropout_backward(grad_gru, gru_mask), gru_cache)
    grads.update({f"gru.{name}": grad for name, grad in gru_grads.items()})

    ordered = {}
    for name, parameter in p.items():
        parameter.grad += grads[name]
        ordered[name] = grads[name]
    return ordered


def predict_normalized(model_set: AxisModelSet, windows: np.ndarray) -> np.ndarray:
    """Evaluation-mode predictions in normalized space, (B, 3) for a (B, L, 3) batch."""
    windows = np.asarray(windows, dtype=np.float64)
    return np.stack(
        [np.atleast_1d(model_forward(model_set.models[axis], windows, training=False)) for axis in CHANNELS],
        axis=-1,
    )


def predict_next(model_set: AxisModelSet, window: np.ndarray) -> np.ndarray:
    """
    Predict the next (x, y, z) position in meters from an (L, 3) window in meters.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (model_set.sequence_length, N_CHANNELS):
        raise ShapeError(
            f"Window must be ({model_set.sequence_length}, {N_CHANNELS}), got {window.shape}"
        )
    normalized = model_set.normalizer.apply_array(window)
    prediction = predict_normalized(model_set, normalized[np.newaxis])[0]
    return model_set.normalizer.invert_array(prediction)


def rollout(model_set: AxisModelSet, seed_window: np.ndarray, steps: int) -> np.ndarray:
    """
    Autoregressive forecast: each prediction is appended to the window, the oldest
    sample dropped, and the next position predicted from the shifted window.

    Returns:
        np.ndarray: (steps, 3) predicted positions in meters.
    """
    if steps < 0:
        raise InvalidInputError(f"Rollout steps must be non-negative, got {steps}")
    window = np.array(seed_window, dtype=np.float64)
    predictions = np.zeros((steps, N_CHANNELS))
    for step in range(steps):
        predictions[step] = predict_next(model_set, window)
        window = np.vstack([window[1:], predictions[step]])
    return predictions


def build_model_set(
    sequence_length: int, normalizer: Normalizer, seeds: Dict[str, int]
) -> AxisModelSet:
    return AxisModelSet(
        models={axis: build_model(sequence_length, axis, RngStream(seeds[axis])) for axis in CHANNELS},
        normalizer=normalizer,
    )
