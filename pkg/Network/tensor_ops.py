import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from numba import njit

from Errors.glidecast_errors import InvalidInputError, InvalidRateError, ShapeError


@dataclass
class RngStream:
    """
    Seeded random stream on numpy's PCG64 bit generator. PCG64 output depends only
    on the seed, so draws reproduce across runs and platforms.
    """
    seed: int = 42
    draws: int = 0
    generator: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        integral = isinstance(self.seed, (int, np.integer)) and not isinstance(self.seed, bool)
        if not integral or not 0 <= self.seed < 2**64:
            raise InvalidInputError(f"Seed must be an integer in [0, 2**64), got {self.seed!r}")
        if self.generator is None:
            self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, low: float, high: float, shape) -> np.ndarray:
        self.draws += 1
        return self.generator.uniform(low, high, size=shape)

    def random(self, shape) -> np.ndarray:
        self.draws += 1
        return self.generator.random(size=shape)

    def permutation(self, n: int) -> np.ndarray:
        self.draws += 1
        return self.generator.permutation(n)


@dataclass
class Parameter:
    value: np.ndarray
    grad: np.ndarray = None

    def __post_init__(self):
        self.value = np.ascontiguousarray(self.value, dtype=np.float64)
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        if self.grad.shape != self.value.shape:
            raise ShapeError(f"Gradient shape {self.grad.shape} differs from value shape {self.value.shape}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


def init_params(shape, fan_in: int, fan_out: int, rng: RngStream) -> np.ndarray:
    """
    Glorot-uniform draws in [-b, b] with b = sqrt(6 / (fan_in + fan_out)).
    """
    if fan_in <= 0 or fan_out <= 0:
        raise InvalidInputError(f"Fans must be positive, got fan_in={fan_in}, fan_out={fan_out}")
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, shape).astype(np.float64)


def _as_batch(inputs: np.ndarray, sample_ndim: int) -> Tuple[np.ndarray, bool]:
    """Promote a single sample to a batch of one. Returns the batch and whether it was already batched."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == sample_ndim:
        return inputs[np.newaxis], False
    if inputs.ndim == sample_ndim + 1:
        return inputs, True
    raise ShapeError(f"Expected {sample_ndim}-D sample or {sample_ndim + 1}-D batch, got shape {inputs.shape}")


# --------------------------------------------------------------------------- #
# -------------------------------- CONV 1D ---------------------------------- #
# --------------------------------------------------------------------------- #
@njit
def jit_conv1d_forward(inputs: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    batch, length, channels = inputs.shape
    n_kernels, _, width = kernels.shape
    out_length = length - width + 1
    out = np.zeros((batch, out_length, n_kernels))

    for b in range(batch):
        for i in range(out_length):
            for k in range(n_kernels):
                acc = bias[k]
                for c in range(channels):
                    for w in range(width):
                        acc += inputs[b, i + w, c] * kernels[k, c, w]
                out[b, i, k] = acc
    return out


@njit
def jit_conv1d_backward(grad_out: np.ndarray, inputs: np.ndarray, kernels: np.ndarray):
    batch, length, channels = inputs.shape
    n_kernels, _, width = kernels.shape
    out_length = length - width + 1

    grad_inputs = np.zeros(inputs.shape)
    grad_kernels = np.zeros(kernels.shape)
    grad_bias = np.zeros(n_kernels)

    for b in range(batch):
        for i in range(out_length):
            for k in range(n_kernels):
                g = grad_out[b, i, k]
                grad_bias[k] += g
                for c in range(channels):
                    for w in range(width):
                        grad_kernels[k, c, w] += g * inputs[b, i + w, c]
                        grad_inputs[b, i + w, c] += g * kernels[k, c, w]
    return grad_inputs, grad_kernels, grad_bias


def conv1d_forward(inputs: np.ndarray, kernels: np.ndarray, bias: np.ndarray):
    """
    Valid cross-correlation: out[i, k] = bias[k] + Σ_{c, w} inputs[i + w, c] * kernels[k, c, w].

    Args:
        inputs (np.ndarray): (L, Cin) sample or (B, L, Cin) batch.
        kernels (np.ndarray): (K, Cin, W) filters.
        bias (np.ndarray): (K,) offsets.

    Returns:
        tuple: output of shape ([B,] L - W + 1, K) and the cache for conv1d_backward.
    """
    batch, batched = _as_batch(inputs, 2)
    kernels = np.ascontiguousarray(kernels, dtype=np.float64)
    bias = np.ascontiguousarray(bias, dtype=np.float64)

    if kernels.ndim != 3 or kernels.shape[1] != batch.shape[2]:
        raise ShapeError(f"Kernels {kernels.shape} do not match {batch.shape[2]} input channels")
    if bias.shape != (kernels.shape[0],):
        raise ShapeError(f"Bias {bias.shape} does not match {kernels.shape[0]} kernels")
    if batch.shape[1] < kernels.shape[2]:
        raise ShapeError(f"Sequence length {batch.shape[1]} shorter than kernel width {kernels.shape[2]}")

    batch = np.ascontiguousarray(batch)
    out = jit_conv1d_forward(batch, kernels, bias)
    cache = (batch, kernels, batched)
    return (out if batched else out[0]), cache


def conv1d_backward(grad_out: np.ndarray, cache):
    batch, kernels, batched = cache
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if not batched:
        grad_out = grad_out[np.newaxis]
    grad_inputs, grad_kernels, grad_bias = jit_conv1d_backward(
        np.ascontiguousarray(grad_out), batch, kernels
    )
    return (grad_inputs if batched else grad_inputs[0]), grad_kernels, grad_bias


# --------------------------------------------------------------------------- #
# --------------------------------- DENSE ----------------------------------- #
# --------------------------------------------------------------------------- #
def dense_forward(inputs: np.ndarray, weights: np.ndarray, bias: np.ndarray):
    """
    Fully connected layer: out[j] = bias[j] + Σ_i weights[j, i] * inputs[i].

    Args:
        inputs (np.ndarray): (D,) sample or (B, D) batch.
        weights (np.ndarray): (O, D) weight matrix.
        bias (np.ndarray): (O,) offsets.
    """
    batch, batched = _as_batch(inputs, 1)
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[1] != batch.shape[1]:
        raise ShapeError(f"Weights {weights.shape} do not match input width {batch.shape[1]}")
    if bias.shape != (weights.shape[0],):
        raise ShapeError(f"Bias {bias.shape} does not match {weights.shape[0]} outputs")

    out = batch @ weights.T + bias
    cache = (batch, weights, batched)
    return (out if batched else out[0]), cache


def dense_backward(grad_out: np.ndarray, cache):
    batch, weights, batched = cache
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if not batched:
        grad_out = grad_out[np.newaxis]
    grad_inputs = grad_out @ weights
    grad_weights = grad_out.T @ batch
    grad_bias = grad_out.sum(axis=0)
    return (grad_inputs if batched else grad_inputs[0]), grad_weights, grad_bias


# --------------------------------------------------------------------------- #
# ------------------------------ ACTIVATIONS -------------------------------- #
# --------------------------------------------------------------------------- #
def relu_forward(inputs: np.ndarray):
    inputs = np.asarray(inputs, dtype=np.float64)
    active = inputs > 0
    return np.where(active, inputs, 0.0), active


def relu_backward(grad_out: np.ndarray, active: np.ndarray) -> np.ndarray:
    # Subgradient at 0 is 0
    return np.where(active, grad_out, 0.0)


def sigmoid(values: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-values))


def dropout_forward(inputs: np.ndarray, rate: float, training: bool, rng: RngStream = None):
    """
    Inverted dropout. In training each element is zeroed with probability `rate` and
    survivors are scaled by 1 / (1 - rate); evaluation is the identity.

    Returns:
        tuple: output and the scaled mask (None in evaluation) for dropout_backward.
    """
    if not 0.0 <= rate < 1.0:
        raise InvalidRateError(f"Dropout rate must lie in [0, 1), got {rate}")
    inputs = np.asarray(inputs, dtype=np.float64)
    if not training:
        return inputs, None
    if rng is None:
        raise InvalidInputError("Training-mode dropout needs a random stream")

    keep = rng.random(inputs.shape) >= rate
    mask = keep / (1.0 - rate)
    return inputs * mask, mask


def dropout_backward(grad_out: np.ndarray, mask) -> np.ndarray:
    if mask is None:
        return grad_out
    return grad_out * mask


# --------------------------------------------------------------------------- #
# ---------------------------- FLATTEN / CONCAT ----------------------------- #
# --------------------------------------------------------------------------- #
def flatten_concat_forward(parts: Sequence[np.ndarray], batched: bool = False):
    """
    Flatten each part row-major and join them in argument order. With `batched`
    the leading axis is kept and every part is flattened per sample.
    """
    parts = [np.asarray(part, dtype=np.float64) for part in parts]
    if not parts:
        raise ShapeError("Nothing to concatenate")
    shapes = [part.shape for part in parts]
    if batched:
        batch_size = parts[0].shape[0]
        if any(part.shape[0] != batch_size for part in parts):
            raise ShapeError(f"Parts disagree on batch size: {shapes}")
        out = np.concatenate([part.reshape(batch_size, -1) for part in parts], axis=1)
    else:
        out = np.concatenate([part.reshape(-1) for part in parts])
    return out, (shapes, batched)


def flatten_concat_backward(grad_out: np.ndarray, cache) -> List[np.ndarray]:
    shapes, batched = cache
    grads = []
    offset = 0
    for shape in shapes:
        width = int(np.prod(shape[1:] if batched else shape))
        if batched:
            grads.append(grad_out[:, offset: offset + width].reshape(shape))
        else:
            grads.append(grad_out[offset: offset + width].reshape(shape))
        offset += width
    return grads
