from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from Errors.glidecast_errors import ShapeError
from Network.tensor_ops import Parameter, RngStream, init_params, sigmoid

LSTM_GATES = ("i", "f", "o", "c")   # input, forget, output, candidate
GRU_GATES = ("z", "r", "h")         # update, reset, candidate

LSTM_FORGET_BIAS = 1.0


@dataclass
class RecurrentParams:
    """
    Per-gate input weights W (H×D), recurrent weights U (H×H) and biases b (H),
    keyed "W<gate>", "U<gate>", "b<gate>".
    """
    parameters: Dict[str, Parameter]
    gates: Tuple[str, ...] = ()

    def __post_init__(self):
        hidden_size, input_size = self.W(self.gates[0]).shape
        for gate in self.gates:
            if self.W(gate).shape != (hidden_size, input_size):
                raise ShapeError(f"W{gate} has shape {self.W(gate).shape}, expected {(hidden_size, input_size)}")
            if self.U(gate).shape != (hidden_size, hidden_size):
                raise ShapeError(f"U{gate} has shape {self.U(gate).shape}, expected {(hidden_size, hidden_size)}")
            if self.b(gate).shape != (hidden_size,):
                raise ShapeError(f"b{gate} has shape {self.b(gate).shape}, expected {(hidden_size,)}")

    def W(self, gate: str) -> np.ndarray:
        return self.parameters[f"W{gate}"].value

    def U(self, gate: str) -> np.ndarray:
        return self.parameters[f"U{gate}"].value

    def b(self, gate: str) -> np.ndarray:
        return self.parameters[f"b{gate}"].value

    @property
    def hidden_size(self) -> int:
        return self.W(self.gates[0]).shape[0]

    @property
    def input_size(self) -> int:
        return self.W(self.gates[0]).shape[1]

    def pre_activation(self, gate: str, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        return x @ self.W(gate).T + h @ self.U(gate).T + self.b(gate)


class LstmParams(RecurrentParams):
    def __init__(self, parameters: Dict[str, Parameter]):
        super().__init__(parameters=parameters, gates=LSTM_GATES)


class GruParams(RecurrentParams):
    def __init__(self, parameters: Dict[str, Parameter]):
        super().__init__(parameters=parameters, gates=GRU_GATES)


@dataclass
class RecurrentState:
    h: np.ndarray
    c: np.ndarray = None    # LSTM only

    @classmethod
    def zeros(cls, hidden_size: int, batch_size: int = None, with_cell: bool = True) -> "RecurrentState":
        shape = (hidden_size,) if batch_size is None else (batch_size, hidden_size)
        return cls(h=np.zeros(shape), c=np.zeros(shape) if with_cell else None)


def _init_gate_parameters(
    gates: Tuple[str, ...], input_size: int, hidden_size: int, rng: RngStream, bias_values: Dict[str, float]
) -> Dict[str, Parameter]:
    parameters = {}
    for gate in gates:
        parameters[f"W{gate}"] = Parameter(init_params((hidden_size, input_size), input_size, hidden_size, rng))
        parameters[f"U{gate}"] = Parameter(init_params((hidden_size, hidden_size), hidden_size, hidden_size, rng))
        parameters[f"b{gate}"] = Parameter(np.full(hidden_size, bias_values.get(gate, 0.0)))
    return parameters


def init_lstm_params(input_size: int, hidden_size: int, rng: RngStream) -> LstmParams:
    """Glorot-uniform weights, zero biases except the forget gate at 1."""
    return LstmParams(
        _init_gate_parameters(LSTM_GATES, input_size, hidden_size, rng, {"f": LSTM_FORGET_BIAS})
    )


def init_gru_params(input_size: int, hidden_size: int, rng: RngStream) -> GruParams:
    return GruParams(_init_gate_parameters(GRU_GATES, input_size, hidden_size, rng, {}))


def _check_step_shapes(x: np.ndarray, h: np.ndarray, params: RecurrentParams) -> None:
    if x.shape[-1] != params.input_size:
        raise ShapeError(f"Input width {x.shape[-1]} does not match {params.input_size}")
    if h.shape[-1] != params.hidden_size:
        raise ShapeError(f"Hidden width {h.shape[-1]} does not match {params.hidden_size}")
    if x.shape[:-1] != h.shape[:-1]:
        raise ShapeError(f"Input batch {x.shape[:-1]} does not match state batch {h.shape[:-1]}")


def _as_sequence_batch(sequence: np.ndarray, params: RecurrentParams) -> Tuple[np.ndarray, bool]:
    sequence = np.asarray(sequence, dtype=np.float64)
    if sequence.ndim == 2:
        sequence, batched = sequence[np.newaxis], False
    elif sequence.ndim == 3:
        batched = True
    else:
        raise ShapeError(f"Sequence must be (L, D) or (B, L, D), got {sequence.shape}")
    if sequence.shape[1] < 1:
        raise ShapeError("Sequence must hold at least one timestep")
    if sequence.shape[2] != params.input_size:
        raise ShapeError(f"Sequence width {sequence.shape[2]} does not match {params.input_size}")
    return sequence, batched


def _accumulate_gate_grads(grads, gate, d_pre, x, h_prev):
    grads[f"W{gate}"] += d_pre.T @ x
    grads[f"U{gate}"] += d_pre.T @ h_prev
    grads[f"b{gate}"] += d_pre.sum(axis=0)


def _zero_grads(params: RecurrentParams) -> Dict[str, np.ndarray]:
    return {name: np.zeros_like(parameter.value) for name, parameter in params.parameters.items()}


# --------------------------------------------------------------------------- #
# ---------------------------------- LSTM ----------------------------------- #
# --------------------------------------------------------------------------- #
def lstm_cell(x_t: np.ndarray, state: RecurrentState, params: LstmParams) -> RecurrentState:
    """
    One LSTM step.

        i = σ(Wi x + Ui h + bi)     f = σ(Wf x + Uf h + bf)
        o = σ(Wo x + Uo h + bo)     c̃ = tanh(Wc x + Uc h + bc)
        c' = f ⊙ c + i ⊙ c̃          h' = o ⊙ tanh(c')
    """
    new_state, _ = _lstm_step(np.asarray(x_t, dtype=np.float64), state.h, state.c, params)
    return new_state


def _lstm_step(x, h_prev, c_prev, params: LstmParams):
    _check_step_shapes(x, h_prev, params)
    i = sigmoid(params.pre_activation("i", x, h_prev))
    f = sigmoid(params.pre_activation("f", x, h_prev))
    o = sigmoid(params.pre_activation("o", x, h_prev))
    c_tilde = np.tanh(params.pre_activation("c", x, h_prev))

    c = f * c_prev + i * c_tilde
    tanh_c = np.tanh(c)
    h = o * tanh_c

    step_cache = (x, h_prev, c_prev, i, f, o, c_tilde, tanh_c)
    return RecurrentState(h=h, c=c), step_cache


def lstm_layer_forward(sequence: np.ndarray, params: LstmParams):
    """
    Run the LSTM over a sequence from a zero state and return every hidden state.

    Args:
        sequence (np.ndarray): (L, D) or (B, L, D) inputs.
        params (LstmParams): Gate weights.

    Returns:
        tuple: hidden states ([B,] L, H) and the cache for lstm_layer_backward.
    """
    batch, batched = _as_sequence_batch(sequence, params)
    batch_size, length, _ = batch.shape

    state = RecurrentState.zeros(params.hidden_size, batch_size)
    outputs = np.zeros((batch_size, length, params.hidden_size))
    step_caches = []
    for t in range(length):
        state, step_cache = _lstm_step(batch[:, t, :], state.h, state.c, params)
        outputs[:, t, :] = state.h
        step_caches.append(step_cache)

    cache = (step_caches, params, batched)
    return (outputs if batched else outputs[0]), cache


def lstm_layer_backward(grad_outputs: np.ndarray, cache):
    """
    Backpropagation through time for lstm_layer_forward.

    Args:
        grad_outputs (np.ndarray): Loss gradient for every hidden state, ([B,] L, H).

    Returns:
        tuple: gradient for the input sequence and a dict of parameter gradients.
    """
    step_caches, params, batched = cache
    grad_outputs = np.asarray(grad_outputs, dtype=np.float64)
    if not batched:
        grad_outputs = grad_outputs[np.newaxis]

    grads = _zero_grads(params)
    batch_size, length, _ = grad_outputs.shape
    grad_sequence = np.zeros((batch_size, length, params.input_size))
    dh_next = np.zeros((batch_size, params.hidden_size))
    dc_next = np.zeros((batch_size, params.hidden_size))

    for t in reversed(range(length)):
        x, h_prev, c_prev, i, f, o, c_tilde, tanh_c = step_caches[t]
        dh = grad_outputs[:, t, :] + dh_next

        do = dh * tanh_c
        dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next
        di = dc * c_tilde
        df = dc * c_prev
        dc_tilde = dc * i

        d_pre = {
            "i": di * i * (1.0 - i),
            "f": df * f * (1.0 - f),
            "o": do * o * (1.0 - o),
            "c": dc_tilde * (1.0 - c_tilde * c_tilde),
        }

        dx = np.zeros_like(x)
        dh_next = np.zeros_like(h_prev)
        for gate in LSTM_GATES:
            _accumulate_gate_grads(grads, gate, d_pre[gate], x, h_prev)
            dx += d_pre[gate] @ params.W(gate)
            dh_next += d_pre[gate] @ params.U(gate)

        grad_sequence[:, t, :] = dx
        dc_next = dc * f

    return (grad_sequence if batched else grad_sequence[0]), grads


# --------------------------------------------------------------------------- #
# ---------------------------------- GRU ------------------------------------ #
# --------------------------------------------------------------------------- #
def gru_cell(x_t: np.ndarray, h: np.ndarray, params: GruParams) -> np.ndarray:
    """
    One GRU step, reset gate applied before the candidate's recurrent weights.

        z = σ(Wz x + Uz h + bz)     r = σ(Wr x + Ur h + br)
        h̃ = tanh(Wh x + Uh (r ⊙ h) + bh)
        h' = (1 - z) ⊙ h + z ⊙ h̃
    """
    h_new, _ = _gru_step(np.asarray(x_t, dtype=np.float64), np.asarray(h, dtype=np.float64), params)
    return h_new


def _gru_step(x, h_prev, params: GruParams):
    _check_step_shapes(x, h_prev, params)
    z = sigmoid(params.pre_activation("z", x, h_prev))
    r = sigmoid(params.pre_activation("r", x, h_prev))
    reset_h = r * h_prev
    h_tilde = np.tanh(params.pre_activation("h", x, reset_h))
    h = (1.0 - z) * h_prev + z * h_tilde
    return h, (x, h_prev, z, r, reset_h, h_tilde)


def gru_layer_forward(sequence: np.ndarray, params: GruParams):
    """
    Run the GRU over a sequence from a zero state and return only the final hidden state.

    Returns:
        tuple: final hidden state ([B,] H) and the cache for gru_layer_backward.
    """
    batch, batched = _as_sequence_batch(sequence, params)
    batch_size, length, _ = batch.shape

    h = np.zeros((batch_size, params.hidden_size))
    step_caches = []
    for t in range(length):
        h, step_cache = _gru_step(batch[:, t, :], h, params)
        step_caches.append(step_cache)

    cache = (step_caches, params, batched)
    return (h if batched else h[0]), cache


def gru_layer_backward(grad_final: np.ndarray, cache):
    step_caches, params, batched = cache
    grad_final = np.asarray(grad_final, dtype=np.float64)
    if not batched:
        grad_final = grad_final[np.newaxis]

    grads = _zero_grads(params)
    batch_size = grad_final.shape[0]
    length = len(step_caches)
    grad_sequence = np.zeros((batch_size, length, params.input_size))
    dh = grad_final

    for t in reversed(range(length)):
        x, h_prev, z, r, reset_h, h_tilde = step_caches[t]

        dz = dh * (h_tilde - h_prev)
        dh_tilde = dh * z
        dh_prev = dh * (1.0 - z)

        d_pre_h = dh_tilde * (1.0 - h_tilde * h_tilde)
        d_reset_h = d_pre_h @ params.U("h")
        dr = d_reset_h * h_prev
        dh_prev = dh_prev + d_reset_h * r

        d_pre_z = dz * z * (1.0 - z)
        d_pre_r = dr * r * (1.0 - r)

        _accumulate_gate_grads(grads, "z", d_pre_z, x, h_prev)
        _accumulate_gate_grads(grads, "r", d_pre_r, x, h_prev)
        _accumulate_gate_grads(grads, "h", d_pre_h, x, reset_h)

        grad_sequence[:, t, :] = (
            d_pre_z @ params.W("z") + d_pre_r @ params.W("r") + d_pre_h @ params.W("h")
        )
        dh = dh_prev + d_pre_z @ params.U("z") + d_pre_r @ params.U("r")

    return (grad_sequence if batched else grad_sequence[0]), grads
