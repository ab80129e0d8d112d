import numpy as np
import pytest

from conftest import numerical_gradient, relative_error
from Errors.glidecast_errors import ShapeError
from Network.recurrent_layers import (
    GRU_GATES,
    LSTM_GATES,
    GruParams,
    LstmParams,
    RecurrentState,
    gru_cell,
    gru_layer_backward,
    gru_layer_forward,
    init_gru_params,
    init_lstm_params,
    lstm_cell,
    lstm_layer_backward,
    lstm_layer_forward,
)
from Network.tensor_ops import Parameter, RngStream


def constant_params(gates, hidden, inputs, w=0.0, u=0.0, b=0.0):
    parameters = {}
    for gate in gates:
        parameters[f"W{gate}"] = Parameter(np.full((hidden, inputs), w))
        parameters[f"U{gate}"] = Parameter(np.full((hidden, hidden), u))
        parameters[f"b{gate}"] = Parameter(np.full(hidden, b))
    return parameters


def random_params(gates, hidden, inputs, seed):
    rng = np.random.default_rng(seed)
    return {
        name: Parameter(rng.normal(scale=0.5, size=shape))
        for gate in gates
        for name, shape in (
            (f"W{gate}", (hidden, inputs)),
            (f"U{gate}", (hidden, hidden)),
            (f"b{gate}", (hidden,)),
        )
    }


def test_lstm_zero_fixed_point():
    params = LstmParams(constant_params(LSTM_GATES, 2, 2))
    state = lstm_cell(np.array([0.3, -0.7]), RecurrentState.zeros(2), params)
    assert np.array_equal(state.h, np.zeros(2)) and np.array_equal(state.c, np.zeros(2))


def test_lstm_scalar_cell():
    params = LstmParams(constant_params(LSTM_GATES, 1, 1, w=1.0))
    state = lstm_cell(np.array([1.0]), RecurrentState.zeros(1), params)
    assert state.c[0] == pytest.approx(0.55677, abs=1e-5)
    assert state.h[0] == pytest.approx(0.3696, abs=1e-4)


def test_gru_zero_fixed_point():
    params = GruParams(constant_params(GRU_GATES, 2, 2))
    assert np.array_equal(gru_cell(np.array([1.0, 2.0]), np.zeros(2), params), np.zeros(2))


def test_gru_scalar_cell():
    params = GruParams(constant_params(GRU_GATES, 1, 1, w=1.0))
    h = gru_cell(np.array([1.0]), np.zeros(1), params)
    assert h[0] == pytest.approx(0.55677, abs=1e-5)


def test_cell_shape_mismatch():
    params = LstmParams(constant_params(LSTM_GATES, 2, 3))
    with pytest.raises(ShapeError):
        lstm_cell(np.zeros(2), RecurrentState.zeros(2), params)
    with pytest.raises(ShapeError):
        LstmParams({**constant_params(LSTM_GATES, 2, 3), "Uf": Parameter(np.zeros((3, 3)))})


def test_empty_sequence_rejected():
    params = GruParams(constant_params(GRU_GATES, 2, 3))
    with pytest.raises(ShapeError):
        gru_layer_forward(np.zeros((0, 3)), params)


def test_lstm_layer_equals_cell_iteration():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        length, hidden, inputs = int(rng.integers(1, 6)), int(rng.integers(1, 5)), int(rng.integers(1, 4))
        params = LstmParams(random_params(LSTM_GATES, hidden, inputs, seed))
        sequence = rng.normal(size=(length, inputs))

        outputs, _ = lstm_layer_forward(sequence, params)
        assert outputs.shape == (length, hidden)
        state = RecurrentState.zeros(hidden)
        for t in range(length):
            state = lstm_cell(sequence[t], state, params)
            assert np.max(np.abs(outputs[t] - state.h)) <= 1e-12


def test_gru_layer_equals_cell_iteration():
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        length, hidden, inputs = int(rng.integers(1, 6)), int(rng.integers(1, 5)), int(rng.integers(1, 4))
        params = GruParams(random_params(GRU_GATES, hidden, inputs, seed))
        sequence = rng.normal(size=(length, inputs))

        final, _ = gru_layer_forward(sequence, params)
        h = np.zeros(hidden)
        for t in range(length):
            h = gru_cell(sequence[t], h, params)
        assert np.max(np.abs(final - h)) <= 1e-12


def test_gru_single_step_layer():
    params = GruParams(random_params(GRU_GATES, 3, 2, 5))
    x = np.array([0.4, -0.1])
    final, _ = gru_layer_forward(x[np.newaxis], params)
    assert np.max(np.abs(final - gru_cell(x, np.zeros(3), params))) <= 1e-12


def test_gate_and_hidden_bounds():
    params = LstmParams(random_params(LSTM_GATES, 4, 3, 11))
    outputs, _ = lstm_layer_forward(np.random.default_rng(11).normal(scale=3.0, size=(5, 3)), params)
    assert np.all(np.abs(outputs) < 1.0)


def test_forget_bias_initialization():
    params = init_lstm_params(3, 4, RngStream(0))
    assert np.array_equal(params.b("f"), np.ones(4))
    for gate in ("i", "o", "c"):
        assert np.array_equal(params.b(gate), np.zeros(4))
    gru = init_gru_params(3, 4, RngStream(0))
    assert all(np.array_equal(gru.b(gate), np.zeros(4)) for gate in GRU_GATES)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lstm_bptt_gradients(seed):
    rng = np.random.default_rng(seed)
    params = LstmParams(random_params(LSTM_GATES, 2, 2, seed))
    sequence = rng.normal(size=(3, 2))
    upstream = rng.normal(size=(3, 2))

    def loss():
        return float(np.sum(lstm_layer_forward(sequence, params)[0] * upstream))

    _, cache = lstm_layer_forward(sequence, params)
    grad_sequence, grads = lstm_layer_backward(upstream, cache)
    assert relative_error(grad_sequence, numerical_gradient(loss, sequence)) < 1e-5
    for name, parameter in params.parameters.items():
        assert relative_error(grads[name], numerical_gradient(loss, parameter.value)) < 1e-5, name


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gru_bptt_gradients(seed):
    rng = np.random.default_rng(seed)
    params = GruParams(random_params(GRU_GATES, 2, 2, seed))
    sequence = rng.normal(size=(4, 2))
    upstream = rng.normal(size=2)

    def loss():
        return float(np.sum(gru_layer_forward(sequence, params)[0] * upstream))

    _, cache = gru_layer_forward(sequence, params)
    grad_sequence, grads = gru_layer_backward(upstream, cache)
    assert relative_error(grad_sequence, numerical_gradient(loss, sequence)) < 1e-5
    for name, parameter in params.parameters.items():
        assert relative_error(grads[name], numerical_gradient(loss, parameter.value)) < 1e-5, name


def test_batched_layers_match_single_samples():
    lstm = LstmParams(random_params(LSTM_GATES, 3, 3, 21))
    gru = GruParams(random_params(GRU_GATES, 3, 3, 22))
    batch = np.random.default_rng(23).normal(size=(4, 5, 3))
    lstm_out, _ = lstm_layer_forward(batch, lstm)
    gru_out, _ = gru_layer_forward(batch, gru)
    for b in range(4):
        assert np.allclose(lstm_out[b], lstm_layer_forward(batch[b], lstm)[0], rtol=0, atol=1e-12)
        assert np.allclose(gru_out[b], gru_layer_forward(batch[b], gru)[0], rtol=0, atol=1e-12)
