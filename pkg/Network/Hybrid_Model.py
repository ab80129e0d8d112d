import hashlib
from dataclasses import dataclass, field
from typing import Dict, Optional

from Dataset.Normalizer import Normalizer, CHANNELS
from Errors.glidecast_errors import InvalidInputError, InvalidWindowError
from Network.recurrent_layers import LstmParams, GruParams, LSTM_GATES, GRU_GATES
from Network.tensor_ops import Parameter, RngStream

# Architecture
N_CHANNELS = len(CHANNELS)
CONV_FILTERS = 64
KERNEL_WIDTH = 3
LSTM_UNITS = 64
GRU_UNITS = 64
DENSE_UNITS = 128
DROPOUT_RATE = 0.3


def concat_width(sequence_length: int) -> int:
    """Flattened conv output + flattened LSTM sequence + GRU final state."""
    return (sequence_length - KERNEL_WIDTH + 1) * CONV_FILTERS + sequence_length * LSTM_UNITS + GRU_UNITS


def parameter_shapes(sequence_length: int) -> Dict[str, tuple]:
    """Canonical tensor names and shapes, in serialization order."""
    shapes = {
        "conv.kernels": (CONV_FILTERS, N_CHANNELS, KERNEL_WIDTH),
        "conv.bias": (CONV_FILTERS,),
    }
    for gate in LSTM_GATES:
        shapes[f"lstm.W{gate}"] = (LSTM_UNITS, N_CHANNELS)
        shapes[f"lstm.U{gate}"] = (LSTM_UNITS, LSTM_UNITS)
        shapes[f"lstm.b{gate}"] = (LSTM_UNITS,)
    for gate in GRU_GATES:
        shapes[f"gru.W{gate}"] = (GRU_UNITS, N_CHANNELS)
        shapes[f"gru.U{gate}"] = (GRU_UNITS, GRU_UNITS)
        shapes[f"gru.b{gate}"] = (GRU_UNITS,)
    shapes["head.dense1.weights"] = (DENSE_UNITS, concat_width(sequence_length))
    shapes["head.dense1.bias"] = (DENSE_UNITS,)
    shapes["head.dense2.weights"] = (1, DENSE_UNITS)
    shapes["head.dense2.bias"] = (1,)
    return shapes


def expected_parameter_count(sequence_length: int) -> int:
    conv = CONV_FILTERS * N_CHANNELS * KERNEL_WIDTH + CONV_FILTERS
    lstm = len(LSTM_GATES) * (LSTM_UNITS * N_CHANNELS + LSTM_UNITS * LSTM_UNITS + LSTM_UNITS)
    gru = len(GRU_GATES) * (GRU_UNITS * N_CHANNELS + GRU_UNITS * GRU_UNITS + GRU_UNITS)
    head = concat_width(sequence_length) * DENSE_UNITS + DENSE_UNITS + DENSE_UNITS + 1
    return conv + lstm + gru + head


@dataclass
class HybridModel:
    """
    Three-branch CNN / LSTM / GRU network predicting the next value of one axis
    from an (L, 3) window of normalized positions.
    """
    sequence_length: int
    axis: str
    seed: int
    parameters: Dict[str, Parameter]
    rng: RngStream = None
    dropout_rate: float = DROPOUT_RATE
    cache: Optional[dict] = field(default=None, repr=False)

    def __post_init__(self):
        if self.sequence_length < KERNEL_WIDTH:
            raise InvalidWindowError(
                f"Window length must be at least {KERNEL_WIDTH}, got {self.sequence_length}"
            )
        if self.axis not in CHANNELS:
            raise InvalidInputError(f"Unknown axis {self.axis!r}, expected one of {CHANNELS}")
        if self.rng is None:
            self.rng = RngStream(self.seed)

        expected = parameter_shapes(self.sequence_length)
        if list(self.parameters) != list(expected):
            raise InvalidInputError("Model parameters do not match the canonical tensor names")
        for name, shape in expected.items():
            if self.parameters[name].shape != shape:
                raise InvalidInputError(
                    f"Parameter '{name}' has shape {self.parameters[name].shape}, expected {shape}"
                )

    def lstm_params(self) -> LstmParams:
        return LstmParams({name[len("lstm."):]: p for name, p in self.parameters.items() if name.startswith("lstm.")})

    def gru_params(self) -> GruParams:
        return GruParams({name[len("gru."):]: p for name, p in self.parameters.items() if name.startswith("gru.")})

    def parameter_count(self) -> int:
        return sum(parameter.size for parameter in self.parameters.values())

    def zero_grad(self) -> None:
        for parameter in self.parameters.values():
            parameter.zero_grad()

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for name, parameter in self.parameters.items():
            digest.update(name.encode())
            digest.update(parameter.value.tobytes())
        return digest.hexdigest()


@dataclass
class AxisModelSet:
    """One HybridModel per axis sharing the window length and normalizer."""
    models: Dict[str, HybridModel]
    normalizer: Normalizer

    def __post_init__(self):
        if sorted(self.models) != sorted(CHANNELS):
            raise InvalidInputError(f"Model set needs one model per axis {CHANNELS}, got {sorted(self.models)}")
        lengths = {model.sequence_length for model in self.models.values()}
        if len(lengths) != 1:
            raise InvalidInputError(f"Axis models disagree on window length: {lengths}")
        for axis, model in self.models.items():
            if model.axis != axis:
                raise InvalidInputError(f"Model stored under '{axis}' predicts '{model.axis}'")
        # Canonical axis order
        self.models = {axis: self.models[axis] for axis in CHANNELS}

    @property
    def sequence_length(self) -> int:
        return self.models[CHANNELS[0]].sequence_length

    @property
    def seeds(self) -> Dict[str, int]:
        return {axis: model.seed for axis, model in self.models.items()}
