import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from Dataset.Normalizer import Normalizer, CHANNELS
from Errors.glidecast_errors import (
    ModelFileError,
    ModelFileNotFoundError,
    ModelVersionError,
    ModelFileTruncatedError,
)
from Network.Hybrid_Model import HybridModel, AxisModelSet, parameter_shapes
from Network.tensor_ops import Parameter

FORMAT_VERSION = 1


def model_file_name(axis: str) -> str:
    return f"model_{axis}.json"


def model_to_document(model: HybridModel, normalizer: Normalizer, config_echo: Optional[dict] = None) -> dict:
    document = {
        "format_version": FORMAT_VERSION,
        "axis": model.axis,
        "sequence_length": model.sequence_length,
        "seed": model.seed,
        "normalizer": normalizer.to_dict(),
        "parameters": {
            name: {"shape": list(parameter.shape), "values": parameter.value.ravel().tolist()}
            for name, parameter in model.parameters.items()
        },
    }
    if config_echo is not None:
        document["config_echo"] = config_echo
    return document


def document_to_model(document: dict, source: str = "<document>"):
    """
    Rebuild a model and its normalizer from a parsed model document.

    Returns:
        tuple: (HybridModel, Normalizer)
    """
    if not isinstance(document, dict):
        raise ModelFileTruncatedError(f"{source}: model file is not a JSON object")
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"{source}: format_version {version!r}, expected {FORMAT_VERSION}")

    try:
        sequence_length = int(document["sequence_length"])
        axis = document["axis"]
        seed = int(document["seed"])
        normalizer = Normalizer.from_dict(document["normalizer"])
        stored = document["parameters"]

        parameters = {}
        for name, shape in parameter_shapes(sequence_length).items():
            entry = stored[name]
            if tuple(entry["shape"]) != shape:
                raise ModelFileTruncatedError(f"{source}: '{name}' has shape {entry['shape']}, expected {list(shape)}")
            values = np.asarray(entry["values"], dtype=np.float64)
            if values.size != int(np.prod(shape)):
                raise ModelFileTruncatedError(
                    f"{source}: '{name}' holds {values.size} values, expected {int(np.prod(shape))}"
                )
            parameters[name] = Parameter(values.reshape(shape))
    except (KeyError, TypeError, ValueError) as error:
        if isinstance(error, ModelFileTruncatedError):
            raise
        raise ModelFileTruncatedError(f"{source}: incomplete model file ({error})") from error

    model = HybridModel(sequence_length=sequence_length, axis=axis, seed=seed, parameters=parameters)
    return model, normalizer


def save_model(model_set: AxisModelSet, directory: str | Path, config_echo: Optional[dict] = None) -> list:
    """
    Write one self-describing JSON document per axis model into `directory`.

    Returns:
        list: Paths written, in x, y, z order.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    paths = []
    for axis, model in model_set.models.items():
        path = directory / model_file_name(axis)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(model_to_document(model, model_set.normalizer, config_echo), handle)
        paths.append(path)
        logging.info(f"Model Saved: axis {axis}, {model.parameter_count()} parameters -> {path}")
    return paths


def load_axis_model(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise ModelFileNotFoundError(f"Model file not found: {path}")
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except (json.JSONDecodeError, UnicodeDecodeError, OSError) as error:
        raise ModelFileTruncatedError(f"{path}: unreadable model file ({error})") from error
    return document_to_model(document, source=str(path))


def load_model(directory: str | Path) -> AxisModelSet:
    """Load the x, y and z model files written by save_model."""
    directory = Path(directory)
    models = {}
    normalizers = {}
    for axis in CHANNELS:
        models[axis], normalizers[axis] = load_axis_model(directory / model_file_name(axis))

    # The three files must come from one save
    reference = CHANNELS[0]
    for axis in CHANNELS[1:]:
        if normalizers[axis].to_dict() != normalizers[reference].to_dict():
            raise ModelFileError(
                f"{directory}: normalizer in {model_file_name(axis)} differs from {model_file_name(reference)}"
            )
        if models[axis].sequence_length != models[reference].sequence_length:
            raise ModelFileError(
                f"{directory}: {model_file_name(axis)} has window length {models[axis].sequence_length}, "
                f"{model_file_name(reference)} has {models[reference].sequence_length}"
            )
        if models[axis].axis != axis:
            raise ModelFileError(f"{directory}: {model_file_name(axis)} holds the {models[axis].axis!r} model")

    return AxisModelSet(models=models, normalizer=normalizers[reference])
