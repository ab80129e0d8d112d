import numpy as np
import pytest

from Flight.Physical_Constants import PhysicalConstants
from Flight.Sim_Config import SimConfig
from Flight.flight_integrator import simulate


def numerical_gradient(loss_fn, values: np.ndarray, indices=None, step: float = 1e-6) -> np.ndarray:
    """
    Central-difference gradient of a scalar loss with respect to `values`, perturbed in place
    by step * (|v| + 1). Only the flat `indices` are evaluated when given.
    """
    flat = values.reshape(-1)
    selected = range(flat.size) if indices is None else indices
    grad = np.zeros(len(selected))
    for n, index in enumerate(selected):
        original = flat[index]
        h = step * (abs(original) + 1.0)
        flat[index] = original + h
        upper = loss_fn()
        flat[index] = original - h
        lower = loss_fn()
        flat[index] = original
        grad[n] = (upper - lower) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.ravel(analytic)
    numeric = np.ravel(numeric)
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


@pytest.fixture
def constants():
    return PhysicalConstants()


@pytest.fixture(scope="session")
def default_trajectory():
    return simulate(SimConfig(), PhysicalConstants())


@pytest.fixture(scope="session")
def short_trajectory():
    """Five seconds of default flight, 51 samples."""
    return simulate(SimConfig(t_total=5.0), PhysicalConstants())
