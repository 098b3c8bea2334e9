from __future__ import annotations

# Built-in
import json
from pathlib import Path

# Third-Party
import numpy as np
import pytest

# This project
from vmmmapy._templates import CONFIG
from vmmmapy.kernels import Kernel, SupOU
from vmmmapy.levy import CharQuadruplet, GammaSubordinator
from vmmmapy.simulate import ConstantVolatility, VmmmaModel, VolatilityModel

STEP = 0.1


def lattice_mass(rate: float, step: float = STEP, power: int = 2) -> float:
    """sum_z exp(-power rate z) step over the lattice window of a supOU kernel tabulated at tol = 1e-6"""
    nodes = np.arange(0, int(np.ceil(np.log(1e6) / (2 * rate) / step - 1e-9)) + 1) * step
    return float(np.exp(-power * rate * nodes).sum() * step)


@pytest.fixture
def gaussian_model() -> VmmmaModel:
    """supOU rate 1 kernel with sigma^2 = 1, a Gaussian moving average"""
    return VmmmaModel(Kernel(SupOU(1.0)), ConstantVolatility(1.0), (STEP,))


@pytest.fixture
def gamma_model() -> VmmmaModel:
    """supOU rate 1 kernel with supOU rate 2 volatility driven by a gamma(2, 2) subordinator"""
    volatility = VolatilityModel(Kernel(SupOU(2.0)), CharQuadruplet.subordinator(GammaSubordinator(2.0, 2.0)))
    return VmmmaModel(Kernel(SupOU(1.0)), volatility, (STEP,))


@pytest.fixture
def config_data() -> dict:
    """The reference config with a small number of replications"""
    return json.loads(CONFIG.substitute(n_reps=20, master_seed=7))


@pytest.fixture
def config_file(tmp_path: Path, config_data: dict) -> Path:
    path = tmp_path / "vmmma.config.json"
    path.write_text(json.dumps(config_data), encoding="utf-8")
    return path
