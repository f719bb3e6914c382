import json

import numpy as np
import pytest

from dwellcert import NeuronParams, PlanarAffineMode, neuron_modes

SET1 = dict(g_p=0.75, g_h=0.15, m=1.0, o_h=0.35, I=1.0)
SET2 = dict(g_p=0.04, g_h=0.5, m=1.0, o_h=0.04, I=1.0)


@pytest.fixture
def set1():
    return NeuronParams(**SET1, T_I=3.84, T_0=3.84)


@pytest.fixture
def set2():
    return NeuronParams(**SET2, T_I=35.7, T_0=35.7)


@pytest.fixture
def set1_modes(set1):
    off, on = neuron_modes(set1)
    return {"OFF": off, "ON": on}


@pytest.fixture
def mode_w32():
    """Mode with Lyapunov weights (3, 2) and decay rate 2."""
    return PlanarAffineMode(-1.0, 2.0, -3.0, -4.0, (0.0, 0.0), "w32")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return _write
