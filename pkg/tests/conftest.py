import numpy as np
import pytest

from fockline.fock import ModeRegistry


@pytest.fixture
def reg2():
    return ModeRegistry(["a", "b"])


@pytest.fixture
def rng():
    return np.random.default_rng(7)
