import logging

import numpy as np
import pytest

from spikeplast import encode_dataset, generate_synthetic, wrist_like_spec

# all-zero output neurons are expected in some stdp_only runs; keep logs quiet
logging.getLogger("spikeplast.classifier").setLevel(logging.ERROR)


@pytest.fixture(scope="session")
def wrist_dataset():
    """The bundled synthetic fixture: 3 classes x 20 samples, 14 channels x 128 steps."""
    return generate_synthetic(wrist_like_spec())


@pytest.fixture(scope="session")
def wrist_spikes(wrist_dataset):
    return encode_dataset(wrist_dataset)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
