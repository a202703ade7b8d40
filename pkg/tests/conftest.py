import numpy as np
import pytest

from rontrojan.dataset import LabeledDataset
from rontrojan.synth import SynthConfig, generate


def make_dataset(X, labels, chips=None) -> LabeledDataset:
    """Dataset from raw points; features are shifted to be strictly positive."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    if chips is None:
        chips = [f"c{i}" for i in range(len(labels))]
    return LabeledDataset(X, chips, [0] * len(labels), labels > 0, validate=False)


@pytest.fixture(scope="session")
def default_corpus() -> LabeledDataset:
    return generate(SynthConfig(), seed=7)


@pytest.fixture(scope="session")
def strong_corpus() -> LabeledDataset:
    cfg = SynthConfig(sigma_chip_rel=0.0, trojan_drop_rel_min=0.02, trojan_drop_rel_max=0.03)
    return generate(cfg, seed=11)
