import sys
from pathlib import Path

import numpy as np
import pytest

from framebits.detection import BinProbabilities, poissonian_bin_probs

sys.path.insert(0, str(Path(__file__).parent))


def random_bins(rng: np.random.Generator) -> BinProbabilities:
    """A valid random joint bin distribution, biased toward quiet bins."""
    raw = rng.dirichlet((8.0, 1.0, 1.0, 1.0))
    return BinProbabilities(p00=raw[0], p0c=raw[1], pc0=raw[2], pcc=raw[3])


def random_physical_draw(rng: np.random.Generator):
    """Random source/channel parameters plus their bin probabilities."""
    lam = 10.0 ** rng.uniform(-4, -1)
    eta_a = rng.uniform(0.15, 0.95)
    eta_b = rng.uniform(0.15, 0.95)
    q = 10.0 ** rng.uniform(-6, -2)
    bins = poissonian_bin_probs(lam, eta_a, eta_b, q, q)
    return bins, lam, eta_a, eta_b, q


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
