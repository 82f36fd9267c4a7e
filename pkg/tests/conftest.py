import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_layout(rng, M):
    """Sorted positions in [-1, 1] with both ends pinned."""
    inner = np.sort(rng.uniform(-1, 1, M - 2))
    return np.concatenate([[-1.0], inner, [1.0]])
