import numpy as np
import pytest

from dagplace.graph import make_graph


@pytest.fixture
def diamond():
    """0 splits into 1 and 2, both merge into 3."""
    return make_graph(
        [(0, 0, (2,)), (1, 1, (3,)), (2, 2, (4,)), (3, 0, (2, 2))],
        [(0, 1), (0, 2), (1, 3), (2, 3)],
        num_op_types=3,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)
