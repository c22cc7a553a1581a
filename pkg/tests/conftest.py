import numpy as np
import pytest

from helpers import make_graph


@pytest.fixture
def path4():
    """Undirected path 0-1-2-3 with identity-ish features."""
    return make_graph(4, [(0, 1), (1, 2), (2, 3)], features=np.eye(4),
                      labels=[0, 0, 1, 1], num_classes=2)


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1), (1, 2), (0, 2)], labels=[0, 0, 1],
                      num_classes=2)
