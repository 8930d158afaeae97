import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acrds.graph import Graph, from_edge_list  # noqa: E402


@pytest.fixture
def path3() -> Graph:
    return from_edge_list("0 1\n1 2")


@pytest.fixture
def triangle() -> Graph:
    return from_edge_list("0 1\n1 2\n0 2")


@pytest.fixture
def k4() -> Graph:
    return Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


@pytest.fixture
def paw() -> Graph:
    """Triangle 1-2-3 plus pendant edge 3-4 (external ids 1..4, internal 0..3)."""
    return from_edge_list("1 2\n2 3\n1 3\n3 4")


@pytest.fixture
def cycle4() -> Graph:
    return Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
