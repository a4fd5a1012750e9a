import pytest

from qmodal.structure import QuantumModalStructure


@pytest.fixture
def p3():
    """Path frame 0-1-2 with p true exactly at world 0."""
    return QuantumModalStructure.build(3, rq_pairs=[(0, 1), (1, 2)], valuation={"p": [0]})


@pytest.fixture
def c4():
    """Cycle frame 0-1-2-3 with p, q, r at worlds 0, 1, 2."""
    return QuantumModalStructure.build(
        4,
        rq_pairs=[(0, 1), (1, 2), (2, 3), (3, 0)],
        valuation={"p": [0], "q": [1], "r": [2]},
    )
