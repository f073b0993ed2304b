import random

import pytest

from toruslab.lattices import IntegerLattice


def random_invertible(rng: random.Random, r: int, max_entry: int = 6,
                      det_min: int = 2, det_max: int = 300) -> IntegerLattice:
    """Random integer lattice with det_abs in [det_min, det_max]."""
    while True:
        mat = [[rng.randint(-max_entry, max_entry) for _ in range(r)] for _ in range(r)]
        try:
            L = IntegerLattice.from_rows(mat)
        except Exception:
            continue
        if det_min <= L.det_abs <= det_max:
            return L


@pytest.fixture
def rng():
    return random.Random(20260810)
