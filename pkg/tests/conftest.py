import random

import pytest

from hullforge import PointPattern, euclid, line, param
from hullforge.corpora import euclid_corpus, line_corpus, param_corpus


@pytest.fixture(scope="session")
def planar_corpus():
    return euclid_corpus(2, 120, 10, seed=101)


@pytest.fixture(scope="session")
def spatial_corpus():
    return euclid_corpus(3, 80, 10, seed=102)


@pytest.fixture(scope="session")
def band_corpus():
    return param_corpus(1, 120, 10, seed=103)


@pytest.fixture(scope="session")
def lines_corpus():
    return line_corpus(120, 8, seed=104, window=2.0)


def random_planar_pattern(rng: random.Random, max_points: int = 10) -> PointPattern:
    k = rng.randint(0, max_points)
    return PointPattern.from_points(
        [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(k)]
    )
