import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def corpus():
    from cutsparse.corpus import random_corpus

    return random_corpus()


@pytest.fixture(scope="session")
def corpus_k(corpus):
    from cutsparse.connectivity import all_edge_connectivities

    return [all_edge_connectivities(g).k for g in corpus]


@pytest.fixture(scope="session")
def small():
    from cutsparse.corpus import small_corpus

    return small_corpus()
