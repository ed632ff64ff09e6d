from __future__ import annotations

import pytest

from mixcode.corpus import GeneratorSpec, generate_classification


@pytest.fixture(scope="session")
def corpus7():
    """The seed-7 classification corpus (8 problems x 60 programs)."""
    return generate_classification(GeneratorSpec(8, 60, 7))


@pytest.fixture(scope="session")
def corpus7_all(corpus7):
    train, test = corpus7
    return list(train.samples) + list(test.samples)
