"""
Configuration for pytest.
"""

import numpy as np
import pytest

from wfseq import suite
from wfseq.splitgeom import reference_face, reference_split


pytest.register_assert_rewrite("tests.assertions")


@pytest.fixture(autouse=True)
def reset_suite_cache():
    """Clear the cached suite between tests so patched paths don't leak."""
    suite.load_suite.cache_clear()
    yield
    suite.load_suite.cache_clear()


@pytest.fixture
def wf():
    return reference_split()


@pytest.fixture
def ct():
    return reference_face()


@pytest.fixture
def rng():
    return np.random.default_rng(42)
