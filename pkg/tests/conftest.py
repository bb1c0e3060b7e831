import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


def assert_states_close(a, b, atol=0.0, rtol=0.0):
    scale = 1.0 + max(np.max(np.abs(b.q)), np.max(np.abs(b.p)))
    tol = atol + rtol * scale
    err = max(np.max(np.abs(a.q - b.q)), np.max(np.abs(a.p - b.p)))
    assert err <= tol, f"state mismatch: {err} > {tol}"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
