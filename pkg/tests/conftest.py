import numpy as np
import pytest


@pytest.fixture
def rng():
    """Deterministic generator; tests that sample share one seed policy."""
    return np.random.default_rng(20260823)


def rel_err(got: float, want: float) -> float:
    return abs(got - want) / max(abs(want), 1e-300)
