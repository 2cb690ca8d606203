import numpy as np
import pytest

from signcolor.circuits import DepthRule, CircuitRecord, run
from signcolor.tableau import ColoredTableau, new_initial_state


def random_state(L: int, depth: int, seed: int, p_u: float = 0.8,
                 p_m: float = 0.25, family: str = "product") -> ColoredTableau:
    """A scrambled stabilizer state obtained by running a random record."""
    rec = CircuitRecord.sample("chain", L, DepthRule.constant(depth), p_u, p_m, seed)
    t = new_initial_state(L, family, 0)
    rng = np.random.default_rng(seed + 1)
    return run(rec, t, rng, mode="plain").final


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
