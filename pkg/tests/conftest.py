# The paper-ex1 preset deliberately exceeds the worst-case utilization
# margin and warns on construction; the filter lives in pyproject so runs
# stay readable.

import numpy as np
import pytest

from cscgd import make_rng


@pytest.fixture
def rng():
    return make_rng(20240801)


def assert_close(actual, expected, tol, label=""):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    err = np.max(np.abs(actual - expected))
    assert err <= tol, f"{label}: |{actual} - {expected}| = {err} > {tol}"
