import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fraclab import FracParams, Interval, RadialBall, assemble  # noqa: E402


@lru_cache(maxsize=8)
def interval_op(s, n):
    return assemble(FracParams(1, s), Interval(1.0), n)


@lru_cache(maxsize=4)
def ball_op(N, s, n, R=1.0):
    return assemble(FracParams(N, s), RadialBall(N, R), n)


@pytest.fixture
def iop():
    return interval_op


@pytest.fixture
def bop():
    return ball_op
