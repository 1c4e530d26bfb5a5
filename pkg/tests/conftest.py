import numpy as np
import pytest

from posecast import Skeleton


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ar_walk():
    """Independent AR simulator (explicit recursion, not the library path)."""

    def _walk(coeffs, sigma, length, seed):
        coeffs = np.asarray(coeffs, dtype=float)
        gen = np.random.default_rng(seed)
        eps = gen.normal(0.0, sigma, size=length)
        y = np.zeros(length)
        p = coeffs.size
        for t in range(length):
            acc = eps[t]
            for k in range(p):
                if t - 1 - k >= 0:
                    acc += coeffs[k] * y[t - 1 - k]
            y[t] = acc
        return y

    return _walk


@pytest.fixture
def random_unit_quat():
    def _make(gen):
        q = gen.normal(size=4)
        return q / np.linalg.norm(q)

    return _make


@pytest.fixture
def simple_skeleton():
    """Five joints: hip -> spine -> head, hip -> thigh -> shin."""
    return Skeleton(
        names=["hip", "spine", "head", "thigh", "shin"],
        parents=[-1, 0, 1, 0, 3],
        offsets=[
            [0.0, 0.0, 0.0],
            [0.0, 10.0, 0.0],
            [0.0, 8.0, 0.0],
            [3.0, -2.0, 0.0],
            [0.0, -12.0, 0.0],
        ],
    )
