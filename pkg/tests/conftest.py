import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_field(rng):
    def make(height, width, seed=None):
        gen = rng if seed is None else np.random.default_rng(seed)
        return gen.normal(size=(height, width)) + 1j * gen.normal(size=(height, width))

    return make


@pytest.fixture
def square_target():
    """Centered bright square on black, as a complex target field."""

    def make(size, lo=0.0, hi=1.0):
        t = np.full((size, size), lo)
        q = size // 4
        t[q : size - q, q : size - q] = hi
        return t.astype(np.complex128)

    return make


@pytest.fixture
def target_png(tmp_path):
    """Write a small grayscale PNG and return its path."""
    from PIL import Image

    def make(size=32, name="target.png"):
        arr = np.zeros((size, size), np.uint8)
        q = size // 4
        arr[q : size - q, q : size - q] = 200
        arr[: size // 8, :] = 40
        path = tmp_path / name
        Image.fromarray(arr, "L").save(path)
        return str(path)

    return make
