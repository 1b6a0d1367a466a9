import numpy as np
import pytest

from maniloc import BinaryMask, Heatmap, LabelMap


def heatmap(rows) -> Heatmap:
    return Heatmap(np.asarray(rows, dtype=np.float32))


def mask(rows) -> BinaryMask:
    return BinaryMask(np.asarray(rows, dtype=bool))


def labelmap(rows) -> LabelMap:
    return LabelMap(np.asarray(rows, dtype=np.int32))


def random_heatmap(rng: np.random.Generator, h: int, w: int) -> Heatmap:
    return Heatmap(rng.random((h, w), dtype=np.float32))


def random_mask(rng: np.random.Generator, h: int, w: int, density: float) -> BinaryMask:
    return BinaryMask(rng.random((h, w)) < density)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)
