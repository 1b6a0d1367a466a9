import numpy as np
import pytest

from maniloc import BinaryMask, edt_bruteforce, edt_exact
from maniloc.edt import DistanceField

from conftest import mask, random_mask


def test_1x5_analytic():
    d = edt_exact(mask([[0, 1, 1, 1, 0]]))
    assert np.array_equal(d.values, [[0.0, 1.0, 2.0, 1.0, 0.0]])


def test_1x3_all_foreground_border_policy():
    d = edt_exact(mask([[1, 1, 1]]))
    assert np.array_equal(d.values, [[1.0, 2.0, 1.0]])


def test_5x5_centered_3x3():
    g = np.zeros((5, 5), dtype=bool)
    g[1:4, 1:4] = True
    d = edt_exact(BinaryMask(g))
    assert d.values[2, 2] == 2.0
    assert np.array_equal(d.values > 0, g)


def test_all_background_is_zero():
    d = edt_exact(BinaryMask(np.zeros((4, 6), dtype=bool)))
    assert np.all(d.values == 0.0)


def test_all_foreground_uses_virtual_ring():
    d = edt_exact(BinaryMask(np.ones((3, 3), dtype=bool)))
    # center of a 3x3 grid is 2 steps from the ring; edges are 1
    assert d.values[1, 1] == 2.0
    assert d.values[0, 0] == 1.0


def test_bruteforce_single_pixel():
    g = np.zeros((3, 3), dtype=bool)
    g[1, 1] = True
    d = edt_bruteforce(BinaryMask(g))
    assert d.values[1, 1] == 1.0


def test_bruteforce_matches_exact_on_analytic_cases():
    for bits in ([[0, 1, 1, 1, 0]], [[1, 1, 1]], np.ones((3, 3), dtype=bool)):
        m = mask(bits)
        assert np.array_equal(edt_exact(m).values, edt_bruteforce(m).values)


def test_exact_equals_bruteforce_random(rng):
    for _ in range(20):
        density = rng.uniform(0.1, 0.9)
        m = random_mask(rng, 24, 24, density)
        diff = np.abs(edt_exact(m).values - edt_bruteforce(m).values)
        assert diff.max() <= 1e-9


def test_positive_iff_foreground(rng):
    m = random_mask(rng, 20, 20, 0.5)
    d = edt_exact(m).values
    assert np.array_equal(d > 0, m.bits)


def test_one_lipschitz(rng):
    m = random_mask(rng, 16, 16, 0.6)
    d = edt_exact(m).values
    # adjacent pixels (including diagonals) suffice: the bound is tightest there
    for dr, dc in ((0, 1), (1, 0), (1, 1)):
        a = d[: d.shape[0] - dr, : d.shape[1] - dc]
        b = d[dr:, dc:]
        assert np.max(np.abs(a - b)) <= np.hypot(dr, dc) + 1e-12


def test_translation_equivariance_interior():
    g = np.zeros((12, 12), dtype=bool)
    g[3:6, 3:7] = True
    d1 = edt_exact(BinaryMask(g)).values
    shifted = np.roll(g, (2, 1), axis=(0, 1))
    d2 = edt_exact(BinaryMask(shifted)).values
    assert np.array_equal(np.roll(d1, (2, 1), axis=(0, 1)), d2)


def test_distance_field_validation():
    with pytest.raises(ValueError):
        DistanceField(np.array([[-1.0]]))
    with pytest.raises(ValueError):
        DistanceField(np.array([[np.inf]]))
