from fractions import Fraction as F

import numpy as np
import pytest

from lks import linalg as la
from lks.errors import SingularT


def test_rational_coercion():
    assert la.rational("3/6") == F(1, 2)
    assert la.rational(4) == F(4)
    with pytest.raises(TypeError):
        la.rational(0.25)
    with pytest.raises(TypeError):
        la.rational(True)


def test_basic_products():
    a = la.matrix([[1, 2], [3, 4]])
    b = la.matrix([[0, 1], [1, 0]])
    assert la.matmul(a, b) == ((2, 1), (4, 3))
    assert la.matvec(a, (1, 1)) == (3, 7)
    assert la.matpow(a, 0) == la.identity(2)
    assert la.matpow(a, 3) == la.matmul(a, la.matmul(a, a))
    assert la.trace(a) == 5 and la.total(a) == 10
    assert la.column_sums(a) == (4, 6)
    assert la.outer((1, 2), (3, 4)) == ((3, 4), (6, 8))


def test_inverse_matches_numpy():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = rng.integers(-4, 5, (3, 3))
        if round(np.linalg.det(m)) == 0:
            continue
        inv = la.inverse(la.matrix(m.tolist()))
        assert la.matmul(inv, la.matrix(m.tolist())) == la.identity(3)
        assert np.allclose(np.array(inv, dtype=float), np.linalg.inv(m))


def test_singular():
    m = la.matrix([[1, 2], [2, 4]])
    assert not la.is_invertible(m)
    assert la.rank(m) == 1
    assert la.minors_vanish(m)
    with pytest.raises(SingularT):
        la.inverse(m)


def test_rank_matches_numpy():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = rng.integers(-2, 3, (4, 3)) @ rng.integers(-2, 3, (3, 4))
        assert la.rank(la.matrix(m.tolist())) == np.linalg.matrix_rank(m)


def test_formatting():
    assert la.format_rational(F(2, 4)) == "1/2"
    assert la.format_rational(F(3)) == "3"
    assert la.format_matrix(((F(1, 2), 0),)) == [["1/2", "0"]]
