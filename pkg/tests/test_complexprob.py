from fractions import Fraction as F
import cmath
import itertools

import pytest

from lks import errors
from lks.complexprob import (
    I,
    CoinProcess,
    ComplexWeight,
    boost_by_link,
    boost_compose,
    complex_product,
    complex_record_distribution,
    complex_to_joint,
    embed_matrix,
    embed_vector,
    joint_to_complex,
    product_by_contraction,
    product_by_matrix,
)
from lks.process import make_process


def test_matrix_view():
    z = ComplexWeight(F(2), F(-3))
    assert z.matrix == ((2, -3), (3, 2))
    assert z.entry(1, 1) == z.entry(2, 2) == 2
    assert z.entry(1, 2) == -z.entry(2, 1) == -3
    with pytest.raises(IndexError):
        z.entry(0, 1)


def test_products():
    sq = complex_product(I, I)
    assert (sq.a, sq.b) == (-1, 0)
    p = complex_product(ComplexWeight(1, 1), ComplexWeight(1, -1))
    assert (p.a, p.b) == (2, 0)
    z = ComplexWeight(F(3, 7), F(-2, 5))
    assert complex_product(z, ComplexWeight(1)) == z


def test_product_against_python_complex():
    vals = [F(-3, 2), F(0), F(1, 3), F(2)]
    for a, b, c, d in itertools.product(vals, repeat=4):
        x, y = ComplexWeight(a, b), ComplexWeight(c, d)
        expect = complex(a, b) * complex(c, d)
        got = product_by_contraction(x, y)
        assert got == product_by_matrix(x, y)
        assert complex(float(got.a), float(got.b)) == pytest.approx(expect)


def test_joint_conversion():
    z = ComplexWeight(F(1, 2), F(3, 4))
    w = complex_to_joint(z)
    assert w.table == (F(1, 2), F(3, 4), F(-3, 4), F(1, 2))
    assert joint_to_complex(w) == z
    with pytest.raises(errors.NotComplexShaped):
        joint_to_complex(make_process([("j", 2), ("k", 2)], [1, 0, 0, 2]))
    with pytest.raises(errors.NotComplexShaped):
        joint_to_complex(make_process([("j", 3)], [1, 0, 0]))


def test_conjugate_norm():
    z = ComplexWeight(3, 4)
    assert z * z.conjugate() == ComplexWeight(25)
    assert z.norm2() == 25


def test_coin_velocity():
    c = CoinProcess(F(3, 4), F(1, 4))
    assert c.velocity == F(1, 2)
    assert CoinProcess.from_velocity(F(1, 2)) == c
    with pytest.raises(errors.NullNormalizer):
        CoinProcess(1, -1)


def test_boost_examples():
    assert boost_compose(F(1, 2), F(1, 2)) == F(4, 5)
    assert boost_by_link(F(1, 2), F(1, 2)) == F(4, 5)
    for v in (F(-9, 10), F(0), F(1, 3), F(7, 8)):
        assert boost_compose(v, 0) == v
        assert boost_compose(v, 1) == 1
        assert boost_by_link(v, 1) == 1
    with pytest.raises(errors.SingularBoost):
        boost_compose(1, -1)
    with pytest.raises(errors.SingularBoost):
        boost_by_link(1, -1)


def test_embedding_is_a_ring_map():
    u = [[ComplexWeight(0, 1), ComplexWeight(0)], [ComplexWeight(0), ComplexWeight(1)]]
    m = embed_matrix(u)
    v = embed_vector([ComplexWeight(1, 2), ComplexWeight(3, -1)])
    # i * (1 + 2i) = -2 + i, second entry unchanged
    out = tuple(sum(m[r][c] * v[c] for c in range(4)) for r in range(4))
    assert out == (-2, 1, 3, -1)


def test_complex_chain_records_match_amplitudes():
    h = F(1, 2)
    # unitary with complex entries: (1/2)[[1+i, 1-i],[1-i, 1+i]]
    u = [[ComplexWeight(h, h), ComplexWeight(h, -h)], [ComplexWeight(h, -h), ComplexWeight(h, h)]]
    v = [ComplexWeight(F(3, 5)), ComplexWeight(0, F(4, 5))]
    dist = complex_record_distribution([u], v, [1])
    amp = [sum(complex(float(u[r][c].a), float(u[r][c].b)) * complex(float(v[c].a), float(v[c].b))
               for c in range(2)) for r in range(2)]
    for k in range(2):
        assert float(dist[(k,)]) == pytest.approx(abs(amp[k]) ** 2)


def test_global_phase_is_invisible():
    u = [[ComplexWeight(F(3, 5)), ComplexWeight(0, F(4, 5))], [ComplexWeight(0, F(4, 5)), ComplexWeight(F(3, 5))]]
    v = [ComplexWeight(1), ComplexWeight(0)]
    base = complex_record_distribution([u, u], v, [1, 2])
    assert complex_record_distribution([u, u], v, [1, 2], phase=I) == base
    assert complex_record_distribution([u, u], v, [1, 2], phase=ComplexWeight(F(3, 5), F(-4, 5))) == base
