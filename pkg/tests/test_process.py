from fractions import Fraction as F
import itertools

import numpy as np
import pytest

from lks import errors
from lks.process import (
    And,
    In,
    Is,
    MAX_CASES,
    Not,
    Or,
    Same,
    TRUE,
    Variable,
    condition,
    distribution,
    drop,
    is_independent,
    make_process,
    marginal,
    markov_check,
    order_property,
    point_process,
    prime_factorize,
    probability,
    product,
    separates,
    weight_of,
    white,
)
from lks.chain import differential_generator, markov_chain, chain_process

COIN = distribution("x", [F(1, 2), F(1, 2)])
PX = distribution("x", [F(3, 5), F(2, 5)])
PY = distribution("y", [F(1, 5), F(4, 5)])


def xor_triple():
    # z = x xor y with x, y fair: pairwise independent but jointly dependent
    return make_process([("x", 2), ("y", 2), ("z", 2)],
                        [F(1, 4) if (x ^ y) == z else 0 for x in range(2) for y in range(2) for z in range(2)])


def test_make_process_totals():
    assert COIN.total == 1
    w = make_process([("x", 2), ("y", 2)], [F(3, 25), F(12, 25), F(2, 25), F(8, 25)])
    assert w.total == 1 and w.classical
    s = make_process([("x", 2)], [F(3, 2), F(-1, 2)])
    assert s.total == 1 and not s.classical


def test_make_process_rejects_bad_input():
    with pytest.raises(errors.SizeMismatch):
        make_process([("x", 2)], [1, 2, 3])
    with pytest.raises(errors.NameClash):
        make_process([("x", 2), ("x", 2)], [0] * 4)
    with pytest.raises(ValueError):
        Variable("x", 0)
    with pytest.raises(errors.DimensionCap):
        make_process([("a", 1024), ("b", 1025)], [])
    assert MAX_CASES == 2 ** 20


def test_weights_are_exact_and_frozen():
    w = make_process([("x", 3)], ["1/3", F(1, 2), 2])
    assert w.table == (F(1, 3), F(1, 2), F(2))
    with pytest.raises(TypeError):
        make_process([("x", 1)], [0.5])
    with pytest.raises(ValueError):
        w.weights[0] = F(9)


def test_product_examples():
    c = product(COIN, COIN.rename({"x": "y"}))
    assert all(x == F(1, 4) for x in c.table)
    w = product(PX, PY)
    assert w.table == (F(3, 25), F(12, 25), F(2, 25), F(8, 25))
    assert product(PX, point_process()) == PX
    with pytest.raises(errors.NameClash):
        product(PX, PX)


def test_marginal_examples():
    w = product(PX, PY)
    assert marginal(w, ["x"]) == PX
    assert marginal(w, ["x", "y"]) == w
    s = make_process([("x", 2)], [F(3, 2), F(-1, 2)])
    assert marginal(s, ["x"]) == s
    assert marginal(w, ["y", "x"]).names == ("y", "x")
    assert drop(w, ["x"]) == PY
    with pytest.raises(errors.UnknownVariable):
        marginal(w, ["q"])


def test_condition_and_probability():
    assert condition(COIN, Is("x", 0)).table == (F(1, 2), 0)
    w = product(PX, PY)
    c = condition(w, Same("x", "y"))
    assert c.table == (F(3, 25), 0, 0, F(8, 25)) and c.total == F(11, 25)
    assert condition(w, TRUE) == w
    assert probability(COIN, Is("x", 0)) == F(1, 2)
    assert probability(w, Same("x", "y")) == F(11, 25)
    assert probability(w, TRUE) == 1


def test_event_algebra_against_enumeration():
    w = make_process([("x", 3), ("y", 3)], range(1, 10))
    e = Or(Not(Is("x", 0)), And(Is("y", 2), Not(TRUE)))
    brute = sum(wt for (x, y), wt in w.cases() if x != 0)
    assert weight_of(w, e) == brute
    assert weight_of(w, In("x", (0, 2))) == sum(wt for (x, _), wt in w.cases() if x in (0, 2))


def test_probability_of_total_zero():
    z = make_process([("x", 2)], [1, -1])
    with pytest.raises(errors.NullNormalizer):
        probability(z, Is("x", 0))


def test_independence_examples():
    w = product(PX, PY)
    assert is_independent(w, [("x",), ("y",)])
    pair = make_process([("x", 2), ("y", 2)], [F(1, 2), 0, 0, F(1, 2)])
    assert not is_independent(pair, [("x",), ("y",)])
    sure = make_process([("x", 2), ("y", 2)], [0, 0, F(1, 3), F(2, 3)])
    assert is_independent(sure, [("x",), ("y",)])
    # a definite variable is independent even of itself
    assert is_independent(distribution("d", [0, 1]), [("d",)])


def test_separates_examples():
    g = ((F(1, 2), F(1, 4)), (F(1, 2), F(3, 4)))
    m = markov_chain(g, (1, 0), 2)
    assert separates(m, "x0", "x1", "x2")
    coins = product(product(COIN, COIN.rename({"x": "y"})), COIN.rename({"x": "z"}))
    for a, b, c in itertools.permutations("xyz"):
        assert separates(coins, a, b, c)
    equal = make_process([("x", 2), ("y", 2), ("z", 2)], [F(1, 2), 0, 0, 0, 0, 0, 0, F(1, 2)])
    assert separates(equal, "x", "y", "z")
    assert not separates(xor_triple(), "x", "y", "z")
    with pytest.raises(errors.OverlappingVariables):
        separates(m, "x0", "x0", "x2")


def test_separates_matches_conditional_independence():
    # oracle: p(a,c|b) = p(a|b) p(c|b) wherever p(b) > 0
    rng = np.random.default_rng(3)
    for _ in range(30):
        w = make_process([("a", 2), ("b", 2), ("c", 2)], [int(v) for v in rng.integers(0, 3, 8)])
        if w.total == 0:
            continue
        t = w.weights
        ok = True
        for b in range(2):
            pb = t[:, b, :].sum()
            if pb == 0:
                continue
            for a in range(2):
                for c in range(2):
                    ok &= t[a, b, c] * pb == t[a, b, :].sum() * t[:, b, c].sum()
        assert separates(w, "a", "b", "c") == ok


def test_markov_check_examples():
    g = ((F(1, 2), F(1, 4)), (F(1, 2), F(3, 4)))
    m = markov_chain(g, (F(1, 3), F(2, 3)), 3)
    assert markov_check(m)
    assert markov_check(m, list(reversed(m.names)))
    direct = make_process([("x", 2), ("y", 2), ("z", 2)],
                          [F(1, 4) if x == z else 0 for x in range(2) for y in range(2) for z in range(2)])
    assert not markov_check(direct, ["x", "y", "z"])


def test_order_property_examples():
    h = ((-1, 1), (1, -1))
    g = differential_generator(h, F(1, 10), classical=True).table
    diff = markov_chain(g, (F(1, 3), F(2, 3)), 3)
    assert order_property(diff)
    heap = product(product(PX, PY), COIN.rename({"x": "z"}))
    assert not order_property(heap)
    perm = markov_chain(((0, 1), (1, 0)), (F(1, 3), F(2, 3)), 3)
    assert not order_property(perm)


def test_prime_factorize_examples():
    three = product(product(PX, PY), COIN.rename({"x": "z"}))
    assert sorted(prime_factorize(three)) == [("x",), ("y",), ("z",)]
    pair = make_process([("x", 2), ("y", 2)], [F(1, 2), 0, 0, F(1, 2)])
    assert prime_factorize(pair) == [("x", "y")]
    mixed = product(pair, COIN.rename({"x": "z"}))
    assert sorted(prime_factorize(mixed)) == [("x", "y"), ("z",)]
    # pairwise independence is not enough to split the xor triple
    assert prime_factorize(xor_triple()) == [("x", "y", "z")]
    with pytest.raises(errors.NullNormalizer):
        prime_factorize(make_process([("x", 2)], [1, -1]))


def test_white_and_point():
    assert white("u", 4).table == (F(1, 4),) * 4
    assert point_process().total == 1 and point_process().shape == ()


def test_reorder_and_same_distribution():
    w = product(PX, PY)
    r = w.reorder(["y", "x"])
    assert r.weight({"x": 1, "y": 0}) == w.weight((1, 0))
    assert w.same_distribution(w.scaled(7))
    assert not w.same_distribution(product(PY.rename({"y": "x"}), PX.rename({"x": "y"})))
