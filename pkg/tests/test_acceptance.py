"""The twelve acceptance criteria, run at full size with exact comparison.

Each criterion prints one PASS/FAIL line; a summary of all of them is
written at the end of the pytest run.
"""

from fractions import Fraction as F
from pathlib import Path

import pytest

from lks.chain import PreparedChain
from lks.complexprob import I, boost_by_link, boost_compose, complex_product
from lks.dsl import roundtrip
from lks.link import LinkState, Projection
from lks.measurement import (
    Probe,
    ProbePlan,
    double_measurement_chain,
    double_measurement,
    projection_update,
    record_distribution,
)
from lks.verify import run_suite

FIXTURES = Path(__file__).parent / "fixtures"
ROT = ((F(3, 5), F(-4, 5)), (F(4, 5), F(3, 5)))
SEED = 20240501


def suite_ok(name, trials, **kw):
    report = run_suite(name, trials, seed=SEED, **kw)
    assert report.passed + report.skipped + report.failed == trials
    return report


def test_01_born(acceptance):
    r = suite_ok("born", 500)
    # zero-trace cases are counted as skips, never silently passed
    ok = acceptance(1, f"born rule on linked processes ({r.passed} passed, {r.skipped} skipped)",
                    r.ok and r.passed > 0)
    assert ok, r.as_dict()


def test_02_disconnection(acceptance):
    r = suite_ok("disconnect", 300)
    ok = acceptance(2, f"separability iff causal cut relinks ({r.passed} passed, {r.skipped} skipped)",
                    r.ok and r.passed > 0)
    assert ok, r.as_dict()


def test_03_chain_equivalence(acceptance):
    r = suite_ok("chain-equiv", 200, workers=4)
    ok = acceptance(3, f"causal link chain equals Markov chain ({r.passed} passed)",
                    r.ok and r.passed == 200)
    assert ok, r.as_dict()


def test_04_dynamical_rule(acceptance):
    r = suite_ok("dynamical", 200)
    ok = acceptance(4, f"dynamical rule for causal transformations ({r.passed} passed)",
                    r.ok and r.passed == 200)
    assert ok, r.as_dict()


def test_05_quantum_square(acceptance):
    example = PreparedChain((ROT,), (1, 0)).stage_distribution(1) == (F(9, 25), F(16, 25))
    r = suite_ok("quantum-square", 100, workers=4)
    ok = acceptance(5, f"stage distributions are squared amplitudes ({r.passed} passed)",
                    example and r.ok and r.passed == 100)
    assert ok, r.as_dict()


def test_06_double_measurement(acceptance):
    v = (F(3, 5), F(4, 5))
    res = double_measurement(ROT, v)
    negative = res.process.weight((0, 0, 1)) == F(-144, 625)
    xz = res.outer_marginal
    correlated = all(xz.weight((a, b)) == 0 for a in range(2) for b in range(2) if a != b)
    chain = double_measurement_chain(ROT, v)
    outer = record_distribution(ProbePlan(chain, [Probe(0), Probe(2)]))
    equal_records = all(p >= 0 for p in outer.values()) and all(
        p == 0 for (a, b), p in outer.items() if a != b)
    full = record_distribution(ProbePlan(chain, [Probe(0), Probe(1), Probe(2)]))
    nonnegative = all(p >= 0 for p in full.values())
    suite = suite_ok("double-measurement", 20)
    ok = acceptance(6, "double measurement: negative witness, correlated ends, probed records nonnegative",
                    negative and correlated and equal_records and nonnegative and suite.ok)
    assert ok


def test_07a_measurement_oracle(acceptance):
    r = suite_ok("measurement-oracle", 100, workers=4)
    ok = acceptance(7, f"probe records match projection simulator ({r.passed} passed)",
                    r.ok and r.passed == 100)
    assert ok, r.as_dict()


@pytest.mark.xfail(strict=True, reason="records are not Markov when a partial probe sits between two others")
def test_07b_measurement_markov(acceptance):
    r = suite_ok("markov-records", 100, workers=4)
    ok = acceptance(7, f"probe record sequence is Markov ({r.passed} passed, {r.failed} failed)",
                    r.ok and r.passed == 100)
    assert ok, r.as_dict()


def test_08_disturbance(acceptance):
    r = suite_ok("disturbance", 100)
    parts = [Projection((1, 0, 1)), Projection((0, 1, 0))]
    white = LinkState.white(3, F(1, 3))
    fixed = projection_update(white, parts) == white
    ok = acceptance(8, f"projection update equals sum of P S P ({r.passed} passed)",
                    r.ok and r.passed == 100 and fixed)
    assert ok, r.as_dict()


def test_09_boost(acceptance):
    r = suite_ok("boost", 200)
    half = boost_compose(F(1, 2), F(1, 2)) == F(4, 5) == boost_by_link(F(1, 2), F(1, 2))
    ok = acceptance(9, f"velocity composition by linked coins ({r.passed} passed)",
                    r.ok and r.passed == 200 and half)
    assert ok, r.as_dict()


def test_10_complex_product(acceptance):
    r = suite_ok("complex", 200)
    square = complex_product(I, I)
    ok = acceptance(10, f"complex product by contraction ({r.passed} passed)",
                    r.ok and r.passed == 200 and square.a == -1 and square.b == 0)
    assert ok, r.as_dict()


def test_11_propriety(acceptance):
    r = suite_ok("propriety", 100)
    ok = acceptance(11, f"links commute in proper systems ({r.passed} passed)",
                    r.ok and r.passed == 100)
    assert ok, r.as_dict()


def test_12_parser(acceptance):
    files = sorted(FIXTURES.glob("*.lks"))
    trips = [roundtrip(p.read_text())[1] for p in files]
    r = suite_ok("parser", 10_000)
    ok = acceptance(12, f"{len(files)} fixtures round-trip, fuzz gives only diagnostics ({r.passed} passed)",
                    len(files) >= 20 and all(trips) and r.ok and r.passed == 10_000)
    assert ok, r.as_dict()
