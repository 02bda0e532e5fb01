import random

import pytest

from lks.verify import (
    SUITES,
    fuzz_one,
    rand_orthogonal,
    rand_stochastic,
    run_suite,
    run_trial,
    trial_seed,
)
from lks.chain import Transformation


def test_trial_seed_is_stable():
    assert trial_seed(0, 0) == trial_seed(0, 0)
    assert trial_seed(0, 1) != trial_seed(0, 0)
    assert trial_seed(1, 0) != trial_seed(0, 0)


def test_random_generators_are_valid():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(1, 5)
        assert Transformation(rand_orthogonal(rng, n)).is_unitary()
        assert Transformation(rand_stochastic(rng, n)).is_stochastic()


@pytest.mark.parametrize("suite", sorted(set(SUITES) - {"markov-records"}))
def test_every_suite_passes_small(suite):
    report = run_suite(suite, 8, seed=3)
    assert report.ok, report.as_dict()
    assert report.passed + report.skipped == 8


def test_runs_are_deterministic():
    a = run_suite("born", 30, seed=9).as_dict()
    b = run_suite("born", 30, seed=9).as_dict()
    assert a == b


def test_workers_match_serial():
    a = run_suite("disconnect", 24, seed=2)
    b = run_suite("disconnect", 24, seed=2, workers=3)
    assert a.as_dict() == b.as_dict()


def test_trial_replays_counterexample():
    report = run_suite("markov-records", 13, seed=20240501)
    assert not report.ok
    index = report.counterexample["trial"]
    _, status, _ = run_trial("markov-records", 20240501, index, 4)
    assert status == "fail"


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope", 1)


@pytest.mark.parametrize("text", ["", "var", "box A[;x] dense [1", "link . = .", "query prob (((",
                                  "box A[;x] white", "var x:2 box A[;x] sharp(9)"])
def test_fuzz_outcomes_are_not_crashes(text):
    assert fuzz_one(text)[0] in ("ok", "diagnostic")
