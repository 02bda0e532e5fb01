from fractions import Fraction as F
import itertools

import pytest

from lks import errors
from lks import linalg as la
from lks import oracle
from lks.chain import PreparedChain, Transformation
from lks.link import LinkState, Projection, apply_links, born
from lks.measurement import (
    LabObjectView,
    OFF,
    ON,
    Probe,
    ProbePlan,
    check_lab_object,
    check_partition,
    double_measurement_chain,
    double_measurement,
    post_probe_state,
    probe,
    probed_lab_view,
    probed_system,
    projection_update,
    record_distribution,
    records,
    records_markov,
    selection,
    switch_component,
    switch_matrix,
)
from lks.process import TRUE, Is, make_process, marginal, product, white

ROT = ((F(3, 5), F(-4, 5)), (F(4, 5), F(3, 5)))
ROT_T = la.transpose(ROT)
# a 3d rational rotation from the (1, 2, 2; 3) quadruple
R3 = ((F(1, 3), F(-2, 3), F(2, 3)), (F(2, 3), F(2, 3), F(1, 3)), (F(-2, 3), F(1, 3), F(2, 3)))
V = (F(3, 5), F(4, 5))


def oracle_of(plan):
    probes = {p.stage: (None if p.complete else p.f) for p in plan.probes}
    gens = [g.matrix for g in plan.chain.generators]
    return oracle.simulate(gens, plan.chain.initial, probes, n=plan.chain.dim)


def test_single_probe_is_born_consistent():
    plan = ProbePlan(PreparedChain((ROT,), (1, 0)), [Probe(1)])
    dist = record_distribution(plan)
    assert dist == {(0,): F(9, 25), (1,): F(16, 25)}
    amp = la.matvec(ROT, (1, 0))
    s = LinkState.pure(amp, amp)
    assert dist[(1,)] == born(Projection((0, 1)), s)


def test_probes_at_both_ends_agree():
    plan = ProbePlan(double_measurement_chain(ROT, V), [Probe(0), Probe(2)])
    dist = record_distribution(plan)
    assert all(p == 0 for (a, b), p in dist.items() if a != b)
    assert dist[(0, 0)] == F(9, 25) and dist[(1, 1)] == F(16, 25)


def test_unprepared_probe_is_white():
    plan = ProbePlan(PreparedChain((R3, R3)), [Probe(1)])
    assert record_distribution(plan) == {(k,): F(1, 3) for k in range(3)}
    s = post_probe_state(plan, 1)
    assert s.normalized() == LinkState.white(3, F(1, 3))


def test_probe_matches_oracle_on_fixed_plans():
    chain = PreparedChain((R3, la.transpose(R3), R3), (F(1, 2), F(-1, 3), 2))
    plans = [
        [Probe(0), Probe(2)],
        [Probe(1, (0, 0, 1)), Probe(3)],
        [Probe(0), Probe(1, (1, 0, 1)), Probe(2)],
        [Probe(3, (0, 1, 1))],
    ]
    for probes in plans:
        plan = ProbePlan(chain, probes)
        assert record_distribution(plan) == oracle_of(plan)


def test_junction_system_matches_process_probe():
    chain = PreparedChain((R3, R3), (1, 1, 0))
    plan = ProbePlan(chain, [Probe(0, (0, 1, 1)), Probe(2)])
    w = apply_links(probed_system(plan))
    rec = marginal(w, [f"J{p.stage}.r" for p in plan.probes])
    direct = records(probe(plan), plan)
    assert rec.table == direct.table


def test_partial_post_state_is_projection_update():
    chain = PreparedChain((R3, R3), (1, 2, 2))
    labels = (0, 1, 0)
    plan = ProbePlan(chain, [Probe(1, labels)])
    before = chain.stage_state(1)
    after = post_probe_state(plan, 1)
    assert after == projection_update(before, Probe(1, labels).partition(3))


def test_probe_keeps_total_weight():
    chain = PreparedChain((ROT, ROT_T, ROT), V)
    base = chain.process().total
    for stage in range(4):
        assert probe(ProbePlan(chain, [Probe(stage)])).total == base


def test_later_probes_do_not_change_earlier_records():
    chain = PreparedChain((R3, R3, la.transpose(R3)), (1, 0, 1))
    early = record_distribution(ProbePlan(chain, [Probe(1)]))
    both = record_distribution(ProbePlan(chain, [Probe(1), Probe(2, (0, 1, 0))]))
    summed = {}
    for (a, _), p in both.items():
        summed[(a,)] = summed.get((a,), 0) + p
    assert summed == early


def test_complete_probe_records_are_markov():
    chain = PreparedChain((R3, R3, la.transpose(R3)), (1, 0, 1))
    plan = ProbePlan(chain, [Probe(0), Probe(1), Probe(3)])
    assert records_markov(plan)


def test_coarse_middle_probe_breaks_markov():
    # a constant middle record cannot screen off two correlated end records
    chain = PreparedChain((ROT, ROT), V)
    plan = ProbePlan(chain, [Probe(0), Probe(1, (0, 0)), Probe(2)])
    assert record_distribution(plan) == oracle_of(plan)
    assert not records_markov(plan)


def test_plan_validation():
    chain = PreparedChain((ROT,), V)
    with pytest.raises(errors.StageOutOfRange):
        ProbePlan(chain, [Probe(2)])
    with pytest.raises(ValueError):
        ProbePlan(chain, [Probe(1), Probe(1)])
    with pytest.raises(ValueError):
        ProbePlan(chain, [Probe(0, (0, 1, 1))])


def test_projection_update_examples():
    s = LinkState.pure(V, V)
    complete = [Projection((1, 0)), Projection((0, 1))]
    assert projection_update(s, complete) == LinkState(((F(9, 25), 0), (0, F(16, 25))))
    w = LinkState.white(2, F(1, 2))
    assert projection_update(w, complete) == w
    full = LinkState(((1, 2, 3), (4, 5, 6), (7, 8, 9)))
    assert projection_update(full, [Projection.identity(3)]) == full


def test_projection_update_against_summation():
    s = LinkState(((1, 2, 3), (4, 5, 6), (7, 8, 9)))
    parts = [Projection((1, 0, 1)), Projection((0, 1, 0))]
    total = la.zeros(3)
    for p in parts:
        total = la.add(total, la.matmul(la.matmul(p.matrix, s.matrix), p.matrix))
    assert projection_update(s, parts).matrix == total


def test_check_partition():
    with pytest.raises(errors.NotAPartition):
        check_partition([Projection((1, 1)), Projection((0, 1))])
    with pytest.raises(errors.NotAPartition):
        check_partition([Projection((1, 0))])
    with pytest.raises(errors.NotAPartition):
        check_partition([])


def test_selection_examples():
    chain = PreparedChain((ROT, ROT), (1, 0))
    plan = ProbePlan(chain, [Probe(1)])
    w = probe(plan)
    picked = selection(w, Is("r1", 0))
    x2 = marginal(picked, ["x2"])
    fresh = PreparedChain((ROT,), (1, 0)).stage_distribution(1)
    assert tuple(v / x2.total for v in x2.table) == fresh
    assert selection(w, TRUE) == w
    sharp = ProbePlan(PreparedChain((la.identity(2),), (1, 0)), [Probe(1)])
    with pytest.raises(errors.NullNormalizer):
        selection(probe(sharp), Is("r1", 1))


def test_double_measurement_witness():
    res = double_measurement(ROT, V)
    assert res.witness == ((0, 0, 1), F(-144, 625))
    assert res.process.weight((0, 0, 1)) == F(3, 5) * F(3, 5) * F(-4, 5) * F(4, 5)
    assert res.outer_marginal.table == (F(9, 25), 0, 0, F(16, 25))
    assert res.separated
    # the same table comes out of the prepared chain with the middle unobserved
    w = double_measurement_chain(ROT, V).process()
    assert marginal(w, ["x0", "x2"]).table == res.outer_marginal.table


def test_double_measurement_errors():
    with pytest.raises(errors.NotUnitary):
        double_measurement(((1, 1), (0, 1)), V)
    with pytest.raises(errors.DegenerateInput):
        double_measurement(ROT, (1, 0))


def test_switches():
    assert switch_matrix(2, OFF).matrix == ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))
    assert switch_matrix(2, ON).matrix == la.identity(2)
    assert la.total(switch_matrix(2, ON).matrix) == la.total(switch_matrix(2, OFF).matrix) == 2
    sw = switch_component(3)
    assert sw.names == ("Sw.s", "Sw.x", "Sw.y")
    assert marginal(sw, ["Sw.s"]).table == (3, 3)
    with pytest.raises(ValueError):
        switch_matrix(2, "HALF")


def test_lab_object_probed_chain_passes():
    chain = PreparedChain((ROT, ROT_T), V)
    plan = ProbePlan(chain, [Probe(0), Probe(1), Probe(2)])
    assert check_lab_object(probed_lab_view(plan)).ok


def test_lab_object_double_measurement_fails_observability():
    res = double_measurement(ROT, V)
    report = check_lab_object(LabObjectView(res.process, (), [("x", 0), ("y", 1), ("z", 2)]))
    assert report.controllable and not report.observable
    assert report.failures


def test_lab_object_trivial():
    w = product(product(white("a", 2), white("b", 3)), make_process([("c", 2)], [1, 0]))
    assert check_lab_object(LabObjectView(w, [("a", 0), ("b", 1)], [("c", 2)])).ok


def test_lab_object_detects_backward_influence():
    # output at tick 0 copies the input at tick 1
    w = make_process([("o", 2), ("i", 2)], [F(1, 2), 0, 0, F(1, 2)])
    report = check_lab_object(LabObjectView(w, [("i", 1)], [("o", 0)]))
    assert report.controllable and not report.causal
    skewed = make_process([("i", 2), ("o", 2)], [1, 1, 2, 2])
    assert not check_lab_object(LabObjectView(skewed, [("i", 0)], [("o", 1)])).controllable


def test_oracle_self_consistency():
    # no probes except the last is the plain squared-amplitude rule
    gens = [ROT, ROT_T, ROT]
    for t in range(4):
        dist = oracle.simulate(gens[:t], V, {t: None})
        assert tuple(dist[(k,)] for k in range(2)) == oracle.stage_distribution(gens, V, t)
