"""Randomized exact checks of the theorems implemented in the package.

Each suite is a function of a :class:`random.Random` and a dimension bound
that runs one trial and returns ``(status, witness)`` with status ``"pass"``,
``"skip"`` or ``"fail"``. Trial ``i`` of a run with base seed ``s`` is seeded
from a hash of ``(s, i)``, so sharded and sequential runs agree exactly.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg as la
from . import oracle
from .chain import (
    PreparedChain,
    Transformation,
    causal_link_chain,
    chain_states,
    chain_system,
    dynamical_relation_holds,
    evolve_state,
    markov_chain,
    product_by_link,
    transformation_product,
)
from .complexprob import (
    ComplexWeight,
    boost_by_link,
    boost_compose,
    complex_to_joint,
    joint_to_complex,
    product_by_contraction,
    product_by_matrix,
)
from .errors import LinkError, NotSeparable, ParseError, SemanticError
from .link import (
    Box,
    LinkSystem,
    Projection,
    all_orderings,
    apply_links,
    born,
    causal_cut,
    link,
    link_state,
)
from .measurement import (
    Probe,
    ProbePlan,
    double_measurement_chain,
    double_measurement,
    projection_update,
    record_distribution,
    records_markov,
)
from .process import (
    In,
    Process,
    Variable,
    is_independent,
    make_process,
    marginal,
    marginal_array,
    product,
    separates,
    weight_of,
)

PASS, SKIP, FAIL = "pass", "skip", "fail"


# ---------------------------------------------------------------------------
# random objects
# ---------------------------------------------------------------------------


def trial_seed(seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def rand_q(rng, span=3, den=3) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, den))


def rand_process(rng, names, sizes, signed=True) -> Process:
    count = int(np.prod(sizes, dtype=object)) if sizes else 1
    lo = -3 if signed else 0
    weights = [Fraction(rng.randint(lo, 3), rng.randint(1, 3)) for _ in range(count)]
    return make_process([Variable(n, s) for n, s in zip(names, sizes)], weights)


def rand_distribution(rng, n) -> tuple:
    w = [rng.randint(0, 4) for _ in range(n)]
    if not any(w):
        w[rng.randrange(n)] = 1
    t = sum(w)
    return tuple(Fraction(x, t) for x in w)


def rand_stochastic(rng, n) -> tuple:
    cols = [rand_distribution(rng, n) for _ in range(n)]
    return la.transpose(cols)


def rand_orthogonal(rng, n, span=2) -> tuple:
    """Cayley transform ``(I - A)(I + A)^-1`` of a random rational skew matrix."""
    a = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            x = Fraction(rng.randint(-span, span), rng.randint(1, 2))
            a[i][j], a[j][i] = x, -x
    eye = la.identity(n)
    q = la.matmul(la.sub(eye, a), la.inverse(la.add(eye, a)))
    if rng.random() < 0.5:
        # a reflection reaches the other component of the orthogonal group
        q = la.matmul(la.diag([-1] + [1] * (n - 1)), q)
    return q


def rand_vector(rng, n, span=2) -> tuple:
    v = [Fraction(rng.randint(-span, span)) for _ in range(n)]
    if not any(v):
        v[rng.randrange(n)] = Fraction(1)
    return tuple(v)


def rand_labels(rng, n) -> tuple:
    return tuple(rng.randrange(n) for _ in range(n))


def rand_plan(rng, dims_max) -> ProbePlan:
    """Up to three distinct probes, exactly one of them partial."""
    n = rng.randint(2, max(2, min(4, dims_max)))
    L = rng.randint(1, 3)
    gens = tuple(rand_orthogonal(rng, n) for _ in range(L))
    v = None if rng.random() < 0.2 else rand_vector(rng, n)
    stages = rng.sample(range(L + 1), rng.randint(1, min(3, L + 1)))
    partial = rng.choice(stages)
    probes = [Probe(s, rand_labels(rng, n) if s == partial else None) for s in stages]
    return ProbePlan(PreparedChain(gens, v), probes)


def plan_witness(plan: ProbePlan) -> dict:
    return {"generators": plan.chain.generators and [g.matrix for g in plan.chain.generators],
            "initial": plan.chain.initial,
            "probes": [[p.stage, p.f] for p in plan.probes]}


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def suite_born(rng, dims_max):
    k = rng.randint(2, 4)
    sizes = [rng.randint(1, dims_max) for _ in range(k)]
    ix, iy = rng.sample(range(k), 2)
    sizes[iy] = sizes[ix]
    names = [f"v{i}" for i in range(k)]
    w = rand_process(rng, names, sizes)
    x, y = names[ix], names[iy]
    p = Projection(tuple(rng.randint(0, 1) for _ in range(sizes[ix])))
    s = link_state(w, x, y)
    linked = link(w, x, y)
    witness = {"process": w, "x": x, "y": y, "projection": p.bits}
    if s.trace == 0:
        return SKIP, witness
    lhs = weight_of(linked, In(x, p.values())) / linked.total
    ok = linked.total == s.trace and lhs == born(p, s)
    return (PASS if ok else FAIL), witness


def suite_disconnect(rng, dims_max):
    d = max(2, min(dims_max, 3))
    left = [f"a{i}" for i in range(rng.randint(1, 2))]
    right = [f"c{i}" for i in range(rng.randint(1, 2))]
    ls = [rng.randint(1, d) for _ in left]
    rs = [rng.randint(1, d) for _ in right]
    n = rng.randint(2, d)
    if rng.random() < 0.5:
        f = rand_process(rng, left + ["x"], ls + [n])
        g = rand_process(rng, ["x'"] + right, [n] + rs)
        w = link(product(f, g), "x", "x'")
    else:
        w = rand_process(rng, left + ["x"] + right, ls + [n] + rs)
    witness = {"process": w, "left": left}
    if any(v == 0 for v in marginal_array(w, ("x",))):
        return SKIP, witness
    sep = separates(w, left, "x", right)
    relinks = causal_cut(w, "x", left=left, check=False).relink() == w
    if sep != relinks:
        return FAIL, witness
    if sep:
        cut = causal_cut(w, "x", left=left)
        parts = [tuple(left) + ("x",), (cut.fresh,) + tuple(right)]
        ok = cut.relink() == w and (cut.process.total == 0 or is_independent(cut.process, parts))
    else:
        try:
            causal_cut(w, "x", left=left)
            ok = False
        except NotSeparable:
            ok = True
    return (PASS if ok else FAIL), witness


def suite_white_connection(rng, dims_max):
    n = rng.randint(1, dims_max)
    a_names = ["a", "x"][: rng.randint(1, 2)]
    a_names = a_names if "x" in a_names else a_names + ["x"]
    a = rand_process(rng, a_names, [rng.randint(1, dims_max) for _ in a_names[:-1]] + [n])
    other = rand_process(rng, ["b"], [rng.randint(1, dims_max)])
    white = make_process([Variable("y", n)], [Fraction(1, n)] * n)
    w = product(a, product(white, other))
    linked = link(w, "x", "y")
    witness = {"component": a, "other": other}
    if linked.total == 0 or w.total == 0:
        return SKIP, witness
    lhs = [v / linked.total for v in marginal(linked, a_names).table]
    rhs = [v / w.total for v in marginal(w, a_names).table]
    return (PASS if lhs == rhs else FAIL), witness


def suite_chain_equiv(rng, dims_max):
    n = rng.randint(2, max(2, min(5, dims_max)))
    L = rng.randint(1, 6)
    g, v = rand_stochastic(rng, n), rand_distribution(rng, n)
    system = causal_link_chain(g, v, L)
    w = apply_links(system)
    expected = markov_chain(g, v, L)
    witness = {"generator": g, "initial": v, "steps": L}
    if w.total == 0:
        return FAIL, witness
    same = [x / w.total for x in w.table] == list(expected.table)
    # component normalizers are deferred, so the trace theorem applies to the normalized state
    traces = all(s.normalized().trace == Fraction(1, n) for s in chain_states(system))
    return (PASS if same and traces else FAIL), witness


def suite_dynamical(rng, dims_max):
    n = rng.randint(2, max(2, min(4, dims_max)))
    t = [list(c) for c in la.transpose(rand_stochastic(rng, n))]
    if rng.random() < 0.25:
        t[1] = t[0]  # repeated column: singular
    t = la.transpose(t)
    u, v = rand_stochastic(rng, n), rand_distribution(rng, n)
    before, after = chain_states(chain_system([t, u], v))
    witness = {"transformation": t, "next": u, "initial": v}
    ok = dynamical_relation_holds(before, after, t)
    if ok and la.is_invertible(t):
        ok = evolve_state(before, t) == after
    return (PASS if ok else FAIL), witness


def suite_quantum_square(rng, dims_max):
    n = rng.randint(2, max(2, min(4, dims_max)))
    L = rng.randint(1, 3)
    g, v = rand_orthogonal(rng, n), rand_vector(rng, n)
    chain = PreparedChain((g,) * L, v)
    witness = {"generator": g, "initial": v, "steps": L}
    for t in range(L + 1):
        amp = la.matvec(la.matpow(g, t), v)
        sq = [a * a for a in amp]
        if chain.stage_distribution(t) != tuple(x / sum(sq) for x in sq):
            return FAIL, witness
    return PASS, witness


def suite_product(rng, dims_max):
    n = rng.randint(1, dims_max)
    mats = [tuple(tuple(rand_q(rng) for _ in range(n)) for _ in range(n)) for _ in range(2)]
    t = Transformation(mats[0], rand_q(rng) or Fraction(1))
    u = Transformation(mats[1], rand_q(rng) or Fraction(1))
    witness = {"t": t.table, "u": u.table}
    prod = transformation_product(t, u)
    ok = product_by_link(t, u).table == prod.table
    if t.is_causal() and u.is_causal():
        ok = ok and prod.is_causal()
    return (PASS if ok else FAIL), witness


def random_proper_system(rng, dims_max) -> LinkSystem:
    d = max(1, min(dims_max, 3))
    comps = [[] for _ in range(3)]
    links = []
    for k in range(rng.randint(1, 3)):
        i, j = rng.sample(range(3), 2)
        n = rng.randint(1, d)
        comps[i].append((f"C{i}.l{k}", n))
        comps[j].append((f"C{j}.m{k}", n))
        links.append((f"C{i}.l{k}", f"C{j}.m{k}"))
    for i in range(3):
        for e in range(rng.randint(0, 1)):
            comps[i].append((f"C{i}.e{e}", rng.randint(1, d)))
        rng.shuffle(comps[i])
    boxes = [Box(f"C{i}", rand_process(rng, [n for n, _ in c], [s for _, s in c])) for i, c in enumerate(comps)]
    return LinkSystem(boxes, links)


def suite_propriety(rng, dims_max):
    system = random_proper_system(rng, dims_max)
    witness = {"boxes": [(b.name, b.process) for b in system.boxes],
               "links": [(l.first, l.second) for l in system.links]}
    reference = apply_links(system)
    for order in all_orderings(system):
        if apply_links(system, order) != reference:
            return FAIL, dict(witness, order=list(order))
    return PASS, witness


def _velocity(rng) -> Fraction:
    d = rng.randint(2, 12)
    return Fraction(rng.randint(-(d - 1), d - 1), d)


def suite_boost(rng, dims_max):
    v, v2, v3 = _velocity(rng), _velocity(rng), _velocity(rng)
    witness = {"v": v, "v2": v2, "v3": v3}
    ok = (boost_compose(v, v2) == boost_by_link(v, v2)
          and boost_compose(v, v2) == boost_compose(v2, v)
          and boost_compose(boost_compose(v, v2), v3) == boost_compose(v, boost_compose(v2, v3)))
    return (PASS if ok else FAIL), witness


def suite_complex(rng, dims_max):
    c = ComplexWeight(rand_q(rng, 5, 4), rand_q(rng, 5, 4))
    c2 = ComplexWeight(rand_q(rng, 5, 4), rand_q(rng, 5, 4))
    ok = product_by_matrix(c, c2) == product_by_contraction(c, c2) == c * c2
    ok = ok and joint_to_complex(complex_to_joint(c)) == c
    return (PASS if ok else FAIL), {"c": (c.a, c.b), "c2": (c2.a, c2.b)}


def suite_measurement_oracle(rng, dims_max):
    plan = rand_plan(rng, dims_max)
    got = record_distribution(plan)
    c = plan.chain
    expected = oracle.simulate([g.matrix for g in c.generators], c.initial,
                               {p.stage: p.f for p in plan.probes}, n=c.dim)
    return (PASS if got == expected else FAIL), plan_witness(plan)


def suite_markov_records(rng, dims_max):
    plan = rand_plan(rng, dims_max)
    return (PASS if records_markov(plan) else FAIL), plan_witness(plan)


def suite_double_measurement(rng, dims_max):
    n = rng.randint(2, max(2, min(3, dims_max)))
    g = rand_orthogonal(rng, n)
    v = list(rand_vector(rng, n))
    while sum(1 for a in v if a) < 2:
        v[rng.randrange(n)] = Fraction(rng.choice([-2, -1, 1, 2]))
    witness = {"generator": g, "initial": v}
    r = double_measurement(g, v)
    diag = [v[i] * v[j] if i == j else 0 for i in range(n) for j in range(n)]
    ok = list(r.outer_marginal.table) == diag and r.separated
    if r.witness is not None:
        (x, y, z), wt = r.witness
        ok = ok and wt < 0 and wt == v[x] * g[y][x] * g[y][z] * v[z]
    chain = double_measurement_chain(g, v)
    full = record_distribution(ProbePlan(chain, [0, 1, 2]))
    ends = record_distribution(ProbePlan(chain, [0, 2]))
    ok = ok and all(p >= 0 for p in full.values())
    ok = ok and all(p == 0 for (a, b), p in ends.items() if a != b)
    return (PASS if ok else FAIL), witness


def suite_disturbance(rng, dims_max):
    n = rng.randint(1, dims_max)
    s = tuple(tuple(rand_q(rng) for _ in range(n)) for _ in range(n))
    labels = rand_labels(rng, n)
    blocks = sorted(set(labels))
    parts = [Projection(tuple(int(l == b) for l in labels)) for b in blocks]
    expected = la.zeros(n)
    for p in parts:
        expected = la.add(expected, la.matmul(la.matmul(p.matrix, s), p.matrix))
    c = rand_q(rng) or Fraction(1)
    white = la.scale(la.identity(n), c)
    ok = (projection_update(s, parts).matrix == expected
          and projection_update(white, parts).matrix == white)
    return (PASS if ok else FAIL), {"state": s, "labels": labels}


FUZZ_VOCAB = ("var", "box", "link", "query", "dense", "white", "sharp", "stoch", "unitary",
              "matrix", "marginal", "state", "born", "prob", "true", "A", "B", "x", "y", "A.x",
              "B.y", "[", "]", ";", ",", ":", "=", "!=", ".", "/", "-", "(", ")", "|", "&", "!",
              "0", "1", "2", "3", "1/2", "#", "\n", "@", "99999999999")


def random_document(rng) -> str:
    if rng.random() < 0.3:
        good = ["var x:2", "box A[;x] dense [1/2, 1/2]", "box B[y;z] stoch [[1,0],[0,1]]",
                "var y:2", "link A.x = B.y", "query marginal B.z", "query prob B.z = 1 | !true"]
        doc = [rng.choice(good) for _ in range(rng.randint(0, 6))]
        toks = " ".join(doc).split(" ")
        for _ in range(rng.randint(0, 3)):
            if toks:
                toks[rng.randrange(len(toks))] = rng.choice(FUZZ_VOCAB)
        return " ".join(toks)
    return " ".join(rng.choice(FUZZ_VOCAB) for _ in range(rng.randint(0, 25)))


def fuzz_one(text: str) -> tuple[str, str]:
    """Returns ``(outcome, detail)`` with outcome ok, diagnostic or crash."""
    from .dsl import parse_system, serialize

    try:
        system = parse_system(text)
    except (ParseError, SemanticError) as e:
        return "diagnostic", str(e)
    except Exception as e:  # noqa: BLE001 - a crash is what we are looking for
        return "crash", f"{type(e).__name__}: {e}"
    try:
        system.validate()
        again = parse_system(serialize(system))
        if serialize(again) != serialize(system):
            return "crash", "serializer is not idempotent"
    except Exception as e:  # noqa: BLE001
        return "crash", f"accepted document fails validation: {type(e).__name__}: {e}"
    return "ok", ""


def suite_parser(rng, dims_max):
    text = random_document(rng)
    outcome, detail = fuzz_one(text)
    return (FAIL if outcome == "crash" else PASS), {"text": text, "detail": detail}


SUITES = {
    "born": suite_born,
    "disconnect": suite_disconnect,
    "white-connection": suite_white_connection,
    "chain-equiv": suite_chain_equiv,
    "dynamical": suite_dynamical,
    "quantum-square": suite_quantum_square,
    "product": suite_product,
    "propriety": suite_propriety,
    "boost": suite_boost,
    "complex": suite_complex,
    "measurement-oracle": suite_measurement_oracle,
    "double-measurement": suite_double_measurement,
    # beyond the documented list
    "markov-records": suite_markov_records,
    "disturbance": suite_disturbance,
    "parser": suite_parser,
}

DEFAULT_DIMS = {"born": 4, "chain-equiv": 5}


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


@dataclass
class SuiteReport:
    suite: str
    trials: int
    passed: int
    skipped: int
    failed: int
    counterexample: dict | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def as_dict(self) -> dict:
        return jsonable({"suite": self.suite, "trials": self.trials, "passed": self.passed,
                         "skipped": self.skipped, "failed": self.failed,
                         "counterexample": self.counterexample})


def jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Process):
        return {"variables": [[v.name, v.size] for v in obj.variables],
                "weights": [str(x) for x in obj.table]}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def run_trial(suite: str, seed: int, index: int, dims_max: int):
    rng = random.Random(trial_seed(seed, index))
    try:
        status, witness = SUITES[suite](rng, dims_max)
    except LinkError as e:
        status, witness = FAIL, {"error": f"{type(e).__name__}: {e}"}
    return index, status, witness


def _run_chunk(args):
    suite, seed, indices, dims_max = args
    return [run_trial(suite, seed, i, dims_max) for i in indices]


def run_suite(suite: str, trials: int, seed: int = 0, dims_max: int | None = None,
              workers: int = 1) -> SuiteReport:
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    dims_max = dims_max if dims_max is not None else DEFAULT_DIMS.get(suite, 4)
    indices = list(range(trials))
    if workers > 1 and trials > 1:
        chunks = [(suite, seed, indices[k::workers], dims_max) for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]
        results.sort(key=lambda r: r[0])
    else:
        results = _run_chunk((suite, seed, indices, dims_max))
    report = SuiteReport(suite, trials, 0, 0, 0)
    for index, status, witness in results:
        if status == PASS:
            report.passed += 1
        elif status == SKIP:
            report.skipped += 1
        else:
            report.failed += 1
            if report.counterexample is None:
                report.counterexample = {"trial": index, **witness}
    return report
