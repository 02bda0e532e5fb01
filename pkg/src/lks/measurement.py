"""Measurement on prepared quantum chains.

A probe at stage ``t`` links the forward and backward rails at that stage
and attaches a recorder, a component that copies the probed value into a
fresh record variable ``r{t}``. A partial probe with value map ``f`` links
only ``f(x{t})`` to ``f(x{t}')`` and records ``f(x{t})``.

Two constructions are provided. :func:`probe` works on the chain's process
directly and keeps the table small. :func:`probed_system` builds the same
thing as a link system with one junction component per probe, which makes
the link states around a probe available.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg as la
from .chain import PreparedChain, Transformation, as_transformation
from .errors import (
    DegenerateInput,
    NotAPartition,
    NotUnitary,
    NullNormalizer,
    StageOutOfRange,
)
from .link import (
    Box,
    LinkState,
    LinkSystem,
    Projection,
    _linked_product,
    apply_links,
    link,
    system_link_state,
)
from .process import (
    ONE,
    ZERO,
    Event,
    Process,
    Variable,
    condition,
    drop,
    make_process,
    marginal,
    marginal_array,
    markov_check,
    separates,
)

ON, OFF = "ON", "OFF"


# ---------------------------------------------------------------------------
# plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Probe:
    """A probe at ``stage``; ``f`` maps each value to its block label (None = complete)."""

    stage: int
    f: tuple | None = None

    def __post_init__(self):
        if self.f is not None:
            f = tuple(int(v) for v in self.f)
            if any(v < 0 for v in f):
                raise ValueError("block labels must be nonnegative")
            object.__setattr__(self, "f", f)

    @property
    def complete(self) -> bool:
        return self.f is None

    def labels(self, n: int) -> tuple:
        if self.f is None:
            return tuple(range(n))
        if len(self.f) != n:
            raise ValueError(f"value map has {len(self.f)} entries for a range of {n}")
        return self.f

    def blocks(self, n: int) -> int:
        return max(self.labels(n)) + 1 if n else 0

    def partition(self, n: int) -> list[Projection]:
        """One projection per block label in ``range(blocks)``; unused labels give zero projections."""
        labels = self.labels(n)
        return [Projection(tuple(int(l == k) for l in labels)) for k in range(self.blocks(n))]


@dataclass(frozen=True)
class ProbePlan:
    chain: PreparedChain
    probes: tuple = ()

    def __post_init__(self):
        probes = tuple(p if isinstance(p, Probe) else _as_probe(p) for p in self.probes)
        stages = [p.stage for p in probes]
        for s in stages:
            if not 0 <= s <= self.chain.steps:
                raise StageOutOfRange(f"stage {s} outside 0..{self.chain.steps}")
        if len(set(stages)) != len(stages):
            raise ValueError(f"probe stages must be distinct, got {stages}")
        for p in probes:
            p.labels(self.chain.dim)
        object.__setattr__(self, "probes", tuple(sorted(probes, key=lambda p: p.stage)))

    @property
    def record_names(self) -> tuple:
        return tuple(f"r{p.stage}" for p in self.probes)


def _as_probe(p) -> Probe:
    if isinstance(p, int):
        return Probe(p)
    stage, f = p
    return Probe(stage, f)


# ---------------------------------------------------------------------------
# process-level probing
# ---------------------------------------------------------------------------


def _function_box(labels, a: str, b: str, k: int) -> Process:
    n = len(labels)
    return make_process([Variable(a, n), Variable(b, k)],
                        [ONE if labels[i] == j else ZERO for i in range(n) for j in range(k)])


def _attach(w: Process, x: str, labels, out: str, k: int) -> Process:
    """Link ``x`` to the input of a functional box and return the process with its output ``out``."""
    box = _function_box(labels, f"{out}.in", out, k)
    return _linked_product(w, box, x, f"{out}.in")


def probe(plan: ProbePlan) -> Process:
    """The chain's process with every probe of ``plan`` inserted.

    Record ``r{t}`` ranges over the block labels of the probe at stage ``t``.
    The result is not renormalized.
    """
    chain = plan.chain
    n, L = chain.dim, chain.steps
    w = chain.process()
    for p in plan.probes:
        t, labels, k = p.stage, p.labels(n), p.blocks(n)
        x, xb = f"x{t}", f"x{t}'"
        if t < L:
            if p.complete:
                w = link(w, x, xb)
            else:
                w = _attach(w, x, labels, f"f{t}", k)
                w = _attach(w, xb, labels, f"f{t}'", k)
                w = drop(link(w, f"f{t}", f"f{t}'"), [f"f{t}"])
        w = _attach(w, x, labels, f"r{t}", k)
    return w


def records(w: Process, plan: ProbePlan) -> Process:
    return marginal(w, list(plan.record_names))


def record_distribution(plan: ProbePlan) -> dict:
    """Normalized joint record distribution, keyed by record tuples in stage order."""
    w = records(probe(plan), plan)
    tot = w.total
    if tot == 0:
        raise NullNormalizer("probed chain has total weight 0")
    return {case: wt / tot for case, wt in w.cases()}


def records_markov(plan: ProbePlan) -> bool:
    """Whether the records, in stage order, form a Markov sequence."""
    return markov_check(records(probe(plan), plan), list(plan.record_names))


# ---------------------------------------------------------------------------
# junction-based probed system
# ---------------------------------------------------------------------------


def _junction(name: str, labels, k: int, final: bool) -> Process:
    n = len(labels)
    r = Variable(f"{name}.r", k)
    if final:
        vars_ = [Variable(f"{name}.fi", n), Variable(f"{name}.bi", n), r]
        arr = np.full((n, n, k), ZERO, dtype=object)
        for i in range(n):
            arr[i, i, labels[i]] = ONE
    else:
        vars_ = [Variable(f"{name}.{s}", n) for s in ("fi", "fo", "bi", "bo")] + [r]
        arr = np.full((n, n, n, n, k), ZERO, dtype=object)
        for i in range(n):
            for j in range(n):
                if labels[i] == labels[j]:
                    arr[i, i, j, j, labels[i]] = ONE
    return Process(vars_, arr)


def probed_system(plan: ProbePlan) -> LinkSystem:
    """Link system of the chain with one junction component ``J{t}`` per probe.

    A junction passes both rails through unchanged, constrains them to agree
    on the probed block and exposes the block as ``J{t}.r``.
    """
    chain = plan.chain
    base = chain.system()
    boxes = list(base.boxes)
    links = [(l.first, l.second) for l in base.links]
    n, L = chain.dim, chain.steps
    for p in plan.probes:
        t, labels, k = p.stage, p.labels(n), p.blocks(n)
        j = f"J{t}"
        boxes.append(Box(j, _junction(j, labels, k, t == L), n_inputs=0))
        fwd, bwd = chain._raw(t, ""), chain._raw(t, "'")
        if t == L:
            links.remove((fwd, bwd))
            links += [(fwd, f"{j}.fi"), (bwd, f"{j}.bi")]
        else:
            for tag, head, s in (("", fwd, "f"), ("'", bwd, "b")):
                nxt = f"G{t + 1}{tag}.in"
                links.remove((head, nxt))
                links += [(head, f"{j}.{s}i"), (f"{j}.{s}o", nxt)]
    return LinkSystem(boxes, links)


def post_probe_state(plan: ProbePlan, t: int) -> LinkState:
    """Link state where the forward rail leaves the probe at stage ``t < L``."""
    if not any(p.stage == t for p in plan.probes):
        raise StageOutOfRange(f"no probe at stage {t}")
    if t >= plan.chain.steps:
        raise StageOutOfRange("there is no link after the final stage")
    system = probed_system(plan)
    target = (f"J{t}.fo", f"G{t + 1}.in")
    k = next(i for i, l in enumerate(system.links) if (l.first, l.second) == target)
    return system_link_state(system, k)


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


def check_partition(partition: Sequence[Projection], n: int | None = None) -> list[Projection]:
    parts = [p if isinstance(p, Projection) else Projection(p) for p in partition]
    if not parts:
        raise NotAPartition("empty partition")
    dims = {p.dim for p in parts} | ({n} if n is not None else set())
    if len(dims) != 1:
        raise NotAPartition("projections of different dimensions")
    for i in range(parts[0].dim):
        if sum(p.bits[i] for p in parts) != 1:
            raise NotAPartition(f"value {i} is covered {sum(p.bits[i] for p in parts)} times")
    return parts


def projection_update(s, partition: Sequence[Projection]) -> LinkState:
    """``sum_k P_k S P_k``: keep the entries whose row and column fall in the same block."""
    s = s if isinstance(s, LinkState) else LinkState(s)
    parts = check_partition(partition, s.dim)
    block = [next(k for k, p in enumerate(parts) if p.bits[i]) for i in range(s.dim)]
    m = s.matrix
    return LinkState(tuple(tuple(m[i][j] if block[i] == block[j] else ZERO
                                 for j in range(s.dim)) for i in range(s.dim)))


def selection(w: Process, event: Event) -> Process:
    """Keep the cases matching ``event``; weights are not rescaled."""
    out = condition(w, event)
    if out.total == 0:
        raise NullNormalizer("selection has total weight 0")
    return out


# ---------------------------------------------------------------------------
# double measurement without probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleMeasurement:
    process: Process
    witness: tuple | None
    outer_marginal: Process
    separated: bool


def double_measurement(g, v) -> DoubleMeasurement:
    """Three stages ``x, y, z`` with ``w = v[x] G[y,x] G[y,z] v[z]`` and no probe.

    ``witness`` is the first negative case (in table order) with its weight.
    ``outer_marginal`` is the ``(x, z)`` marginal, and ``separated`` says
    whether ``y`` separates ``x`` from ``z``.
    """
    g = as_transformation(g)
    if not g.is_unitary():
        raise NotUnitary("generator is not orthogonal")
    v = la.vector(v)
    if len(v) != g.dim:
        raise ValueError("initial vector has the wrong length")
    if sum(1 for a in v if a != 0) <= 1:
        raise DegenerateInput("initial vector is sharp")
    m, n = g.table, g.dim
    w = make_process([Variable("x", n), Variable("y", n), Variable("z", n)],
                     [v[x] * m[y][x] * m[y][z] * v[z]
                      for x in range(n) for y in range(n) for z in range(n)])
    witness = next(((case, wt) for case, wt in w.cases() if wt < 0), None)
    return DoubleMeasurement(w, witness, marginal(w, ["x", "z"]), separates(w, "x", "y", "z"))


def double_measurement_chain(g, v) -> PreparedChain:
    """The prepared chain ``G`` then ``G^T`` underlying :func:`double_measurement`."""
    g = as_transformation(g)
    return PreparedChain((g, g.transpose()), v)


# ---------------------------------------------------------------------------
# switches and laboratory objects
# ---------------------------------------------------------------------------


def switch_matrix(n: int, state: str) -> Transformation:
    if n < 1:
        raise ValueError("a switch needs n >= 1")
    if state == ON:
        return Transformation(la.identity(n))
    if state == OFF:
        return Transformation(tuple((Fraction(1, n),) * n for _ in range(n)))
    raise ValueError(f"switch state must be {ON!r} or {OFF!r}, got {state!r}")


def switch_component(n: int, name: str = "Sw") -> Process:
    """Three-variable switch ``(s, x, y)``; ``s = 0`` is ON, ``s = 1`` is OFF."""
    tables = [switch_matrix(n, ON).table, switch_matrix(n, OFF).table]
    return make_process([Variable(f"{name}.s", 2), Variable(f"{name}.x", n), Variable(f"{name}.y", n)],
                        [tables[s][y][x] for s in range(2) for x in range(n) for y in range(n)])


@dataclass(frozen=True)
class LabObjectView:
    """A process together with its external inputs and outputs, each tagged with a time tick."""

    process: Process
    inputs: tuple = ()
    outputs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple((str(a), int(t)) for a, t in self.inputs))
        object.__setattr__(self, "outputs", tuple((str(a), int(t)) for a, t in self.outputs))
        for a, _ in self.inputs + self.outputs:
            self.process.index(a)


@dataclass(frozen=True)
class LabReport:
    controllable: bool
    causal: bool
    observable: bool
    failures: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return self.controllable and self.causal and self.observable


def check_lab_object(view: LabObjectView) -> LabReport:
    w = view.process
    ins = [a for a, _ in view.inputs]
    outs = [a for a, _ in view.outputs]
    failures = []

    joint_in = marginal_array(w, ins).reshape(-1)
    controllable = len(set(joint_in.tolist())) <= 1
    if not controllable:
        failures.append("input marginal is not uniform")

    causal = True
    for t in sorted({t for _, t in view.inputs + view.outputs}):
        early_out = [a for a, s in view.outputs if s <= t]
        past_in = [a for a, s in view.inputs if s < t]
        late_in = [a for a, s in view.inputs if s >= t]
        if early_out and late_in and not separates(w, early_out, past_in, late_in):
            causal = False
            failures.append(f"outputs up to tick {t} depend on later inputs")

    joint_out = marginal_array(w, outs).reshape(-1)
    observable = all(x >= 0 for x in joint_out)
    if not observable:
        failures.append("an output weight is negative")
    return LabReport(controllable, causal, observable, tuple(failures))


def probed_lab_view(plan: ProbePlan) -> LabObjectView:
    """The probed chain seen from outside: its records are the outputs."""
    w = probe(plan)
    return LabObjectView(w, (), [(f"r{p.stage}", p.stage) for p in plan.probes])
