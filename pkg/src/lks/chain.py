"""Chains: Markov, causal link, inverse, double-boundary and prepared quantum.

A :class:`Transformation` is a two-variable component whose matrix has the
after-variable as row index and the before-variable as column index, so
``T @ v`` moves a state vector one step forward.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import (
    BadH,
    DimMismatch,
    InvalidGenerator,
    InvalidInitial,
    NotUnitary,
    SingularT,
    StageOutOfRange,
    ZeroMarginal,
)
from .link import Box, LinkState, LinkSystem, apply_links, system_link_state
from .process import ONE, ZERO, Process, Variable, make_process, marginal, marginal_array


@dataclass(frozen=True)
class Transformation:
    """Matrix plus a deferred scalar; the component's joint table is ``scale * matrix``."""

    matrix: tuple
    scale: Fraction = ONE

    def __post_init__(self):
        m = la.matrix(self.matrix)
        if not m or not la.is_square(m):
            raise DimMismatch("a transformation matrix must be square and nonempty")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "scale", la.rational(self.scale))

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def table(self):
        return la.scale(self.matrix, self.scale)

    def column_sums(self):
        return la.column_sums(self.matrix)

    def is_causal(self) -> bool:
        sums = self.column_sums()
        return all(s == sums[0] for s in sums)

    def is_stochastic(self) -> bool:
        return all(s == 1 for s in self.column_sums()) and all(
            x >= 0 for row in self.matrix for x in row)

    def is_unitary(self) -> bool:
        return la.matmul(self.matrix, la.transpose(self.matrix)) == la.identity(self.dim)

    def is_invertible(self) -> bool:
        return la.is_invertible(self.matrix)

    def inverse(self) -> "Transformation":
        return Transformation(la.inverse(self.matrix))

    def transpose(self) -> "Transformation":
        return Transformation(la.transpose(self.matrix), self.scale)

    def apply(self, v):
        return la.matvec(self.matrix, la.vector(v))

    def as_process(self, before: str, after: str) -> Process:
        t = self.table
        n = self.dim
        return make_process([Variable(before, n), Variable(after, n)],
                            [t[j][i] for i in range(n) for j in range(n)])

    @classmethod
    def from_process(cls, w: Process, before: str, after: str) -> "Transformation":
        arr = marginal_array(w, (after, before))
        return cls(tuple(tuple(r) for r in arr))

    @classmethod
    def identity(cls, n) -> "Transformation":
        return cls(la.identity(n))


def _matrix_of(g) -> tuple:
    return g.matrix if isinstance(g, Transformation) else la.matrix(g)


def as_transformation(g) -> Transformation:
    return g if isinstance(g, Transformation) else Transformation(g)


def check_stochastic(g) -> Transformation:
    g = as_transformation(g)
    if any(x < 0 for row in g.matrix for x in row):
        raise InvalidGenerator("generator has negative entries")
    if any(s != 1 for s in g.column_sums()):
        raise InvalidGenerator(f"generator column sums are {g.column_sums()}, not 1")
    return g


def check_distribution(v, n) -> tuple:
    v = la.vector(v)
    if len(v) != n:
        raise InvalidInitial(f"initial vector has length {len(v)}, generator has dim {n}")
    if any(x < 0 for x in v) or sum(v) != 1:
        raise InvalidInitial("initial vector must be nonnegative and sum to 1")
    return v


def chain_process(generators: Sequence, v, w=None, prefix: str = "x") -> Process:
    """Weights ``v[i0] * prod G_t[i_t, i_{t-1}] * w[i_L]`` with no validation."""
    mats = [_matrix_of(g) for g in generators]
    v = la.vector(v)
    n = len(v)
    if any(len(m) != n for m in mats):
        raise DimMismatch("generator and boundary dimensions differ")
    arr = np.array(v, dtype=object)
    for m in mats:
        step = np.array([[m[j][i] for j in range(n)] for i in range(n)], dtype=object)
        arr = arr[..., :, None] * step.reshape((1,) * (arr.ndim - 1) + (n, n))
    if w is not None:
        w = la.vector(w)
        if len(w) != n:
            raise DimMismatch("final vector has the wrong length")
        arr = arr * np.array(w, dtype=object)
    names = [Variable(f"{prefix}{t}", n) for t in range(len(mats) + 1)]
    return Process(names, arr)


def markov_chain(g, v, steps: int) -> Process:
    """Markov chain on ``x0 .. x{steps}`` with a fixed stochastic generator."""
    g = check_stochastic(g)
    v = check_distribution(v, g.dim)
    if steps < 1:
        raise ValueError("a chain needs at least one step")
    return chain_process([g] * steps, v)


def inverse_chain(g, v, steps: int) -> Process:
    """Formal chain driven by the exact inverse of ``g``; weights may be negative."""
    g = as_transformation(g)
    try:
        inv = g.inverse()
    except SingularT:
        raise InvalidGenerator("generator has no inverse") from None
    return chain_process([inv] * steps, v)


def chain_system(generators: Sequence, v=None, w=None, scale=None, boundary: str = "V") -> LinkSystem:
    """Link system ``V -> G1 -> ... -> GL [-> W]``.

    Component ``k`` has variables ``Gk.in`` and ``Gk.out`` and joint table
    ``scale * Gk``. Without ``v`` the chain starts at ``G1.in``.
    """
    gens = [as_transformation(g) for g in generators]
    boxes, links = [], []
    prev = None
    if v is not None:
        v = la.vector(v)
        boxes.append(Box(boundary, make_process([Variable(f"{boundary}.x", len(v))], v)))
        prev = f"{boundary}.x"
    for k, g in enumerate(gens, start=1):
        if scale is not None:
            g = Transformation(g.matrix, la.rational(scale))
        name = f"G{k}"
        boxes.append(Box(name, g.as_process(f"{name}.in", f"{name}.out"), n_inputs=1))
        if prev is not None:
            links.append((prev, f"{name}.in"))
        prev = f"{name}.out"
    if w is not None:
        w = la.vector(w)
        boxes.append(Box("W", make_process([Variable("W.x", len(w))], w), n_inputs=1))
        links.append((prev, "W.x"))
    return LinkSystem(boxes, links)


def causal_link_chain(g, v, steps: int) -> LinkSystem:
    """Link system whose components after ``V`` all have matrix ``G / n``."""
    g = check_stochastic(g)
    v = check_distribution(v, g.dim)
    return chain_system([g] * steps, v, scale=Fraction(1, g.dim))


def transformation_product(t, u) -> Transformation:
    """``t`` then ``u``: matrix ``U T`` with the scales multiplied, not folded in."""
    t, u = as_transformation(t), as_transformation(u)
    if t.dim != u.dim:
        raise DimMismatch(f"cannot compose dims {t.dim} and {u.dim}")
    return Transformation(la.matmul(u.matrix, t.matrix), t.scale * u.scale)


def product_by_link(t, u) -> Transformation:
    """Same as :func:`transformation_product`, computed by linking components."""
    from .link import link
    from .process import product

    t, u = as_transformation(t), as_transformation(u)
    if t.dim != u.dim:
        raise DimMismatch(f"cannot compose dims {t.dim} and {u.dim}")
    joined = link(product(t.as_process("a", "b"), u.as_process("c", "d")), "b", "c")
    return Transformation.from_process(marginal(joined, ["a", "d"]), "a", "d")


# -- the link dynamical rule -------------------------------------------------
#
# Link states are stored with the later variable of a link as row index. The
# rule is written for the transposed orientation (earlier variable as row),
# where it takes the familiar T S T^-1 form.


@dataclass(frozen=True)
class DynamicalRelation:
    """What can be said about the state after a singular ``T``."""

    before: LinkState
    transformation: Transformation

    def holds(self, after: LinkState) -> bool:
        t = self.transformation.matrix
        lhs = la.matmul(la.transpose(after.matrix), t)
        rhs = la.matmul(t, la.transpose(self.before.matrix))
        return lhs == rhs


def evolve_state(s: LinkState, t, strict: bool = False):
    """State after ``t`` given the state before it.

    Returns a :class:`LinkState` when ``t`` is invertible. Otherwise returns a
    :class:`DynamicalRelation`, or raises :class:`SingularT` if ``strict``.
    """
    t = as_transformation(t)
    if t.dim != s.dim:
        raise DimMismatch("state and transformation dimensions differ")
    if not t.is_invertible():
        if strict:
            raise SingularT("transformation is not invertible")
        return DynamicalRelation(s, t)
    conj = la.matmul(la.matmul(t.matrix, la.transpose(s.matrix)), la.inverse(t.matrix))
    return LinkState(la.transpose(conj))


def dynamical_relation_holds(before: LinkState, after: LinkState, t) -> bool:
    return DynamicalRelation(before, as_transformation(t)).holds(after)


def chain_states(system: LinkSystem) -> list[LinkState]:
    return [system_link_state(system, k) for k in range(len(system.links))]


# -- differential chains -----------------------------------------------------


def _check_h(h):
    h = la.matrix(h)
    if not la.is_square(h):
        raise BadH("H must be square")
    if any(s != 0 for s in la.column_sums(h)):
        raise BadH(f"H column sums are {la.column_sums(h)}, not 0")
    return h


def differential_generator(h, dt, classical: bool = False) -> Transformation:
    """``1 + H dt``."""
    h = _check_h(h)
    g = la.add(la.identity(len(h)), la.scale(h, dt))
    if classical and any(x < 0 for row in g for x in row):
        raise InvalidGenerator("dt too large: 1 + H dt has negative entries")
    return Transformation(g)


def inverse_generator(h, dt) -> Transformation:
    """``1 - H dt``, the first-order inverse of :func:`differential_generator`."""
    h = _check_h(h)
    return Transformation(la.sub(la.identity(len(h)), la.scale(h, dt)))


# -- reversal ------------------------------------------------------------------


def transition_matrices(w: Process, order: Sequence[str] | None = None) -> list[tuple]:
    """Conditional matrices ``p(next | prev)`` between consecutive variables.

    Reverse ``order`` to get the transition matrices of the time-reversed
    process.
    """
    order = tuple(w.names if order is None else order)
    out = []
    for a, b in zip(order, order[1:]):
        pair = marginal_array(w, (b, a))
        col = pair.sum(axis=0)
        if any(c == 0 for c in col):
            raise ZeroMarginal(f"{a} has a value of weight 0")
        n, m = pair.shape
        out.append(tuple(tuple(pair[j][i] / col[i] for i in range(m)) for j in range(n)))
    return out


# -- prepared quantum chains --------------------------------------------------


@dataclass(frozen=True)
class PreparedChain:
    """Two identical orthogonal chains from the same initial vector, final variables linked.

    ``initial=None`` gives the unprepared chain, whose two rails start from
    the white state instead. Stage ``t`` of the forward rail is ``x{t}``, of
    the backward rail ``x{t}'``.
    """

    generators: tuple
    initial: tuple | None = None

    def __post_init__(self):
        gens = tuple(as_transformation(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if self.initial is not None:
            v = la.vector(self.initial)
            if not any(v):
                raise InvalidInitial("initial vector is zero")
            object.__setattr__(self, "initial", v)
        dims = {g.dim for g in gens} | ({len(self.initial)} if self.initial is not None else set())
        if len(dims) > 1:
            raise DimMismatch("generators and initial vector disagree on dimension")
        for g in gens:
            if not g.is_unitary():
                raise NotUnitary("generator is not orthogonal")
        if self.initial is None and not gens:
            raise ValueError("an unprepared chain needs at least one step")

    @property
    def steps(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return self.generators[0].dim if self.generators else len(self.initial)

    def system(self) -> LinkSystem:
        boxes, links = [], []
        if self.initial is None:
            n = self.dim
            start = make_process([Variable("S.a", n), Variable("S.b", n)],
                                 [ONE if i == j else ZERO for i in range(n) for j in range(n)])
            boxes.append(Box("S", start))
            heads = ("S.a", "S.b")
        else:
            for tag in ("", "'"):
                boxes.append(Box(f"V{tag}", make_process([Variable(f"V{tag}.x", len(self.initial))],
                                                         self.initial)))
            heads = ("V.x", "V'.x")
        for tag, head in zip(("", "'"), heads):
            prev = head
            for k, g in enumerate(self.generators, start=1):
                name = f"G{k}{tag}"
                boxes.append(Box(name, g.as_process(f"{name}.in", f"{name}.out"), n_inputs=1))
                links.append((prev, f"{name}.in"))
                prev = f"{name}.out"
        links.append((self._raw(self.steps, ""), self._raw(self.steps, "'")))
        return LinkSystem(boxes, links)

    def _raw(self, t, tag):
        if t == 0:
            if self.initial is None:
                return "S.a" if tag == "" else "S.b"
            return f"V{tag}.x"
        return f"G{t}{tag}.out"

    def renaming(self) -> dict:
        out = {}
        for t in range(self.steps + 1):
            out[self._raw(t, "")] = f"x{t}"
            out[self._raw(t, "'")] = f"x{t}'"
        return out

    def process(self) -> Process:
        return apply_links(self.system()).rename(self.renaming())

    def stage_state(self, t: int) -> LinkState:
        """Link state where the forward rail leaves stage ``t``."""
        if not 0 <= t <= self.steps:
            raise StageOutOfRange(f"stage {t} outside 0..{self.steps}")
        system = self.system()
        return system_link_state(system, t if t < self.steps else len(system.links) - 1)

    def stage_distribution(self, t: int) -> tuple:
        if not 0 <= t <= self.steps:
            raise StageOutOfRange(f"stage {t} outside 0..{self.steps}")
        w = self.process()
        dist = marginal_array(w, (f"x{t}",))
        tot = w.total
        return tuple(d / tot for d in dist)


def quantum_prepared_chain(g, v, steps: int | None = None) -> Process:
    """Process of the prepared chain; ``g`` is one generator or a list of them."""
    gens = _generator_list(g, steps)
    return PreparedChain(gens, v).process()


def _is_single(g) -> bool:
    if isinstance(g, Transformation):
        return True
    first = g[0]
    return not isinstance(first, Transformation) and not isinstance(first[0], (tuple, list))


def _generator_list(g, steps):
    if _is_single(g):
        if steps is None:
            raise ValueError("steps is required with a single generator")
        return (g,) * steps
    gens = tuple(g)
    if steps is not None and steps != len(gens):
        raise DimMismatch(f"{len(gens)} generators given for {steps} steps")
    return gens


def double_boundary_chain(g1, g2, v, w, l1: int, l2: int) -> Process:
    """``l1`` steps of ``g1`` then ``l2`` steps of ``g2`` between boundary vectors ``v`` and ``w``."""
    g1, g2 = as_transformation(g1), as_transformation(g2)
    if g1.dim != g2.dim:
        raise DimMismatch("g1 and g2 dimensions differ")
    return chain_process([g1] * l1 + [g2] * l2, v, w)
