"""Links, cuts and link states.

Linking ``x`` to ``y`` conditions a process on ``x = y`` and then drops
``y``. The joint weight matrix of ``x`` and ``y`` before the link is the
state of the link; it behaves as a density matrix, with ``x`` as the column
index and ``y`` as the row index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import (
    ImproperSystem,
    NotSeparable,
    NullNormalizer,
    RangeMismatch,
    SingularD,
    UnknownVariable,
    ZeroMarginal,
)
from .process import (
    ZERO,
    Process,
    Variable,
    drop,
    marginal,
    marginal_array,
    members,
    point_process,
    product,
    separates,
)
from .process import _check_cap as check_cap


# ---------------------------------------------------------------------------
# states and projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinkState:
    """Square rational matrix; ``matrix[row][col]`` is ``w(y=row, x=col)``."""

    matrix: tuple

    def __post_init__(self):
        m = la.matrix(self.matrix)
        if not la.is_square(m):
            raise RangeMismatch("a link state must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def trace(self) -> Fraction:
        return la.trace(self.matrix)

    @property
    def total(self) -> Fraction:
        return la.total(self.matrix)

    @property
    def diagonal(self) -> tuple:
        return la.diagonal(self.matrix)

    def normalized(self) -> "LinkState":
        """Divide by the sum of all entries, i.e. the total of the unlinked process."""
        if self.total == 0:
            raise NullNormalizer("state has total weight 0")
        return LinkState(la.scale(self.matrix, 1 / self.total))

    def transpose(self) -> "LinkState":
        return LinkState(la.transpose(self.matrix))

    def scaled(self, c) -> "LinkState":
        return LinkState(la.scale(self.matrix, c))

    @classmethod
    def pure(cls, ket, bra) -> "LinkState":
        """``|ket><bra|``: rows follow ``ket``, columns follow ``bra``."""
        return cls(la.outer(la.vector(ket), la.vector(bra)))

    @classmethod
    def white(cls, n, scale=1) -> "LinkState":
        return cls(la.scale(la.identity(n), scale))


@dataclass(frozen=True)
class Projection:
    """A diagonal 0/1 matrix, stored as its diagonal bits."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"projection bits must be 0 or 1, got {bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def dim(self):
        return len(self.bits)

    @property
    def matrix(self):
        return la.diag(self.bits)

    @classmethod
    def identity(cls, n):
        return cls((1,) * n)

    @classmethod
    def onto(cls, n, values):
        values = set(values)
        return cls(tuple(int(i in values) for i in range(n)))

    def complement(self) -> "Projection":
        return Projection(tuple(1 - b for b in self.bits))

    def values(self) -> tuple:
        return tuple(i for i, b in enumerate(self.bits) if b)


def born(p: Projection, s: LinkState) -> Fraction:
    """``tr(PS) / tr(S)``."""
    if p.dim != s.dim:
        raise RangeMismatch(f"projection of dim {p.dim} against state of dim {s.dim}")
    tr = s.trace
    if tr == 0:
        raise NullNormalizer("state has trace 0")
    return la.trace(la.matmul(p.matrix, s.matrix)) / tr


@dataclass(frozen=True)
class StateClass:
    pure: bool
    causal: bool
    quantum: bool
    white: bool
    sharp: bool
    white_scale: Fraction | None = None


def classify_state(s: LinkState) -> StateClass:
    m = s.matrix
    pure = la.minors_vanish(m)
    # rank 1 with a uniform factor on either side
    cols = la.transpose(m)
    uniform = all(row == m[0] for row in m) or all(col == cols[0] for col in cols)
    causal = pure and uniform and any(x for row in m for x in row)
    quantum = la.is_symmetric(m)
    c = m[0][0]
    white = c > 0 and m == la.scale(la.identity(s.dim), c)
    sharp = sum(1 for row in m for x in row if x != 0) == 1
    return StateClass(pure, causal, quantum, white, sharp, c if white else None)


# ---------------------------------------------------------------------------
# link and link state
# ---------------------------------------------------------------------------


def _pairs(w: Process, x, y) -> list[tuple[str, str]]:
    xs, ys = members(x), members(y)
    if len(xs) != len(ys):
        raise RangeMismatch(f"{xs} and {ys} have different numbers of members")
    for a, b in zip(xs, ys):
        if w.size(a) != w.size(b):
            raise RangeMismatch(f"{a} has range {w.size(a)} but {b} has range {w.size(b)}")
    return list(zip(xs, ys))


def _link_primary(w: Process, x: str, y: str) -> Process:
    if x == y:
        return drop(w, [x])
    ix, iy = w.index(x), w.index(y)
    rest = [i for i in range(len(w.variables)) if i not in (ix, iy)]
    arr = np.diagonal(w.weights.transpose(rest + [ix, iy]), axis1=-2, axis2=-1)
    # diagonal axis comes last; put it back where x was among the survivors
    survivors = [i for i in range(len(w.variables)) if i != iy]
    pos = survivors.index(ix)
    arr = np.moveaxis(arr, -1, pos).copy()
    return Process([w.variables[i] for i in survivors], arr)


def link(w: Process, x, y) -> Process:
    """Condition on ``x = y`` and drop ``y`` (with all of its members).

    The result is not renormalized: its total is the weight of ``x = y``.
    """
    pairs = _pairs(w, x, y)
    for a, b in pairs:
        w.index(a)
        w.index(b)
    for a, b in pairs:
        w = _link_primary(w, a, b)
    return w


def _square(w: Process, x, y) -> tuple:
    xs, ys = members(x), members(y)
    _pairs(w, x, y)
    n = w.range_of(x)
    if set(xs) & set(ys):
        raise RangeMismatch("state of a link between overlapping variables is only defined for x = x")
    return marginal_array(w, ys + xs).reshape(n, n)


def link_state(w: Process, x, y) -> LinkState:
    """Joint weight matrix of ``y`` (rows) and ``x`` (columns) in ``w``."""
    if members(x) == members(y):
        return variable_state(w, x)
    return LinkState(tuple(tuple(row) for row in _square(w, x, y)))


def variable_state(w: Process, x) -> LinkState:
    xs = members(x)
    for n in xs:
        w.index(n)
    dist = marginal_array(w, xs).reshape(-1)
    return LinkState(la.diag(list(dist)))


# ---------------------------------------------------------------------------
# disconnection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cut:
    """Result of disconnecting a process at a variable.

    ``process`` is the product of the two independent sides; ``fresh`` is the
    new white variable on the right side. Linking ``at`` to ``fresh`` gives
    the original weights divided by ``normalizer``.
    """

    process: Process
    at: str
    fresh: str
    normalizer: Fraction
    left: tuple
    right: tuple
    original_order: tuple

    def relink(self) -> Process:
        joined = link(self.process, self.at, self.fresh).scaled(self.normalizer)
        return joined.reorder(self.original_order)

    def parts(self) -> tuple[Process, Process]:
        lhs = marginal(self.process, self.left + (self.at,))
        rhs = marginal(self.process, (self.fresh,) + self.right)
        return lhs, rhs


def causal_cut(w: Process, x: str, left=None, fresh: str | None = None, check: bool = True) -> Cut:
    """Disconnect ``w`` at ``x`` into ``left & x`` and ``x' & right``.

    ``left`` defaults to the variables before ``x`` in ``w``'s order; the
    right side is everything else. With ``check=False`` the construction is
    carried out even when ``x`` does not separate the two sides.
    """
    ix = w.index(x)
    left = tuple(w.names[:ix]) if left is None else tuple(members(left) if left else ())
    for n in left:
        w.index(n)
    if x in left:
        raise ValueError("the cut variable cannot be on the left side")
    right = tuple(n for n in w.names if n != x and n not in left)
    fresh = fresh or f"{x}'"
    if fresh in w.names:
        raise ValueError(f"fresh variable name {fresh!r} already used")
    marg_x = marginal_array(w, (x,))
    if any(v == 0 for v in marg_x):
        raise ZeroMarginal(f"some value of {x} has weight 0")
    if check and not separates(w, left, x, right):
        raise NotSeparable(f"{x} does not separate {left} from {right}")

    lhs = marginal(w, left + (x,))
    xr = marginal_array(w, (x,) + right).reshape(w.size(x), -1)
    cond = np.array([[v / marg_x[k] for v in xr[k]] for k in range(w.size(x))], dtype=object)
    n = sum(1 for k in range(w.size(x)) if any(v != 0 for v in cond[k]))
    right_shape = tuple(w.size(r) for r in right)
    rhs_arr = (cond * Fraction(1, n)).reshape((w.size(x),) + right_shape)
    rhs = Process([Variable(fresh, w.size(x))] + [Variable(r, w.size(r)) for r in right], rhs_arr)
    return Cut(product(lhs, rhs), x, fresh, Fraction(n), left, right, w.names)


def equivalent_cut(w: Process, x: str, y: str, d) -> Process:
    """Scale cases by ``D[x]`` and by ``1/D[y]``.

    ``d`` is the diagonal of ``D`` (or a diagonal matrix). Linking ``x`` to
    ``y`` gives the same process before and after.
    """
    if d and isinstance(d[0], (tuple, list)):
        m = la.matrix(d)
        if any(m[i][j] != 0 for i in range(len(m)) for j in range(len(m)) if i != j):
            raise SingularD("D must be diagonal")
        d = la.diagonal(m)
    d = la.vector(d)
    if any(v == 0 for v in d):
        raise SingularD("D has a zero on its diagonal")
    if len(d) != w.size(x) or len(d) != w.size(y):
        raise RangeMismatch("D does not match the ranges of x and y")
    ix, iy = w.index(x), w.index(y)
    shape = [1] * len(w.shape)
    sx, sy = list(shape), list(shape)
    sx[ix] = len(d)
    sy[iy] = len(d)
    dx = np.array(d, dtype=object).reshape(sx)
    dy = np.array([1 / v for v in d], dtype=object).reshape(sy)
    return Process(w.variables, w.weights * dx * dy)


# ---------------------------------------------------------------------------
# link systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Link:
    first: object
    second: object

    def __post_init__(self):
        object.__setattr__(self, "first", _ref(self.first))
        object.__setattr__(self, "second", _ref(self.second))

    def pairs(self):
        return list(zip(members(self.first), members(self.second)))

    def names(self):
        return members(self.first) + members(self.second)


def _ref(v):
    if isinstance(v, str):
        return v
    v = tuple(v)
    return v[0] if len(v) == 1 else v


@dataclass(frozen=True)
class Box:
    """A named component. The first ``n_inputs`` variables are its inputs."""

    name: str
    process: Process
    n_inputs: int = 0

    @property
    def inputs(self):
        return self.process.names[: self.n_inputs]

    @property
    def outputs(self):
        return self.process.names[self.n_inputs:]


@dataclass(frozen=True)
class LinkSystem:
    boxes: tuple = ()
    links: tuple = ()
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "links", tuple(
            l if isinstance(l, Link) else Link(*l) for l in self.links))

    def __eq__(self, other):
        if not isinstance(other, LinkSystem):
            return NotImplemented
        key = lambda s: (sorted(((b.name, b.n_inputs, b.process.variables, b.process.table)
                                 for b in s.boxes), key=repr),
                         sorted(map(repr, s.links)))
        return key(self) == key(other)

    __hash__ = None

    @property
    def components(self) -> tuple[Process, ...]:
        return tuple(b.process for b in self.boxes)

    def owner(self, name: str) -> int:
        for i, b in enumerate(self.boxes):
            if name in b.process.names:
                return i
        raise UnknownVariable(f"no component has a variable {name!r}")

    def validate(self) -> None:
        """Raise :class:`ImproperSystem` unless the system is proper."""
        seen = {}
        names = [n for b in self.boxes for n in b.process.names]
        if len(set(names)) != len(names):
            raise ImproperSystem("variable names are not unique across components")
        for k, l in enumerate(self.links):
            for a, b in l.pairs():
                try:
                    ia, ib = self.owner(a), self.owner(b)
                except UnknownVariable as e:
                    raise ImproperSystem(str(e)) from None
                if ia == ib:
                    raise ImproperSystem(
                        f"link {k} joins {a} and {b} inside component {self.boxes[ia].name!r}")
                sa = self.boxes[ia].process.size(a)
                sb = self.boxes[ib].process.size(b)
                if sa != sb:
                    raise RangeMismatch(f"link {k}: {a} has range {sa}, {b} has range {sb}")
                for n in (a, b):
                    if n in seen:
                        raise ImproperSystem(f"variable {n!r} is used by links {seen[n]} and {k}")
                    seen[n] = k

    def without_link(self, k: int) -> "LinkSystem":
        return LinkSystem(self.boxes, self.links[:k] + self.links[k + 1:], self.meta)

    def surviving_names(self) -> tuple[str, ...]:
        dropped = {b for l in self.links for _, b in l.pairs()}
        return tuple(n for b in self.boxes for n in b.process.names if n not in dropped)


def apply_links(system: LinkSystem, order: Sequence[int] | None = None) -> Process:
    """The process produced by a proper link system.

    Without ``order`` components are merged as links require, which keeps
    intermediates small. With ``order`` (a permutation of link indices) all
    components are multiplied out first and the links applied literally in
    that order. Both routes return variables in component order.
    """
    system.validate()
    target = system.surviving_names()
    if order is not None:
        order = list(order)
        if sorted(order) != list(range(len(system.links))):
            raise ValueError(f"{order} is not a permutation of the links")
        w = point_process()
        for b in system.boxes:
            w = product(w, b.process)
        for k in order:
            l = system.links[k]
            w = link(w, l.first, l.second)
        return w.reorder(target) if target else w

    w = point_process()
    for p in _contract(system):
        w = product(w, p)
    return w.reorder(target) if target else w


def _contract(system: LinkSystem) -> list[Process]:
    """Apply every link, merging components only as needed; returns the independent blocks."""
    blocks: list[Process] = [b.process for b in system.boxes]
    pending = [pair for l in system.links for pair in l.pairs()]

    def where(name):
        for i, p in enumerate(blocks):
            if name in p.names:
                return i
        raise UnknownVariable(name)

    def cost(pair):
        ia, ib = where(pair[0]), where(pair[1])
        n = blocks[ia].size(pair[0])
        size = _cases(blocks[ia]) * (1 if ia == ib else _cases(blocks[ib]))
        return size // n

    # greedy: always perform the contraction with the smallest result
    while pending:
        a, b = min(pending, key=cost)
        pending.remove((a, b))
        ia, ib = where(a), where(b)
        if ia == ib:
            blocks[ia] = link(blocks[ia], a, b)
        else:
            blocks[ia] = _linked_product(blocks[ia], blocks[ib], a, b)
            del blocks[ib]
    return blocks


def _cases(w: Process) -> int:
    return int(np.prod(w.shape, dtype=object)) if w.shape else 1


def _linked_product(a: Process, b: Process, x: str, y: str) -> Process:
    """``link(product(a, b), x, y)`` without building the full product."""
    ix, iy = a.index(x), b.index(y)
    if a.size(x) != b.size(y):
        raise RangeMismatch(f"{x} has range {a.size(x)} but {y} has range {b.size(y)}")
    rest = [i for i in range(len(b.variables)) if i != iy]
    rest_shape = tuple(b.shape[i] for i in rest)
    check_cap(a.shape + rest_shape)
    aligned = [1] * len(a.shape)
    aligned[ix] = a.shape[ix]
    barr = b.weights.transpose([iy] + rest).reshape(tuple(aligned) + rest_shape)
    aarr = a.weights.reshape(a.shape + (1,) * len(rest))
    return Process(a.variables + tuple(b.variables[i] for i in rest), aarr * barr)


def system_link_state(system: LinkSystem, k: int) -> LinkState:
    """State of link ``k``: all other links applied, this one left open."""
    l = system.links[k]
    rest = system.without_link(k)
    rest.validate()
    keep = set(l.names())
    # marginals of independent blocks multiply, so shrink each block first
    w = point_process()
    for p in _contract(rest):
        w = product(w, marginal(p, [n for n in p.names if n in keep]))
    return link_state(w, l.first, l.second)


def all_orderings(system: LinkSystem):
    return itertools.permutations(range(len(system.links)))
