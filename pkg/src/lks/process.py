"""Finite processes with signed rational weights.

A :class:`Process` is an ordered list of discrete variables together with a
dense joint weight table. Weights may be negative and are never normalized
eagerly: the sum of all weights is carried as :attr:`Process.total` and only
divided out when a probability is asked for.

Variables are referred to by name. Wherever an operation accepts "a
variable" it also accepts a tuple of names, which stands for the joint
(secondary) variable whose values are tuples of member values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionCap,
    NameClash,
    NullNormalizer,
    OverlappingVariables,
    SizeMismatch,
    UnknownVariable,
)
from .linalg import rational

MAX_CASES = 2**20

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Variable:
    """A named discrete variable taking the values ``0 .. size-1``."""

    name: str
    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise ValueError(f"variable {self.name!r} needs a positive range, got {self.size!r}")


def _as_variable(v) -> Variable:
    if isinstance(v, Variable):
        return v
    name, size = v
    return Variable(str(name), int(size))


def members(var) -> tuple[str, ...]:
    """Member names of a (possibly secondary) variable reference."""
    if isinstance(var, str):
        return (var,)
    names = tuple(var)
    if len(set(names)) != len(names):
        raise OverlappingVariables(f"repeated member in {names!r}")
    return names


def _object_array(values, shape) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = list(values)
    return arr.reshape(shape)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class Process:
    """An immutable joint weight table over named variables.

    ``weights`` is a numpy object array of Fractions whose axes follow the
    variable order. Use :func:`make_process` to build one from a flat
    row-major list.
    """

    def __init__(self, variables: Sequence[Variable], weights: np.ndarray):
        variables = tuple(_as_variable(v) for v in variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise NameClash(f"duplicate variable names in {names}")
        shape = tuple(v.size for v in variables)
        if weights.shape != shape:
            raise SizeMismatch(f"weight array has shape {weights.shape}, expected {shape}")
        self.variables = variables
        self.weights = _freeze(weights)

    # -- basic accessors ---------------------------------------------------
    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.weights.shape

    def size(self, name: str) -> int:
        return self.variables[self.index(name)].size

    def index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise UnknownVariable(f"no variable {name!r} in process {self.names}")

    def __contains__(self, name) -> bool:
        return name in self.names

    def range_of(self, var) -> int:
        """Number of values of a primary or secondary variable."""
        return int(np.prod([self.size(m) for m in members(var)], dtype=object))

    @cached_property
    def total(self) -> Fraction:
        return sum(self.weights.flat, ZERO)

    @cached_property
    def classical(self) -> bool:
        return all(w >= 0 for w in self.weights.flat)

    @property
    def table(self) -> tuple[Fraction, ...]:
        """Flat row-major weight list."""
        return tuple(self.weights.flat)

    def weight(self, assignment) -> Fraction:
        """Weight of one full case, given as a mapping or a tuple in variable order."""
        if isinstance(assignment, dict):
            assignment = tuple(assignment[n] for n in self.names)
        return self.weights[tuple(assignment)]

    def cases(self):
        """Iterate over ``(case, weight)`` pairs in row-major order."""
        return zip(itertools.product(*(range(n) for n in self.shape)), self.weights.flat)

    def probabilities(self) -> np.ndarray:
        if self.total == 0:
            raise NullNormalizer("process has total weight 0")
        return self.weights / self.total

    # -- structural helpers ------------------------------------------------
    def reorder(self, names: Sequence[str]) -> "Process":
        names = tuple(names)
        if sorted(names) != sorted(self.names):
            raise UnknownVariable(f"{names} is not a permutation of {self.names}")
        axes = [self.index(n) for n in names]
        return Process([self.variables[i] for i in axes], self.weights.transpose(axes).copy())

    def rename(self, mapping: dict) -> "Process":
        return Process(
            [Variable(mapping.get(v.name, v.name), v.size) for v in self.variables],
            self.weights.copy(),
        )

    def scaled(self, factor) -> "Process":
        factor = rational(factor)
        return Process(self.variables, self.weights * factor)

    def __eq__(self, other):
        if not isinstance(other, Process):
            return NotImplemented
        return self.variables == other.variables and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.variables, self.table))

    def same_distribution(self, other: "Process") -> bool:
        """Equal variables and proportional weights (nonzero totals required)."""
        if self.variables != other.variables:
            return False
        return np.array_equal(self.weights * other.total, other.weights * self.total) and (
            (self.total == 0) == (other.total == 0)
        )

    def __repr__(self):
        vs = ", ".join(f"{v.name}:{v.size}" for v in self.variables)
        return f"Process([{vs}], total={self.total})"


def make_process(variables: Iterable, weights: Iterable) -> Process:
    variables = [_as_variable(v) for v in variables]
    shape = tuple(v.size for v in variables)
    count = int(np.prod(shape, dtype=object)) if shape else 1
    if count > MAX_CASES:
        raise DimensionCap(f"{count} joint cases exceeds the cap of {MAX_CASES}")
    values = [rational(w) for w in weights]
    if len(values) != count:
        raise SizeMismatch(f"{len(values)} weights given for {count} joint cases")
    return Process(variables, _object_array(values, shape))


def point_process() -> Process:
    """The process with no variables and a single case of weight 1."""
    return Process([], _object_array([ONE], ()))


def distribution(name: str, weights: Iterable) -> Process:
    weights = list(weights)
    return make_process([Variable(name, len(weights))], weights)


def white(name: str, n: int, weight=None) -> Process:
    w = Fraction(1, n) if weight is None else rational(weight)
    return make_process([Variable(name, n)], [w] * n)


def _check_cap(shape):
    count = int(np.prod(shape, dtype=object)) if shape else 1
    if count > MAX_CASES:
        raise DimensionCap(f"{count} joint cases exceeds the cap of {MAX_CASES}")


def product(w1: Process, w2: Process) -> Process:
    clash = set(w1.names) & set(w2.names)
    if clash:
        raise NameClash(f"variables {sorted(clash)} occur in both processes")
    _check_cap(w1.shape + w2.shape)
    arr = np.asarray(np.multiply.outer(w1.weights, w2.weights), dtype=object)
    return Process(w1.variables + w2.variables, arr)


def product_all(processes: Iterable[Process]) -> Process:
    return reduce(product, processes, point_process())


def _flatten_names(vars_) -> tuple[str, ...]:
    out = []
    for v in vars_:
        out.extend(members(v))
    return tuple(out)


def marginal_array(w: Process, names: Sequence[str]) -> np.ndarray:
    """Marginal weights on ``names`` (in that order); may be empty."""
    names = tuple(names)
    if len(set(names)) != len(names):
        raise OverlappingVariables(f"repeated variable in {names}")
    keep = [w.index(n) for n in names]
    drop = tuple(i for i in range(len(w.variables)) if i not in keep)
    arr = w.weights.sum(axis=drop) if drop else w.weights
    if not isinstance(arr, np.ndarray):
        arr = _object_array([arr], ())
    # remaining axes are in original order; permute to requested order
    remaining = sorted(keep)
    perm = [remaining.index(i) for i in keep]
    return arr.transpose(perm) if perm else arr


def marginal(w: Process, keep) -> Process:
    names = _flatten_names([keep] if isinstance(keep, str) else keep)
    if not names:
        raise ValueError("marginal needs at least one variable to keep")
    arr = marginal_array(w, names)
    return Process([w.variables[w.index(n)] for n in names], arr.copy())


def drop(w: Process, names) -> Process:
    gone = set(_flatten_names([names] if isinstance(names, str) else names))
    for n in gone:
        w.index(n)
    kept = [n for n in w.names if n not in gone]
    if not kept:
        return Process([], _object_array([w.total], ()))
    return marginal(w, kept)


# ---------------------------------------------------------------------------
# events
# ---------------------------------------------------------------------------


class Event:
    """A predicate on joint cases, closed under ``&``, ``|`` and ``~``."""

    def mask(self, w: Process) -> np.ndarray:
        raise NotImplementedError

    def variables(self) -> frozenset:
        raise NotImplementedError

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


def _axis_values(w: Process, name: str) -> np.ndarray:
    i = w.index(name)
    shape = [1] * len(w.shape)
    shape[i] = w.shape[i]
    return np.broadcast_to(np.arange(w.shape[i]).reshape(shape), w.shape)


@dataclass(frozen=True)
class Always(Event):
    def mask(self, w):
        return np.ones(w.shape, dtype=bool)

    def variables(self):
        return frozenset()


TRUE = Always()


@dataclass(frozen=True)
class Is(Event):
    """``var = value`` for a primary variable."""

    var: str
    value: int

    def mask(self, w):
        return _axis_values(w, self.var) == self.value

    def variables(self):
        return frozenset([self.var])


@dataclass(frozen=True)
class In(Event):
    """``var`` takes one of ``values``."""

    var: str
    values: frozenset

    def __init__(self, var, values):
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "values", frozenset(values))

    def mask(self, w):
        return np.isin(_axis_values(w, self.var), sorted(self.values))

    def variables(self):
        return frozenset([self.var])


@dataclass(frozen=True)
class Same(Event):
    """``x = y``; for secondary variables every member pair must agree."""

    x: object
    y: object

    def mask(self, w):
        xs, ys = members(self.x), members(self.y)
        if len(xs) != len(ys):
            raise OverlappingVariables(f"cannot compare {xs} with {ys}")
        out = np.ones(w.shape, dtype=bool)
        for a, b in zip(xs, ys):
            out &= _axis_values(w, a) == _axis_values(w, b)
        return out

    def variables(self):
        return frozenset(members(self.x) + members(self.y))


@dataclass(frozen=True)
class And(Event):
    parts: tuple

    def __init__(self, *parts):
        object.__setattr__(self, "parts", tuple(parts))

    def mask(self, w):
        out = np.ones(w.shape, dtype=bool)
        for p in self.parts:
            out &= p.mask(w)
        return out

    def variables(self):
        return frozenset().union(*(p.variables() for p in self.parts))


@dataclass(frozen=True)
class Or(Event):
    parts: tuple

    def __init__(self, *parts):
        object.__setattr__(self, "parts", tuple(parts))

    def mask(self, w):
        out = np.zeros(w.shape, dtype=bool)
        for p in self.parts:
            out |= p.mask(w)
        return out

    def variables(self):
        return frozenset().union(*(p.variables() for p in self.parts))


@dataclass(frozen=True)
class Not(Event):
    part: Event

    def mask(self, w):
        return ~self.part.mask(w)

    def variables(self):
        return self.part.variables()


def condition(w: Process, event: Event) -> Process:
    """Zero the weights of cases failing ``event``; no renormalization."""
    keep = event.mask(w)
    out = np.where(keep, w.weights, ZERO).astype(object)
    return Process(w.variables, out)


def weight_of(w: Process, event: Event) -> Fraction:
    return sum(w.weights[event.mask(w)], ZERO)


def probability(w: Process, event: Event) -> Fraction:
    if w.total == 0:
        raise NullNormalizer("probability is undefined for a total-0 process")
    return weight_of(w, event) / w.total


# ---------------------------------------------------------------------------
# independence, separability, Markov property
# ---------------------------------------------------------------------------


def _check_partition(w: Process, parts) -> list[tuple[str, ...]]:
    parts = [_flatten_names([p] if isinstance(p, str) else p) for p in parts]
    flat = [n for p in parts for n in p]
    for n in flat:
        w.index(n)
    if sorted(flat) != sorted(w.names) or any(not p for p in parts):
        raise ValueError(f"{parts} is not a partition of {w.names}")
    return parts


def _product_rule_holds(w: Process, parts) -> bool:
    """``w * total**(k-1) == prod(part marginals)`` on every case."""
    order = [n for p in parts for n in p]
    joint = w.reorder(order).weights
    factors = [marginal_array(w, p) for p in parts]
    rhs = reduce(np.multiply.outer, factors)
    lhs = joint * (w.total ** (len(parts) - 1))
    return bool(np.array_equal(lhs, rhs))


def is_independent(w: Process, parts) -> bool:
    """Product-rule independence of the given partition of the variables."""
    parts = _check_partition(w, parts)
    if w.total == 0:
        raise NullNormalizer("independence is undefined for a total-0 process")
    return _product_rule_holds(w, parts)


def _group(var) -> tuple[str, ...]:
    if var is None:
        return ()
    if isinstance(var, str):
        return (var,)
    return _flatten_names(var)


def separates(w: Process, a, b, c) -> bool:
    """True when ``b`` separates ``a`` from ``c``.

    Checks ``w(a,b,c) w(b) == w(a,b) w(b,c)`` on every value combination,
    using marginal weights so the test also makes sense when totals vanish.
    Each argument may be a name, a tuple of names, or empty.
    """
    ga, gb, gc = _group(a), _group(b), _group(c)
    if set(ga) & set(gb) or set(ga) & set(gc) or set(gb) & set(gc):
        raise OverlappingVariables(f"{ga}, {gb}, {gc} are not disjoint")
    rng = lambda g: int(np.prod([w.size(n) for n in g], dtype=object)) if g else 1
    m = marginal_array(w, ga + gb + gc).reshape(rng(ga), rng(gb), rng(gc))
    w_ab = m.sum(axis=2)
    w_bc = m.sum(axis=0)
    w_b = w_ab.sum(axis=0)
    lhs = m * w_b[None, :, None]
    rhs = w_ab[:, :, None] * w_bc[None, :, :]
    return bool(np.array_equal(lhs, rhs))


betweenness = separates


def markov_check(w: Process, order: Sequence[str] | None = None) -> bool:
    """Each variable separates those before it from those after it."""
    order = tuple(w.names if order is None else order)
    if sorted(order) != sorted(w.names):
        for n in order:
            w.index(n)
        raise UnknownVariable(f"{order} is not a permutation of {w.names}")
    return all(separates(w, order[:t], order[t], order[t + 1:]) for t in range(len(order)))


def order_property(w: Process, order: Sequence[str] | None = None) -> bool:
    """Whether the betweenness relation pins down the given linear order.

    Every consecutive triple ``(x, y, z)`` must satisfy ``B(x,y,z)`` while
    ``B(y,x,z)`` and ``B(x,z,y)`` fail. Fewer than three variables hold
    vacuously.
    """
    order = tuple(w.names if order is None else order)
    for x, y, z in zip(order, order[1:], order[2:]):
        if not separates(w, x, y, z):
            return False
        if separates(w, y, x, z) or separates(w, x, z, y):
            return False
    return True


def prime_factorize(w: Process) -> list[tuple[str, ...]]:
    """The finest partition of the variables into mutually independent parts.

    First joins variables whose pairwise product rule fails (any independent
    part must contain both or neither), then splits the resulting blocks by
    the full joint product rule, looking for the smallest group of blocks
    that is independent of everything else.
    """
    if w.total == 0:
        raise NullNormalizer("prime factorization is undefined for a total-0 process")
    names = w.names
    parent = list(range(len(names)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(names)), 2):
        if find(i) == find(j):
            continue
        pair = marginal(w, [names[i], names[j]])
        if not _product_rule_holds(pair, [(names[i],), (names[j],)]):
            parent[find(j)] = find(i)
    blocks: dict[int, list[str]] = {}
    for i, n in enumerate(names):
        blocks.setdefault(find(i), []).append(n)
    units = [tuple(b) for b in blocks.values()]

    parts = []
    while units:
        if len(units) == 1:
            parts.append(units[0])
            break
        head, rest = units[0], units[1:]
        sub = marginal(w, [n for u in units for n in u])
        chosen = None
        for k in range(0, len(rest)):
            for extra in itertools.combinations(range(len(rest)), k):
                group = head + tuple(n for e in extra for n in rest[e])
                others = tuple(n for i, u in enumerate(rest) if i not in extra for n in u)
                if not others or _product_rule_holds(sub, [group, others]):
                    chosen = (group, set(extra))
                    break
            if chosen:
                break
        if chosen is None:
            parts.append(tuple(n for u in units for n in u))
            break
        group, extra = chosen
        parts.append(group)
        units = [u for i, u in enumerate(rest) if i not in extra]
    order = {n: i for i, n in enumerate(names)}
    return sorted((tuple(sorted(p, key=order.get)) for p in parts), key=lambda p: order[p[0]])
