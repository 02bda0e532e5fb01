"""Complex weights as 2x2 real matrices, and velocity composition by linking coins.

A complex weight ``a + bi`` is the joint table of two binary indices
``(j, k)`` with ``C[1,1] = C[2,2] = a`` and ``C[1,2] = -C[2,1] = b``. Multiplying
two such tables is linking the second index of the first to the first index
of the second and summing it out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .chain import PreparedChain
from .errors import NotComplexShaped, NullNormalizer, SingularBoost
from .link import link
from .measurement import Probe, ProbePlan, record_distribution
from .process import Process, Variable, make_process, marginal, product


@dataclass(frozen=True)
class ComplexWeight:
    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", la.rational(self.a))
        object.__setattr__(self, "b", la.rational(self.b))

    @property
    def matrix(self) -> tuple:
        a, b = self.a, self.b
        return ((a, b), (-b, a))

    def entry(self, j: int, k: int) -> Fraction:
        """Matrix entry with 1-based indices."""
        if j not in (1, 2) or k not in (1, 2):
            raise IndexError("indices are 1 or 2")
        return self.matrix[j - 1][k - 1]

    def conjugate(self) -> "ComplexWeight":
        return ComplexWeight(self.a, -self.b)

    def norm2(self) -> Fraction:
        return self.a * self.a + self.b * self.b

    def __mul__(self, other):
        other = as_complex(other)
        return ComplexWeight(self.a * other.a - self.b * other.b, self.a * other.b + self.b * other.a)

    def __add__(self, other):
        other = as_complex(other)
        return ComplexWeight(self.a + other.a, self.b + other.b)

    def __neg__(self):
        return ComplexWeight(-self.a, -self.b)

    def __str__(self):
        return f"{self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}i"


def as_complex(z) -> ComplexWeight:
    if isinstance(z, ComplexWeight):
        return z
    if isinstance(z, tuple) and len(z) == 2:
        return ComplexWeight(*z)
    return ComplexWeight(z)


I = ComplexWeight(0, 1)


def complex_to_joint(c, j: str = "j", k: str = "k") -> Process:
    c = as_complex(c)
    return make_process([Variable(j, 2), Variable(k, 2)], [x for row in c.matrix for x in row])


def joint_to_complex(w: Process) -> ComplexWeight:
    if len(w.variables) != 2 or w.shape != (2, 2):
        raise NotComplexShaped(f"expected a joint table over two binary variables, got {w.shape}")
    m = w.table
    (c11, c12), (c21, c22) = m[0:2], m[2:4]
    if c11 != c22 or c12 != -c21:
        raise NotComplexShaped(f"table {m} violates C11 = C22, C12 = -C21")
    return ComplexWeight(c11, c12)


def product_by_matrix(c, c2) -> ComplexWeight:
    m = la.matmul(as_complex(c).matrix, as_complex(c2).matrix)
    return ComplexWeight(m[0][0], m[0][1])


def product_by_contraction(c, c2) -> ComplexWeight:
    """Link ``k`` of the first table to ``j'`` of the second, then sum ``k`` out."""
    w = product(complex_to_joint(c, "j", "k"), complex_to_joint(c2, "j'", "k'"))
    w = link(w, "k", "j'")
    return joint_to_complex(marginal(w, ["j", "k'"]))


def complex_product(c, c2) -> ComplexWeight:
    """Product computed both ways; raises AssertionError if the two routes disagree."""
    x, y = product_by_matrix(c, c2), product_by_contraction(c, c2)
    if x != y:
        raise AssertionError(f"matrix route {x} differs from contraction route {y}")
    return x


# -- coins and boosts ----------------------------------------------------------


@dataclass(frozen=True)
class CoinProcess:
    """Coin with (possibly signed) weights ``p`` for heads and ``q`` for tails."""

    p: Fraction
    q: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", la.rational(self.p))
        object.__setattr__(self, "q", la.rational(self.q))
        if self.p + self.q == 0:
            raise NullNormalizer("p + q = 0")

    @property
    def velocity(self) -> Fraction:
        return (self.p - self.q) / (self.p + self.q)

    @classmethod
    def from_velocity(cls, v) -> "CoinProcess":
        v = la.rational(v)
        return cls((1 + v) / 2, (1 - v) / 2)

    def process(self, name: str = "x") -> Process:
        return make_process([Variable(name, 2)], [self.p, self.q])


def boost_compose(v, v2) -> Fraction:
    v, v2 = la.rational(v), la.rational(v2)
    if 1 + v * v2 == 0:
        raise SingularBoost(f"1 + v v' = 0 for v={v}, v'={v2}")
    return (v + v2) / (1 + v * v2)


def boost_by_link(v, v2) -> Fraction:
    """Velocity of the process obtained by linking two coins' outcomes."""
    w = product(CoinProcess.from_velocity(v).process("x"), CoinProcess.from_velocity(v2).process("x'"))
    p, q = link(w, "x", "x'").table
    if p + q == 0:
        raise SingularBoost("linked coins have total weight 0")
    return CoinProcess(p, q).velocity


# -- real embedding of complex chains -------------------------------------------


def embed_matrix(u: Sequence[Sequence]) -> tuple:
    """Real ``2n x 2n`` form of a complex matrix: value ``i`` becomes indices ``2i`` (real) and ``2i+1`` (imaginary)."""
    n = len(u)
    out = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for r in range(n):
        for c in range(n):
            z = as_complex(u[r][c])
            # column-vector convention: the block is the transpose of z's matrix view
            out[2 * r][2 * c], out[2 * r][2 * c + 1] = z.a, -z.b
            out[2 * r + 1][2 * c], out[2 * r + 1][2 * c + 1] = z.b, z.a
    return tuple(tuple(row) for row in out)


def embed_vector(v: Sequence) -> tuple:
    return tuple(x for z in v for x in (as_complex(z).a, as_complex(z).b))


def complex_record_distribution(generators, v, stages, phase=None) -> dict:
    """Records of probing a complex chain through its real embedding.

    Each probe groups the real and imaginary index of one value, so it
    measures the complex basis value. ``phase`` multiplies the initial vector.
    """
    v = [as_complex(z) for z in v]
    if phase is not None:
        v = [as_complex(phase) * z for z in v]
    gens = [embed_matrix(g) for g in generators]
    n = len(v)
    f = tuple(i // 2 for i in range(2 * n))
    chain = PreparedChain(tuple(gens), embed_vector(v))
    return record_distribution(ProbePlan(chain, [Probe(t, f) for t in stages]))
