"""Exact rational matrix helpers.

Matrices are tuples of row tuples of :class:`fractions.Fraction`; vectors are
tuples. Everything here is exact, so equality tests are meaningful.
"""

from fractions import Fraction
from numbers import Rational

from .errors import DimMismatch, SingularT

Vector = tuple
Matrix = tuple


def rational(value) -> Fraction:
    """Coerce ``value`` to a Fraction, refusing floats.

    Strings such as ``"3/5"`` or ``"-2"`` are accepted.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (Rational, str)) and not isinstance(value, bool):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {value!r}")


def vector(values) -> Vector:
    return tuple(rational(v) for v in values)


def matrix(rows) -> Matrix:
    rows = tuple(vector(r) for r in rows)
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise DimMismatch("ragged matrix rows")
    return rows


def shape(m):
    return (len(m), len(m[0]) if m else 0)


def is_square(m):
    return all(len(r) == len(m) for r in m)


def identity(n) -> Matrix:
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def zeros(n, k=None) -> Matrix:
    k = n if k is None else k
    return tuple((Fraction(0),) * k for _ in range(n))


def diag(values) -> Matrix:
    values = vector(values)
    n = len(values)
    return tuple(
        tuple(values[i] if i == j else Fraction(0) for j in range(n)) for i in range(n)
    )


def diagonal(m) -> Vector:
    return tuple(m[i][i] for i in range(len(m)))


def transpose(m) -> Matrix:
    return tuple(zip(*m)) if m else ()


def matmul(a, b) -> Matrix:
    if shape(a)[1] != len(b):
        raise DimMismatch(f"cannot multiply {shape(a)} by {shape(b)}")
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def matvec(a, v) -> Vector:
    if shape(a)[1] != len(v):
        raise DimMismatch(f"cannot apply {shape(a)} matrix to length-{len(v)} vector")
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def matpow(a, k) -> Matrix:
    result = identity(len(a))
    for _ in range(k):
        result = matmul(a, result)
    return result


def add(a, b) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a, b) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def scale(a, c) -> Matrix:
    c = rational(c)
    return tuple(tuple(c * x for x in row) for row in a)


def outer(u, v) -> Matrix:
    return tuple(tuple(x * y for y in v) for x in u)


def trace(m) -> Fraction:
    return sum(diagonal(m), Fraction(0))


def total(m) -> Fraction:
    return sum((x for row in m for x in row), Fraction(0))


def column_sums(m) -> Vector:
    return tuple(sum(col, Fraction(0)) for col in transpose(m))


def is_symmetric(m) -> bool:
    return m == transpose(m)


def inverse(m) -> Matrix:
    """Gauss-Jordan inverse; raises :class:`SingularT` for singular input."""
    n = len(m)
    if not is_square(m):
        raise DimMismatch("only square matrices have inverses")
    work = [list(row) + list(e) for row, e in zip(m, identity(n))]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            raise SingularT("matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        p = work[col][col]
        work[col] = [x / p for x in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return tuple(tuple(row[n:]) for row in work)


def rank(m) -> int:
    work = [list(row) for row in m]
    rows, cols = shape(m)
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        for i in range(r + 1, rows):
            if work[i][c] != 0:
                f = work[i][c] / work[r][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        r += 1
        if r == rows:
            break
    return r


def is_invertible(m) -> bool:
    return is_square(m) and rank(m) == len(m)


def minors_vanish(m) -> bool:
    """True when every 2x2 minor is zero, i.e. rank <= 1."""
    rows, cols = shape(m)
    for i in range(rows):
        for k in range(i + 1, rows):
            for j in range(cols):
                for l in range(j + 1, cols):
                    if m[i][j] * m[k][l] != m[i][l] * m[k][j]:
                        return False
    return True


def format_rational(q) -> str:
    return str(rational(q))


def format_matrix(m):
    return [[format_rational(x) for x in row] for row in m]
