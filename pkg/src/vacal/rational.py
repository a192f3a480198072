"""Exact rational scalars and small dense linear algebra over Q."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Union

Scalar = Fraction
Vector = tuple  # tuple[Fraction, ...]
ScalarLike = Union[int, str, Fraction]


def q(x: ScalarLike) -> Fraction:
    """Parse an exact rational. Floats are refused to keep the boundary exact."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not s:
            raise ValueError("empty scalar")
        return Fraction(s)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def vec(xs: Iterable[ScalarLike]) -> tuple:
    return tuple(q(x) for x in xs)


def zeros(n: int) -> tuple:
    return (Fraction(0),) * n


def unit(n: int, i: int) -> tuple:
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def add(a: Sequence, b: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def scale(c, a: Sequence) -> tuple:
    return tuple(c * x for x in a)


def neg(a: Sequence) -> tuple:
    return tuple(-x for x in a)


def is_zero(a: Sequence) -> bool:
    return all(x == 0 for x in a)


def matvec(M: Sequence[Sequence], x: Sequence) -> tuple:
    return tuple(dot(row, x) for row in M)


def transpose(M: Sequence[Sequence], ncols: int | None = None) -> tuple:
    if not M:
        return tuple(() for _ in range(ncols or 0))
    return tuple(tuple(row[j] for row in M) for j in range(len(M[0])))


def as_matrix(M: Iterable[Iterable[ScalarLike]]) -> tuple:
    return tuple(vec(row) for row in M)


def identity(n: int) -> tuple:
    return tuple(unit(n, i) for i in range(n))


def integerize(v: Sequence) -> tuple[int, ...]:
    """Positive rescaling of a rational vector to a primitive integer vector."""
    dens = 1
    for x in v:
        x = Fraction(x)
        dens = dens * x.denominator // gcd(dens, x.denominator)
    ints = [int(Fraction(x) * dens) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


def primitive(v: Sequence) -> tuple:
    return tuple(Fraction(x) for x in integerize(v))


def rref(rows: Iterable[Sequence], ncols: int) -> tuple[tuple, tuple[int, ...]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return tuple(tuple(row) for row in m[:r]), tuple(pivots)


def rank(rows: Iterable[Sequence], ncols: int) -> int:
    return len(rref(rows, ncols)[0])


def nullspace(rows: Iterable[Sequence], ncols: int) -> tuple:
    """Basis of {x : row . x = 0 for every row}, in a canonical (RREF-derived) form."""
    R, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(R, piv):
            x[p] = -row[f]
        basis.append(tuple(x))
    return tuple(basis)


def reduce_mod(v: Sequence, basis_rref: Sequence[Sequence], pivots: Sequence[int]) -> tuple:
    """Representative of v + span(basis) with zeros in the pivot columns."""
    out = list(v)
    for row, p in zip(basis_rref, pivots):
        if out[p] != 0:
            f = out[p]
            out = [x - f * y for x, y in zip(out, row)]
    return tuple(out)


def fmt(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
