"""Exact linear algebra over :class:`fractions.Fraction`.

Small dense routines used where floating point would blur the answer:
face feasibility, stationary vectors and absorption probabilities.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Sequence


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions, decimal strings and ``"p/q"`` strings exactly.

    Floats go through ``repr`` so that ``0.1`` becomes ``1/10`` rather than
    the binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} to a rational")


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form. Returns (reduced rows, pivot columns)."""
    a = [list(r) for r in rows]
    if not a:
        return a, []
    ncols = len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [u - f * v for u, v in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[1])


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve the square system ``a x = b`` exactly; raises on singular ``a``."""
    n = len(a)
    aug = [list(map(as_fraction, row)) + [as_fraction(bi)] for row, bi in zip(a, b)]
    red, piv = rref(aug)
    if piv != list(range(n)):
        raise ZeroDivisionError("singular system")
    return [red[i][n] for i in range(n)]


def solve_many(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Solve ``a X = B`` for a matrix right-hand side (rows of ``b``)."""
    n = len(a)
    k = len(b[0]) if b else 0
    aug = [list(a[i]) + list(b[i]) for i in range(n)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular system")
    return [red[i][n:n + k] for i in range(n)]
