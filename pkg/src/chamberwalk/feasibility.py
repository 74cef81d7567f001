"""Exact feasibility of mixed equality / strict-inequality linear systems.

A candidate face is the set ``{x : a_i.x = b_i (i in E), a_j.x > b_j (j in S)}``.
Equalities are removed by exact row reduction, after which the strict part is
decided by Fourier-Motzkin elimination. Everything is done in rationals, so a
degenerate face is never misclassified by rounding.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .rational import rref

Constraint = tuple[tuple[Fraction, ...], Fraction]


def _substitute_equalities(
    dim: int, equalities: Sequence[Constraint], stricts: Sequence[Constraint]
) -> list[Constraint] | None:
    """Eliminate the pivot variables of ``equalities`` from ``stricts``.

    Returns strict constraints in the free variables only, or ``None`` when
    the equalities are inconsistent.
    """
    if not equalities:
        return [(tuple(a), b) for a, b in stricts]
    rows = [list(a) + [b] for a, b in equalities]
    red, pivots = rref(rows)
    if dim in pivots:
        return None
    free = [c for c in range(dim) if c not in pivots]
    out = []
    for a, b in stricts:
        # x_p = rhs_p - sum_f red[p][f] x_f for each pivot p
        coeffs = [a[f] for f in free]
        const = b
        for row, p in zip(red, pivots):
            ap = a[p]
            if ap == 0:
                continue
            const -= ap * row[dim]
            for k, f in enumerate(free):
                coeffs[k] -= ap * row[f]
        out.append((tuple(coeffs), const))
    return out


def _normalize(c: Constraint) -> Constraint:
    a, b = c
    scale = next((abs(v) for v in a if v != 0), None)
    if scale is None:
        return a, b
    return tuple(v / scale for v in a), b / scale


def _fourier_motzkin(stricts: list[Constraint]) -> bool:
    cons = {_normalize(c) for c in stricts}
    while True:
        trivial = [c for c in cons if all(v == 0 for v in c[0])]
        # 0 > b must hold for every constraint with no variables left
        if any(b >= 0 for _, b in trivial):
            return False
        cons = {c for c in cons if any(v != 0 for v in c[0])}
        if not cons:
            return True
        nvar = len(next(iter(cons))[0])
        # eliminate the variable with the fewest generated pairs
        best, best_cost = None, None
        for j in range(nvar):
            pos = sum(1 for a, _ in cons if a[j] > 0)
            neg = sum(1 for a, _ in cons if a[j] < 0)
            if pos + neg == 0:
                continue
            cost = pos * neg - pos - neg
            if best_cost is None or cost < best_cost:
                best, best_cost = j, cost
        j = best
        lower, upper, rest = [], [], set()
        for a, b in cons:
            if a[j] > 0:
                lower.append((tuple(v / a[j] for v in a), b / a[j]))
            elif a[j] < 0:
                upper.append((tuple(v / -a[j] for v in a), b / -a[j]))
            else:
                rest.add((a, b))
        # a one-sided variable can always be pushed far enough
        for (al, bl) in lower:
            for (au, bu) in upper:
                a = tuple(x + y for x, y in zip(al, au))
                rest.add(_normalize((a, bl + bu)))
        cons = rest


def strictly_feasible(
    dim: int, equalities: Sequence[Constraint], stricts: Sequence[Constraint]
) -> bool:
    """True iff some x in Q^dim satisfies all equalities and strict inequalities.

    Each constraint is ``(a, b)``: equalities mean ``a.x = b``, stricts mean
    ``a.x > b``.
    """
    reduced = _substitute_equalities(dim, equalities, stricts)
    if reduced is None:
        return False
    return _fourier_motzkin(reduced)
