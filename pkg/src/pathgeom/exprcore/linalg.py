"""Exact rational linear algebra."""

from __future__ import annotations

from fractions import Fraction

from .poly import Q, to_fraction


def rank(rows) -> int:
    """Rank of a matrix with rational entries (Gaussian elimination over Q)."""
    m = [[Q(x.numerator, x.denominator) if isinstance(x, Fraction) else Q(x) for x in row] for row in rows]
    m = [r for r in m if any(v != 0 for v in r)]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r]
        inv = 1 / pr[c]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] * inv
                row = m[i]
                for j in range(c, ncols):
                    row[j] -= f * pr[j]
        r += 1
        if r == len(m):
            break
    return r


def nullspace(rows, ncols: int | None = None) -> list:
    """Basis of the right null space, as lists of Fractions."""
    m = [[Q(x.numerator, x.denominator) if isinstance(x, Fraction) else Q(x) for x in row] for row in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Q(0)] * ncols
        v[fcol] = Q(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fcol]
        basis.append([to_fraction(x) for x in v])
    return basis
