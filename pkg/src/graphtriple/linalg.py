"""Exact rational dense linear algebra: echelon form and nullspace bases."""

from __future__ import annotations

from fractions import Fraction
from typing import List


def row_echelon(rows: List[List[Fraction]]) -> List[int]:
    """Reduce rows in place; return the pivot column indices."""
    if not rows:
        return []
    n_cols = len(rows[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def nullspace(rows: List[List[Fraction]], n_cols: int) -> List[List[Fraction]]:
    """Basis of the right nullspace of the given matrix."""
    work = [list(map(Fraction, row)) for row in rows]
    pivots = row_echelon(work)
    pivot_set = set(pivots)
    free = [c for c in range(n_cols) if c not in pivot_set]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n_cols
        vec[f] = Fraction(1)
        for r, c in enumerate(pivots):
            vec[c] = -work[r][f]
        basis.append(vec)
    return basis


def rank(rows: List[List[Fraction]]) -> int:
    work = [list(map(Fraction, row)) for row in rows]
    return len(row_echelon(work))
