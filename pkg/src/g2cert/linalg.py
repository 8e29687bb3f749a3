"""Exact linear algebra over Q or over the rational-function field.

Entries only need +, -, *, / and truthiness (nonzero test), which both
fractions.Fraction and poly.RationalFunction provide, so one elimination
routine serves numeric and symbolic computations.  Pivoting is positional
(first nonzero), which keeps results deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, List, Sequence


def rref(rows: List[list], ncols: int) -> tuple:
    """Reduced row echelon form in place; returns (rows, pivot_columns)."""
    pivots = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    del rows[r:]
    return rows, pivots


def rank(matrix: Sequence[Sequence]) -> int:
    rows = [list(row) for row in matrix]
    if not rows:
        return 0
    _, pivots = rref(rows, len(rows[0]))
    return len(pivots)


def nullspace(matrix: Sequence[Sequence], ncols: int, one, zero) -> List[list]:
    """Basis of the right nullspace, one vector per free column.

    Free columns are enumerated in increasing order, which fixes the
    canonical parameter order used by solve_derivations.
    """
    rows = [list(row) for row in matrix]
    rows, pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [zero] * ncols
        vec[free] = one
        for r, pc in enumerate(pivots):
            vec[pc] = -rows[r][free]
        basis.append(vec)
    return basis


def solve_unique(matrix: Sequence[Sequence], rhs: Sequence):
    """Solution of a consistent square-ish system; None if rank-deficient
    in the unknowns or inconsistent."""
    n_cols = len(matrix[0]) if matrix else 0
    rows = [list(row) + [b] for row, b in zip(matrix, rhs)]
    rows, pivots = rref(rows, n_cols)
    for row in rows:
        if not any(row[:n_cols]) and row[n_cols]:
            return None
    if len(pivots) < n_cols:
        return None
    solution = [None] * n_cols
    for r, c in enumerate(pivots):
        solution[c] = rows[r][n_cols]
    return solution


def in_span(basis: Sequence[Sequence], vector: Sequence) -> bool:
    """True when vector lies in the row span of basis."""
    rows = [list(row) for row in basis]
    if not rows:
        return not any(vector)
    ncols = len(rows[0])
    before = rref([list(r) for r in rows], ncols)[1]
    after = rref(rows + [list(vector)], ncols)[1]
    return len(before) == len(after)


def span_equal(basis_a: Sequence[Sequence], basis_b: Sequence[Sequence]) -> bool:
    return all(in_span(basis_a, v) for v in basis_b) and all(in_span(basis_b, v) for v in basis_a)


def det_fraction(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant of a numeric matrix by Gaussian elimination."""
    n = len(matrix)
    rows = [[Fraction(x) for x in row] for row in matrix]
    det = Fraction(1)
    for c in range(n):
        pivot_row = None
        for i in range(c, n):
            if rows[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != c:
            rows[c], rows[pivot_row] = rows[pivot_row], rows[c]
            det = -det
        det *= rows[c][c]
        inv = rows[c][c]
        for i in range(c + 1, n):
            if rows[i][c]:
                factor = rows[i][c] / inv
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[c])]
    return det


def mat_mul(a, b, add: Callable = None):
    """Product of two matrices with ring entries (Polynomial or Fraction)."""
    n = len(a)
    m = len(b[0])
    k = len(b)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out
