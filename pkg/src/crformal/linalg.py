"""Exact linear algebra over the Gaussian rationals for constant matrices.

Everything here is plain Gaussian elimination with exact arithmetic; there
are no tolerances because there is no rounding.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .errors import SingularLinearPartError, StructuralError
from .gaussian import ONE, ZERO, GaussianRational


def matrix_rank(rows: Sequence[Sequence[GaussianRational]]) -> int:
    work = [list(r) for r in rows]
    if not work or not work[0]:
        return 0
    nrows, ncols = len(work), len(work[0])
    rank = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, nrows):
            if not work[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        inv = work[rank][col].inverse()
        work[rank] = [v * inv for v in work[rank]]
        for r in range(nrows):
            if r != rank and not work[r][col].is_zero():
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def determinant(rows: Sequence[Sequence[GaussianRational]]) -> GaussianRational:
    n = len(rows)
    work = [list(r) for r in rows]
    for row in work:
        if len(row) != n:
            raise StructuralError("determinant requires a square matrix")
    det = ONE
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if not work[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            return ZERO
        if pivot != col:
            work[col], work[pivot] = work[pivot], work[col]
            det = -det
        det = det * work[col][col]
        inv = work[col][col].inverse()
        for r in range(col + 1, n):
            if work[r][col].is_zero():
                continue
            factor = work[r][col] * inv
            work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return det


def invert_matrix(rows: Sequence[Sequence[GaussianRational]]):
    n = len(rows)
    work = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if not work[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            raise SingularLinearPartError("matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        inv = work[col][col].inverse()
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and not work[r][col].is_zero():
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return [row[n:] for row in work]


def real_rank(rows: Sequence[Sequence[GaussianRational]]) -> int:
    """Rank over the reals of the d x 2N matrix [Re A | -Im A].

    This is the rank of the real differential v -> 2 Re(A v) of the map
    whose complex Jacobian is A.
    """
    real_rows = []
    for row in rows:
        real_rows.append(
            [GaussianRational(v.re) for v in row] + [GaussianRational(-v.im) for v in row]
        )
    return matrix_rank(real_rows)


class LinearSpan:
    """An incrementally built row space over the Gaussian rationals.

    Vectors are sparse dicts column -> coefficient.  Each stored row is
    normalized on its pivot column, the smallest column in its support, so
    with columns enumerated in graded-lex order the pivot set is exactly the
    set of initial monomials of the row space, and a single ascending
    reduction pass decides membership exactly.
    """

    def __init__(self):
        self.pivot_rows: dict[int, dict[int, GaussianRational]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivot_rows)

    def pivot_columns(self):
        return set(self.pivot_rows)

    def reduce(self, vec: dict) -> dict:
        vec = {c: v for c, v in vec.items() if not v.is_zero()}
        while vec:
            low = min(vec)
            row = self.pivot_rows.get(low)
            if row is None:
                break
            factor = vec[low]
            for c, v in row.items():
                cur = vec.get(c, ZERO) - factor * v
                if cur.is_zero():
                    vec.pop(c, None)
                else:
                    vec[c] = cur
        return vec

    def add(self, vec: dict) -> bool:
        """Insert a vector; returns True when it enlarged the span."""
        vec = self.reduce(vec)
        if not vec:
            return False
        low = min(vec)
        inv = vec[low].inverse()
        self.pivot_rows[low] = {c: v * inv for c, v in vec.items()}
        return True

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)
