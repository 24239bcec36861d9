"""Exact linear algebra over the rationals.

Matrices are plain nested lists of :class:`fractions.Fraction` (or anything
``Fraction`` accepts). Elimination runs on sparse row dictionaries so that the
large but very sparse differentials of free CDGAs stay cheap.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

Matrix = list[list[Fraction]]
SparseRow = dict[int, Fraction]


def frac_matrix(M: Iterable[Iterable]) -> Matrix:
    return [[Fraction(x) for x in row] for row in M]


def shape(M: Sequence[Sequence]) -> tuple[int, int]:
    rows = len(M)
    return rows, (len(M[0]) if rows else 0)


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(m: int, n: int) -> Matrix:
    return [[Fraction(0)] * n for _ in range(m)]


def transpose(M: Sequence[Sequence]) -> Matrix:
    m, n = shape(M)
    return [[Fraction(M[i][j]) for i in range(m)] for j in range(n)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    m, k = shape(A)
    k2, n = shape(B)
    if k != k2:
        raise ValueError(f"cannot multiply {m}x{k} by {k2}x{n}")
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def matsub(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    return [[Fraction(a) - Fraction(b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def matadd(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    return [[Fraction(a) + Fraction(b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def scale(c, A: Sequence[Sequence]) -> Matrix:
    c = Fraction(c)
    return [[c * Fraction(a) for a in row] for row in A]


def minus_identity(M: Sequence[Sequence]) -> Matrix:
    """Return ``M - Id`` for a square matrix."""
    n, n2 = shape(M)
    if n != n2:
        raise ValueError("matrix must be square")
    return [[Fraction(M[i][j]) - (i == j) for j in range(n)] for i in range(n)]


def block_diag(*blocks: Sequence[Sequence]) -> Matrix:
    n = sum(shape(b)[0] for b in blocks)
    out = zeros(n, n)
    off = 0
    for b in blocks:
        k = shape(b)[0]
        for i in range(k):
            for j in range(k):
                out[off + i][off + j] = Fraction(b[i][j])
        off += k
    return out


def kron(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    ma, na = shape(A)
    mb, nb = shape(B)
    out = zeros(ma * mb, na * nb)
    for i in range(ma):
        for j in range(na):
            a = Fraction(A[i][j])
            if not a:
                continue
            for k in range(mb):
                for l in range(nb):
                    out[i * mb + k][j * nb + l] = a * Fraction(B[k][l])
    return out


def matpow(M: Sequence[Sequence], e: int) -> Matrix:
    n = shape(M)[0]
    out = identity(n)
    for _ in range(e):
        out = matmul(out, M)
    return out


def det(M: Sequence[Sequence]) -> Fraction:
    """Determinant by exact Gaussian elimination."""
    A = frac_matrix(M)
    n, n2 = shape(A)
    if n != n2:
        raise ValueError("matrix must be square")
    sign = 1
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            sign = -sign
        p = A[col][col]
        result *= p
        for r in range(col + 1, n):
            f = A[r][col] / p
            if f:
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return sign * result


def inverse(M: Sequence[Sequence]) -> Matrix:
    n, n2 = shape(M)
    if n != n2:
        raise ValueError("matrix must be square")
    red = SparseReducer(2 * n)
    for i, row in enumerate(frac_matrix(M)):
        sp = {j: x for j, x in enumerate(row) if x}
        sp[n + i] = Fraction(1)
        red.add(sp)
    rows = red.reduced_rows()
    if sorted(p for p in red.pivots if p < n) != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    out = zeros(n, n)
    for p, row in rows.items():
        for j, x in row.items():
            if j >= n:
                out[p][j - n] = x
    return out


def minor(M: Sequence[Sequence], rows: Sequence[int], cols: Sequence[int]) -> Fraction:
    return det([[M[i][j] for j in cols] for i in rows])


# -- sparse elimination ----------------------------------------------------------------


class SparseReducer:
    """Incremental row reduction of sparse rational rows.

    Rows are reduced against the current pivot set as they are added; rows that
    reduce to zero are dropped. ``pivots`` lists pivot columns in insertion
    order.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self._rows: dict[int, SparseRow] = {}
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, row: SparseRow) -> SparseRow:
        row = {j: Fraction(x) for j, x in row.items() if x}
        while row:
            hit = [j for j in row if j in self._rows]
            if not hit:
                break
            j = min(hit)
            f = row[j]
            for k, y in self._rows[j].items():
                v = row.get(k, 0) - f * y
                if v:
                    row[k] = v
                else:
                    row.pop(k, None)
        return row

    def add(self, row: SparseRow) -> bool:
        """Reduce and insert ``row``; return True if it raised the rank."""
        row = self.reduce(row)
        if not row:
            return False
        p = min(row)
        inv = 1 / row[p]
        row = {k: v * inv for k, v in row.items()}
        # Keep stored rows free of the new pivot so later reductions terminate.
        for q, other in self._rows.items():
            f = other.get(p)
            if f:
                for k, y in row.items():
                    v = other.get(k, 0) - f * y
                    if v:
                        other[k] = v
                    else:
                        other.pop(k, None)
        self._rows[p] = row
        self.pivots.append(p)
        return True

    def in_span(self, row: SparseRow) -> bool:
        return not self.reduce(row)

    def reduced_rows(self) -> dict[int, SparseRow]:
        return {p: dict(r) for p, r in self._rows.items()}


def _sparse_rows(M: Sequence[Sequence]) -> list[SparseRow]:
    return [{j: Fraction(x) for j, x in enumerate(row) if x} for row in M]


def rank(M: Sequence[Sequence]) -> int:
    m, n = shape(M)
    red = SparseReducer(n)
    for row in _sparse_rows(M):
        red.add(row)
    return red.rank


def sparse_rank(rows: Iterable[SparseRow], ncols: int) -> int:
    red = SparseReducer(ncols)
    for row in rows:
        red.add(row)
    return red.rank


def sparse_nullspace(rows: Iterable[SparseRow], ncols: int) -> list[SparseRow]:
    """Kernel basis of the matrix with the given sparse rows.

    One basis vector per free column, with that column set to 1.
    """
    red = SparseReducer(ncols)
    for row in rows:
        red.add(row)
    reduced = red.reduced_rows()
    free = [j for j in range(ncols) if j not in reduced]
    # column j of the reduced system, restricted to pivot rows
    col_entries: dict[int, list[tuple[int, Fraction]]] = {}
    for p, row in reduced.items():
        for j, x in row.items():
            if j != p:
                col_entries.setdefault(j, []).append((p, x))
    basis = []
    for f in free:
        vec = {f: Fraction(1)}
        for p, x in col_entries.get(f, ()):
            vec[p] = -x
        basis.append(vec)
    return basis


def nullspace(M: Sequence[Sequence]) -> list[list[Fraction]]:
    m, n = shape(M)
    return [_dense(v, n) for v in sparse_nullspace(_sparse_rows(M), n)]


def _dense(v: SparseRow, n: int) -> list[Fraction]:
    out = [Fraction(0)] * n
    for j, x in v.items():
        out[j] = x
    return out


def complement_indices(vectors: Iterable[SparseRow], dim: int) -> list[int]:
    """Standard basis indices completing span(vectors) to the whole space.

    Greedy in increasing index, so the choice is deterministic and uses the
    lowest possible indices.
    """
    red = SparseReducer(dim)
    for v in vectors:
        red.add(v)
    chosen = []
    for i in range(dim):
        if red.add({i: Fraction(1)}):
            chosen.append(i)
    return chosen


def extend_basis(sub: Sequence[SparseRow], sup: Sequence[SparseRow], dim: int) -> list[SparseRow]:
    """Vectors of ``sup`` that extend a basis of span(sub) to span(sub + sup)."""
    red = SparseReducer(dim)
    for v in sub:
        red.add(v)
    return [dict(v) for v in sup if red.add(v)]


def coordinates(vec: SparseRow, basis: Sequence[SparseRow], dim: int) -> list[Fraction] | None:
    """Coefficients c with sum c_i basis_i == vec, or None if vec is outside the span.

    ``basis`` must be linearly independent.
    """
    k = len(basis)
    # Solve by reducing the augmented transpose system [basis^T | vec].
    red = SparseReducer(k + 1)
    rows: dict[int, SparseRow] = {}
    for i, b in enumerate(basis):
        for j, x in b.items():
            rows.setdefault(j, {})[i] = x
    for j, x in vec.items():
        rows.setdefault(j, {})[k] = Fraction(x)
    for row in rows.values():
        red.add(row)
    reduced = red.reduced_rows()
    if k in reduced:
        return None
    out = [Fraction(0)] * k
    for p, row in reduced.items():
        out[p] = row.get(k, Fraction(0))
    return out


def ker_coker(M: Sequence[Sequence]) -> tuple[list[list[Fraction]], int, list[int]]:
    """Kernel basis, cokernel dimension and cokernel representatives of ``M``.

    Cokernel representatives are standard basis indices of the target that
    complete the column space (lowest indices first).
    """
    m, n = shape(M)
    kernel = nullspace(M) if n else []
    cols = [{i: Fraction(M[i][j]) for i in range(m) if M[i][j]} for j in range(n)]
    reps = complement_indices(cols, m)
    return kernel, len(reps), reps


def multi_indices(n: int, k: int) -> list[tuple[int, ...]]:
    """Strictly increasing k-tuples of range(n) in lexicographic order."""
    return list(combinations(range(n), k))


def exterior_power(B: Sequence[Sequence], k: int) -> Matrix:
    """Matrix of the k-th exterior power of ``B`` in the lexicographic basis.

    Entry (I, J) is the minor of ``B`` on rows I and columns J, which makes the
    construction multiplicative: Λ^k(AB) = Λ^k(A) Λ^k(B).
    """
    n, n2 = shape(B)
    if n != n2:
        raise ValueError("matrix must be square")
    if not 0 <= k <= n:
        raise ValueError(f"degree {k} outside 0..{n}")
    idx = multi_indices(n, k)
    if k == 0:
        return [[Fraction(1)]]
    Bf = frac_matrix(B)
    return [[minor(Bf, I, J) for J in idx] for I in idx]
