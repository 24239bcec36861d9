"""Independent reference implementations used only by the tests."""

from fractions import Fraction
from itertools import combinations, permutations


def bareiss_rank(M) -> int:
    """Rank by fraction-free (Bareiss) elimination on integers."""
    A = [[int(x) for x in row] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    rank, prev = 0, 1
    for col in range(n):
        piv = next((r for r in range(rank, m) if A[r][col] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(rank + 1, m):
            for c in range(col + 1, n):
                A[r][c] = (A[rank][col] * A[r][c] - A[r][col] * A[rank][c]) // prev
            A[r][col] = 0
        prev = A[rank][col]
        rank += 1
    return rank


def leibniz_det(M) -> Fraction:
    n = len(M)
    total = Fraction(0)
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = Fraction(1)
        for i in range(n):
            prod *= M[i][perm[i]]
            if not prod:
                break
        total += -prod if inv % 2 else prod
    return total


def wedge_power(B, k):
    """Lambda^k B: column J is the wedge of columns j in J, expanded by Leibniz minors."""
    n = len(B)
    idx = list(combinations(range(n), k))
    out = [[Fraction(0)] * len(idx) for _ in idx]
    for c, J in enumerate(idx):
        for r, I in enumerate(idx):
            out[r][c] = leibniz_det([[Fraction(B[i][j]) for j in J] for i in I]) if k else Fraction(1)
    return out
