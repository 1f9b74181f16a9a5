"""Exact linear algebra over a ScalarField.

Matrices are lists of rows (lists of field elements).  Elimination works on
sparse row dictionaries, since the constraint systems built from polynomial
recurrences are mostly zeros.
"""

from __future__ import annotations

from typing import Callable, Sequence

from loopinvar.algebra.scalars import ScalarField

__all__ = ["rref", "kernel_basis", "rank", "char_poly", "mat_vec", "mat_mul", "identity", "solve_square"]


def identity(field: ScalarField, n: int):
    return [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]


def mat_vec(M, v, field: ScalarField):
    out = []
    for row in M:
        acc = field.zero
        for a, b in zip(row, v):
            if a and b:
                acc = acc + a * b
        out.append(acc)
    return out


def mat_mul(A, B, field: ScalarField):
    cols = list(zip(*B)) if B else []
    return [[sum((a * b for a, b in zip(row, col) if a and b), field.zero) for col in cols] for row in A]



def rref(rows, ncols: int, field: ScalarField, checkpoint: Callable[[], None] | None = None):
    """Reduced row echelon form of sparse rows.

    ``rows`` are dicts ``{col: value}`` or dense lists.  Returns
    ``(pivot_rows, pivots)`` where ``pivot_rows[i]`` is the normalised row
    whose leading one sits in column ``pivots[i]``.  Pivot columns are taken
    left to right; among candidate rows the cheapest entry wins, which does
    not change the (unique) result but keeps intermediate growth down.
    """
    work = [{j: v for j, v in (r.items() if isinstance(r, dict) else enumerate(r)) if v} for r in rows]
    work = [r for r in work if r]
    by_col: dict[int, set[int]] = {}
    for i, r in enumerate(work):
        for j in r:
            by_col.setdefault(j, set()).add(i)
    alive = set(range(len(work)))
    done: list[tuple[int, dict]] = []
    for col in range(ncols):
        if checkpoint is not None:
            checkpoint()
        cands = [i for i in by_col.get(col, ()) if i in alive and col in work[i]]
        if not cands:
            continue
        piv = min(cands, key=lambda i: (len(work[i]), field.size(work[i][col])))
        alive.discard(piv)
        prow = work[piv]
        inv = field.one / prow[col]
        prow = {j: v * inv for j, v in prow.items()}
        for i in cands:
            if i == piv:
                continue
            r = work[i]
            factor = r[col]
            for j, v in prow.items():
                nv = r.get(j, field.zero) - factor * v
                if nv:
                    if j not in r:
                        by_col.setdefault(j, set()).add(i)
                    r[j] = nv
                else:
                    r.pop(j, None)
            if not r:
                alive.discard(i)
        done.append((col, prow))
    # back substitution to reach reduced form
    pivots = [c for c, _ in done]
    reduced = [r for _, r in done]
    for k in range(len(reduced) - 1, -1, -1):
        col_k = pivots[k]
        rk = reduced[k]
        for i in range(k):
            ri = reduced[i]
            factor = ri.get(col_k)
            if factor:
                for j, v in rk.items():
                    nv = ri.get(j, field.zero) - factor * v
                    if nv:
                        ri[j] = nv
                    else:
                        ri.pop(j, None)
    return reduced, pivots


def rank(M, ncols: int, field: ScalarField) -> int:
    return len(rref(M, ncols, field)[1])


def kernel_basis(M, ncols: int, field: ScalarField, checkpoint=None, with_free: bool = False):
    """Basis of {v : M v = 0}; one vector per free column, with a 1 there.

    With ``with_free`` the free column indices are returned as well.
    """
    reduced, pivots = rref(M, ncols, field, checkpoint)
    pivot_set = set(pivots)
    basis = []
    frees = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [field.zero] * ncols
        v[free] = field.one
        for col, row in zip(pivots, reduced):
            val = row.get(free)
            if val:
                v[col] = -val
        basis.append(v)
        frees.append(free)
    return (basis, frees) if with_free else basis


def solve_square(A, rhs_columns: Sequence[Sequence], field: ScalarField):
    """Solve A X = B for invertible A; B given as a list of right-hand-side columns."""
    inv = inverse(A, field)
    return [mat_vec(inv, b, field) for b in rhs_columns]


def inverse(A, field: ScalarField):
    n = len(A)
    aug = [list(row) + [field.one if i == j else field.zero for j in range(n)] for i, row in enumerate(A)]
    reduced, pivots = rref(aug, 2 * n, field)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("singular matrix")
    return [[reduced[i].get(n + j, field.zero) for j in range(n)] for i in range(n)]


def char_poly(M, field: ScalarField) -> list:
    """det(x I - M), coefficients low degree first (Berkowitz, division free)."""
    n = len(M)
    if n == 0:
        return [field.one]
    poly = [field.one, -M[0][0]]  # high degree first while building
    for k in range(1, n):
        row = M[k][:k]
        col = [M[i][k] for i in range(k)]
        sub = [r[:k] for r in M[:k]]
        toeplitz = [field.one, -M[k][k]]
        v = col
        for _ in range(k):
            toeplitz.append(-sum((a * b for a, b in zip(row, v) if a and b), field.zero))
            v = mat_vec(sub, v, field)
        new = []
        for i in range(k + 2):
            acc = field.zero
            for j in range(min(i, k) + 1):
                t = toeplitz[i - j]
                if t and poly[j]:
                    acc = acc + t * poly[j]
            new.append(acc)
        poly = new
    return list(reversed(poly))
