"""Dense exact linear algebra over rational tuples.

Vectors are tuples of rationals, matrices are tuples of row tuples.
Everything is Gaussian elimination with first-nonzero pivoting; there
are no stability concerns in exact arithmetic.
"""
from __future__ import annotations

from .exact import R0, R1, rat


def vec(xs):
    return tuple(rat(x) for x in xs)


def mat(rows):
    return tuple(vec(r) for r in rows)


def zeros(n):
    return (R0,) * n


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vec_scale(c, a):
    return tuple(c * x for x in a)


def dot(a, b):
    s = R0
    for x, y in zip(a, b, strict=True):
        s += x * y
    return s


def is_zero(a) -> bool:
    return all(x == 0 for x in a)


def mat_vec(m, v):
    return tuple(dot(row, v) for row in m)


def transpose(m):
    return tuple(zip(*m)) if m else ()


def mat_mul(a, b):
    bt = transpose(b)
    return tuple(tuple(dot(ra, cb) for cb in bt) for ra in a)


def outer(a, b):
    return tuple(tuple(x * y for y in b) for x in a)


def identity(n):
    return tuple(tuple(R1 if i == j else R0 for j in range(n)) for i in range(n))


def _rref(rows):
    """Reduced row echelon form. Returns (rref rows as lists, pivot cols)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
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
    return m, pivots


def rank(rows) -> int:
    return len(_rref(rows)[1])


def independent_rows(rows):
    """Indices of a maximal linearly independent subset, greedily."""
    picked = []
    basis = []
    for i, row in enumerate(rows):
        cand = basis + [list(row)]
        if rank(cand) == len(cand):
            picked.append(i)
            basis = cand
    return picked


def solve_columns(cols, target):
    """Coefficients c with sum c_j cols[j] == target, or None.

    cols must be linearly independent; the solution is then unique on
    the span, and None means target is outside the span.
    """
    if not cols:
        return () if is_zero(target) else None
    aug = [list(col) + [t] for col, t in zip(zip(*cols), target)]
    red, pivots = _rref(aug)
    n = len(cols)
    if n in pivots:
        return None
    sol = [R0] * n
    for r, c in enumerate(pivots):
        sol[c] = red[r][n]
    # independence of cols makes every column a pivot; verify anyway
    if len(pivots) != n:
        acc = zeros(len(target))
        for cf, col in zip(sol, cols):
            acc = vec_add(acc, vec_scale(cf, col))
        if acc != tuple(rat(t) for t in target):
            return None
    return tuple(sol)


def invert(m):
    """Inverse of a square rational matrix; raises on singular input."""
    n = len(m)
    aug = [list(row) + [R1 if i == j else R0 for j in range(n)]
           for i, row in enumerate(m)]
    red, pivots = _rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return tuple(tuple(red[i][n:]) for i in range(n))


def nullspace(rows):
    """Basis of {x : rows @ x = 0} as a tuple of vectors."""
    if not rows:
        return ()
    ncols = len(rows[0])
    red, pivots = _rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [R0] * ncols
        v[f] = R1
        for r, c in enumerate(pivots):
            v[c] = -red[r][f]
        basis.append(tuple(v))
    return tuple(basis)
