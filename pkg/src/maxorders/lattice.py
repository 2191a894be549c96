"""Exact integer linear algebra on lists of Python ints.

Matrices are lists of rows.  Nothing here uses floating point; rational
steps go through :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

Matrix = list  # list[list[int]]
Vector = tuple  # tuple[int, ...]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(m: int, n: int) -> Matrix:
    return [[0] * n for _ in range(m)]


def transpose(a: Sequence[Sequence[int]], ncols: Optional[int] = None) -> Matrix:
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def matmul(a, b) -> Matrix:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a, v) -> Vector:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vadd(u, v) -> Vector:
    return tuple(x + y for x, y in zip(u, v))


def vsub(u, v) -> Vector:
    return tuple(x - y for x, y in zip(u, v))


def vscale(k, v) -> Vector:
    return tuple(k * x for x in v)


def dot(u, v) -> int:
    return sum(x * y for x, y in zip(u, v))


def primitive(v) -> Vector:
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        return tuple(v)
    return tuple(x // g for x in v)


def det(a) -> int:
    """Bareiss fraction-free determinant."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(r) for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(rows) -> int:
    """Rank over Q by fraction-free elimination."""
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            if m[i][c]:
                a, b = m[r][c], m[i][c]
                m[i] = [a * x - b * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def hermite_rows(a, ncols: Optional[int] = None):
    """Row-style Hermite normal form: returns ``(H, U)`` with ``U`` unimodular,
    ``U a = H``, ``H`` in row echelon form with positive pivots and the
    entries above each pivot reduced into ``[0, pivot)``.  Zero rows last."""
    m = len(a)
    n = len(a[0]) if m else (ncols or 0)
    h = [list(r) for r in a]
    u = identity(m)
    row = 0
    for col in range(n):
        if row >= m:
            break
        # gcd-reduce the column below `row`
        while True:
            nz = [i for i in range(row, m) if h[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(h[i][col]))
            if piv != row:
                h[row], h[piv] = h[piv], h[row]
                u[row], u[piv] = u[piv], u[row]
            done = True
            for i in range(row + 1, m):
                if h[i][col]:
                    q = h[i][col] // h[row][col]
                    h[i] = [x - q * y for x, y in zip(h[i], h[row])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[row])]
                    if h[i][col]:
                        done = False
            if done:
                break
        if h[row][col] == 0:
            continue
        if h[row][col] < 0:
            h[row] = [-x for x in h[row]]
            u[row] = [-x for x in u[row]]
        p = h[row][col]
        for i in range(row):
            q = h[i][col] // p
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[row])]
                u[i] = [x - q * y for x, y in zip(u[i], u[row])]
        row += 1
    return h, u


def hermite(m):
    """Column-style Hermite form ``H = M V`` (V unimodular): lower column
    echelon, positive pivots, entries left of each pivot in ``[0, pivot)``."""
    ht, ut = hermite_rows(transpose(m), len(m))
    return transpose(ht) if ht else [[] for _ in m], transpose(ut)


def smith(m):
    """Smith normal form.  Returns ``(D, U, V)`` with ``U M V = D``, ``U`` and
    ``V`` unimodular and the diagonal ``d1 | d2 | ...`` nonnegative."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    d = [list(r) for r in m]
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in d:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, k):
        d[dst] = [x + k * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, k):
        for r in d:
            r[dst] += k * r[src]
        for r in v:
            r[dst] += k * r[src]

    t = 0
    while t < min(rows, cols):
        entries = [(abs(d[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if d[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            clean = True
            for i in range(t + 1, rows):
                if d[i][t]:
                    add_row(i, t, -(d[i][t] // d[t][t]))
                    if d[i][t]:
                        clean = False
            for j in range(t + 1, cols):
                if d[t][j]:
                    add_col(j, t, -(d[t][j] // d[t][t]))
                    if d[t][j]:
                        clean = False
            if clean:
                # divisibility: fold a non-divisible entry into row t
                bad = next(
                    ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                     if d[i][j] % d[t][t]),
                    None,
                )
                if bad is None:
                    break
                add_row(t, bad[0], 1)
                continue
            entries = [(abs(d[i][j]), i, j) for i in range(t, rows) for j in range(t, cols)
                       if d[i][j] and (i == t or j == t)]
            _, i, j = min(entries)
            swap_rows(t, i)
            swap_cols(t, j)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return d, u, v


def diagonal(d) -> list:
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


@dataclass(frozen=True)
class AffineSolutionSet:
    particular: Optional[Vector]
    homogeneous_basis: tuple

    @property
    def feasible(self) -> bool:
        return self.particular is not None

    def point(self, coeffs) -> Vector:
        x = self.particular
        for c, b in zip(coeffs, self.homogeneous_basis):
            x = vadd(x, vscale(c, b))
        return x


def solve_integer(a, b) -> AffineSolutionSet:
    """All integer x with ``a x = b``."""
    m = len(a)
    n = len(a[0]) if m else 0
    if m == 0:
        return AffineSolutionSet(tuple([0] * n), tuple(tuple(r) for r in identity(n)))
    d, u, v = smith(a)
    c = matvec(u, b)
    y = [0] * n
    r = 0
    for i, di in enumerate(diagonal(d)):
        if di == 0:
            break
        if c[i] % di:
            return AffineSolutionSet(None, ())
        y[i] = c[i] // di
        r += 1
    if any(c[i] for i in range(r, m)):
        return AffineSolutionSet(None, ())
    vt = transpose(v)
    basis = tuple(tuple(vt[j]) for j in range(r, n))
    return AffineSolutionSet(matvec(v, y), basis)


def kernel_basis(a, ncols: Optional[int] = None) -> list:
    """Basis of the integer kernel ``{x : a x = 0}`` (a saturated lattice)."""
    n = len(a[0]) if a else ncols
    if not a:
        return [tuple(r) for r in identity(n)]
    return [tuple(x) for x in solve_integer(a, [0] * len(a)).homogeneous_basis]


def eigen_lattice(m, sign: int) -> list:
    """Basis of ``{x : m x = sign * x}``."""
    n = len(m)
    shifted = [[m[i][j] - sign * int(i == j) for j in range(n)] for i in range(n)]
    return kernel_basis(shifted, n)


def image_rank(m) -> int:
    return rank(m)


def lattice_basis(vectors, dim: Optional[int] = None) -> list:
    """Row-HNF basis of the lattice spanned by ``vectors``."""
    vecs = [list(v) for v in vectors]
    if not vecs:
        return []
    h, _ = hermite_rows(vecs)
    return [tuple(r) for r in h if any(r)]


def coordinates(basis, v) -> Optional[Vector]:
    """Integer coordinates of v in a lattice basis (rows), or None if v is
    not in the lattice.  Works for any independent basis."""
    if not basis:
        return () if not any(v) else None
    sol = solve_integer(transpose(basis), list(v))
    if not sol.feasible:
        return None
    return sol.particular


def in_lattice(basis, v) -> bool:
    return coordinates(basis, v) is not None


def saturation(basis, dim: int) -> list:
    """Basis of ``span_Q(basis) ∩ Z^dim``."""
    if not basis:
        return []
    perp = kernel_basis([list(b) for b in basis], dim)
    if not perp:
        return [tuple(r) for r in identity(dim)]
    return lattice_basis(kernel_basis([list(p) for p in perp], dim))


def complete_basis(sub, dim: int):
    """For a saturated sublattice basis ``sub`` (s rows) return a unimodular
    matrix whose first s rows span ``sub``.  Rows form a basis of Z^dim."""
    if not sub:
        return identity(dim)
    d, u, v = smith([list(r) for r in sub])
    if any(x != 1 for x in diagonal(d)):
        raise ValueError("sublattice is not saturated")
    return inverse_unimodular(v)


def inverse_unimodular(m) -> Matrix:
    n = len(m)
    h, u = hermite_rows([list(r) for r in m])
    if h != identity(n):
        raise ValueError("matrix is not unimodular")
    return u


def solve_rational(a, b) -> Optional[tuple]:
    """One rational solution of ``a x = b`` for square invertible ``a``."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return tuple(m[i][n] / m[i][i] for i in range(n))
