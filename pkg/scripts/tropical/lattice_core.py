"""
Exact integer linear algebra for the tropical engine.

Vectors are tuples of Python ints and matrices are lists of integer rows, so
every quantity is exact regardless of size. The module provides:

- pairing, primitive_part: covector/vector bookkeeping
- smith_normal_form, invariant_factors: SNF with unimodular transforms
- integer_kernel, solve_integer, unimodular_inverse: lattice solving
- determinant, rank: fraction-free elimination (Bareiss)
- small matrix helpers (identity, matmul, matvec, transpose, stacking)
"""

from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Sequence, Tuple

from .errors import LatticeError

IntVector = Tuple[int, ...]
IntCovector = Tuple[int, ...]
IntMatrix = List[List[int]]


@dataclass(frozen=True)
class SNFResult:
    """U·M·V = D with D diagonal, d_1 | d_2 | ... and U, V unimodular."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> List[int]:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def identity(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros(rows: int, cols: int) -> IntMatrix:
    return [[0] * cols for _ in range(rows)]


def copy_matrix(M: Sequence[Sequence[int]]) -> IntMatrix:
    return [list(row) for row in M]


def transpose(M: Sequence[Sequence[int]], cols: Optional[int] = None) -> IntMatrix:
    if not M:
        return [[] for _ in range(cols or 0)]
    return [list(col) for col in zip(*M)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> IntMatrix:
    if not A:
        return []
    inner = len(A[0])
    if inner != len(B):
        raise LatticeError(f"shape mismatch: {len(A)}x{inner} times {len(B)}x?")
    cols = len(B[0]) if B else 0
    return [[sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(len(A))]


def matvec(M: Sequence[Sequence[int]], v: Sequence[int]) -> IntVector:
    for row in M:
        if len(row) != len(v):
            raise LatticeError(f"length mismatch: row {len(row)} vs vector {len(v)}")
    return tuple(sum(a * b for a, b in zip(row, v)) for row in M)


def vecmat(c: Sequence[int], M: Sequence[Sequence[int]]) -> IntCovector:
    """Row covector times matrix (pull a covector back along M)."""
    if len(c) != len(M):
        raise LatticeError(f"length mismatch: covector {len(c)} vs {len(M)} rows")
    cols = len(M[0]) if M else 0
    return tuple(sum(c[i] * M[i][j] for i in range(len(M))) for j in range(cols))


def vstack(*blocks: Sequence[Sequence[int]]) -> IntMatrix:
    out: IntMatrix = []
    for block in blocks:
        out.extend(list(row) for row in block)
    return out


def hstack(*blocks: Sequence[Sequence[int]]) -> IntMatrix:
    rows = max((len(b) for b in blocks), default=0)
    out = [[] for _ in range(rows)]
    for block in blocks:
        for i in range(rows):
            out[i].extend(block[i])
    return out


def columns(M: Sequence[Sequence[int]], ncols: int) -> List[IntVector]:
    return [tuple(row[j] for row in M) for j in range(ncols)]


def from_columns(cols: Sequence[Sequence[int]], nrows: int) -> IntMatrix:
    return [[c[i] for c in cols] for i in range(nrows)]


def add_vectors(u: Sequence[int], v: Sequence[int]) -> IntVector:
    if len(u) != len(v):
        raise LatticeError(f"length mismatch: {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def scale_vector(m: int, v: Sequence[int]) -> IntVector:
    return tuple(m * a for a in v)


def is_zero(v: Sequence[int]) -> bool:
    return all(a == 0 for a in v)


# ---------------------------------------------------------------------------
# Pairing and primitive vectors
# ---------------------------------------------------------------------------

def pairing(c: Sequence[int], v: Sequence[int]) -> int:
    """Standard pairing of a covector with a vector."""
    if len(c) != len(v):
        raise LatticeError(f"length mismatch in pairing: {len(c)} vs {len(v)}")
    return sum(a * b for a, b in zip(c, v))


def primitive_part(v: Sequence[int]) -> Tuple[IntVector, int]:
    """Split v = m·v̄ with v̄ primitive and m > 0."""
    g = 0
    for a in v:
        g = gcd(g, a)
    if g == 0:
        raise LatticeError("primitive_part of the zero vector")
    return tuple(a // g for a in v), g


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def _swap_rows(M: IntMatrix, i: int, j: int) -> None:
    M[i], M[j] = M[j], M[i]


def _swap_cols(M: IntMatrix, i: int, j: int) -> None:
    for row in M:
        row[i], row[j] = row[j], row[i]


def _add_row(M: IntMatrix, target: int, source: int, q: int) -> None:
    if q:
        src = M[source]
        M[target] = [a + q * b for a, b in zip(M[target], src)]


def _add_col(M: IntMatrix, target: int, source: int, q: int) -> None:
    if q:
        for row in M:
            row[target] += q * row[source]


def _snf(M: Sequence[Sequence[int]], ncols: Optional[int], track: bool):
    A = copy_matrix(M)
    m = len(A)
    n = len(A[0]) if A else (ncols or 0)
    U = identity(m) if track else None
    V = identity(n) if track else None

    def row_op(target, source, q):
        _add_row(A, target, source, q)
        if track:
            _add_row(U, target, source, q)

    def col_op(target, source, q):
        _add_col(A, target, source, q)
        if track:
            _add_col(V, target, source, q)

    def swap_r(i, j):
        if i != j:
            _swap_rows(A, i, j)
            if track:
                _swap_rows(U, i, j)

    def swap_c(i, j):
        if i != j:
            _swap_cols(A, i, j)
            if track:
                _swap_cols(V, i, j)

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < best[0]):
                    best = (abs(A[i][j]), i, j)
        if best is None:
            break
        swap_r(t, best[1])
        swap_c(t, best[2])

        while True:
            pivot = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    row_op(i, t, -(A[i][t] // pivot))
            for j in range(t + 1, n):
                if A[t][j]:
                    col_op(j, t, -(A[t][j] // pivot))

            remainders = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
            remainders += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
            if remainders:
                _, i, j = min(remainders)
                if j == t:
                    swap_r(t, i)
                else:
                    swap_c(t, j)
                continue

            # divisibility chain: fold an offending row into the pivot row
            offending = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % pivot:
                        offending = i
                        break
                if offending is not None:
                    break
            if offending is None:
                break
            row_op(t, offending, 1)

        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            if track:
                U[t] = [-a for a in U[t]]

    return U, A, V


def smith_normal_form(M: Sequence[Sequence[int]], ncols: Optional[int] = None) -> SNFResult:
    """Smith normal form with transforms, U·M·V = D.

    ``ncols`` is only needed for matrices with zero rows.
    """
    U, D, V = _snf(M, ncols, track=True)
    return SNFResult(U=U, D=D, V=V)


def invariant_factors(M: Sequence[Sequence[int]]) -> List[int]:
    """Non-zero diagonal entries of the Smith normal form."""
    _, D, _ = _snf(M, None, track=False)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0)) if D[i][i] != 0]


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------

def _bareiss(M: Sequence[Sequence[int]]) -> Tuple[int, int]:
    """Return (rank, sign-adjusted last pivot) by fraction-free elimination."""
    A = copy_matrix(M)
    m = len(A)
    n = len(A[0]) if A else 0
    prev = 1
    sign = 1
    r = 0
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if A[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            _swap_rows(A, p, r)
            sign = -sign
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                A[i][j] = (A[i][j] * A[r][c] - A[i][c] * A[r][j]) // prev
            A[i][c] = 0
        prev = A[r][c]
        r += 1
    return r, sign * prev


def rank(M: Sequence[Sequence[int]]) -> int:
    if not M or not M[0]:
        return 0
    return _bareiss(M)[0]


def determinant(M: Sequence[Sequence[int]]) -> int:
    n = len(M)
    if n == 0:
        return 1
    if any(len(row) != n for row in M):
        raise LatticeError("determinant of a non-square matrix")
    r, last = _bareiss(M)
    return last if r == n else 0


# ---------------------------------------------------------------------------
# Kernels and solving
# ---------------------------------------------------------------------------

def integer_kernel(M: Sequence[Sequence[int]], ncols: Optional[int] = None) -> List[IntVector]:
    """Saturated basis of {v : M v = 0}."""
    n = len(M[0]) if M else (ncols or 0)
    if not M:
        return [tuple(row) for row in identity(n)]
    snf = smith_normal_form(M)
    r = snf.rank
    return columns(snf.V, n)[r:]


def cokernel_covectors(basis: Sequence[Sequence[int]], n: int) -> List[IntCovector]:
    """Covectors cutting out the saturation of span(basis) inside ℤⁿ."""
    if not basis:
        return [tuple(row) for row in identity(n)]
    return integer_kernel([list(b) for b in basis], n)


def solve_integer(B: Sequence[Sequence[int]], v: Sequence[int], ncols: Optional[int] = None) -> Optional[IntVector]:
    """Integer x with B·x = v, or None when no integer solution exists."""
    m = len(B)
    if len(v) != m:
        raise LatticeError(f"length mismatch: matrix has {m} rows, vector {len(v)}")
    n = len(B[0]) if B else (ncols or 0)
    if n == 0:
        return () if is_zero(v) else None
    snf = smith_normal_form(B)
    w = matvec(snf.U, v)
    y = [0] * n
    for i in range(m):
        d = snf.D[i][i] if i < n else 0
        if d == 0:
            if w[i] != 0:
                return None
        else:
            if w[i] % d:
                return None
            y[i] = w[i] // d
    return matvec(snf.V, y)


def unimodular_inverse(M: Sequence[Sequence[int]]) -> IntMatrix:
    n = len(M)
    if determinant(M) not in (1, -1):
        raise LatticeError("matrix is not unimodular")
    cols = []
    for j in range(n):
        e = [1 if i == j else 0 for i in range(n)]
        x = solve_integer(M, e)
        if x is None:
            raise LatticeError("matrix is not unimodular")
        cols.append(x)
    return from_columns(cols, n)


def saturated_intersection(constraints: Sequence[Sequence[int]], n: int) -> List[IntVector]:
    """Saturated basis of the common kernel of stacked constraint rows."""
    rows = [list(r) for r in constraints if not is_zero(r)]
    return integer_kernel(rows, n)


def is_saturated(basis: Sequence[Sequence[int]]) -> bool:
    if not basis:
        return True
    return all(d == 1 for d in invariant_factors([list(b) for b in basis]))
