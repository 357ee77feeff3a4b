"""Integer linear algebra: Hermite and Smith normal forms, LLL on Gram
matrices and Fincke-Pohst enumeration of short lattice vectors.

Everything here works on plain Python lists of ints (or Fractions for the
Gram-based LLL), so results are exact regardless of the size of entries.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

Matrix = List[List[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _axpy(dst: List[int], q: int, src: Sequence[int]) -> None:
    # dst -= q * src, in place
    if q:
        for k, s in enumerate(src):
            if s:
                dst[k] -= q * s


def hnf_transform(rows: Sequence[Sequence[int]]) -> Tuple[Matrix, Matrix]:
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``U * A = H``, ``U`` unimodular, ``H`` upper
    echelon with positive pivots and entries above each pivot reduced into
    ``[0, pivot)``. Zero rows of ``H`` sit at the bottom; the matching rows of
    ``U`` span the left kernel of ``A``.
    """
    A = [list(map(int, r)) for r in rows]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        found = False
        while True:
            nz = [i for i in range(r, m) if A[i][c] != 0]
            if not nz:
                break
            found = True
            piv = min(nz, key=lambda i: abs(A[i][c]))
            if piv != r:
                A[r], A[piv] = A[piv], A[r]
                U[r], U[piv] = U[piv], U[r]
            clean = True
            p = A[r][c]
            for i in range(r + 1, m):
                if A[i][c]:
                    q = A[i][c] // p
                    _axpy(A[i], q, A[r])
                    _axpy(U[i], q, U[r])
                    if A[i][c]:
                        clean = False
            if clean:
                break
        if not found:
            continue
        if A[r][c] < 0:
            A[r] = [-v for v in A[r]]
            U[r] = [-v for v in U[r]]
        p = A[r][c]
        for i in range(r):
            q = A[i][c] // p
            _axpy(A[i], q, A[r])
            _axpy(U[i], q, U[r])
        r += 1
    return A, U


def hnf(rows: Sequence[Sequence[int]]) -> Matrix:
    """Nonzero rows of the Hermite normal form of the row span."""
    if not rows:
        return []
    H, _ = hnf_transform(rows)
    return [h for h in H if any(h)]


def solve_in_span(H: Sequence[Sequence[int]], target: Sequence[int]) -> Optional[List[int]]:
    """Integer ``c`` with ``c * H = target`` for ``H`` in echelon form, else None."""
    t = list(map(int, target))
    coeffs = []
    for row in H:
        piv = next(j for j, v in enumerate(row) if v)
        if t[piv] % row[piv]:
            return None
        q = t[piv] // row[piv]
        coeffs.append(q)
        _axpy(t, q, row)
    if any(t):
        return None
    return coeffs


def smith(A: Sequence[Sequence[int]]) -> Tuple[List[int], Matrix, Matrix]:
    """Smith normal form: returns ``(diag, U, V)`` with ``U * A * V = S``.

    ``diag`` lists the nonzero-or-zero diagonal of ``S`` of length
    ``min(m, n)``, each entry dividing the next.
    """
    S = [list(map(int, r)) for r in A]
    m = len(S)
    n = len(S[0]) if m else 0
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def col_axpy(j, q, i):
        # column j -= q * column i
        for row in S:
            row[j] -= q * row[i]
        for row in V:
            row[j] -= q * row[i]

    for t in range(min(m, n)):
        entries = [(abs(S[i][j]), i, j) for i in range(t, m) for j in range(t, n) if S[i][j]]
        if not entries:
            break
        _, i0, j0 = min(entries)
        swap_rows(t, i0)
        swap_cols(t, j0)
        while True:
            p = S[t][t]
            dirty = False
            for i in range(t + 1, m):
                if S[i][t]:
                    q = S[i][t] // p
                    _axpy(S[i], q, S[t])
                    _axpy(U[i], q, U[t])
                    dirty |= S[i][t] != 0
            for j in range(t + 1, n):
                if S[t][j]:
                    q = S[t][j] // p
                    col_axpy(j, q, t)
                    dirty |= S[t][j] != 0
            if dirty:
                cands = [(abs(S[i][t]), i, t) for i in range(t + 1, m) if S[i][t]]
                cands += [(abs(S[t][j]), t, j) for j in range(t + 1, n) if S[t][j]]
                _, i1, j1 = min(cands)
                if i1 != t:
                    swap_rows(t, i1)
                else:
                    swap_cols(t, j1)
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if S[i][j] % p), None)
            if bad is None:
                break
            i1 = bad[0]
            for k in range(n):
                S[t][k] += S[i1][k]
            for k in range(m):
                U[t][k] += U[i1][k]
        if S[t][t] < 0:
            S[t] = [-v for v in S[t]]
            U[t] = [-v for v in U[t]]
    diag = [S[i][i] for i in range(min(m, n))]
    return diag, U, V


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def transpose(A: Sequence[Sequence]) -> list:
    return [list(r) for r in zip(*A)]


def det(A: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-free elimination (works for Fractions too)."""
    M = [[Fraction(v) for v in r] for r in A]
    n = len(M)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            sign = -sign
        p = M[c][c]
        result *= p
        for i in range(c + 1, n):
            if M[i][c]:
                f = M[i][c] / p
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return sign * result


def lll_gram(G: Sequence[Sequence], delta: Fraction = Fraction(99, 100)) -> Matrix:
    """LLL reduction driven by a positive definite Gram matrix.

    Returns a unimodular integer matrix ``T`` whose rows express the reduced
    basis in the original one, so the reduced Gram matrix is ``T G T^t``.
    """
    n = len(G)
    Gf = [[Fraction(v) for v in r] for r in G]
    T = identity(n)

    def gram(i, j):
        return sum(T[i][a] * sum(Gf[a][b] * T[j][b] for b in range(n)) for a in range(n))

    def gso():
        mu = [[Fraction(0)] * n for _ in range(n)]
        B = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                s = gram(i, j) - sum(mu[j][k] * mu[i][k] * B[k] for k in range(j))
                mu[i][j] = s / B[j]
            B[i] = gram(i, i) - sum(mu[i][k] ** 2 * B[k] for k in range(i))
        return mu, B

    mu, B = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                _axpy(T[k], q, T[j])
                for i in range(j):
                    mu[k][i] -= q * mu[j][i]
                mu[k][j] -= q
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            T[k], T[k - 1] = T[k - 1], T[k]
            mu, B = gso()
            k = max(k - 1, 1)
    return T


def short_vectors(G: Sequence[Sequence[int]], bound, *, exact_level: bool = False,
                  include_zero: bool = False) -> List[Tuple[int, ...]]:
    """All integer vectors ``x`` with ``x G x^t <= bound`` (or ``== bound``).

    ``G`` must be a positive definite integer matrix. Pruning uses a float
    Cholesky decomposition of the LLL-reduced form with a safety margin; each
    candidate leaf is then checked exactly with integers, so the output is
    exact as long as the margin dominates the float error (it does by many
    orders of magnitude for the sizes used here).
    """
    n = len(G)
    G = [[int(v) for v in r] for r in G]
    bound = Fraction(bound)
    if bound < 0:
        return []
    T = lll_gram(G)
    Gr = matmul(matmul(T, G), transpose(T))
    # float Cholesky: Q(x) = sum_i q[i] (x_i + sum_{j>i} m[i][j] x_j)^2
    a = [[float(v) for v in r] for r in Gr]
    q = [0.0] * n
    m = [[0.0] * n for _ in range(n)]
    for i in range(n):
        q[i] = a[i][i] - sum(m[k][i] ** 2 * q[k] for k in range(i))
        for j in range(i + 1, n):
            m[i][j] = (a[i][j] - sum(m[k][i] * m[k][j] * q[k] for k in range(i))) / q[i]
    fb = float(bound)
    slack = 1e-7 * (1.0 + abs(fb))
    out: List[Tuple[int, ...]] = []
    x = [0] * n

    def leaf():
        v = [sum(x[i] * T[i][j] for i in range(n)) for j in range(n)]
        val = sum(v[i] * sum(G[i][j] * v[j] for j in range(n)) for i in range(n))
        if (val == bound) if exact_level else (val <= bound):
            if include_zero or any(v):
                out.append(tuple(v))

    def rec(i: int, rem: float):
        c = -sum(m[i][j] * x[j] for j in range(i + 1, n))
        r = math.sqrt(max(rem + slack, 0.0) / q[i]) + 1e-9
        lo = math.ceil(c - r)
        hi = math.floor(c + r)
        for xi in range(lo, hi + 1):
            used = q[i] * (xi - c) ** 2
            if used > rem + slack:
                continue
            x[i] = xi
            if i == 0:
                leaf()
            else:
                rec(i - 1, rem - used)
        x[i] = 0

    if n:
        rec(n - 1, fb)
    return out


def int_root_floor(x: int, k: int) -> int:
    """Largest integer r with r**k <= x (x >= 0)."""
    if x < 0:
        raise ValueError("negative radicand")
    if x < 2:
        return x
    lo, hi = 0, 1
    while hi ** k <= x:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid ** k <= x:
            lo = mid
        else:
            hi = mid
    return lo


def lcm_list(vals: Iterable[int]) -> int:
    out = 1
    for v in vals:
        out = out * v // math.gcd(out, v)
    return out
