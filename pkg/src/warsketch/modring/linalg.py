"""Gaussian elimination over a prime field."""

from __future__ import annotations


def _rref(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    m = [[v % p for v in row] for row in rows]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [(v * inv) % p for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def solve_mod_p(a: list[list[int]], b: list[int], p: int) -> list[int] | None:
    """Unique solution of a x = b over F_p, or None if singular/inconsistent."""
    n = len(a)
    if n == 0:
        return []
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    m, pivots = _rref(aug, p)
    if len(pivots) != len(a[0]) or (pivots and pivots[-1] == len(a[0])):
        return None
    return [m[i][-1] for i in range(len(a[0]))]


def nullspace_mod_p(a: list[list[int]], p: int) -> list[list[int]]:
    """Basis of {x : a x = 0} over F_p."""
    ncols = len(a[0])
    m, pivots = _rref(a, p)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(m, pivots):
            v[pc] = (-row[f]) % p
        basis.append(v)
    return basis
