"""Deterministic relaxed k-sparse recovery from Vandermonde syndromes.

The sketch of x in Z^n is s_r = sum_j x_j * j**(r-1) mod p for r = 1..2k. Any
k-sparse x with entries in [-N, N] is recovered exactly by Reed-Solomon style
decoding; on anything denser the report either fails or returns some k-sparse
vector with the same syndromes (the caller is responsible for telling those
apart).
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

from sympy import isprime, nextprime

from .modring import PolyField, centered, solve_mod_p


def default_prime(n: int, N: int) -> int:
    """Smallest prime exceeding max(2N + 1, n)."""
    return int(nextprime(max(2 * N + 1, n)))


@dataclass(frozen=True)
class RecoveryParams:
    n: int
    k: int
    N: int
    p: int = 0

    def __post_init__(self):
        if self.p == 0:
            object.__setattr__(self, "p", default_prime(self.n, self.N))
        if self.n < 1 or self.k < 1 or self.N < 1:
            raise ValueError(f"need n, k, N >= 1 (got n={self.n}, k={self.k}, N={self.N})")
        if not isprime(self.p):
            raise ValueError(f"syndrome modulus p={self.p} is not prime")
        if self.p <= 2 * self.N:
            raise ValueError(f"p > 2N violated: p={self.p}, N={self.N}")
        if self.p <= self.n:
            raise ValueError(f"p > n violated: p={self.p}, n={self.n}")
        if self.k > max(1, self.n // 2):
            raise ValueError(f"k <= n/2 violated: k={self.k}, n={self.n}")


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, nonzero value) pairs."""

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        idx = [i for i, _ in self.entries]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(v == 0 for _, v in self.entries):
            raise ValueError("sparse vector holds a zero value")

    @classmethod
    def from_dict(cls, d: dict[int, int]) -> "SparseVector":
        return cls(tuple(sorted((int(i), int(v)) for i, v in d.items() if v != 0)))

    @classmethod
    def from_dense(cls, x) -> "SparseVector":
        return cls(tuple((j + 1, int(v)) for j, v in enumerate(x) if v != 0))

    def to_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def format(self) -> str:
        return " ".join([str(len(self.entries))] + [f"{i}:{v}" for i, v in self.entries])

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class DecodeFailure:
    reason: str

    def __bool__(self) -> bool:
        return False


def syndromes_of(x, k: int, p: int) -> list[int]:
    """Naive double loop: s_r = sum_j x_j * j**(r-1) mod p.

    ``x`` is a dense sequence indexed from 1 or a {index: value} mapping.
    """
    items = list(x.items()) if isinstance(x, Mapping) else list(enumerate(x, start=1))
    out = []
    for r in range(2 * k):
        s = 0
        for j, v in items:
            if v:
                s += int(v) * pow(j, r, p)
        out.append(s % p)
    return out


def berlekamp_massey(seq: list[int], p: int) -> tuple[list[int], int]:
    """Shortest LFSR for ``seq`` over F_p: connection poly C (C[0] = 1) and length."""
    C = [1]
    B = [1]
    L = 0
    shift = 1
    b = 1
    for t, s in enumerate(seq):
        d = s
        for i in range(1, L + 1):
            if i < len(C):
                d += C[i] * seq[t - i]
        d %= p
        if d == 0:
            shift += 1
            continue
        coef = d * pow(b, -1, p) % p
        T = list(C)
        need = len(B) + shift
        if len(C) < need:
            C = C + [0] * (need - len(C))
        for i, c in enumerate(B):
            C[i + shift] = (C[i + shift] - coef * c) % p
        if 2 * L <= t:
            L = t + 1 - L
            B = T
            b = d
            shift = 1
        else:
            shift += 1
    while len(C) > 1 and C[-1] == 0:
        C.pop()
    return C, L


class SyndromeState:
    """Mutable recovery sketch: 2k syndromes plus a buffer of pending updates."""

    def __init__(self, params: RecoveryParams):
        self.params = params
        self.syndromes = [0] * (2 * params.k)
        self.buffer: list[tuple[int, int]] = []
        self.field = PolyField(params.p)  # counts batched-path multiplications
        self.naive_mults = 0

    @property
    def field_mults(self) -> int:
        return self.field.mults + self.naive_mults

    def copy(self) -> "SyndromeState":
        other = SyndromeState(self.params)
        other.syndromes = list(self.syndromes)
        other.buffer = list(self.buffer)
        return other

    def __eq__(self, other) -> bool:
        if not isinstance(other, SyndromeState):
            return NotImplemented
        return self.params == other.params and self.syndromes == other.syndromes and self.buffer == other.buffer

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= self.params.n:
            raise IndexError(f"index {i} outside [1, {self.params.n}]")

    def update_naive(self, i: int, delta: int) -> None:
        self._check_index(i)
        p = self.params.p
        d = delta % p
        if d == 0:
            return
        pw = 1
        s = self.syndromes
        for r in range(len(s)):
            s[r] = (s[r] + d * pw) % p
            pw = pw * i % p
        self.naive_mults += 2 * len(s)

    def update_batched(self, i: int, delta: int) -> None:
        self._check_index(i)
        self.buffer.append((i, delta))
        if len(self.buffer) >= 2 * self.params.k:
            self.flush()

    def flush(self) -> None:
        if not self.buffer:
            return
        p = self.params.p
        merged: dict[int, int] = {}
        for i, d in self.buffer:
            merged[i] = (merged.get(i, 0) + d) % p
        self.buffer = []
        pts = [i for i, d in merged.items() if d]
        if not pts:
            return
        wts = [merged[i] for i in pts]
        sums = self.field.weighted_power_sums(pts, wts, len(self.syndromes))
        self.syndromes = [(a + b) % p for a, b in zip(self.syndromes, sums)]

    def report(self) -> SparseVector | DecodeFailure:
        self.flush()
        return decode_syndromes(self.syndromes, self.params, self.field)


def setup(params: RecoveryParams) -> SyndromeState:
    return SyndromeState(params)


def decode_syndromes(syn: list[int], params: RecoveryParams, field: PolyField | None = None):
    """Berlekamp-Massey, root search, value solve and self-check."""
    n, k, N, p = params.n, params.k, params.N, params.p
    field = field or PolyField(p)
    if not any(syn):
        return SparseVector()
    C, L = berlekamp_massey(syn, p)
    if L > k:
        return DecodeFailure(f"locator length {L} exceeds k={k}")
    if len(C) - 1 != L:
        return DecodeFailure("locator degree below its length")
    # reversed locator prod (z - j) has the support as roots
    rev = C[::-1]
    support = _find_roots(rev, L, n, k, field)
    if len(support) != L:
        return DecodeFailure(f"locator has {len(support)} roots in [1, n], expected {L}")
    # transposed Vandermonde system: sum_j x_j j^(r-1) = s_r, r = 1..L
    A = [[pow(j, r, p) for j in support] for r in range(L)]
    vals = solve_mod_p(A, syn[:L], p)
    if vals is None:
        return DecodeFailure("singular value system")
    signed = [centered(v, p) for v in vals]
    if any(v == 0 or abs(v) > N for v in signed):
        return DecodeFailure("recovered value outside [-N, N] or zero")
    check = [0] * len(syn)
    for j, v in zip(support, vals):
        pw = 1
        for r in range(len(syn)):
            check[r] = (check[r] + v * pw) % p
            pw = pw * j % p
    if check != list(syn):
        return DecodeFailure("recomputed syndromes disagree")
    return SparseVector(tuple(zip(support, signed)))


def _find_roots(rev: list[int], L: int, n: int, k: int, field: PolyField) -> list[int]:
    if n <= 4 * k * max(1, math.log2(n)):
        vals = field.multipoint_eval(rev, list(range(1, n + 1)))
        return [j for j, v in zip(range(1, n + 1), vals) if v == 0]
    roots = []
    p = field.p
    for j in range(1, n + 1):
        acc = 0
        for c in reversed(rev):
            acc = (acc * j + c) % p
        if acc == 0:
            roots.append(j)
            if len(roots) > L:
                break
    field.mults += n * len(rev)
    return roots
