"""Dense matrices of residues modulo a single modulus.

Power-of-two moduli (the common case for ciphertext arithmetic) are stored as
``uint64`` arrays: wraparound arithmetic modulo 2**64 reduces consistently to
arithmetic modulo any 2**L with L <= 63, so sums and products only need a final
mask. Every other modulus falls back to ``object`` arrays of Python ints, which
are exact but slower.
"""

from __future__ import annotations

import numpy as np

MAX_MODULUS_BITS = 63

# limb width for the float64 product path; 21-bit limbs times a {0,1} matrix
# stay exact in a double for up to 2**32 inner terms
_LIMB_BITS = 21
_LIMB_MASK = np.uint64((1 << _LIMB_BITS) - 1)


def is_power_of_two(m: int) -> bool:
    return m > 0 and m & (m - 1) == 0


def check_modulus(m: int) -> int:
    m = int(m)
    if m < 2:
        raise ValueError(f"modulus must be >= 2, got {m}")
    if m.bit_length() > MAX_MODULUS_BITS + (1 if is_power_of_two(m) else 0):
        raise ValueError(f"modulus {m} does not fit in {MAX_MODULUS_BITS} bits")
    return m


def centered(x: int, m: int) -> int:
    """Representative of ``x mod m`` in the half-open interval (-m/2, m/2]."""
    x %= m
    return x - m if 2 * x > m else x


def _dtype_for(m: int):
    return np.uint64 if is_power_of_two(m) else object


class ModMatrix:
    """Immutable rows x cols matrix over Z_m, entries kept in [0, m)."""

    __slots__ = ("data", "modulus")

    def __init__(self, data, modulus: int, *, _trusted: bool = False):
        modulus = check_modulus(modulus)
        if _trusted:
            arr = data
        else:
            arr = _reduce(np.asarray(data, dtype=object), modulus)
        if arr.ndim != 2:
            raise ValueError(f"ModMatrix needs a 2-d array, got shape {arr.shape}")
        arr.flags.writeable = False
        self.data = arr
        self.modulus = modulus

    # construction helpers

    @classmethod
    def zeros(cls, rows: int, cols: int, modulus: int) -> "ModMatrix":
        modulus = check_modulus(modulus)
        if is_power_of_two(modulus):
            arr = np.zeros((rows, cols), dtype=np.uint64)
        else:
            arr = np.zeros((rows, cols), dtype=object)
            arr[...] = 0
        return cls(arr, modulus, _trusted=True)

    @classmethod
    def identity(cls, size: int, modulus: int) -> "ModMatrix":
        z = cls.zeros(size, size, modulus).data.copy()
        for i in range(size):
            z[i, i] = 1
        return cls(z, modulus, _trusted=True)

    @classmethod
    def from_array(cls, arr: np.ndarray, modulus: int) -> "ModMatrix":
        """Wrap an array whose entries are already reduced (no copy when possible)."""
        modulus = check_modulus(modulus)
        arr = np.array(arr, dtype=_dtype_for(modulus), copy=True)
        return cls(arr, modulus, _trusted=True)

    # shape and access

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def entry(self, r: int, c: int) -> int:
        return int(self.data[r, c])

    def tolist(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.data]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModMatrix):
            return NotImplemented
        return (
            self.modulus == other.modulus and self.shape == other.shape and bool(np.array_equal(self.data, other.data))
        )

    def __hash__(self):
        return hash((self.modulus, self.shape, self.to_bytes()))

    def __repr__(self) -> str:
        return f"ModMatrix({self.rows}x{self.cols} mod {self.modulus})"

    def is_zero(self) -> bool:
        return not np.any(self.data != 0)

    # arithmetic

    def _check_same(self, other: "ModMatrix") -> None:
        if self.modulus != other.modulus:
            raise ValueError(f"modulus mismatch: {self.modulus} vs {other.modulus}")
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: "ModMatrix") -> "ModMatrix":
        self._check_same(other)
        return ModMatrix(_reduce(self.data + other.data, self.modulus), self.modulus, _trusted=True)

    def __sub__(self, other: "ModMatrix") -> "ModMatrix":
        self._check_same(other)
        if self.data.dtype == np.uint64:
            out = (self.data - other.data) & np.uint64(self.modulus - 1)
        else:
            out = _reduce(self.data - other.data, self.modulus)
        return ModMatrix(out, self.modulus, _trusted=True)

    def __neg__(self) -> "ModMatrix":
        return ModMatrix.zeros(self.rows, self.cols, self.modulus) - self

    def scale(self, c: int) -> "ModMatrix":
        """Multiply every entry by the (possibly negative) integer ``c``."""
        c %= self.modulus
        if self.data.dtype == np.uint64:
            out = (self.data * np.uint64(c)) & np.uint64(self.modulus - 1)
        else:
            out = _reduce(self.data * c, self.modulus)
        return ModMatrix(out, self.modulus, _trusted=True)

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        return mat_mul(self, other)

    def to_bytes(self) -> bytes:
        """Row-major little-endian 8-byte entries."""
        return np.ascontiguousarray(self.data, dtype=np.uint64).astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes, rows: int, cols: int, modulus: int) -> "ModMatrix":
        arr = np.frombuffer(raw, dtype="<u8", count=rows * cols).reshape(rows, cols)
        if np.any(arr >= np.uint64(modulus)):
            raise ValueError("matrix entry out of range for modulus")
        if is_power_of_two(modulus):
            return cls.from_array(arr, modulus)
        return cls(arr.astype(object), modulus, _trusted=True)


def _reduce(arr: np.ndarray, m: int) -> np.ndarray:
    if is_power_of_two(m):
        if arr.dtype == np.uint64:
            return arr & np.uint64(m - 1)
        # object input may hold negatives or big ints
        red = np.vectorize(lambda v: int(v) % m, otypes=[object])(arr) if arr.size else arr
        return np.asarray(red, dtype=object).astype(np.uint64)
    if arr.size == 0:
        return arr.astype(object)
    out = np.asarray(arr, dtype=object) % m
    return out


def mat_mul(a: ModMatrix, b: ModMatrix) -> ModMatrix:
    """Exact product ``a @ b`` modulo the shared modulus."""
    if a.modulus != b.modulus:
        raise ValueError(f"modulus mismatch: {a.modulus} vs {b.modulus}")
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    m = a.modulus
    if a.data.dtype == np.uint64:
        out = (a.data @ b.data) & np.uint64(m - 1)
    else:
        out = (a.data @ b.data) % m
    return ModMatrix(out, m, _trusted=True)


def mat_mul_binary(a: ModMatrix, bits: np.ndarray) -> ModMatrix:
    """``a @ bits`` where ``bits`` is a {0,1} integer array.

    Runs as three float64 matrix products over 21-bit limbs of ``a``, which is
    exact and lets the product go through BLAS.
    """
    if a.cols != bits.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {bits.shape}")
    m = a.modulus
    fb = bits.astype(np.float64)
    if a.data.dtype == np.uint64:
        acc = np.zeros((a.rows, bits.shape[1]), dtype=np.uint64)
        for j in range(3):
            limb = ((a.data >> np.uint64(_LIMB_BITS * j)) & _LIMB_MASK).astype(np.float64)
            acc += (limb @ fb).astype(np.uint64) << np.uint64(_LIMB_BITS * j)
        return ModMatrix(acc & np.uint64(m - 1), m, _trusted=True)
    acc = np.zeros((a.rows, bits.shape[1]), dtype=object)
    acc[...] = 0
    for j in range(3):
        limb = np.array(
            [[(int(v) >> (_LIMB_BITS * j)) & ((1 << _LIMB_BITS) - 1) for v in row] for row in a.data],
            dtype=np.float64,
        ).reshape(a.rows, a.cols)
        part = (limb @ fb).astype(np.int64).astype(object)
        acc = acc + part * (1 << (_LIMB_BITS * j))
    return ModMatrix(acc % m, m, _trusted=True)


def modulus_bits(q: int) -> int:
    """L = ceil(log2 q)."""
    return (int(q) - 1).bit_length()


def gadget_matrix(g: int, q: int) -> ModMatrix:
    """Block-diagonal (g+1) x (g+1)*L matrix with rows (1, 2, ..., 2**(L-1)) per block."""
    q = check_modulus(q)
    L = modulus_bits(q)
    G = ModMatrix.zeros(g + 1, (g + 1) * L, q).data.copy()
    for r in range(g + 1):
        for b in range(L):
            G[r, r * L + b] = (1 << b) % q
    return ModMatrix(G, q, _trusted=True)


def bit_decompose_array(c: ModMatrix) -> np.ndarray:
    """G^{-1}(c) as a plain uint8 array of shape (rows*L, cols)."""
    L = modulus_bits(c.modulus)
    rows, cols = c.shape
    data = c.data if c.data.dtype == np.uint64 else c.data.astype(np.uint64)
    shifts = np.arange(L, dtype=np.uint64)
    # (rows, L, cols) -> row-major block layout matching gadget_matrix
    bits = (data[:, None, :] >> shifts[None, :, None]) & np.uint64(1)
    return bits.reshape(rows * L, cols).astype(np.uint8)


def bit_decompose(c: ModMatrix) -> ModMatrix:
    """{0,1} matrix D of shape (rows*L, cols) with gadget_matrix @ D == c."""
    return ModMatrix.from_array(bit_decompose_array(c), c.modulus)
