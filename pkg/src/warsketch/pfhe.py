"""GSW-style pseudorandom FHE used as the verification hash.

Production digests are uniform matrices expanded from a 32-byte seed. Test mode
builds real keys and real encryptions of the bits of a planted index so that the
zero-probability hybrid can be checked directly; ciphertexts built in test mode
carry their plaintext and a worst-case noise tag.
"""

from __future__ import annotations

import hashlib
import math
import struct
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .modring import (
    ModMatrix,
    bit_decompose_array,
    centered,
    gadget_matrix,
    is_power_of_two,
    mat_mul_binary,
    modulus_bits,
)
from .modring.matrix import MAX_MODULUS_BITS, check_modulus

DIGEST_MAGIC = b"WARH"
DIGEST_VERSION = 1
SEED_BYTES = 32
SECURE_MIN_DIMENSION = 512


class ParameterError(ValueError):
    """A parameter inequality required for correctness does not hold."""


class NoiseBudgetError(ArithmeticError):
    """A tagged linear combination exceeds the decoding noise budget."""


def message_bits(n: int) -> int:
    """ell = ceil(log2 n), at least 1."""
    if n < 1:
        raise ValueError(f"universe size must be >= 1, got {n}")
    return max(1, (n - 1).bit_length())


def index_bits(i: int, ell: int) -> tuple[int, ...]:
    """Most-significant-first bits of ``i mod 2**ell``.

    Index n = 2**ell wraps to the all-zero pattern, which no other index in
    [1, n] uses, so the point circuits stay distinct.
    """
    v = i % (1 << ell)
    return tuple((v >> (ell - 1 - b)) & 1 for b in range(ell))


@dataclass(frozen=True)
class PfheParams:
    g: int
    q: int
    ell: int
    beta: int
    sigma: float = 0.0
    sampler: str = "gaussian"

    def __post_init__(self):
        check_modulus(self.q)
        if self.g < 0:
            raise ParameterError("lattice dimension g must be >= 0")
        if self.ell < 1:
            raise ParameterError("message-bit count ell must be >= 1")
        if self.beta < 0:
            raise ParameterError("noise bound beta must be >= 0")
        if self.sampler not in ("gaussian", "binomial"):
            raise ParameterError(f"unknown noise sampler {self.sampler!r}")

    @classmethod
    def create(cls, n: int, g: int, q: int, sigma: float = 1.0, sampler: str = "gaussian") -> "PfheParams":
        return cls(g=g, q=q, ell=message_bits(n), beta=noise_bound(sigma), sigma=sigma, sampler=sampler)

    @property
    def L(self) -> int:
        return modulus_bits(self.q)

    @property
    def h(self) -> int:
        return (self.g + 1) * self.L

    @property
    def fresh_noise(self) -> int:
        """Noise bound of a fresh encryption: h * beta."""
        return self.h * self.beta

    @property
    def e_eval(self) -> int:
        """Noise bound of an evaluated point circuit: ell * h * (h * beta)."""
        return self.ell * self.h * self.fresh_noise

    @property
    def matrix_bytes(self) -> int:
        return (self.g + 1) * self.h * 8

    def record(self) -> bytes:
        return struct.pack("<6Q", self.g, self.q, self.L, self.h, self.ell, self.beta)


def noise_bound(sigma: float) -> int:
    return int(math.ceil(6 * sigma))


def modulus_condition(n: int, k: int, N: int, params: PfheParams) -> int:
    """Right-hand side of q >= 8 * (n*N) * E_eval * k * N."""
    return 8 * (n * N) * params.e_eval * k * N


def auto_modulus(n: int, k: int, N: int, g: int, sigma: float = 1.0) -> int:
    """Smallest power of two q meeting the modulus condition (with h tied to q)."""
    beta = noise_bound(sigma)
    ell = message_bits(n)
    for L in range(1, MAX_MODULUS_BITS + 1):
        h = (g + 1) * L
        if (1 << L) >= 8 * (n * N) * (ell * h * h * beta) * k * N:
            return 1 << L
    raise ParameterError(
        f"no q <= 2**{MAX_MODULUS_BITS} satisfies q >= 8*(n*N)*E_eval*k*N for n={n}, k={k}, N={N}, g={g}"
    )


def check_modulus_condition(n: int, k: int, N: int, params: PfheParams) -> None:
    need = modulus_condition(n, k, N, params)
    if params.q < need:
        raise ParameterError(
            f"q >= 8*(n*N)*E_eval*k*N violated: q={params.q} < {need} (n={n}, N={N}, k={k}, E_eval={params.e_eval})"
        )


# randomness


def _rng(entropy: bytes, label: bytes) -> np.random.Generator:
    digest = hashlib.sha256(b"warsketch/" + label + b"/" + bytes(entropy)).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))


def sample_noise(rng: np.random.Generator, size: int, params: PfheParams) -> np.ndarray:
    """Integers in [-beta, beta]: bounded discrete Gaussian, or centered binomial."""
    beta = params.beta
    if beta == 0 or size == 0:
        return np.zeros(size, dtype=np.int64)
    out = np.empty(0, dtype=np.int64)
    while out.size < size:
        want = 2 * (size - out.size) + 16
        if params.sampler == "binomial":
            eta = max(1, int(math.ceil(2 * params.sigma**2)))
            bits = rng.integers(0, 2, size=(want, 2 * eta))
            cand = bits[:, :eta].sum(axis=1) - bits[:, eta:].sum(axis=1)
            cand = cand[np.abs(cand) <= beta]
        else:
            cand = rng.integers(-beta, beta + 1, size=want)
            sigma = params.sigma if params.sigma > 0 else beta / 6
            accept = rng.random(want) < np.exp(-(cand.astype(np.float64) ** 2) / (2 * sigma**2))
            cand = cand[accept]
        out = np.concatenate([out, cand.astype(np.int64)])
    return out[:size]


def _uniform_matrix(rng: np.random.Generator, rows: int, cols: int, q: int) -> ModMatrix:
    if is_power_of_two(q):
        raw = rng.integers(0, q, size=(rows, cols), dtype=np.uint64, endpoint=False)
        return ModMatrix.from_array(raw, q)
    vals = [[int(rng.integers(0, q)) for _ in range(cols)] for _ in range(rows)]
    return ModMatrix(vals, q)


def expand_matrix(seed: bytes, index: int, rows: int, cols: int, q: int) -> ModMatrix:
    """Exactly uniform matrix over Z_q from keyed counter-mode BLAKE2b.

    Power-of-two q masks 64-bit words; other q rejects words above the largest
    multiple of q below 2**64.
    """
    need = rows * cols
    limit = (1 << 64) - ((1 << 64) % q)
    words: list[np.ndarray] = []
    have = 0
    counter = 0
    key = bytes(seed)[:64]
    while have < need:
        block = bytearray()
        # batch a run of counters per loop to keep the Python overhead low
        for _ in range(max(1, (need - have) // 8 + 1)):
            block += hashlib.blake2b(struct.pack("<4sIQ", b"WARH", index, counter), key=key, digest_size=64).digest()
            counter += 1
        w = np.frombuffer(bytes(block), dtype="<u8").astype(np.uint64)
        if not is_power_of_two(q):
            w = w[w < np.uint64(limit)] if limit < (1 << 64) else w
        words.append(w)
        have += w.size
    flat = np.concatenate(words)[:need]
    if is_power_of_two(q):
        return ModMatrix.from_array((flat & np.uint64(q - 1)).reshape(rows, cols), q)
    vals = (flat.astype(object) % q).reshape(rows, cols)
    return ModMatrix(vals, q, _trusted=True)


# keys and ciphertexts


@dataclass(frozen=True)
class SecretKey:
    s_bar: tuple[int, ...]
    q: int

    @property
    def vector(self) -> list[int]:
        """sk = [-s_bar | 1] as residues."""
        return [(-s) % self.q for s in self.s_bar] + [1]


@dataclass(frozen=True)
class PublicKey:
    A: ModMatrix
    params: PfheParams


@dataclass(frozen=True)
class Ciphertext:
    """GSW ciphertext; ``mu`` and ``noise`` are test-mode tags (None otherwise)."""

    C: ModMatrix
    mu: int | None = None
    noise: int | None = None

    def __add__(self, other: "Ciphertext") -> "Ciphertext":
        return combine([self, other], [1, 1])


def keygen(params: PfheParams, entropy: bytes) -> tuple[PublicKey, SecretKey]:
    rng = _rng(entropy, b"keygen")
    q, g, h = params.q, params.g, params.h
    s_bar = [int(v) for v in _uniform_vector(rng, g, q)]
    A_bar = _uniform_matrix(rng, g, h, q) if g else None
    e = sample_noise(rng, h, params)
    alpha = []
    for j in range(h):
        acc = int(e[j])
        for r in range(g):
            acc += s_bar[r] * int(A_bar.data[r, j])
        alpha.append(acc % q)
    rows = ([[int(v) for v in row] for row in A_bar.data] if g else []) + [alpha]
    A = ModMatrix(rows, q)
    return PublicKey(A=A, params=params), SecretKey(s_bar=tuple(s_bar), q=q)


def _uniform_vector(rng: np.random.Generator, size: int, q: int) -> list[int]:
    if size == 0:
        return []
    return [int(v) for v in _uniform_matrix(rng, 1, size, q).data[0]]


def encrypt(pk: PublicKey, mu: int, entropy: bytes) -> Ciphertext:
    """A * R + mu * G with R uniform in {0,1}^{h x h}."""
    if mu not in (0, 1):
        raise ValueError("GSW plaintext must be a bit")
    params = pk.params
    rng = _rng(entropy, b"encrypt")
    R = rng.integers(0, 2, size=(params.h, params.h), dtype=np.uint8)
    C = mat_mul_binary(pk.A, R)
    if mu:
        C = C + gadget_matrix(params.g, params.q)
    return Ciphertext(C=C, mu=mu, noise=params.fresh_noise)


def combine(cts, coeffs) -> Ciphertext:
    """Integer linear combination sum x_i * ct_i, propagating test-mode tags."""
    cts = list(cts)
    coeffs = [int(x) for x in coeffs]
    if len(cts) != len(coeffs) or not cts:
        raise ValueError("need matching, non-empty ciphertext and coefficient lists")
    acc = ModMatrix.zeros(cts[0].C.rows, cts[0].C.cols, cts[0].C.modulus)
    tagged = all(c.mu is not None and c.noise is not None for c in cts)
    mu = noise = 0
    for ct, x in zip(cts, coeffs):
        if x:
            acc = acc + ct.C.scale(x)
        if tagged:
            mu += x * ct.mu
            noise += abs(x) * ct.noise
    return Ciphertext(C=acc, mu=mu if tagged else None, noise=noise if tagged else None)


def sk_times(sk: SecretKey, M: ModMatrix) -> list[int]:
    """Row vector sk * M over Z_q (exact Python integers)."""
    vec = sk.vector
    q = M.modulus
    out = []
    cols = M.data.T
    for col in cols:
        out.append(sum(s * int(v) for s, v in zip(vec, col)) % q)
    return out


def measure_noise(sk: SecretKey, ct: Ciphertext | ModMatrix, mu: int, params: PfheParams) -> int:
    """max_j |centered((sk*C - mu*sk*G)_j)| -- test diagnostics only."""
    C = ct.C if isinstance(ct, Ciphertext) else ct
    v = sk_times(sk, C)
    skG = sk_times(sk, gadget_matrix(params.g, params.q))
    q = params.q
    return max(abs(centered(a - mu * b, q)) for a, b in zip(v, skG))


def decrypt_bit(sk: SecretKey, ct: Ciphertext | ModMatrix, params: PfheParams) -> int:
    return linear_dec(PublicKey(A=ModMatrix.zeros(params.g + 1, params.h, params.q), params=params), sk, ct, 1)


def decode_position(q: int, msg_bound: int) -> int:
    """j* = floor(log2(q / (4 * msg_bound)))."""
    ratio = q // (4 * msg_bound)
    if ratio < 1:
        raise ParameterError(f"q={q} too small to decode messages bounded by {msg_bound}")
    return ratio.bit_length() - 1


def linear_dec(pk: PublicKey, sk: SecretKey, M: Ciphertext | ModMatrix, msg_bound: int) -> int:
    """Decode sum x_i * mu_i from M = sum x_i * ct_i.

    Reads the gadget column 2**j* of the last block of sk * M and rounds. If M
    carries test-mode tags, the noise budget and message bound are checked first.
    """
    params = pk.params
    q, g, L = params.q, params.g, params.L
    msg_bound = max(1, int(msg_bound))
    j = decode_position(q, msg_bound)
    C = M.C if isinstance(M, Ciphertext) else M
    if isinstance(M, Ciphertext) and M.noise is not None:
        budget = 1 << (j - 1) if j >= 1 else 0
        if (j == 0 and M.noise > 0) or (j >= 1 and M.noise >= budget):
            raise NoiseBudgetError(f"tagged noise {M.noise} exceeds decoding budget 2**(j*-1)={budget} (j*={j})")
        if M.mu is not None and abs(M.mu) > msg_bound:
            raise NoiseBudgetError(f"tagged message {M.mu} exceeds bound {msg_bound}")
    col = g * L + j
    vec = sk.vector
    v = sum(s * int(x) for s, x in zip(vec, C.data[:, col])) % q
    c = centered(v, q)
    if j == 0:
        return c
    return (c + (1 << (j - 1))) >> j


# digests


@dataclass(frozen=True)
class Digest:
    """Hash key: one (pseudo) public key plus ell (pseudo) ciphertexts.

    ``planted`` and ``fresh_noise`` are set only for test-mode digests and are
    never serialized.
    """

    params: PfheParams
    pk_tilde: ModMatrix
    ct_tilde: tuple[ModMatrix, ...]
    seed: bytes
    test_mode: bool = False
    planted_bits: tuple[int, ...] | None = field(default=None, compare=False, repr=False)

    def matrices(self) -> list[ModMatrix]:
        return [self.pk_tilde, *self.ct_tilde]

    def to_bytes(self) -> bytes:
        head = DIGEST_MAGIC + bytes([DIGEST_VERSION, 1 if self.test_mode else 0])
        body = self.params.record() + bytes(self.seed)
        if self.test_mode:
            body += b"".join(m.to_bytes() for m in self.matrices())
        return head + body

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Digest":
        if raw[:4] != DIGEST_MAGIC:
            raise ValueError("bad digest magic")
        if len(raw) < 6 + 48 + SEED_BYTES:
            raise ValueError("truncated digest")
        if raw[4] != DIGEST_VERSION:
            raise ValueError(f"unsupported digest version {raw[4]}")
        full = raw[5] == 1
        g, q, L, h, ell, beta = struct.unpack_from("<6Q", raw, 6)
        params = PfheParams(g=g, q=q, ell=ell, beta=beta, sigma=beta / 6)
        if params.L != L or params.h != h:
            raise ValueError("inconsistent digest parameter record")
        off = 6 + 48
        seed = bytes(raw[off : off + SEED_BYTES])
        off += SEED_BYTES
        if not full:
            if len(raw) != off:
                raise ValueError("trailing bytes after seeded digest")
            return sample_digest(params, seed)
        size = params.matrix_bytes
        if len(raw) != off + size * (ell + 1):
            raise ValueError("truncated digest matrices")
        mats = [ModMatrix.from_bytes(raw[off + t * size : off + (t + 1) * size], g + 1, h, q) for t in range(ell + 1)]
        return cls(params=params, pk_tilde=mats[0], ct_tilde=tuple(mats[1:]), seed=seed, test_mode=True)


def sample_digest(params: PfheParams, seed: bytes) -> Digest:
    """Production digest: ell+1 uniform (g+1) x h matrices expanded from ``seed``."""
    seed = bytes(seed)
    if len(seed) != SEED_BYTES:
        raise ValueError(f"seed must be {SEED_BYTES} bytes")
    rows, cols, q = params.g + 1, params.h, params.q
    mats = [expand_matrix(seed, t, rows, cols, q) for t in range(params.ell + 1)]
    return Digest(params=params, pk_tilde=mats[0], ct_tilde=tuple(mats[1:]), seed=seed)


def encrypted_digest(params: PfheParams, pk: PublicKey, m: int, n: int, entropy: bytes) -> Digest:
    """Test-mode digest whose ciphertexts encrypt the bits of ``m``."""
    if not 1 <= m <= n:
        raise ValueError(f"planted index {m} outside [1, {n}]")
    if message_bits(n) != params.ell:
        raise ParameterError(f"params.ell={params.ell} does not match n={n}")
    bits = index_bits(m, params.ell)
    cts = tuple(
        encrypt(pk, b, hashlib.sha256(bytes(entropy) + struct.pack("<I", t)).digest()).C for t, b in enumerate(bits)
    )
    return Digest(
        params=params,
        pk_tilde=pk.A,
        ct_tilde=cts,
        seed=hashlib.sha256(b"test-digest" + bytes(entropy)).digest(),
        test_mode=True,
        planted_bits=bits,
    )


# point-circuit evaluation


class PointEvaluator:
    """Deterministic evaluation of the point circuits C_i over one digest.

    ``cache_size`` > 0 enables a bounded LRU memo of evaluated ciphertexts.
    """

    def __init__(self, digest: Digest, cache_size: int = 0):
        self.digest = digest
        self.params = digest.params
        self.cache_size = cache_size
        self._cache: OrderedDict[int, Ciphertext] = OrderedDict()
        self._lock = threading.Lock()
        self._G = gadget_matrix(self.params.g, self.params.q)
        self._not = tuple(self._G - ct for ct in digest.ct_tilde)
        self.ct_mults = 0
        self.evaluations = 0
        self.cache_hits = 0

    def cached_indices(self) -> list[int]:
        with self._lock:
            return list(self._cache)

    def evaluate(self, i: int, ops=None) -> Ciphertext:
        """C_i(digest); ``ops.ct_mults`` (if given) is charged for fresh work."""
        if not self.cache_size:
            return self._evaluate(i, ops)
        with self._lock:
            hit = self._cache.get(i)
            if hit is not None:
                self._cache.move_to_end(i)
                self.cache_hits += 1
                return hit
        ct = self._evaluate(i, ops)
        with self._lock:
            self._cache[i] = ct
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return ct

    def __call__(self, i: int) -> ModMatrix:
        return self.evaluate(i).C

    def _evaluate(self, i: int, ops=None) -> Ciphertext:
        params = self.params
        if i < 1:
            raise ValueError(f"index {i} must be >= 1")
        bits = index_bits(i, params.ell)
        self.evaluations += 1
        acc = self._G  # encrypts 1 with zero noise
        planted = self.digest.planted_bits
        mu, noise = 1, 0
        for b, bit in enumerate(bits):
            lit = self.digest.ct_tilde[b] if bit else self._not[b]
            # accumulator goes on the decomposed side: noise grows additively
            acc = mat_mul_binary(lit, bit_decompose_array(acc))
            self.ct_mults += 1
            if ops is not None:
                ops.ct_mults += 1
            if planted is not None:
                lit_mu = planted[b] if bit else 1 - planted[b]
                noise = lit_mu * noise + params.h * params.fresh_noise
                mu *= lit_mu
        if planted is None:
            return Ciphertext(C=acc)
        return Ciphertext(C=acc, mu=mu, noise=noise)


def eval_point_circuit(digest: Digest, i: int) -> Ciphertext:
    return PointEvaluator(digest).evaluate(i)
