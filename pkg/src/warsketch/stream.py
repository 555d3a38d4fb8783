"""Robust k-sparse recovery over a turnstile stream.

Each update feeds the deterministic syndrome sketch and adds delta times the
evaluated point circuit for its index into an FHE sketch. A report decodes a
candidate from the syndromes and accepts it only if hashing the candidate
through the same circuits reproduces the FHE sketch exactly.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass

import numpy as np

from .modring import ModMatrix
from .pfhe import (
    Ciphertext,
    Digest,
    ParameterError,
    PfheParams,
    PointEvaluator,
    PublicKey,
    SecretKey,
    check_modulus_condition,
    encrypted_digest,
    keygen,
    message_bits,
    sample_digest,
)
from .sparse import DecodeFailure, RecoveryParams, SparseVector, SyndromeState

log = logging.getLogger(__name__)


class Bottom:
    """The rejection symbol."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊥"

    def __bool__(self) -> bool:
        return False

    def format(self) -> str:
        return "BOT"


BOTTOM = Bottom()


def format_report(result) -> str:
    return result.format()


def parse_report(line: str):
    line = line.strip()
    if line == "BOT":
        return BOTTOM
    parts = line.split()
    count = int(parts[0])
    pairs = []
    for tok in parts[1:]:
        i, v = tok.split(":")
        pairs.append((int(i), int(v)))
    if len(pairs) != count:
        raise ValueError(f"report claims {count} entries, found {len(pairs)}")
    return SparseVector(tuple(pairs))


@dataclass(frozen=True)
class StreamParams:
    n: int
    k: int
    N: int
    pfhe: PfheParams
    recovery: RecoveryParams

    @classmethod
    def create(cls, n: int, k: int, N: int, pfhe: PfheParams, p: int = 0) -> "StreamParams":
        if pfhe.ell != message_bits(n):
            raise ParameterError(f"pfhe ell={pfhe.ell} does not equal ceil(log2 n)={message_bits(n)}")
        try:
            rec = RecoveryParams(n=n, k=k, N=N, p=p)
        except ValueError as exc:
            raise ParameterError(str(exc)) from exc
        check_modulus_condition(n, k, N, pfhe)
        return cls(n=n, k=k, N=N, pfhe=pfhe, recovery=rec)


@dataclass(frozen=True)
class TestMode:
    """Real keys behind the digest; ``m`` is the planted index."""

    __test__ = False  # not a pytest class

    m: int
    pk: PublicKey
    sk: SecretKey


class StreamState:
    """Single-writer streaming state.

    ``verify=False`` disables the hash comparison in ``report`` (ablation only).
    ``batched=False`` routes syndrome updates through the naive O(k) path.
    """

    def __init__(
        self,
        params: StreamParams,
        digest: Digest,
        *,
        evaluator: PointEvaluator | None = None,
        cache_size: int = 0,
        batched: bool = True,
        verify: bool = True,
        mode: TestMode | None = None,
    ):
        if digest.params != params.pfhe and digest.params.record() != params.pfhe.record():
            raise ParameterError("digest parameters differ from stream parameters")
        self.params = params
        self.digest = digest
        self.evaluator = evaluator or PointEvaluator(digest, cache_size=cache_size)
        if self.evaluator.digest is not digest and self.evaluator.digest != digest:
            raise ValueError("evaluator belongs to a different digest")
        pf = params.pfhe
        self._sketch = ModMatrix.zeros(pf.g + 1, pf.h, pf.q).data.copy()
        self.rec = SyndromeState(params.recovery)
        self.batched = batched
        self.verify = verify
        self.mode = mode
        self.updates = 0
        # test-mode tags of the running sketch
        self._mu = 0
        self._noise = 0

    @classmethod
    def setup(cls, n: int, k: int, N: int, pfhe: PfheParams, seed: bytes, **kw) -> "StreamState":
        params = StreamParams.create(n, k, N, pfhe)
        return cls(params, sample_digest(pfhe, seed), **kw)

    @classmethod
    def test_setup(cls, n: int, k: int, N: int, pfhe: PfheParams, m: int, entropy: bytes, **kw) -> "StreamState":
        """Stream over a real encrypted digest planting index ``m`` (test mode)."""
        params = StreamParams.create(n, k, N, pfhe)
        pk, sk = keygen(pfhe, hashlib.sha256(b"keys" + bytes(entropy)).digest())
        digest = encrypted_digest(pfhe, pk, m, n, hashlib.sha256(b"cts" + bytes(entropy)).digest())
        return cls(params, digest, mode=TestMode(m=m, pk=pk, sk=sk), **kw)

    @property
    def fhe_sketch(self) -> ModMatrix:
        return ModMatrix.from_array(self._sketch, self.params.pfhe.q)

    @property
    def sketch_ciphertext(self) -> Ciphertext:
        if self.mode is None:
            return Ciphertext(C=self.fhe_sketch)
        return Ciphertext(C=self.fhe_sketch, mu=self._mu, noise=self._noise)

    def update(self, i: int, delta: int) -> None:
        n = self.params.n
        if not 1 <= i <= n:
            raise IndexError(f"index {i} outside [1, {n}]")
        if self.batched:
            self.rec.update_batched(i, delta)
        else:
            self.rec.update_naive(i, delta)
        self.updates += 1
        if delta == 0:
            return
        ct = self.evaluator.evaluate(i)
        _accumulate(self._sketch, ct.C, delta, self.params.pfhe.q)
        if self.mode is not None:
            self._mu += delta * ct.mu
            self._noise += abs(delta) * ct.noise

    def hash_of(self, x: SparseVector) -> ModMatrix:
        """sum over the support of x of x_i * C_i(digest)."""
        pf = self.params.pfhe
        acc = ModMatrix.zeros(pf.g + 1, pf.h, pf.q).data.copy()
        for i, v in x.entries:
            _accumulate(acc, self.evaluator.evaluate(i).C, v, pf.q)
        return ModMatrix.from_array(acc, pf.q)

    def report(self):
        cand = self.rec.report()
        if isinstance(cand, DecodeFailure) or len(cand) > self.params.k:
            return BOTTOM
        if not self.verify:
            return cand
        if self.hash_of(cand) == self.fhe_sketch:
            return cand
        return BOTTOM

    def state_bytes(self) -> bytes:
        """Full internal state as revealed to a white-box adversary."""
        pf = self.params.pfhe
        p = self.params.recovery.p
        parts = [
            self.digest.to_bytes(),
            self.fhe_sketch.to_bytes(),
            struct.pack(f"<Q{len(self.rec.syndromes)}Q", len(self.rec.syndromes), *self.rec.syndromes),
            struct.pack("<Q", len(self.rec.buffer)),
            b"".join(struct.pack("<Qq", i, d) for i, d in self.rec.buffer),
            struct.pack("<Q", len(self.evaluator.cached_indices())),
            b"".join(struct.pack("<Q", i) for i in self.evaluator.cached_indices()),
            struct.pack("<QQ", p, pf.q),
        ]
        return b"".join(parts)

    def state_hash(self) -> str:
        return hashlib.sha256(self.state_bytes()).hexdigest()

    def size_bytes(self) -> int:
        """Digest matrices + FHE sketch + syndromes + buffer, 8 bytes per word."""
        pf = self.params.pfhe
        words = (pf.ell + 2) * (pf.g + 1) * pf.h + len(self.rec.syndromes) + 2 * len(self.rec.buffer)
        return 8 * words


def _accumulate(acc: np.ndarray, C: ModMatrix, delta: int, q: int) -> None:
    """acc += delta * C mod q, in place."""
    d = delta % q
    if acc.dtype == np.uint64:
        acc += C.data * np.uint64(d)
        acc &= np.uint64(q - 1)
    else:
        acc[...] = (acc + C.data * d) % q


def setup(n: int, k: int, N: int, pfhe: PfheParams, seed: bytes, **kw) -> StreamState:
    state = StreamState.setup(n, k, N, pfhe, seed, **kw)
    log.info("stream state %d bytes (n=%d k=%d g=%d h=%d ell=%d)", state.size_bytes(), n, k, pfhe.g, pfhe.h, pfhe.ell)
    return state


# trace files


class TraceError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def parse_trace(lines, n: int | None = None):
    """Yield ("U", i, delta) or ("Q",) records; blank lines and # comments skipped.

    With ``n`` given, indices outside [1, n] are reported with their line number.
    """
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "U":
            if len(parts) != 3:
                raise TraceError(lineno, f"expected 'U <i> <delta>', got {raw.strip()!r}")
            try:
                i, d = int(parts[1]), int(parts[2])
            except ValueError:
                raise TraceError(lineno, f"non-integer field in {raw.strip()!r}") from None
            if n is not None and not 1 <= i <= n:
                raise TraceError(lineno, f"index {i} outside [1, {n}]")
            yield ("U", i, d)
        elif parts[0] == "Q" and len(parts) == 1:
            yield ("Q",)
        else:
            raise TraceError(lineno, f"unrecognized record {raw.strip()!r}")


def format_trace(records) -> str:
    out = []
    for rec in records:
        out.append("Q" if rec[0] == "Q" else f"U {rec[1]} {rec[2]}")
    return "\n".join(out) + "\n"


def trace_vector(records, n: int) -> list[int]:
    """Dense accumulation of the updates in a trace."""
    x = [0] * n
    for rec in records:
        if rec[0] == "U":
            i, d = rec[1], rec[2]
            if not 1 <= i <= n:
                raise IndexError(f"index {i} outside [1, {n}]")
            x[i - 1] += d
    return x


def random_trace(n: int, support: int, N: int, length: int, rng, queries: int = 1) -> list[tuple]:
    """Turnstile updates ending at a random vector with exactly ``support``
    nonzeros in [-N, N].

    Target values arrive in one to three pieces; the rest of the length budget
    is junk insertions that are cancelled later in the stream. ``queries``
    "Q" records are spread over the stream, the last one at the end.
    """
    if not 0 <= support <= n:
        raise ValueError(f"support {support} outside [0, {n}]")
    target = {j: rng.choice((-1, 1)) * rng.randint(1, N) for j in rng.sample(range(1, n + 1), support)}
    ups: list[tuple[int, int]] = []
    for j, v in target.items():
        cuts = sorted(rng.randint(-N, N) for _ in range(rng.randint(0, 2)))
        pieces = [c - prev for prev, c in zip([0] + cuts, cuts)] if cuts else []
        pieces.append(v - sum(pieces))
        ups.extend((j, d) for d in pieces if d)
    budget = max(0, length - len(ups))
    junk = []
    for _ in range(budget // 2):
        d = rng.choice((-1, 1)) * rng.randint(1, N)
        junk.append((rng.randint(1, n), d))
    # each junk insert is placed before its cancellation
    slots = ups + [None] * (2 * len(junk))
    rng.shuffle(slots)
    out, pending = [], list(junk)
    opened = []
    for s in slots:
        if s is not None:
            out.append(s)
        elif pending and (not opened or rng.random() < 0.5):
            j, d = pending.pop()
            opened.append((j, d))
            out.append((j, d))
        else:
            j, d = opened.pop(rng.randrange(len(opened)))
            out.append((j, -d))
    records: list[tuple] = [("U", j, d) for j, d in out]
    marks = sorted(rng.sample(range(len(records)), min(max(queries - 1, 0), len(records))), reverse=True)
    for pos in marks:
        records.insert(pos, ("Q",))
    if queries:
        records.append(("Q",))
    return records
