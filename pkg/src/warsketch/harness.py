"""White-box adversarial game runner, attack scenarios and the hybrid-4 check.

The harness keeps its own dense ground truth, independent of the algorithm
under test, and hands the adversary the complete serialized state (digest
including its seed, FHE sketch, syndromes, buffer, memo-cache contents) before
every move.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import struct
from dataclasses import asdict, dataclass, field

from sympy import isprime

from .modring import ModMatrix, centered, nullspace_mod_p
from .pfhe import Digest, PfheParams, auto_modulus, combine, linear_dec, message_bits
from .sparse import SparseVector, default_prime
from .stream import BOTTOM, StreamState

log = logging.getLogger(__name__)

DEFAULT_ROUND_BUDGET = 100_000


@dataclass(frozen=True)
class Move:
    """One adversary move: optional update (i, delta), then optionally a query."""

    i: int | None = None
    delta: int = 0
    query: bool = False


@dataclass
class Round:
    move: Move
    state_hash: str
    response: str | None


@dataclass
class TrialRecord:
    trial: int
    scenario: str
    rejected: bool
    rounds: int
    incorrect: int = 0
    skipped: bool = False
    note: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class GameOutcome:
    rounds: int = 0
    incorrect_responses: int = 0
    queries: int = 0
    rejections: int = 0
    truncated: bool = False
    transcripts: list[Round] = field(default_factory=list)
    trials: list[TrialRecord] = field(default_factory=list)

    def merge(self, other: "GameOutcome") -> None:
        self.rounds += other.rounds
        self.incorrect_responses += other.incorrect_responses
        self.queries += other.queries
        self.rejections += other.rejections
        self.truncated |= other.truncated
        self.transcripts.extend(other.transcripts)


@dataclass
class RevealedState:
    """What the adversary sees each round."""

    raw: bytes
    n: int
    k: int
    N: int
    p: int
    q: int

    def parse(self) -> dict:
        """Split the raw state back into digest, sketch, syndromes and buffer."""
        raw = self.raw
        full = raw[5] == 1
        g, q, L, h, ell, _beta = struct.unpack_from("<6Q", raw, 6)
        dlen = 6 + 48 + 32 + ((ell + 1) * (g + 1) * h * 8 if full else 0)
        digest = Digest.from_bytes(raw[:dlen])
        off = dlen
        size = (g + 1) * h * 8
        sketch = ModMatrix.from_bytes(raw[off : off + size], g + 1, h, q)
        off += size
        (count,) = struct.unpack_from("<Q", raw, off)
        syndromes = list(struct.unpack_from(f"<{count}Q", raw, off + 8))
        off += 8 + 8 * count
        (blen,) = struct.unpack_from("<Q", raw, off)
        off += 8
        buffer = [struct.unpack_from("<Qq", raw, off + 16 * t) for t in range(blen)]
        off += 16 * blen
        (clen,) = struct.unpack_from("<Q", raw, off)
        cached = list(struct.unpack_from(f"<{clen}Q", raw, off + 8))
        return {"digest": digest, "sketch": sketch, "syndromes": syndromes, "buffer": buffer, "cached": cached}


def truth(x: list[int], k: int):
    """f_n(x): x itself when k-sparse, otherwise the rejection symbol."""
    nnz = sum(1 for v in x if v)
    return SparseVector.from_dense(x) if nnz <= k else BOTTOM


# adversaries


class Adversary:
    name = "adversary"

    def next_move(self, revealed: RevealedState) -> Move | None:
        raise NotImplementedError


class ObliviousRandom(Adversary):
    """Random bounded updates, ignoring the revealed state."""

    name = "oblivious"

    def __init__(self, n: int, k: int, N: int, seed: int = 0, query_rate: float = 0.25):
        self.n, self.k, self.N = n, k, N
        self.rng = random.Random(seed)
        self.x = [0] * n
        self.query_rate = query_rate

    def next_move(self, revealed):
        i = self.rng.randint(1, self.n)
        cur = self.x[i - 1]
        if self.rng.random() < 0.3 and cur:
            d = -cur
        else:
            d = self.rng.randint(-self.N - cur, self.N - cur)
        self.x[i - 1] += d
        return Move(i, d, self.rng.random() < self.query_rate)


class SparseKeeper(Adversary):
    """Turnstile updates that keep the vector k-sparse; queries every round."""

    name = "sparse"

    def __init__(self, n: int, k: int, N: int, seed: int = 0):
        self.n, self.k, self.N = n, k, N
        self.rng = random.Random(seed)
        self.x = [0] * n

    def next_move(self, revealed):
        supp = [j for j, v in enumerate(self.x, start=1) if v]
        rng = self.rng
        if supp and (len(supp) >= self.k or rng.random() < 0.4):
            i = rng.choice(supp)
        else:
            i = rng.randint(1, self.n)
        cur = self.x[i - 1]
        if cur and rng.random() < 0.3:
            d = -cur
        else:
            d = rng.randint(-self.N - cur, self.N - cur)
        self.x[i - 1] += d
        return Move(i, d, True)


class StateInspector(Adversary):
    """Conditions each update on the revealed digest, sketch and syndromes."""

    name = "inspector"

    def __init__(self, n: int, k: int, N: int, seed: int = 0):
        self.n, self.k, self.N = n, k, N
        self.x = [0] * n
        self.seen_seeds: set[bytes] = set()

    def next_move(self, revealed):
        view = revealed.parse()
        self.seen_seeds.add(view["digest"].seed)
        h = hashlib.sha256(view["sketch"].to_bytes() + repr(view["syndromes"]).encode()).digest()
        i = int.from_bytes(h[:4], "little") % self.n + 1
        cur = self.x[i - 1]
        span = 2 * self.N + 1
        target = int.from_bytes(h[4:8], "little") % span - self.N
        # alternate between growing the support and cancelling it again
        supp = [j for j, v in enumerate(self.x, start=1) if v]
        if len(supp) > self.k + 1:
            i = supp[0]
            cur = self.x[i - 1]
            target = 0
        d = target - cur
        self.x[i - 1] = target
        return Move(i, d, True)


class ScriptedAdversary(Adversary):
    """Replays a fixed list of moves (used by the collision attack)."""

    name = "scripted"

    def __init__(self, moves: list[Move]):
        self.moves = list(moves)
        self.pos = 0

    def next_move(self, revealed):
        if self.pos >= len(self.moves):
            return None
        mv = self.moves[self.pos]
        self.pos += 1
        return mv


# game


def run_game(
    adversary: Adversary,
    n: int,
    k: int,
    N: int,
    rounds: int,
    seed: bytes | None = None,
    *,
    state: StreamState | None = None,
    pfhe: PfheParams | None = None,
    g: int = 2,
    budget: int = DEFAULT_ROUND_BUDGET,
    keep_transcript: bool = True,
) -> GameOutcome:
    """Play the white-box game: reveal, take a move, apply, answer, compare."""
    if state is None:
        if pfhe is None:
            pfhe = PfheParams.create(n, g=g, q=auto_modulus(n, k, N, g))
        state = StreamState.setup(n, k, N, pfhe, seed or bytes(32))
    out = GameOutcome()
    if rounds > budget:
        out.truncated = True
        rounds = budget
    x = [0] * n
    p, q = state.params.recovery.p, state.params.pfhe.q
    for _ in range(rounds):
        revealed = RevealedState(state.state_bytes(), n, k, N, p, q)
        mv = adversary.next_move(revealed)
        if mv is None:
            break
        out.rounds += 1
        if mv.i is not None:
            state.update(mv.i, mv.delta)
            x[mv.i - 1] += mv.delta
        response = None
        if mv.query:
            res = state.report()
            out.queries += 1
            if res is BOTTOM:
                out.rejections += 1
            if res != truth(x, k):
                out.incorrect_responses += 1
            response = res.format()
        if keep_transcript:
            out.transcripts.append(Round(mv, hashlib.sha256(revealed.raw).hexdigest()[:16], response))
    return out


# syndrome collision


def collision_bound(n: int) -> int:
    """Smallest N with 2N + 1 >= n and 2N + 3 prime, so p = 2N + 3 is close to 2N.

    A kernel vector scaled into [-N, N] then exists with high probability.
    """
    N = max(1, n // 2)
    while not (2 * N + 1 >= n and isprime(2 * N + 3)):
        N += 1
    return N


def collision_vector(n: int, k: int, N: int, p: int, rng: random.Random, degenerate: bool = False):
    """(x', v): k-sparse x' plus a kernel vector v of the 2k syndrome rows on
    2k+1 fresh coordinates, entries of v in [-N, N]. Returns None if no scaling
    of the kernel fits the bound.
    """
    if n < 3 * k + 1:
        raise ValueError(f"collision attack needs n >= 3k+1 (n={n}, k={k})")
    coords = rng.sample(range(1, n + 1), 3 * k + 1)
    supp, fresh = sorted(coords[:k]), sorted(coords[k:])
    xp = {j: rng.choice([v for v in (rng.randint(-N, N) for _ in range(4)) if v] or [1]) for j in supp}
    if degenerate:
        return xp, {}
    rows = [[pow(j, r, p) for j in fresh] for r in range(2 * k)]
    basis = nullspace_mod_p(rows, p)
    if len(basis) != 1:
        return None
    base = basis[0]
    scales = list(range(1, p))
    rng.shuffle(scales)
    for c in scales:
        v = [centered(c * b, p) for b in base]
        if all(0 < abs(t) <= N for t in v):
            return xp, dict(zip(fresh, v))
    return None


def _attack_moves(xp: dict, v: dict, rng: random.Random) -> list[Move]:
    """Stream x' + v in shuffled pieces, then query once."""
    moves = []
    for j, val in list(xp.items()) + list(v.items()):
        a = rng.randint(-abs(val), abs(val))
        moves.append(Move(j, a))
        moves.append(Move(j, val - a))
    rng.shuffle(moves)
    moves.append(Move(None, 0, True))
    return moves


def syndrome_collision_attack(
    n: int,
    k: int,
    N: int,
    pfhe: PfheParams,
    seed: bytes,
    *,
    trials: int = 1,
    verify: bool = True,
    degenerate: bool = False,
    scenario: str | None = None,
    cache_size: int = 0,
) -> GameOutcome:
    """Stream x = x' + v whose syndromes equal those of a k-sparse x'.

    The relaxed decoder alone reports x'; the FHE hash must reject.
    """
    scenario = scenario or ("collision" if verify else "collision-ablation")
    rng = random.Random(int.from_bytes(hashlib.sha256(b"attack" + bytes(seed)).digest()[:8], "little"))
    base = StreamState.setup(n, k, N, pfhe, seed, cache_size=cache_size)
    total = GameOutcome()
    for t in range(trials):
        p = base.params.recovery.p
        plan = collision_vector(n, k, N, p, rng, degenerate=degenerate)
        if plan is None:
            total.trials.append(
                TrialRecord(t, scenario, False, 0, skipped=True, note="no kernel vector within [-N, N]")
            )
            continue
        xp, v = plan
        state = StreamState(base.params, base.digest, evaluator=base.evaluator, verify=verify)
        out = run_game(ScriptedAdversary(_attack_moves(xp, v, rng)), n, k, N, 10 * (3 * k + 1) + 2, state=state)
        total.merge(out)
        total.trials.append(
            TrialRecord(t, scenario, rejected=out.rejections > 0, rounds=out.rounds, incorrect=out.incorrect_responses)
        )
    return total


# hybrid 4


@dataclass
class HybridTrial:
    trial: int
    planted: int
    in_support: bool
    rejected: bool
    hash_equals_sketch: bool
    hash_decoded: int | None = None
    sketch_decoded: int | None = None
    expected_hash: int | None = None
    expected_sketch: int | None = None


@dataclass
class Hybrid4Report:
    trials: list[HybridTrial] = field(default_factory=list)
    identical_accepted: int = 0
    identical_trials: int = 0
    skipped: int = 0

    @property
    def differing(self) -> list[HybridTrial]:
        return [t for t in self.trials if t.in_support]

    @property
    def agreeing(self) -> list[HybridTrial]:
        return [t for t in self.trials if not t.in_support]

    @property
    def collisions(self) -> int:
        """Differing-coordinate trials where hash == sketch (must be zero)."""
        return sum(t.hash_equals_sketch for t in self.differing)

    @property
    def decode_mismatches(self) -> int:
        return sum(
            1
            for t in self.differing
            if t.hash_decoded is not None
            and (t.hash_decoded != t.expected_hash or t.sketch_decoded != t.expected_sketch)
        )


def hybrid_modulus(n: int, k: int, N: int, g: int, sigma: float = 1.0) -> int:
    """Power-of-two q large enough to decode the attack's sketch exactly.

    The attack vector has L1 mass up to (3k+1)N, so beyond the streaming
    condition it needs q > 16 * (n*N) * (3k+1)N * E_eval.
    """
    q = auto_modulus(n, k, N, g, sigma)
    while True:
        pf = PfheParams.create(n, g, q, sigma)
        if q > 16 * (n * N) * (3 * k + 1) * N * pf.e_eval:
            return q
        q *= 2


def hybrid4_check(
    n: int,
    k: int,
    N: int,
    pfhe: PfheParams,
    trials: int,
    seed: bytes,
    *,
    agreeing_every: int = 4,
    identical_trials: int = 3,
) -> Hybrid4Report:
    """Collision attack against real encryptions of a planted index m.

    With m where x and x' differ, hash != sketch must hold every time, and the
    two decode to x'_m and x_m. Every ``agreeing_every``-th trial additionally
    plants m where they agree and only records what happens.
    """
    rng = random.Random(int.from_bytes(hashlib.sha256(b"hyb4" + bytes(seed)).digest()[:8], "little"))
    report = Hybrid4Report()
    if message_bits(n) != pfhe.ell:
        raise ValueError("pfhe parameters do not match n")
    p = default_prime(n, N)

    def run(xp, v, m, tag):
        entropy = hashlib.sha256(bytes(seed) + tag).digest()
        state = StreamState.test_setup(n, k, N, pfhe, m, entropy)
        rounds_rng = random.Random(int.from_bytes(entropy[:8], "little"))
        for mv in _attack_moves(xp, v, rounds_rng)[:-1]:
            state.update(mv.i, mv.delta)
        res = state.report()
        xprime = SparseVector.from_dict(xp)
        hash_m = state.hash_of(xprime)
        return state, res, xprime, hash_m

    for t in range(trials):
        plan = collision_vector(n, k, N, p, rng)
        if plan is None:
            report.skipped += 1
            continue
        xp, v = plan
        x_full = {**xp, **v}
        m = rng.choice(sorted(v))
        state, res, xprime, hash_m = run(xp, v, m, b"d%d" % t)
        equal = hash_m == state.fhe_sketch
        trial = HybridTrial(t, m, True, res is BOTTOM, equal)
        evals = [state.evaluator.evaluate(i) for i, _ in xprime.entries]
        hash_ct = combine(evals, [val for _, val in xprime.entries]) if evals else None
        mode = state.mode
        bound = n * N
        try:
            trial.hash_decoded = linear_dec(mode.pk, mode.sk, hash_ct, bound) if hash_ct else 0
            trial.sketch_decoded = linear_dec(mode.pk, mode.sk, state.sketch_ciphertext, bound)
            trial.expected_hash = xp.get(m, 0)
            trial.expected_sketch = x_full.get(m, 0)
        except ArithmeticError as exc:
            log.info("trial %d: decode skipped (%s)", t, exc)
            trial.hash_decoded = trial.sketch_decoded = None
        report.trials.append(trial)

        if agreeing_every and t % agreeing_every == 0:
            agree = [j for j in range(1, n + 1) if j not in v]
            m2 = rng.choice(agree)
            state2, res2, _xp2, hash2 = run(xp, v, m2, b"a%d" % t)
            eq2 = hash2 == state2.fhe_sketch
            report.trials.append(HybridTrial(t, m2, False, res2 is BOTTOM, eq2))
            log.info("trial %d: m=%d outside supp(v): rejected=%s", t, m2, res2 is BOTTOM)

    for t in range(identical_trials):
        plan = collision_vector(n, k, N, p, rng, degenerate=True)
        xp, _ = plan
        m = rng.randint(1, n)
        state, res, xprime, hash_m = run(xp, {}, m, b"i%d" % t)
        report.identical_trials += 1
        if hash_m == state.fhe_sketch and res == xprime:
            report.identical_accepted += 1
    return report


SCENARIOS = ("oblivious", "sparse", "inspector", "collision", "collision-ablation", "hybrid4")
