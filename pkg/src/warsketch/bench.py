"""Operation-count benchmarks. Counters, not wall-clock, are the currency here."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .dist import dist_setup, run_protocol
from .pfhe import PfheParams, PointEvaluator, auto_modulus, sample_digest
from .sparse import RecoveryParams, SyndromeState
from .stream import StreamState

BENCH_KS = (8, 16, 32, 64)


@dataclass(frozen=True)
class BatchCost:
    k: int
    batches: int
    batched: float  # field mults per 2k-batch
    naive: float

    @property
    def ratio(self) -> float:
        return self.batched / self.naive

    @property
    def fitted_c(self) -> float:
        """c in batched = c * k * log2(k)^2."""
        return self.batched / (self.k * math.log2(self.k) ** 2)


def batch_cost(k: int, n: int = 1 << 16, N: int = 1000, batches: int = 4, seed: int = 0) -> BatchCost:
    """Average field multiplications per 2k-update batch, batched vs naive."""
    rng = random.Random(seed)
    rp = RecoveryParams(n=n, k=k, N=N)
    fast, slow = SyndromeState(rp), SyndromeState(rp)
    for _ in range(batches):
        for i in rng.sample(range(1, n + 1), 2 * k):
            d = rng.choice([v for v in range(-N, N + 1) if v])
            fast.update_batched(i, d)
            slow.update_naive(i, d)
    fast.flush()
    if fast.syndromes != slow.syndromes:
        raise AssertionError("batched and naive syndromes disagree")
    return BatchCost(k, batches, fast.field_mults / batches, slow.field_mults / batches)


def update_ct_mults(n: int, g: int = 2, updates: int = 8, seed: int = 0, k: int = 1, N: int = 1) -> list[int]:
    """Ciphertext multiplications charged by each of a few uncached updates."""
    pf = PfheParams.create(n, g, auto_modulus(n, k, N, g))
    state = StreamState.setup(n, k, N, pf, seed.to_bytes(32, "little"))
    rng = random.Random(seed)
    out = []
    for _ in range(updates):
        before = state.evaluator.ct_mults
        state.update(rng.randint(1, n), rng.choice([-1, 1]))
        out.append(state.evaluator.ct_mults - before)
    return out


@dataclass
class BenchRow:
    section: str
    metric: str
    value: float | int
    n: int
    k: int
    g: int
    q_bits: int

    def fields(self) -> list[str]:
        v = f"{self.value:.4g}" if isinstance(self.value, float) else str(self.value)
        return [self.section, self.metric, v, str(self.n), str(self.k), str(self.g), str(self.q_bits)]


BENCH_HEADER = ["section", "metric", "value", "n", "k", "g", "q_bits"]


def run_bench(n: int, k: int, N: int, g: int, q: int | None = None, seed: bytes = bytes(32), ks=BENCH_KS):
    """All bench rows plus the per-k batch costs (for figures).

    One modulus is shared across the k sweep so the digest row isolates the
    effect of k; by default it is the auto modulus for the largest k.
    """
    rows: list[BenchRow] = []
    k_max = max(max(ks), k)
    q = q or auto_modulus(n, k_max, N, g)
    pf = PfheParams.create(n, g, q)
    qb = pf.L

    def row(section, metric, value, kk=k):
        rows.append(BenchRow(section, metric, value, n, kk, g, qb))

    for kk in ks:
        row("digest", "seeded_bytes", len(sample_digest(pf, seed).to_bytes()), kk)
        row("digest", "matrix_bytes", (pf.ell + 1) * pf.matrix_bytes, kk)

    rng = random.Random(int.from_bytes(seed[:8], "little"))
    state = StreamState.setup(n, k, N, pf, seed)
    per_update = []
    for _ in range(4):
        before = state.evaluator.ct_mults
        state.update(rng.randint(1, n), rng.randint(1, N))
        per_update.append(state.evaluator.ct_mults - before)
    row("update", "ct_mults_per_update", max(per_update))
    row("update", "ell", pf.ell)

    costs = []
    for kk in ks:
        c = batch_cost(kk, n=max(n, 4 * kk), N=N, seed=kk)
        costs.append(c)
        row("syndrome", "batched_mults_per_batch", c.batched, kk)
        row("syndrome", "naive_mults_per_batch", c.naive, kk)
        row("syndrome", "amortized_batched_per_update", c.batched / (2 * kk), kk)
        row("syndrome", "ratio_batched_naive", c.ratio, kk)
        row("syndrome", "fitted_c", c.fitted_c, kk)

    # report path on a k-sparse stream
    ev = PointEvaluator(state.digest)
    sp = StreamState(state.params, state.digest, evaluator=ev)
    for i in rng.sample(range(1, n + 1), k):
        sp.update(i, rng.choice([-1, 1]) * rng.randint(1, N))
    before = ev.evaluations
    sp.report()
    row("report", "evaluations", ev.evaluations - before)

    zeta = dist_setup(n, k, N, pf, seed)
    parts = [[0] * n for _ in range(2)]
    for i in rng.sample(range(1, n + 1), k):
        parts[rng.randrange(2)][i - 1] += rng.randint(1, N)
    run = run_protocol(parts, zeta)
    for t, ops in sorted(run.server_ops.items()):
        row("server", f"t{t}_nonzeros", ops.nonzeros)
        row("server", f"t{t}_ct_mults", ops.ct_mults)
        row("server", f"t{t}_field_mults", ops.field_mults)
    return rows, costs


def scaling_sweep(ns=(1 << 4, 1 << 8, 1 << 12, 1 << 16), g: int = 2) -> dict[int, int]:
    return {n: max(update_ct_mults(n, g, updates=4)) for n in ns}
