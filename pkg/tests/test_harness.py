import json
import random

import pytest
from conftest import stream_params

from warsketch.harness import (
    Move,
    ObliviousRandom,
    RevealedState,
    ScriptedAdversary,
    SparseKeeper,
    StateInspector,
    collision_bound,
    collision_vector,
    hybrid4_check,
    hybrid_modulus,
    run_game,
    syndrome_collision_attack,
    truth,
)
from warsketch.pfhe import PfheParams
from warsketch.sparse import SparseVector, default_prime, syndromes_of
from warsketch.stream import BOTTOM, StreamState

n, k, N = 32, 2, 20
PF = stream_params(n, k, N)
SEED = b"\x03" * 32


def test_truth():
    assert truth([0, 3, 0], 1) == SparseVector(((2, 3),))
    assert truth([1, 3, 0], 1) is BOTTOM


def test_oblivious_game():
    out = run_game(ObliviousRandom(n, k, N, seed=1), n, k, N, 100, SEED, pfhe=PF)
    assert out.rounds == 100 and out.incorrect_responses == 0
    assert out.queries > 0
    assert len(out.transcripts) == 100


def test_sparse_keeper_completeness():
    out = run_game(SparseKeeper(n, k, N, seed=2), n, k, N, 100, SEED, pfhe=PF)
    assert out.queries == 100
    assert out.incorrect_responses == 0 and out.rejections == 0


def test_state_inspector_sees_full_state():
    adv = StateInspector(n, k, N)
    out = run_game(adv, n, k, N, 30, SEED, pfhe=PF)
    assert out.incorrect_responses == 0
    assert adv.seen_seeds == {SEED}


def test_revealed_state_parses():
    s = StreamState.setup(n, k, N, PF, SEED, cache_size=4)
    s.update(3, 5)
    s.update(4, 1)
    view = RevealedState(s.state_bytes(), n, k, N, s.params.recovery.p, PF.q).parse()
    assert view["digest"] == s.digest
    assert view["sketch"] == s.fhe_sketch
    assert view["buffer"] == [(3, 5), (4, 1)]
    assert view["cached"] == [3, 4]


def test_round_budget_truncates():
    out = run_game(ObliviousRandom(n, k, N), n, k, N, 50, SEED, pfhe=PF, budget=10)
    assert out.truncated and out.rounds == 10


def test_incorrect_responses_counted_against_dense_truth():
    # with verification off, the collision stream makes the algorithm lie
    p = default_prime(n, collision_bound(n))
    Nc = collision_bound(n)
    pf = stream_params(n, k, Nc)
    plan = collision_vector(n, k, Nc, p, random.Random(1))
    xp, v = plan
    moves = [Move(i, d) for i, d in {**xp, **v}.items()] + [Move(None, 0, True)]
    s = StreamState.setup(n, k, Nc, pf, SEED, verify=False)
    out = run_game(ScriptedAdversary(moves), n, k, Nc, len(moves), state=s)
    assert out.incorrect_responses == 1
    assert out.transcripts[-1].response == SparseVector.from_dict(xp).format()


def test_collision_vector_shares_syndromes():
    Nc = collision_bound(n)
    p = default_prime(n, Nc)
    rng = random.Random(7)
    xp, v = collision_vector(n, k, Nc, p, rng)
    assert len(xp) == k and len(v) == 2 * k + 1
    assert not set(xp) & set(v)
    assert all(0 < abs(t) <= Nc for t in v.values())
    assert syndromes_of({**xp, **v}, k, p) == syndromes_of(xp, k, p)


def test_collision_vector_infeasible_skips():
    # tiny N leaves no scaling of the kernel vector inside [-N, N]
    assert collision_vector(64, 2, 1, default_prime(64, 1), random.Random(0)) is None
    out = syndrome_collision_attack(64, 2, 1, stream_params(64, 2, 1), SEED, trials=2)
    assert all(r.skipped for r in out.trials)


def test_collision_attack_rejected():
    Nc = collision_bound(n)
    pf = stream_params(n, k, Nc)
    out = syndrome_collision_attack(n, k, Nc, pf, SEED, trials=20)
    live = [r for r in out.trials if not r.skipped]
    assert len(live) >= 15
    assert all(r.rejected for r in live)
    assert out.incorrect_responses == 0


def test_collision_ablation_fools_relaxed_scheme():
    Nc = collision_bound(n)
    pf = stream_params(n, k, Nc)
    out = syndrome_collision_attack(n, k, Nc, pf, SEED, trials=10, verify=False)
    live = [r for r in out.trials if not r.skipped]
    assert live and all(r.incorrect == 1 and not r.rejected for r in live)


def test_degenerate_attack_is_accepted():
    Nc = collision_bound(n)
    pf = stream_params(n, k, Nc)
    out = syndrome_collision_attack(n, k, Nc, pf, SEED, trials=3, degenerate=True)
    assert out.incorrect_responses == 0 and out.rejections == 0


def test_trial_records_are_json_lines():
    Nc = collision_bound(n)
    out = syndrome_collision_attack(n, k, Nc, stream_params(n, k, Nc), SEED, trials=2)
    for rec in out.trials:
        d = json.loads(rec.to_json())
        assert {"trial", "scenario", "rejected", "rounds"} <= set(d)


def test_hybrid4():
    nn, kk = 16, 2
    Nc = collision_bound(nn)
    q = hybrid_modulus(nn, kk, Nc, 2)
    pf = PfheParams.create(nn, 2, q)
    rep = hybrid4_check(nn, kk, Nc, pf, 6, SEED, agreeing_every=2)
    assert len(rep.differing) == 6 - rep.skipped
    assert rep.collisions == 0
    assert all(t.rejected for t in rep.differing)
    assert rep.decode_mismatches == 0
    assert all(t.hash_decoded is not None for t in rep.differing)
    assert rep.agreeing  # logged, not asserted
    assert rep.identical_accepted == rep.identical_trials == 3


def test_hybrid_modulus_mismatch():
    with pytest.raises(ValueError):
        hybrid4_check(16, 2, 8, stream_params(32, 2, 8), 1, SEED)
