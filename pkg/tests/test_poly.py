import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warsketch.modring import PolyField, poly_multipoint_eval, weighted_power_sums
from warsketch.modring.poly import degree


def horner(f, x, p):
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def naive_power_sums(points, weights, count, p):
    return [sum(w * pow(a, r, p) for a, w in zip(points, weights)) % p for r in range(count)]


def test_multipoint_examples():
    assert poly_multipoint_eval([0, 0, 1], [1, 2, 3], 97) == [1, 4, 9]
    assert poly_multipoint_eval([0], [5, 6, 7], 97) == [0, 0, 0]
    assert poly_multipoint_eval([], [5], 97) == [0]


def test_multipoint_degree15():
    rng = random.Random(1)
    f = [rng.randrange(97) for _ in range(16)]
    pts = [rng.randrange(97) for _ in range(16)]
    assert poly_multipoint_eval(f, pts, 97) == [horner(f, x, 97) for x in pts]


@given(st.integers(0, 256), st.integers(1, 300), st.randoms())
@settings(max_examples=25, deadline=None)
def test_multipoint_matches_horner(deg, npts, rng):
    p = 10007
    f = [rng.randrange(p) for _ in range(deg + 1)]
    pts = [rng.randrange(p) for _ in range(npts)]
    assert poly_multipoint_eval(f, pts, p) == [horner(f, x, p) for x in pts]


def test_power_sums_examples():
    assert weighted_power_sums([2, 3], [1, 1], 4, 97) == [2, 5, 13, 35]
    j, w = 7, 3
    assert weighted_power_sums([j], [w], 5, 97) == [w * j**r % 97 for r in range(5)]


def test_power_sums_random8():
    rng = random.Random(2)
    p = 10007
    pts = rng.sample(range(1, p), 8)
    ws = [rng.randrange(p) for _ in pts]
    assert weighted_power_sums(pts, ws, 16, p) == naive_power_sums(pts, ws, 16, p)


@given(st.integers(1, 64), st.randoms())
@settings(max_examples=40, deadline=None)
def test_power_sums_match_naive(k, rng):
    p = 1000003
    count = 2 * k
    npts = rng.randint(1, count)
    pts = rng.sample(range(1, p), npts)
    ws = [rng.randrange(p) for _ in pts]
    assert weighted_power_sums(pts, ws, count, p) == naive_power_sums(pts, ws, count, p)


def test_power_sums_rejects_bad_points():
    with pytest.raises(ValueError):
        weighted_power_sums([0, 1], [1, 1], 4, 97)
    with pytest.raises(ValueError):
        weighted_power_sums([2, 2], [1, 1], 4, 97)


@given(st.lists(st.integers(0, 96), max_size=80), st.lists(st.integers(0, 96), max_size=80))
@settings(max_examples=60, deadline=None)
def test_mul_and_divmod(f, g):
    F = PolyField(97)
    prod = F.mul(f, g)
    for x in range(5):
        assert horner(prod, x, 97) == horner(f, x, 97) * horner(g, x, 97) % 97
    if any(g):
        q, r = F.divmod(f, g)
        assert degree(r) < degree(g)
        for x in range(5):
            assert horner(f, x, 97) == (horner(q, x, 97) * horner(g, x, 97) + horner(r, x, 97)) % 97


def test_inv_series():
    F = PolyField(101)
    f = [3, 5, 7, 1]
    inv = F.inv_series(f, 10)
    assert len(inv) <= 10
    assert F.truncate(F.mul(f, inv), 10) == [1]


def test_karatsuba_counts_fewer_mults():
    rng = random.Random(3)
    f = [rng.randrange(97) for _ in range(256)]
    g = [rng.randrange(97) for _ in range(256)]
    F = PolyField(97)
    F.mul(f, g)
    assert F.mults < 256 * 256
