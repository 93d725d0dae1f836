import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from clique_strings.errors import NoWitness
from clique_strings.netsim import Network, SimConfig
from clique_strings.oracle import dc_check, naive_lcp, naive_sa_lcp
from clique_strings.sacon import (DifferenceCover, SampleLayout, Schedule, build_dc,
                                  depth_budget, lcp_arrays, local_lcp, local_suffix_array,
                                  rep_compare, rep_payload, sample_string, sort_eps,
                                  split_string, suffix_array)


def s(text):
    return tuple(ord(c) for c in text)


def solve(S, n, **kw):
    return lcp_arrays(Network(SimConfig(n)), split_string(S, n), **kw)


def test_cover_examples():
    assert build_dc(1).members == (0,)
    assert build_dc(4).members == (0, 1, 2)
    assert build_dc(9).members == (0, 1, 2, 3, 6)
    assert len(build_dc(9).members) <= 2 * 3 + 1


@pytest.mark.parametrize("t", range(1, 257))
def test_cover_property(t):
    dc = build_dc(t)
    assert dc_check(dc.members, t)
    assert len(dc.members) <= 2 * t ** 0.5 + 1


def test_layout_by_hand():
    # positions 1, 3, 4, 6 of a length-6 string are sampled by the cover {0, 1} mod 3
    lay = SampleLayout.make(6, DifferenceCover(3, (0, 1)))
    assert [p for p in range(1, 7) if lay.is_sampled(p)] == [1, 3, 4, 6]
    assert [lay.f(p) for p in (3, 6, 1, 4)] == [1, 2, 4, 5]
    assert lay.size == 5 and lay.separators == 1
    assert [lay.f_inv(q) for q in range(1, 6)] == [3, 6, 0, 1, 4]


@settings(max_examples=200)
@given(st.integers(1, 80), st.integers(1, 40))
def test_layout_f_inverse(length, t):
    lay = SampleLayout.make(length, build_dc(t))
    sampled = [p for p in range(1, length + 1) if lay.is_sampled(p)]
    assert sorted(lay.f(p) for p in sampled) == [q for q in range(1, lay.size + 1)
                                                  if lay.f_inv(q)]
    assert all(lay.f_inv(lay.f(p)) == p for p in sampled)
    assert lay.sampled == len(sampled)


def test_sample_string_of_equal_characters():
    ref = sample_string(s("aaaaaaaaaa"), 4)
    assert {c for c in ref.s_prime if c} <= {1, 2, 3, 4}
    full = [ref.s_prime[ref.f(p) - 1] for p in range(1, 8) if ref.layout.is_sampled(p)]
    assert len(set(full)) == 1


def sampled_pairs(S, t, rng, count):
    ref = sample_string(S, t)
    pos = [p for p in range(1, len(S) + 1) if ref.layout.is_sampled(p)]
    return ref, [tuple(rng.sample(pos, 2)) for _ in range(count)] if len(pos) > 1 else []


@settings(max_examples=100)
@given(st.lists(st.integers(1, 3), min_size=2, max_size=80), st.integers(2, 9),
       st.integers(0, 2 ** 32))
def test_sampled_suffix_order_and_lcp_transfer(S, t, seed):
    ref, pairs = sampled_pairs(S, t, random.Random(seed), 50)
    S2 = ref.s_prime
    for a, b in pairs:
        x, y = S[a - 1:], S[b - 1:]
        xs, ys = S2[ref.f(a) - 1:], S2[ref.f(b) - 1:]
        assert (x < y) == (xs < ys)
        assert naive_lcp(xs, ys) == naive_lcp(x, y) // t


def reps(S, t):
    """Representative payload of every position, built from the naive suffix order."""
    lay = SampleLayout.make(len(S), build_dc(t))
    sampled = [p for p in range(1, len(S) + 1) if lay.is_sampled(p)]
    order = sorted(sampled, key=lambda p: S[p - 1:])
    rank = {p: r + 1 for r, p in enumerate(order)}
    out = {}
    for p in range(1, len(S) + 1):
        window = S[p - 1:p - 1 + t]
        ranks = [rank.get(p + k, 0) for k in range(t)]
        out[p] = rep_payload(window, ranks)
    return out


@settings(max_examples=100)
@given(st.lists(st.integers(1, 2), min_size=2, max_size=60), st.integers(2, 8),
       st.integers(0, 2 ** 32))
def test_rep_compare_matches_suffix_order(S, t, seed):
    S = list(S)
    rep = reps(S, t)
    rng = random.Random(seed)
    for _ in range(100):
        a, b = rng.randrange(1, len(S) + 1), rng.randrange(1, len(S) + 1)
        x, y = S[a - 1:], S[b - 1:]
        want = (x > y) - (x < y)
        assert rep_compare(rep[a], rep[b]) == want


def test_rep_compare_special_cases():
    assert rep_compare(rep_payload((1, 2), (0, 3)), rep_payload((1, 3), (0, 0))) == -1
    x = rep_payload((2, 2), (0, 4))
    assert rep_compare(x, x) == 0
    with pytest.raises(NoWitness):
        rep_compare(rep_payload((2,), (1, 0)), rep_payload((2,), (0, 1)))


@settings(max_examples=100)
@given(st.lists(st.integers(1, 4), max_size=120))
def test_sequential_base_case(S):
    sa, lcp = naive_sa_lcp(S)
    got = local_suffix_array(S)
    assert [p + 1 for p in got] == sa
    assert local_lcp(S, got) == lcp


@settings(max_examples=50)
@given(st.lists(st.integers(1, 2), min_size=2, max_size=80), st.integers(0, 2 ** 32))
def test_range_minimum_over_adjacent_lcps(S, seed):
    sa, lcp = naive_sa_lcp(S)
    rng = random.Random(seed)
    for _ in range(20):
        i, j = sorted(rng.sample(range(len(sa)), 2))
        want = naive_lcp(S[sa[i] - 1:], S[sa[j] - 1:])
        assert want == min(lcp[i:j])


def test_banana_and_repeats():
    res = solve(s("banana"), 8)
    assert res.sa == [6, 4, 2, 1, 5, 3]
    assert res.lcp == [1, 3, 0, 0, 2]
    res = solve(s("aaa"), 8)
    assert res.sa == [3, 2, 1]
    assert res.lcp == [1, 2]


def test_distinct_characters_have_zero_lcps():
    S = tuple(random.Random(0).sample(range(1, 200), 100))
    res = solve(S, 16)
    assert res.lcp == [0] * 99
    assert (res.sa, res.lcp) == naive_sa_lcp(S)


def test_suffix_array_without_lcp():
    S = s("mississippi")
    res = suffix_array(Network(SimConfig(8)), split_string(S, 8))
    assert res.sa == naive_sa_lcp(S)[0]
    assert res.lcp is None


def test_random_strings_at_sixteen_nodes():
    rng = random.Random(16)
    for _ in range(100):
        S = [rng.randrange(1, 5) for _ in range(rng.randrange(1, 16 * 16 // 2 + 1))]
        res = solve(S, 16)
        assert (res.sa, res.lcp) == naive_sa_lcp(S)


@pytest.mark.parametrize("kind", ["uniform", "periodic"])
def test_recursive_level_with_checks(kind):
    from clique_strings.generators import gen_sa_string
    n = 64
    # just above the single-node threshold of 8 * 64 characters
    S = gen_sa_string(n, 3, n * n // 6, kind).strings[0]
    res = solve(S, n, check=True, seed=1)
    assert (res.sa, res.lcp) == naive_sa_lcp(S)
    assert res.depth >= 2
    assert res.depth <= depth_budget(n)


def test_schedule_and_size_classes():
    sched = Schedule(64)
    assert sched.t(1) == 4
    assert all(sched.t(k) == 4 for k in range(1, 5))
    assert Schedule(256).t(1) == 7
    assert sort_eps(64, 9) == Fraction(1, 3)
    with pytest.raises(ValueError):
        sort_eps(8, 100)
    assert depth_budget(16) == 16
