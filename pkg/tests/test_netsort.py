import math
import random

import pytest
from hypothesis import given, strategies as st

from clique_strings.netsim import Network, SimConfig
from clique_strings.netsort import build_network, network_sort, sorts_all_binary
from clique_strings.oracle import naive_string_sort

# rounds of one simulated comparator level, measured on n in {8, 16, 32}
LEVEL_ROUNDS = 26


def spread_one_each(objs, n):
    out = [[] for _ in range(n)]
    for i, o in enumerate(objs):
        out[i % n].append(o)
    return out


@pytest.mark.parametrize("N,depth", [(1, 0), (2, 1), (4, 3), (8, 6), (16, 10)])
def test_bitonic_depth(N, depth):
    assert build_network(N).depth == depth


@pytest.mark.parametrize("N", range(1, 17))
def test_zero_one_principle_exhaustive(N):
    net = build_network(N)
    assert sorts_all_binary(net)
    k = math.ceil(math.log2(N)) if N > 1 else 0
    assert net.depth <= k * (k + 1) // 2


@given(st.integers(17, 100), st.integers(0, 2 ** 32))
def test_zero_one_principle_randomized(N, seed):
    rng = random.Random(seed)
    net = build_network(N)
    for _ in range(20):
        bits = [rng.randrange(2) for _ in range(N)]
        assert net.apply(bits) == sorted(bits)


def test_levels_use_disjoint_wires():
    for N in (5, 12, 33):
        for lv in build_network(N).levels:
            wires = [w for c in lv for w in c]
            assert len(wires) == len(set(wires)) and max(wires) < N


def test_three_one_word_objects():
    ranks = network_sort(Network(SimConfig(8)), [[(3,)], [(1,)], [(2,)]] + [[]] * 5)
    assert ranks[:3] == [[2], [0], [1]]


def test_equal_payloads_share_ranks():
    ranks = network_sort(Network(SimConfig(8)), [[(5,), (2,)], [(5,)], [(2,), (9,)]] + [[]] * 5)
    assert ranks[:3] == [[1, 0], [1], [0, 2]]


def test_empty_input():
    assert network_sort(Network(SimConfig(8)), [[]] * 8) == [[]] * 8


def _keys(rng, n, count, width):
    return [tuple(rng.randrange(4) for _ in range(width)) for _ in range(count)]


@pytest.mark.parametrize("n", [8, 16])
def test_linear_size_keys_match_oracle(n):
    rng = random.Random(n)
    objs = _keys(rng, n, n, n // 2)
    N = len(objs)
    net = Network(SimConfig(n))
    per_level = []
    ranks = network_sort(net, spread_one_each(objs, n), level_rounds=per_level)
    got = [ranks[i % n][i // n] for i in range(N)]
    assert got == naive_string_sort(objs)
    k = math.ceil(math.log2(N))
    assert max(per_level) <= LEVEL_ROUNDS
    assert net.ledger.rounds_charged <= LEVEL_ROUNDS * k * k + LEVEL_ROUNDS
    assert net.ledger.comparisons >= build_network(N).size


def test_schedule_is_oblivious():
    n = 8
    rng = random.Random(4)
    objs = sorted(set(_keys(rng, n, 40, 3)))[:16]
    shuffled = objs[:]
    rng.shuffle(shuffled)
    traces = []
    for order in (objs, shuffled):
        net = Network(SimConfig(n))
        ranks = network_sort(net, spread_one_each(order, n))
        assert [ranks[i % n][i // n] for i in range(16)] == naive_string_sort(order)
        traces.append([(i.primitive, i.label, i.rounds) for i in net.ledger.invocations])
    assert traces[0] == traces[1]
