import pytest
from hypothesis import given, settings, strategies as st

from clique_strings.errors import LoadExceeded, PassBudgetExceeded
from clique_strings.generators import gen_strings
from clique_strings.netsim import Network, SimConfig
from clique_strings.oracle import naive_string_sort
from clique_strings.strsort import StringSet, block_partition, renaming_pass, string_sort


def s(text):
    return tuple(ord(c) for c in text)


def blocks_of(table):
    """(string id, block index) -> payload over all nodes."""
    return {(b.string_id, b.block_index): b.payload for node in table.blocks for b in node}


def test_string_set_round_trip_and_validation():
    strings = [s("hello"), s("a"), s("world!")]
    sset = StringSet.from_strings(strings, 4, piece_len=3)
    assert sset.to_strings() == strings
    assert [len(p) for p in sset.pieces] == [3, 3, 3, 3]
    with pytest.raises(ValueError):
        StringSet.from_strings([()], 4)
    with pytest.raises(ValueError):
        StringSet.from_strings([(0, 1)], 4)
    with pytest.raises(ValueError):
        StringSet.from_strings([s("abcdef")], 2, piece_len=2)
    with pytest.raises(LoadExceeded):
        StringSet([[1] * 40, []], [[0], []]).validate(32)


@pytest.mark.parametrize("length,want", [(10, [4, 4, 2]), (8, [4, 4])])
def test_block_lengths(length, want):
    sset = StringSet.from_strings([tuple(range(1, length + 1))], 8)
    table = block_partition(Network(SimConfig(8)), sset, 4)
    got = blocks_of(table)
    assert [len(got[(0, i)]) for i in range(len(want))] == want
    assert len(got) == len(want)


def test_string_spanning_three_nodes_is_gathered():
    strings = [s("ab"), s("cdefghijk"), s("lm")]
    sset = StringSet.from_strings(strings, 8, piece_len=3)
    table = block_partition(Network(SimConfig(8)), sset, 4)
    got = blocks_of(table)
    for sid, text in enumerate(strings):
        count = -(-len(text) // 4)
        assert b"".join(bytes(got[(sid, i)]) for i in range(count)) == bytes(text)
    owners = [(b.string_id, b.block_index) for node in table.blocks for b in node]
    assert len(owners) == len(set(owners))
    for v, node in enumerate(table.blocks):
        assert all(b.start_node == v for b in node)


def _one_pass(strings, n, b):
    net = Network(SimConfig(n))
    table = block_partition(net, StringSet.from_strings(strings, n), b)
    return renaming_pass(net, table).to_strings()


def test_renaming_keeps_order_and_prefixes():
    renamed = _one_pass([s("abcd"), s("abce")], 8, 2)
    assert renamed[0][0] == renamed[1][0]
    assert renamed[0][1] < renamed[1][1]
    assert all(c >= 1 for r in renamed for c in r)

    renamed = _one_pass([s("x"), s("x")], 8, 2)
    assert renamed[0] == renamed[1] and len(renamed[0]) == 1

    renamed = _one_pass([s("ab"), s("abq")], 8, 2)
    assert len(renamed[0]) == 1 and len(renamed[1]) == 2
    assert renamed[0][0] == renamed[1][0]


@settings(max_examples=40)
@given(st.lists(st.lists(st.integers(1, 3), min_size=1, max_size=12), min_size=1, max_size=20))
def test_renaming_pass_preserves_order(strings):
    strings = [tuple(x) for x in strings]
    renamed = _one_pass(strings, 16, 2)
    assert [len(r) for r in renamed] == [-(-len(x) // 2) for x in strings]
    assert naive_string_sort(renamed) == naive_string_sort(strings)


@pytest.mark.parametrize("n,passes", [(27, 0), (8, 1)])
def test_small_example(n, passes):
    # blocks are 3 characters wide at n=27 and 2 at n=8
    res = string_sort(Network(SimConfig(n)), StringSet.from_strings([s("b"), s("ab"), s("abc")], n))
    assert res.flat() == [2, 0, 1]
    assert res.passes == passes


def test_equal_strings_share_rank_zero():
    strings = [s("abcabcabc")] * 5
    res = string_sort(Network(SimConfig(8)), StringSet.from_strings(strings, 8))
    assert res.flat() == [0] * 5


def test_long_strings_at_sixteen_nodes():
    # strings reach n^2/4 = 64 characters; the total is an eighth of 8 * 16^2
    inp = gen_strings(16, 7, 256, "uniform", max_len=64)
    assert max(map(len, inp.strings)) == 64
    res = string_sort(Network(SimConfig(16)), StringSet.from_strings(inp.strings, 16))
    assert res.flat() == naive_string_sort(inp.strings)
    assert 1 <= res.passes <= 7


def test_pass_budget_is_enforced():
    strings = [tuple([1] * 100)]
    with pytest.raises(PassBudgetExceeded):
        string_sort(Network(SimConfig(16)), StringSet.from_strings(strings, 16), max_passes=1)


@settings(max_examples=15)
@given(st.integers(0, 2 ** 32))
def test_ranks_depend_only_on_the_multiset(seed):
    inp = gen_strings(16, seed, 200, "near-duplicate", max_len=20)
    a = StringSet.from_strings(inp.strings, 16)
    b = StringSet.from_strings(inp.strings, 16, piece_len=-(-200 // 12))
    ra = string_sort(Network(SimConfig(16)), a).flat()
    rb = string_sort(Network(SimConfig(16)), b).flat()
    assert ra == rb == naive_string_sort(inp.strings)
