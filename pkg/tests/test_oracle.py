import pytest
from hypothesis import given, strategies as st

from clique_strings.errors import IndexOutOfRange
from clique_strings.oracle import (dc_check, lex_less, naive_lcp, naive_pm, naive_rmq,
                                   naive_sa_lcp, naive_string_sort)


def test_lex_less_prefix_sorts_first():
    assert lex_less("ab", "abc")
    assert not lex_less("abc", "ab")
    assert lex_less("abz", "ac")
    assert not lex_less("a", "a")


def test_string_sort_counts_distinct_smaller():
    assert naive_string_sort(["b", "a", "b", "ab"]) == [2, 0, 2, 1]


def test_pm_overlapping_matches():
    assert naive_pm("aa", "aaaa") == {0, 1, 2}
    assert naive_pm("abc", "ab") == set()


def test_sa_lcp_banana():
    assert naive_sa_lcp("banana") == ([6, 4, 2, 1, 5, 3], [1, 3, 0, 0, 2])


def test_sa_all_equal():
    assert naive_sa_lcp("aaa") == ([3, 2, 1], [1, 2])


def test_rmq_bounds():
    assert naive_rmq([5, 2, 7], 1, 3) == 2
    assert naive_rmq([5, 2, 7], 3, 3) == 7
    with pytest.raises(IndexOutOfRange):
        naive_rmq([5, 2, 7], 0, 2)
    with pytest.raises(IndexOutOfRange):
        naive_rmq([5, 2, 7], 2, 4)


def test_dc_check():
    assert dc_check([0, 1, 2], 4)
    assert not dc_check([0, 1], 4)
    assert not dc_check([0, 5], 4)


@given(st.lists(st.integers(1, 3), max_size=12), st.lists(st.integers(1, 3), max_size=12))
def test_lcp_is_common_prefix(a, b):
    k = naive_lcp(a, b)
    assert a[:k] == b[:k]
    assert k == min(len(a), len(b)) or a[k] != b[k]
