"""Sequential brute-force references used as ground truth in tests.

Nothing here touches the simulator.  Strings are sequences of positive
integers (or ``str``); comparisons are plain Python sequence comparisons,
under which a proper prefix sorts first.
"""

from __future__ import annotations

from .errors import IndexOutOfRange

MAX_ORACLE_INPUT = 1 << 20


def _guard(size: int):
    if size > MAX_ORACLE_INPUT:
        raise ValueError(f"oracle input of {size} characters exceeds {MAX_ORACLE_INPUT}")


def lex_less(a, b) -> bool:
    """``a`` precedes ``b``: first mismatch decides, else the shorter one."""
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return len(a) < len(b)


def naive_string_sort(strings) -> list:
    """Number of distinct strings strictly smaller than each input string."""
    strings = [tuple(s) for s in strings]
    _guard(sum(len(s) for s in strings))
    distinct = sorted(set(strings))
    pos = {s: i for i, s in enumerate(distinct)}
    return [pos[s] for s in strings]


def naive_pm(P, T) -> set:
    P, T = list(P), list(T)
    _guard(len(P) + len(T))
    m = len(P)
    return {i for i in range(len(T) - m + 1) if T[i:i + m] == P}


def naive_lcp(a, b) -> int:
    k = 0
    while k < len(a) and k < len(b) and a[k] == b[k]:
        k += 1
    return k


def naive_sa_lcp(S):
    """Suffix array (1-based starts) and adjacent LCP values of ``S``."""
    S = list(S)
    _guard(len(S))
    sa = sorted(range(len(S)), key=lambda i: S[i:])
    lcp = [naive_lcp(S[sa[k]:], S[sa[k + 1]:]) for k in range(len(sa) - 1)]
    return [i + 1 for i in sa], lcp


def naive_rmq(A, i: int, j: int):
    """Minimum of ``A[i..j]`` with 1-based inclusive bounds."""
    if not (1 <= i <= j <= len(A)):
        raise IndexOutOfRange(f"range ({i},{j}) outside 1..{len(A)}")
    best = A[i - 1]
    for k in range(i, j):
        if A[k] < best:
            best = A[k]
    return best


def dc_check(cover, t: int) -> bool:
    """Every residue mod ``t`` is a difference of two cover members."""
    members = set(cover)
    if any(not 0 <= m < t for m in members):
        return False
    hit = {(b - a) % t for a in members for b in members}
    return all(d in hit for d in range(t))
