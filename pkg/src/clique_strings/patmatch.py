"""Pattern matching on the clique in a constant number of rounds.

Input is one distributed array holding the pattern ``P`` followed by the
text ``T``.  Offsets are 0-based: ``i`` is reported when
``T[i+1..i+|P|] == P`` in 1-based string positions, i.e. ``T[i:i+|P|]`` in
Python slicing.  Interval endpoints inside :class:`GapDecomposition` are
1-based and inclusive.

Short patterns (``|P| <= n``) are broadcast and every node extends its text
piece with the ``|P|-1`` characters that follow it.  Long patterns are
anchored by the occurrences of their length-``n`` prefix ``B`` and suffix
``E`` in both strings; what those occurrences leave uncovered is compared
by sorting the uncovered substrings.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import CompressionViolation, LoadExceeded
from .netsim import Network
from .strsort import StringSet, string_sort


def find_all(x, y) -> list:
    """Start offsets of ``x`` in ``y`` (Knuth-Morris-Pratt)."""
    m = len(x)
    if m == 0 or m > len(y):
        return []
    fail = [0] * m
    k = 0
    for i in range(1, m):
        while k and x[i] != x[k]:
            k = fail[k - 1]
        if x[i] == x[k]:
            k += 1
        fail[i] = k
    out = []
    k = 0
    for i, c in enumerate(y):
        while k and c != x[k]:
            k = fail[k - 1]
        if c == x[k]:
            k += 1
        if k == m:
            out.append(i - m + 1)
            k = fail[k - 1]
    return out


# -- occurrence sets ------------------------------------------------------------

@dataclass(frozen=True)
class OccurrenceSet:
    """Occurrences as arithmetic progressions ``(start, d, count)``."""

    parts: tuple = ()

    def decompress(self) -> list:
        out = []
        for s, d, c in self.parts:
            out.extend(s + d * k for k in range(c))
        return out

    def words(self) -> list:
        return [w for p in self.parts for w in p]

    @classmethod
    def from_words(cls, words):
        w = list(words)
        return cls(tuple(tuple(w[k:k + 3]) for k in range(0, len(w), 3)))

    def covered(self, width: int):
        """Intervals ``[i+1..i+width]`` (1-based) for every occurrence ``i``."""
        out = []
        for s, d, c in self.parts:
            if c > 1 and d <= width:
                out.append((s + 1, s + d * (c - 1) + width))
            else:
                out.extend((s + d * k + 1, s + d * k + width) for k in range(c))
        return out


def compress_occurrences(occurrences, x_len: int, merge: bool = True) -> OccurrenceSet:
    """Encode sorted occurrence offsets of a pattern of length ``x_len``.

    Offsets are grouped by window ``t // x_len``; a window with three or
    more occurrences must form one progression.  With ``merge``, adjacent
    parts continuing the same progression are fused.
    """
    occ = sorted(occurrences)
    windows = {}
    for t in occ:
        windows.setdefault(t // x_len, []).append(t)
    parts = []
    for w in sorted(windows):
        lst = windows[w]
        if len(lst) >= 3:
            d = lst[1] - lst[0]
            if any(b - a != d for a, b in zip(lst, lst[1:])):
                raise CompressionViolation(
                    f"window {w} occurrences {lst} are not an arithmetic progression")
            parts.append((lst[0], d, len(lst)))
        elif len(lst) == 2:
            parts.append((lst[0], lst[1] - lst[0], 2))
        else:
            parts.append((lst[0], 0, 1))
    if merge:
        parts = _merge_parts(parts)
    return OccurrenceSet(tuple(parts))


def _merge_parts(parts):
    out = []
    for s, d, c in parts:
        if out:
            ps, pd, pc = out[-1]
            last = ps + pd * (pc - 1)
            if pc == 1 and (c == 1 or s - last == d):
                out[-1] = (ps, s - ps, c + 1)
                continue
            if pc > 1 and s - last == pd and (c == 1 or d == pd):
                out[-1] = (ps, pd, pc + c)
                continue
        out.append((s, d, c))
    return out


def union_sets(sets) -> OccurrenceSet:
    parts = []
    for s in sets:
        parts.extend(s.parts)
    return OccurrenceSet(tuple(parts))


# -- uncovered regions ------------------------------------------------------------

@dataclass
class GapDecomposition:
    p_len: int
    t_len: int
    R_P: list                  # maximal uncovered intervals of P, 1-based inclusive
    R_T: list
    ranks_P: list = field(default_factory=list)
    ranks_T: list = field(default_factory=list)

    @property
    def S_P(self):
        return [("P", a, b) for a, b in self.R_P]

    @property
    def S_T(self):
        return [("T", a, b) for a, b in self.R_T]

    def count(self) -> int:
        return len(self.R_P) + len(self.R_T)


def _complement(length: int, covered) -> list:
    covered = sorted(covered)
    out = []
    nxt = 1
    for a, b in covered:
        a, b = max(a, 1), min(b, length)
        if a > b:
            continue
        if a > nxt:
            out.append((nxt, a - 1))
        nxt = max(nxt, b + 1)
    if nxt <= length:
        out.append((nxt, length))
    return out


def uncovered_regions(p_len: int, t_len: int, n: int, pmB_P: OccurrenceSet,
                      pmE_P: OccurrenceSet, pmB_T: OccurrenceSet,
                      pmE_T: OccurrenceSet) -> GapDecomposition:
    rp = _complement(p_len, pmB_P.covered(n) + pmE_P.covered(n))
    rt = _complement(t_len, pmB_T.covered(n) + pmE_T.covered(n))
    return GapDecomposition(p_len, t_len, rp, rt)


# -- distributed input ------------------------------------------------------------

@dataclass
class PMInput:
    """Per-node pieces of ``P + T``; ``p_counts[v]`` leading characters are P's."""

    pieces: list
    p_counts: list

    @classmethod
    def from_strings(cls, P, T, n: int, piece_len: int | None = None):
        P, T = list(P), list(T)
        flat = P + T
        if piece_len is None:
            piece_len = max(1, -(-len(flat) // n))
        pieces = [flat[v * piece_len:(v + 1) * piece_len] for v in range(n)]
        if sum(map(len, pieces)) != len(flat):
            raise ValueError("piece_len too small for n nodes")
        p_counts = [max(0, min(len(P) - v * piece_len, len(pieces[v]))) for v in range(n)]
        return cls(pieces, p_counts)

    def p_piece(self, v):
        return self.pieces[v][:self.p_counts[v]]

    def t_piece(self, v):
        return self.pieces[v][self.p_counts[v]:]


@dataclass
class PMResult:
    t_offsets: list            # per node, global T offset of its first T character
    bits: list                 # per node, one flag per T position held
    branch: str
    gaps: GapDecomposition | None = None

    def offsets(self) -> set:
        out = set()
        for off, bits in zip(self.t_offsets, self.bits):
            out.update(off + k for k, f in enumerate(bits) if f)
        return out


def _prefix(lengths):
    out, acc = [], 0
    for ln in lengths:
        out.append(acc)
        acc += ln
    return out, acc


def _match(net: Network, x_pieces, y_pieces, y_offsets, x_len: int, label: str):
    """Occurrences of the distributed ``x`` in the distributed ``y``.

    Returns, per node, the sorted global offsets of occurrences that start
    at a position the node holds.
    """
    n = net.n
    inbox = net.broadcast([tuple(p) for p in x_pieces], label=label + ":pattern")
    x = [c for _, p in inbox[0] for c in p]
    assert len(x) == x_len
    follow = net.fetch_following(y_pieces, x_len - 1, label=label + ":overlap")
    out = []
    for v in range(n):
        piece = list(y_pieces[v])
        if not piece:
            out.append([])
            continue
        ext = piece + follow[v]
        out.append([y_offsets[v] + s for s in find_all(x, ext) if s < len(piece)])
    return out


def _counts(net: Network, inp: PMInput):
    inbox = net.broadcast([(inp.p_counts[v], len(inp.pieces[v]) - inp.p_counts[v])
                           for v in range(net.n)], label="pm:counts")
    pc = [0] * net.n
    tc = [0] * net.n
    for src, (a, b) in inbox[0]:
        pc[src], tc[src] = a, b
    return pc, tc


def pm(net: Network, inp: PMInput) -> PMResult:
    """All offsets of P in T, reported at the nodes holding ``T[i+1]``."""
    n = net.n
    for v, p in enumerate(inp.pieces):
        if len(p) > net.cap:
            raise LoadExceeded(v, "storage", len(p), net.cap)
    pc, tc = _counts(net, inp)
    p_off, p_len = _prefix(pc)
    t_off, t_len = _prefix(tc)
    if p_len == 0:
        raise ValueError("empty pattern")
    if p_len > t_len:
        return PMResult(t_off, [[False] * tc[v] for v in range(n)], "empty")
    if p_len <= n:
        return pm_short(net, inp, pc, tc)
    return pm_long(net, inp, pc, tc)


def _bits_from(occ, t_off, tc, limit):
    bits = []
    for v in range(len(tc)):
        b = [False] * tc[v]
        for o in occ[v]:
            if o <= limit:
                b[o - t_off[v]] = True
        bits.append(b)
    return bits


def pm_short(net: Network, inp: PMInput, pc=None, tc=None) -> PMResult:
    n = net.n
    if pc is None:
        pc, tc = _counts(net, inp)
    t_off, t_len = _prefix(tc)
    p_len = sum(pc)
    occ = _match(net, [inp.p_piece(v) for v in range(n)],
                 [inp.t_piece(v) for v in range(n)], t_off, p_len, "pm_short")
    return PMResult(t_off, _bits_from(occ, t_off, tc, t_len - p_len), "short")


def _slice_pieces(pieces, offsets, lo, hi):
    """Per-node parts of the global range ``[lo, hi)`` of a distributed array."""
    out = []
    for p, off in zip(pieces, offsets):
        a, b = max(lo, off), min(hi, off + len(p))
        out.append(list(p[a - off:b - off]) if a < b else [])
    return out


def pm_long(net: Network, inp: PMInput, pc=None, tc=None) -> PMResult:
    n = net.n
    if pc is None:
        pc, tc = _counts(net, inp)
    p_off, p_len = _prefix(pc)
    t_off, t_len = _prefix(tc)
    if not n < p_len <= t_len:
        raise ValueError("long branch needs n < |P| <= |T|")
    P = [inp.p_piece(v) for v in range(n)]
    T = [inp.t_piece(v) for v in range(n)]
    B = _slice_pieces(P, p_off, 0, n)
    E = _slice_pieces(P, p_off, p_len - n, p_len)

    sets = {}
    for name, x, y, yoff in (("B_P", B, P, p_off), ("E_P", E, P, p_off),
                             ("B_T", B, T, t_off), ("E_T", E, T, t_off)):
        occ = _match(net, x, y, yoff, n, "pm_long:" + name)
        # every node compresses what it found and tells everyone
        words = [tuple(compress_occurrences(o, n).words()) for o in occ]
        inbox = net.broadcast(words, label="pm_long:announce_" + name)
        sets[name] = union_sets(OccurrenceSet.from_words(p) for _, p in inbox[0])

    gaps = uncovered_regions(p_len, t_len, n, sets["B_P"], sets["E_P"],
                             sets["B_T"], sets["E_T"])
    if gaps.count() > net.cap:
        raise LoadExceeded(-1, "gap strings", gaps.count(), net.cap)

    # every node keeps its uncovered characters; region heads become starts
    regions = [(a - 1, b) for a, b in gaps.R_P] + [(p_len + a - 1, p_len + b) for a, b in gaps.R_T]
    heads = [a for a, _ in regions]
    g_pieces, g_starts = [], []
    full_off = [p_off[v] + t_off[v] for v in range(n)]
    for v in range(n):
        piece = inp.pieces[v]
        keep, st = [], []
        lo, hi = full_off[v], full_off[v] + len(piece)
        k = bisect.bisect_right(heads, lo) - 1
        k = max(k, 0)
        while k < len(regions) and regions[k][0] < hi:
            a, b = regions[k]
            a2, b2 = max(a, lo), min(b, hi)
            if a2 < b2:
                if a2 == a:
                    st.append(len(keep))
                keep.extend(piece[a2 - lo:b2 - lo])
            k += 1
        g_pieces.append(keep)
        g_starts.append(st)
    ranks_flat = []
    if regions:
        res = string_sort(net, StringSet(g_pieces, g_starts))
        inbox = net.broadcast([tuple(r) for r in res.ranks], label="pm_long:ranks")
        ranks_flat = [r for _, p in inbox[0] for r in p]
        assert len(ranks_flat) == len(regions)
    gaps.ranks_P = ranks_flat[:len(gaps.R_P)]
    gaps.ranks_T = ranks_flat[len(gaps.R_P):]

    check = OffsetChecker(p_len, t_len, n, sets, gaps)
    bits = []
    for v in range(n):
        bits.append([check(t_off[v] + k) if t_off[v] + k <= t_len - p_len else False
                     for k in range(tc[v])])
    return PMResult(t_off, bits, "long", gaps)


class OffsetChecker:
    """The three-condition occurrence test at a text offset ``i``."""

    def __init__(self, p_len, t_len, n, sets, gaps: GapDecomposition):
        self.p_len, self.t_len, self.n = p_len, t_len, n
        span = p_len - n + 1
        self.mask = (1 << span) - 1
        self.bp = _bitset(sets["B_P"].decompress())
        self.ep = _bitset(sets["E_P"].decompress())
        self.bt = _bitset(sets["B_T"].decompress())
        self.et = _bitset(sets["E_T"].decompress())
        self.p_regions = list(zip(gaps.R_P, gaps.ranks_P))
        self.t_rank = dict(zip(gaps.R_T, gaps.ranks_T))

    def cond_prefix(self, i) -> bool:
        return (self.bt >> i) & self.mask == self.bp & self.mask

    def cond_suffix(self, i) -> bool:
        return (self.et >> i) & self.mask == self.ep & self.mask

    def cond_regions(self, i) -> bool:
        for (a, b), r in self.p_regions:
            if self.t_rank.get((i + a, i + b)) != r:
                return False
        return True

    def __call__(self, i) -> bool:
        return self.cond_prefix(i) and self.cond_suffix(i) and self.cond_regions(i)


def _bitset(offsets) -> int:
    x = 0
    for o in offsets:
        x |= 1 << o
    return x
