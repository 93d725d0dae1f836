"""Lexicographic string sorting by repeated block renaming.

Strings are cut into blocks of ``b = ceil(n^(1/3))`` characters, the blocks
are sorted as objects, and every block is replaced by its rank plus one.
The new strings are ``b`` times shorter and compare exactly like the old
ones.  Once every string fits in one block, the strings themselves are
sorted as objects.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .errors import LoadExceeded, PassBudgetExceeded
from .netsim import Network, ceil_pow
from .objsort import solve_object_sort

MAX_PASSES = 7
BLOCK_EPS = Fraction(2, 3)


@dataclass
class StringSet:
    """Concatenated strings cut into per-node pieces.

    ``starts[v]`` lists the local offsets in ``pieces[v]`` where a string
    begins; a string runs until the next start anywhere in node order.
    """

    pieces: list
    starts: list

    @classmethod
    def from_strings(cls, strings, n: int, piece_len: int | None = None):
        flat, begins = [], []
        for s in strings:
            s = list(s)
            if not s:
                raise ValueError("empty strings are not allowed")
            if min(s) < 1:
                raise ValueError("characters must be >= 1")
            begins.append(len(flat))
            flat.extend(s)
        if piece_len is None:
            piece_len = max(1, -(-len(flat) // n))
        pieces = [flat[v * piece_len:(v + 1) * piece_len] for v in range(n)]
        if sum(map(len, pieces)) != len(flat):
            raise ValueError("piece_len too small for n nodes")
        starts = [[] for _ in range(n)]
        for p in begins:
            starts[p // piece_len].append(p % piece_len)
        return cls(pieces, starts)

    def to_strings(self) -> list:
        flat = [c for p in self.pieces for c in p]
        begins = []
        off = 0
        for p, st in zip(self.pieces, self.starts):
            begins.extend(off + s for s in st)
            off += len(p)
        ends = begins[1:] + [len(flat)]
        return [tuple(flat[a:b]) for a, b in zip(begins, ends)]

    @property
    def n(self) -> int:
        return len(self.pieces)

    def validate(self, cap: int):
        for v, p in enumerate(self.pieces):
            if len(p) > cap:
                raise LoadExceeded(v, "storage", len(p), cap)
            if any(c < 1 for c in p):
                raise ValueError("characters must be >= 1")
        first = next((v for v in range(self.n) if self.pieces[v]), None)
        if first is not None and (not self.starts[first] or self.starts[first][0] != 0):
            raise ValueError("the first character must start a string")


@dataclass
class Block:
    string_id: int
    block_index: int
    payload: tuple
    start_node: int


@dataclass
class BlockTable:
    blocks: list        # per node, list of Block
    max_len: int
    string_count: int


@dataclass
class _Layout:
    """What every node knows after the metadata broadcast."""

    offsets: list
    total: int
    starts: list        # global start positions, only first/last per node known
    ids_before: list    # number of strings starting on earlier nodes
    max_len: int


def _layout(net: Network, sset: StringSet, label: str) -> _Layout:
    n = net.n
    payloads = []
    for v in range(n):
        p, st = sset.pieces[v], sset.starts[v]
        internal = max((b - a for a, b in zip(st, st[1:])), default=0)
        first = st[0] if st else 0
        last = st[-1] if st else 0
        payloads.append((len(p), len(st), first, last, internal))
    inbox = net.broadcast(payloads, label=label)
    meta = [None] * n
    for src, m in inbox[0]:
        meta[src] = m
    offsets, acc = [], 0
    for v in range(n):
        offsets.append(acc)
        acc += meta[v][0]
    known, ids_before, cnt = [], [], 0
    max_len = max((m[4] for m in meta), default=0)
    open_start = None
    for v in range(n):
        ids_before.append(cnt)
        nchars, nst, first, last, _ = meta[v]
        cnt += nst
        if nst:
            known.append(offsets[v] + first)
            if nst > 1:
                known.append(offsets[v] + last)
            # a string starting at a node's last start ends at the next node's first start
            if open_start is not None:
                max_len = max(max_len, offsets[v] + first - open_start)
            open_start = offsets[v] + last
    known.append(acc)
    if open_start is not None:
        max_len = max(max_len, acc - open_start)
    return _Layout(offsets, acc, known, ids_before, max_len)


def block_partition(net: Network, sset: StringSet, b: int | None = None,
                    label: str = "strsort:layout") -> BlockTable:
    """Cut strings into ``b``-character blocks and gather each on its start node."""
    n = net.n
    b = b or ceil_pow(n, Fraction(1, 3))
    sset.validate(net.cap)
    lay = _layout(net, sset, label)
    known = lay.starts
    # global string starts are only partially known per node; each node can
    # still place its own characters: its tail belongs to the string that
    # begins at the last known start before the node
    msgs = []
    local_blocks = [[] for _ in range(n)]
    for v in range(n):
        piece = sset.pieces[v]
        if not piece:
            continue
        off = lay.offsets[v]
        st = sset.starts[v]
        heads = [off + s for s in st]
        k = bisect.bisect_right(known, off) - 1
        tail_start = known[k] if k >= 0 else 0
        # (global start, string id) for every string touching this node
        segs = []
        if not st or st[0] > 0:
            segs.append((tail_start, lay.ids_before[v] - 1, off))
        for i, h in enumerate(heads):
            segs.append((h, lay.ids_before[v] + i, h))
        bounds = [s[2] for s in segs] + [off + len(piece)]
        for (gstart, sid, lo), hi in zip(segs, bounds[1:]):
            pos = lo
            while pos < hi:
                bi = (pos - gstart) // b
                bstart = gstart + bi * b
                bend = min(bstart + b, hi)
                chunk = tuple(piece[pos - off:bend - off])
                if bstart >= off:
                    local_blocks[v].append([sid, bi, list(chunk)])
                else:
                    msgs.append((v, _holder(lay, bstart), chunk))
                pos = bend
    inbox = net.route(msgs, label + ":gather")
    blocks = [[] for _ in range(n)]
    for v in range(n):
        lb = local_blocks[v]
        extra = [p for _, p in inbox[v]]
        if extra:
            # continuation chunks arrive in source order and extend the
            # node's last block
            for p in extra:
                lb[-1][2].extend(p)
        for sid, bi, chars in lb:
            blocks[v].append(Block(sid, bi, tuple(chars), v))
    return BlockTable(blocks, lay.max_len, lay.ids_before[-1] + len(sset.starts[-1]))


def _holder(lay: _Layout, pos: int) -> int:
    # empty nodes share their successor's offset; bisect_right skips them
    return bisect.bisect_right(lay.offsets, pos) - 1


def renaming_pass(net: Network, table: BlockTable, eps=BLOCK_EPS) -> StringSet:
    """Replace every block by its rank + 1 among all blocks."""
    n = net.n
    objects = [[blk.payload for blk in table.blocks[v]] for v in range(n)]
    ranks = solve_object_sort(net, objects, eps)
    pieces, starts = [], []
    for v in range(n):
        pieces.append([r + 1 for r in ranks[v]])
        starts.append([i for i, blk in enumerate(table.blocks[v]) if blk.block_index == 0])
    return StringSet(pieces, starts)


@dataclass
class SortResult:
    ranks: list          # per node, ranks of the strings starting there
    passes: int
    lengths: list        # max string length before each pass

    def flat(self) -> list:
        return [r for rs in self.ranks for r in rs]


def string_sort(net: Network, sset: StringSet, max_passes: int = MAX_PASSES) -> SortResult:
    """Distinct-smaller lexicographic rank of every string, at its start node."""
    n = net.n
    b = ceil_pow(n, Fraction(1, 3))
    table = block_partition(net, sset, b)
    lengths = [table.max_len]
    passes = 0
    while table.max_len > b:
        if passes == max_passes:
            raise PassBudgetExceeded(
                f"strings still {table.max_len} > {b} characters after {passes} passes")
        sset = renaming_pass(net, table)
        passes += 1
        table = block_partition(net, sset, b)
        lengths.append(table.max_len)
    objects = [[blk.payload for blk in table.blocks[v]] for v in range(n)]
    ranks = solve_object_sort(net, objects, BLOCK_EPS)
    return SortResult(ranks, passes, lengths)
