"""Suffix array and LCP array construction by difference-cover recursion.

Positions are 1-based throughout.  A level with string ``S`` works as
follows:

1. pick a period ``t`` and a difference cover ``DC`` of ``[0, t)``;
2. sort the ``t``-windows starting at sampled positions (``p mod t`` in
   ``DC``) and write their ranks, residue class by residue class, into a
   shorter string ``S'`` with 0 separators;
3. solve ``S'`` recursively, which orders all sampled suffixes;
4. give every position an object holding its window and the sampled ranks
   of the next ``t`` positions, and sort those objects.

Windows are truncated at the end of the string rather than padded, so a
suffix that runs out sorts before every extension of it even when the
string itself contains 0 characters (which it does below the top level).

The LCP of each suffix with its successor is computed at the same time:
exact LCPs of adjacent sampled suffixes are obtained by fetching ``2t``
characters per pair, and every other LCP is either read off the windows or
is ``k`` plus a range minimum over those exact values.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import NoWitness, RecursionBudgetExceeded, VerificationFailed
from .netsim import DistributedArray, Network, Query, ceil_pow
from .objsort import ObjectRecord, decode, encode, key_from_cmp, solve_object_sort, sort_group

DEPTH_A, DEPTH_B = 4, 8
EPS_FLOOR = 0.05
EPS_GROWTH = 1.4
T_MIN = 4
SORT_EPS_CHOICES = (Fraction(2, 3), Fraction(1, 2), Fraction(1, 3), Fraction(1, 4),
                    Fraction(1, 5), Fraction(1, 6), Fraction(1, 8))


# -- difference covers ------------------------------------------------------------

@dataclass(frozen=True)
class DifferenceCover:
    t: int
    members: tuple


@lru_cache(maxsize=None)
def build_dc(t: int) -> DifferenceCover:
    """``{0..r-1} ∪ {0, r, 2r, ..}`` restricted to ``[0, t)``, ``r = ceil(sqrt t)``."""
    if t < 1:
        raise ValueError("t must be positive")
    r = math.isqrt(t)
    if r * r < t:
        r += 1
    members = set(range(min(r, t))) | {k * r for k in range(r + 1) if k * r < t}
    return DifferenceCover(t, tuple(sorted(members)))


def cover_constant(t_max: int = 256) -> float:
    """Largest ``|DC_t| / sqrt(t)`` over ``t <= t_max``; bounds ``|S'|/|S|``."""
    return max(len(build_dc(t).members) / math.sqrt(t) for t in range(1, t_max + 1))


def depth_budget(n: int) -> int:
    return int(DEPTH_A * math.log2(max(2.0, math.log2(n))) + DEPTH_B)


class Schedule:
    """Period per recursion level: ``eps`` grows by 1.4 per level."""

    def __init__(self, n: int, c: float | None = None):
        self.n = n
        c = cover_constant() if c is None else c
        self.eps1 = max(10 * math.log2(c) / math.log2(n), EPS_FLOOR)

    def eps(self, level: int) -> float:
        return self.eps1 * EPS_GROWTH ** (level - 1)

    def t(self, level: int) -> int:
        n = self.n
        return max(T_MIN, min(ceil_pow(n, self.eps(level)), ceil_pow(n, Fraction(1, 3))))


def sort_eps(n: int, words: int) -> Fraction:
    """Largest listed epsilon whose size class admits ``words``-word objects.

    The two header words of the wire format are counted too; otherwise the
    sampled candidates of a group can outweigh the objects they came from.
    """
    for eps in SORT_EPS_CHOICES:
        if ceil_pow(n, 1 - eps) >= words + 2:
            return eps
    raise ValueError(f"no size class holds {words}-word objects at n={n}")


# -- sample string layout -----------------------------------------------------------

@dataclass(frozen=True)
class SampleLayout:
    """Where each sampled position of ``S`` lands in ``S'`` (both 1-based)."""

    length: int
    t: int
    members: tuple
    stream_len: tuple
    stream_start: tuple

    @classmethod
    def make(cls, length: int, dc: DifferenceCover):
        t = dc.t
        lens, starts, at = [], [], 1
        for r in dc.members:
            ln = length // t if r == 0 else ((length - r) // t + 1 if r <= length else 0)
            lens.append(ln)
            starts.append(at)
            at += ln + 1
        return cls(length, t, dc.members, tuple(lens), tuple(starts))

    @property
    def separators(self) -> int:
        return len(self.members) - 1

    @property
    def size(self) -> int:
        return sum(self.stream_len) + self.separators

    @property
    def sampled(self) -> int:
        return sum(self.stream_len)

    def is_sampled(self, p: int) -> bool:
        return (p % self.t) in self._member_set

    @property
    def _member_set(self):
        return frozenset(self.members)

    def f(self, p: int) -> int:
        r = p % self.t
        j = self.members.index(r)
        idx = p // self.t - 1 if r == 0 else (p - r) // self.t
        return self.stream_start[j] + idx

    def f_inv(self, q: int) -> int:
        """Sampled position at ``S'[q]``, or 0 for a separator."""
        j = bisect.bisect_right(self.stream_start, q) - 1
        idx = q - self.stream_start[j]
        if idx >= self.stream_len[j]:
            return 0
        r = self.members[j]
        return (idx + 1) * self.t if r == 0 else r + idx * self.t


@dataclass
class SampleString:
    s_prime: list
    layout: SampleLayout

    def f(self, p):
        return self.layout.f(p)

    def f_inv(self, q):
        return self.layout.f_inv(q)


def sample_string(S, t: int) -> SampleString:
    """Sequential construction of ``S'`` (reference for tests and checks)."""
    S = list(S)
    lay = SampleLayout.make(len(S), build_dc(t))
    pos = [p for p in range(1, len(S) + 1) if lay.is_sampled(p)]
    wins = {p: tuple(S[p - 1:p - 1 + t]) for p in pos}
    distinct = sorted(set(wins.values()))
    rank = {w: i for i, w in enumerate(distinct)}
    out = [0] * lay.size
    for p in pos:
        out[lay.f(p) - 1] = rank[wins[p]] + 1
    return SampleString(out, lay)


# -- representative objects -----------------------------------------------------------

def rep_payload(window, ranks) -> tuple:
    """``(len(window), *window, *ranks)``; ``ranks`` has one entry per offset,
    sampled rank + 1 or 0 when the offset is not sampled."""
    return (len(window),) + tuple(window) + tuple(ranks)


def split_payload(payload):
    w = payload[0]
    return payload[1:1 + w], payload[1 + w:]


def witness(ra, rb):
    for k, (x, y) in enumerate(zip(ra, rb)):
        if x and y:
            return k
    return None


def rep_compare(x, y) -> int:
    """Order two representative payloads like their suffixes."""
    if x == y:
        return 0
    wx, rx = split_payload(x)
    wy, ry = split_payload(y)
    if wx != wy:
        return -1 if wx < wy else 1
    k = witness(rx, ry)
    if k is None:
        raise NoWitness(f"no common sampled offset for {x} and {y}")
    if rx[k] == ry[k]:
        return 0
    return -1 if rx[k] < ry[k] else 1


def common_prefix(a, b) -> int:
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


# -- sequential base case -------------------------------------------------------------

def local_suffix_array(S):
    """Prefix doubling; returns 0-based start positions in suffix order."""
    n = len(S)
    if n == 0:
        return []
    rank = list(S)
    sa = list(range(n))
    k = 1
    while True:
        key = [(rank[i], rank[i + k] if i + k < n else -1) for i in range(n)]
        sa.sort(key=key.__getitem__)
        new = [0] * n
        for a, b in zip(sa, sa[1:]):
            new[b] = new[a] + (key[a] != key[b])
        rank = new
        if rank[sa[-1]] == n - 1 or k >= n:
            return sa
        k *= 2


def local_lcp(S, sa):
    """Kasai: ``lcp[r]`` is the LCP of suffixes ``sa[r]`` and ``sa[r+1]``."""
    n = len(S)
    inv = [0] * n
    for r, p in enumerate(sa):
        inv[p] = r
    lcp = [0] * max(0, n - 1)
    h = 0
    for p in range(n):
        r = inv[p]
        if r == n - 1:
            h = 0
            continue
        q = sa[r + 1]
        while p + h < n and q + h < n and S[p + h] == S[q + h]:
            h += 1
        lcp[r] = h
        if h:
            h -= 1
    return lcp


# -- distributed recursion ------------------------------------------------------------------

@dataclass
class LevelStats:
    depth: int
    length: int
    t: int
    cover_size: int
    sample_length: int
    rounds: int = 0
    base: bool = False


@dataclass
class SaLcpResult:
    sa: list
    lcp: list | None
    lcpbar: list | None
    levels: list = field(default_factory=list)
    rounds: int = 0

    @property
    def depth(self) -> int:
        return len(self.levels)


@dataclass
class _Ctx:
    schedule: Schedule
    with_lcp: bool
    check: bool
    rng: random.Random
    max_depth: int
    levels: list
    top_lcpbar: list | None = None
    s_primes: list = field(default_factory=list)


def _broadcast_lengths(net: Network, pieces):
    inbox = net.broadcast([(len(p),) if p else () for p in pieces], label="sa:lengths")
    lens = [0] * net.n
    for src, (ln,) in inbox[0]:
        lens[src] = ln
    offs, acc = [], 0
    for ln in lens:
        offs.append(acc)
        acc += ln
    return lens, offs, acc


def _holder(offs, lens, p):
    """Node holding 1-based position ``p``."""
    v = bisect.bisect_right(offs, p - 1) - 1
    while lens[v] == 0:
        v -= 1
    return v


def _base_case(net: Network, pieces, offs, lens, total, ctx: _Ctx, stats: LevelStats):
    n = net.n
    stats.base = True
    inbox = net.route([(v, 0, tuple(pieces[v])) for v in range(n) if pieces[v]],
                      "sa:base_gather")
    S = [c for _, p in inbox[0] for c in p]
    assert len(S) == total
    sa = local_suffix_array(S)
    lcp = local_lcp(S, sa) if ctx.with_lcp else [0] * max(0, total - 1)
    rank = [0] * total
    succ = [0] * total
    lcp_of = [0] * total
    for r, p in enumerate(sa):
        rank[p] = r
        if r + 1 < total:
            succ[p] = sa[r + 1] + 1
            lcp_of[p] = lcp[r]
    out = [[[0, 0, 0] for _ in range(lens[v])] for v in range(n)]
    for field_idx, values, label in ((0, rank, "rank"), (1, succ, "succ"), (2, lcp_of, "lcp")):
        msgs = []
        for v in range(n):
            for k in range(lens[v]):
                msgs.append((0, v, (values[offs[v] + k],)))
        got = net.route(msgs, "sa:base_" + label)
        for v in range(n):
            for k, (_, (val,)) in enumerate(got[v]):
                out[v][k][field_idx] = val
    return out


def _solve(net: Network, pieces, depth: int, ctx: _Ctx):
    """Per node, per local position: ``[rank, successor position, lcp]``.

    ``rank`` is 0-based in suffix order; the successor is the 1-based
    position of the next suffix (0 for the largest).
    """
    n = net.n
    start_rounds = net.ledger.rounds_charged
    lens, offs, total = _broadcast_lengths(net, pieces)
    t = ctx.schedule.t(depth)
    dc = build_dc(t)
    stats = LevelStats(depth, total, t, len(dc.members), 0)
    ctx.levels.append(stats)
    if total <= net.cap:
        out = _base_case(net, pieces, offs, lens, total, ctx, stats)
        stats.rounds = net.ledger.rounds_charged - start_rounds
        return out
    if depth > ctx.max_depth:
        raise RecursionBudgetExceeded(
            f"depth {depth} exceeds {ctx.max_depth} with |S|={total}")
    lay = SampleLayout.make(total, dc)
    stats.sample_length = lay.size

    # windows at sampled positions, sorted as objects
    follow = net.fetch_following(pieces, t - 1, label="sa:window_chars")
    ext = [list(pieces[v]) + follow[v] for v in range(n)]
    win_objs, win_pos = [], []
    for v in range(n):
        objs, ps = [], []
        for k in range(lens[v]):
            p = offs[v] + k + 1
            if lay.is_sampled(p):
                objs.append(tuple(ext[v][k:k + t]))
                ps.append(p)
        win_objs.append(objs)
        win_pos.append(ps)
    win_rank = solve_object_sort(net, win_objs, sort_eps(n, t))

    # assemble S' on chunk owners; unfilled cells are the 0 separators
    M = lay.size
    chunk = -(-M // n)
    msgs = []
    for v in range(n):
        for p, r in zip(win_pos[v], win_rank[v]):
            q = lay.f(p)
            msgs.append((v, (q - 1) // chunk, ((q - 1) % chunk, r + 1)))
    got = net.route(msgs, "sa:build_sample")
    s2 = []
    for u in range(n):
        cells = [0] * max(0, min(chunk, M - u * chunk))
        for _, (idx, val) in got[u]:
            cells[idx] = val
        s2.append(cells)
    if ctx.check:
        _check_level(pieces, s2, lay, t, ctx)

    child = _solve(net, s2, depth + 1, ctx)
    child_rounds = sum(s.rounds for s in ctx.levels if s.depth == depth + 1)

    # sampled ranks, successors and S' LCPs go back to the holders of S
    sep = lay.separators
    msgs = []
    for u in range(n):
        for k, (rk, sq, lc) in enumerate(child[u]):
            q = u * chunk + k + 1
            p = lay.f_inv(q)
            if p == 0:
                continue
            succ = lay.f_inv(sq) if sq else 0
            msgs.append((u, _holder(offs, lens, p), (p - offs[_holder(offs, lens, p)] - 1,
                                                    rk - sep, succ, lc)))
    got = net.route(msgs, "sa:sample_results")
    samp = [dict() for _ in range(n)]
    for v in range(n):
        for _, (k, rk, succ, lc) in got[v]:
            samp[v][k] = (rk, succ, lc)

    lcpbar_arr = None
    if ctx.with_lcp:
        lcpbar_arr = _exact_sample_lcp(net, pieces, ext, offs, lens, total, t, samp, lay, ctx, depth)

    # sampled ranks of the following t-1 positions complete the objects
    rk_pieces = [[samp[v][k][0] + 1 if k in samp[v] else 0 for k in range(lens[v])]
                 for v in range(n)]
    rk_follow = net.fetch_following(rk_pieces, t - 1, label="sa:rank_window")
    holdings = {}
    for v in range(n):
        rk_ext = rk_pieces[v] + rk_follow[v]
        objs = []
        for k in range(lens[v]):
            window = ext[v][k:k + t]
            ranks = rk_ext[k:k + t]
            ranks = ranks + [0] * (t - len(ranks))
            objs.append(ObjectRecord(rep_payload(window, ranks), v, k))
        holdings[v] = objs
    eps_r = sort_eps(n, 2 * t + 1)
    sorted_hold = sort_group(net, holdings, range(n), eps_r, key=key_from_cmp(rep_compare))
    out = _finish_level(net, sorted_hold, offs, lens, lcpbar_arr, ctx)
    stats.rounds = net.ledger.rounds_charged - start_rounds - child_rounds
    return out


def fetch_chars(net: Network, pieces, known, wanted, label="sa:fetch_chars"):
    """Characters at 1-based positions ``wanted[v]``, per node.

    ``known[v]`` is ``(first, chars)``: a run of characters node ``v``
    already holds, answered without communication.  The rest go through
    ``query_route`` in batches of at most ``FETCH_BATCH(n)`` queries per node;
    the batch count is agreed on through one broadcast.
    """
    n = net.n
    lens = [len(p) for p in pieces]
    offs = [sum(lens[:v]) for v in range(n)]
    out = [[0] * len(w) for w in wanted]
    remote = [[] for _ in range(n)]
    for v in range(n):
        first, chars = known[v]
        for i, q in enumerate(wanted[v]):
            if first <= q < first + len(chars):
                out[v][i] = chars[q - first]
            else:
                h = _holder(offs, lens, q)
                remote[v].append((i, Query(h, q - offs[h] - 1)))
    info = net.broadcast([(len(r),) for r in remote], label=label + ":counts")
    most = max((c for _, (c,) in info[0]), default=0)
    size = fetch_batch(n)
    for b in range(-(-most // size)):
        batch = [r[b * size:(b + 1) * size] for r in remote]
        ans = net.query_route([[q for _, q in r] for r in batch], pieces,
                              lambda st, c: st[c], label=label)
        for v in range(n):
            for (i, _), a in zip(batch[v], ans[v]):
                out[v][i] = a
    return out


def fetch_batch(n: int) -> int:
    return max(1, n // 2)


def _exact_sample_lcp(net, pieces, ext, offs, lens, total, t, samp, lay, ctx, depth):
    """Exact LCPs of lexicographically adjacent sampled suffixes.

    Stored rank-indexed: entry ``j`` belongs to the sampled suffixes of rank
    ``j`` and ``j+1``.
    """
    n = net.n
    wanted = [[] for _ in range(n)]
    plans = [[] for _ in range(n)]
    for v in range(n):
        for k in sorted(samp[v]):
            rk, succ, lc = samp[v][k]
            if not succ:
                continue
            p = offs[v] + k + 1
            lo = len(wanted[v])
            spans = []
            for base in (p + lc * t, succ + lc * t):
                cnt = max(0, min(t, total - base + 1))
                spans.append(cnt)
                wanted[v].extend(range(base, base + cnt))
            plans[v].append((rk, lc, lo, spans))
    known = [(offs[v] + 1, ext[v]) for v in range(n)]
    answers = fetch_chars(net, pieces, known, wanted, label="sa:lcp_chars")
    ns = lay.sampled
    chunk = max(1, -(-(ns - 1) // n))
    msgs = []
    for v in range(n):
        for rk, lc, lo, (ca, cb) in plans[v]:
            a = answers[v][lo:lo + ca]
            b = answers[v][lo + ca:lo + ca + cb]
            extra = common_prefix(a, b)
            if extra >= t:
                raise VerificationFailed("sampled LCP exceeds the bound implied by S'")
            msgs.append((v, rk // chunk, (rk % chunk, lc * t + extra)))
    got = net.route(msgs, "sa:lcpbar_store")
    arr = []
    for u in range(n):
        cells = [0] * max(0, min(chunk, ns - 1 - u * chunk))
        for _, (idx, val) in got[u]:
            cells[idx] = val
        arr.append(cells)
    if depth == 1:
        ctx.top_lcpbar = [x for c in arr for x in c]
    return DistributedArray(arr)


def _finish_level(net, sorted_hold, offs, lens, lcpbar_arr, ctx):
    n = net.n
    counts = net.broadcast([(len(sorted_hold[v]),) for v in range(n)], label="sa:rep_counts")
    per = [0] * n
    for src, (c,) in counts[0]:
        per[src] = c
    base = [sum(per[:v]) for v in range(n)]
    nonempty = [v for v in range(n) if per[v]]
    msgs = [(b, a, encode(sorted_hold[b][0])) for a, b in zip(nonempty, nonempty[1:])]
    got = net.route(msgs, "sa:rep_successor")
    rmq_q = [[] for _ in range(n)]
    rows = [[] for _ in range(n)]
    for v in nonempty:
        objs = list(sorted_hold[v])
        nxt = decode(got[v][0][1]) if got[v] else None
        for k, o in enumerate(objs):
            y = objs[k + 1] if k + 1 < len(objs) else nxt
            pos = offs[o.origin_node] + o.origin_index + 1
            if y is None:
                rows[v].append([o, base[v] + k, 0, 0, None])
                continue
            ypos = offs[y.origin_node] + y.origin_index + 1
            lcp, pending = 0, None
            if ctx.with_lcp:
                wx, rx = split_payload(o.payload)
                wy, ry = split_payload(y.payload)
                if wx != wy:
                    lcp = common_prefix(wx, wy)
                else:
                    w = witness(rx, ry)
                    if w is None:
                        raise NoWitness(f"positions {pos} and {ypos}")
                    a, b = rx[w] - 1, ry[w] - 1
                    if a >= b:
                        raise VerificationFailed("sampled ranks out of order")
                    lcp = w
                    pending = len(rmq_q[v])
                    rmq_q[v].append((a + 1, b))
            rows[v].append([o, base[v] + k, ypos, lcp, pending])
    if ctx.with_lcp and any(rmq_q):
        mins = net.distributed_rmq(lcpbar_arr, rmq_q, label="sa:rmq")
    else:
        mins = [[] for _ in range(n)]
    msgs = []
    for v in nonempty:
        for o, rank, ypos, lcp, pending in rows[v]:
            if pending is not None:
                lcp += mins[v][pending]
            msgs.append((v, o.origin_node, (o.origin_index, rank, ypos, lcp)))
    got = net.route(msgs, "sa:results_home")
    out = []
    for v in range(n):
        cells = [None] * lens[v]
        for _, (k, rank, ypos, lcp) in got[v]:
            cells[k] = [rank, ypos, lcp]
        out.append(cells)
    return out


def _check_level(pieces, s2_pieces, lay: SampleLayout, t: int, ctx: _Ctx, pairs: int = 50):
    """Oracle checks of suffix order and LCP transfer on sampled pairs."""
    from .oracle import naive_lcp

    S = [c for p in pieces for c in p]
    S2 = [c for p in s2_pieces for c in p]
    ref = sample_string(S, t)
    if ref.s_prime != S2:
        raise VerificationFailed("distributed S' differs from the sequential construction")
    ctx.s_primes.append((t, S2))
    sampled = [p for p in range(1, len(S) + 1) if lay.is_sampled(p)]
    for _ in range(pairs):
        a, b = ctx.rng.sample(sampled, 2)
        sa_, sb_ = S[a - 1:], S[b - 1:]
        qa, qb = lay.f(a), lay.f(b)
        ta, tb = S2[qa - 1:], S2[qb - 1:]
        if (sa_ < sb_) != (ta < tb):
            raise VerificationFailed(f"suffix order of {a},{b} not preserved in S'")
        if naive_lcp(ta, tb) != naive_lcp(sa_, sb_) // t:
            raise VerificationFailed(f"LCP of {a},{b} not transferred as floor(l/t)")


def _run(net: Network, pieces, with_lcp: bool, check: bool, seed: int) -> SaLcpResult:
    n = net.n
    pieces = [list(p) for p in pieces]
    for p in pieces:
        if any(c < 1 for c in p):
            raise ValueError("characters must be >= 1")
    ctx = _Ctx(Schedule(n), with_lcp, check, random.Random(seed), depth_budget(n), [])
    start = net.ledger.rounds_charged
    out = _solve(net, pieces, 1, ctx)
    lens = [len(p) for p in pieces]
    offs = [sum(lens[:v]) for v in range(n)]
    total = sum(lens)
    # suffix array and LCP array, chunked by rank across the nodes
    chunk = max(1, -(-total // n))
    msgs = []
    for v in range(n):
        for k, (rank, _, lcp) in enumerate(out[v]):
            msgs.append((v, rank // chunk, (rank % chunk, offs[v] + k + 1, lcp)))
    got = net.route(msgs, "sa:output")
    sa = [0] * total
    lcp_arr = [0] * total
    for u in range(n):
        for _, (idx, pos, lcp) in got[u]:
            sa[u * chunk + idx] = pos
            lcp_arr[u * chunk + idx] = lcp
    return SaLcpResult(sa, lcp_arr[:-1] if with_lcp else None,
                       ctx.top_lcpbar if with_lcp else None, ctx.levels,
                       net.ledger.rounds_charged - start)


def suffix_array(net: Network, S, check: bool = False, seed: int = 0) -> SaLcpResult:
    """Suffix array of ``S`` given as per-node pieces (LCP work skipped)."""
    return _run(net, S, False, check, seed)


def lcp_arrays(net: Network, S, check: bool = False, seed: int = 0) -> SaLcpResult:
    """Suffix array together with the adjacent-suffix LCP array."""
    return _run(net, S, True, check, seed)


def split_string(S, n: int, piece_len: int | None = None):
    S = list(S)
    if piece_len is None:
        piece_len = max(1, -(-len(S) // n))
    pieces = [S[v * piece_len:(v + 1) * piece_len] for v in range(n)]
    if sum(map(len, pieces)) != len(S):
        raise ValueError("piece_len too small for n nodes")
    return pieces
