"""Sorting Θ(n)-word objects by simulating a comparator network.

The network is Batcher's bitonic sorter in its all-ascending form: every
comparator puts the smaller value on the lower wire.  Padding wires
beyond ``N`` would carry +inf and never move, so comparators touching them
are dropped and the remaining levels are exactly those of the padded
network restricted to real wires.

Objects never move permanently.  Each one carries a *wire label*; per level
the two objects of every comparator are shipped to an auxiliary node, which
compares them and tells both holders whether to swap labels.  After the
last level the label of an object is its position in sorted order.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from itertools import product

from .netsim import Network


@dataclass(frozen=True)
class SortingNetwork:
    N: int
    levels: tuple

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def size(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def apply(self, values):
        vals = list(values)
        for lv in self.levels:
            for a, b in lv:
                if vals[b] < vals[a]:
                    vals[a], vals[b] = vals[b], vals[a]
        return vals


def build_network(N: int) -> SortingNetwork:
    if N < 1:
        raise ValueError("N must be positive")
    p = 1
    while p < N:
        p *= 2
    levels = []
    k = 2
    while k <= p:
        j = k // 2
        first = True
        while j >= 1:
            lv = []
            for i in range(p):
                if first:
                    blk = i - i % k
                    partner = blk + (k - 1 - (i - blk))
                    if i % k < k // 2:
                        lv.append((i, partner))
                else:
                    if i % (2 * j) < j:
                        lv.append((i, i + j))
            lv = tuple((a, b) for a, b in lv if b < N)
            if lv:
                levels.append(lv)
            first = False
            j //= 2
        k *= 2
    return SortingNetwork(N, tuple(levels))


def sorts_all_binary(net: SortingNetwork) -> bool:
    """Exhaustive 0-1 principle check (use for small ``N`` only)."""
    for bits in product((0, 1), repeat=net.N):
        out = net.apply(bits)
        if any(out[i] > out[i + 1] for i in range(net.N - 1)):
            return False
    return True


def _comparator_level(net: Network, objs, wire_of, level, N, decide):
    """Run one level of comparators on auxiliary nodes.

    ``objs[v][i]`` is the i-th object of node v; ``wire_of[v][i]`` its wire
    label.  ``decide(lo_obj, hi_obj)`` returns a value in {0, 1} reported
    back to both holders.  Returns ``{(v, i): answer}`` for every object on a
    comparator.
    """
    from .objsort import greedy_partition

    n = net.n
    chunk = -(-N // n)
    comp_of_wire = {}
    for c, (a, b) in enumerate(level):
        comp_of_wire[a] = c
        comp_of_wire[b] = c
    # holders report wire and size to the comparator's responsible node
    msgs = []
    for v in range(n):
        for i, w in enumerate(wire_of[v]):
            if w in comp_of_wire:
                msgs.append((v, comp_of_wire[w] // chunk, (w, len(objs[v][i]) + 2)))
    inbox = net.route(msgs, "netsort:report")
    info = {}
    load = [0] * n
    for u in range(n):
        for src, (w, sz) in inbox[u]:
            info[w] = (src, sz)
            load[u] += sz
    a_cnt = [-(-load[u] // n) for u in range(n)]
    bc = net.broadcast([(a_cnt[u],) for u in range(n)], label="netsort:aux_counts")
    a_seen = [0] * n
    for src, (k,) in bc[0]:
        a_seen[src] = k
    aux_base, acc = [], n
    for u in range(n):
        aux_base.append(acc)
        acc += a_seen[u]
    k_aux = acc - n
    # responsible nodes spread their comparators over their aux nodes
    replies = []
    for u in range(n):
        mine = [c for c in range(u * chunk, min((u + 1) * chunk, len(level)))]
        if not mine:
            continue
        sizes = [info[level[c][0]][1] + info[level[c][1]][1] for c in mine]
        part = greedy_partition(sizes, a_seen[u], max(sizes))
        for pos, c in enumerate(mine):
            t = aux_base[u] + part.owner_of(pos)
            for w in level[c]:
                replies.append((u, info[w][0], (w, t - n)))
    inbox = net.route(replies, "netsort:assign")
    where = {}
    for v in range(n):
        for _, (w, t) in inbox[v]:
            where[w] = t + n
    holder = {}
    for v in range(n):
        for i, w in enumerate(wire_of[v]):
            if w in comp_of_wire:
                holder[w] = (v, i)

    def body(aux: Network):
        ship = []
        for v in range(n):
            for i, w in enumerate(wire_of[v]):
                if w in comp_of_wire:
                    ship.append((v, where[w], (w, len(objs[v][i])) + tuple(objs[v][i])))
        got = aux.route(ship, "netsort:ship")
        back = []
        for node in range(n, aux.size):
            by_wire = {}
            for src, p in got[node]:
                by_wire[p[0]] = (src, tuple(p[2:2 + p[1]]))
            for w in sorted(by_wire):
                c = comp_of_wire[w]
                a, b = level[c]
                if w != a:
                    continue
                ans = decide(by_wire[a][1], by_wire[b][1])
                aux.ledger.comparisons += 1
                back.append((node, by_wire[a][0], (a, ans)))
                back.append((node, by_wire[b][0], (b, ans)))
        return aux.route(back, "netsort:verdict")

    verdicts = net.with_aux_nodes(k_aux, body)
    out = {}
    for v in range(n):
        for _, (w, ans) in verdicts[v]:
            out[holder[w]] = ans
    return out


def network_sort(net: Network, objects, key=None, level_rounds: list | None = None):
    """Rank objects (word tuples, one wire each) by simulating the network.

    Ties are broken by (origin node, origin index), as in the sample sort;
    the reported rank counts distinct smaller payloads.  If ``level_rounds``
    is a list, the rounds charged by each comparator level (including the
    two duplicate-detection levels) are appended to it.
    """
    n = net.n
    key = key or (lambda payload: payload)
    counts = net.broadcast([(len(objects[v]),) if objects[v] else () for v in range(n)],
                           label="netsort:counts")
    per = [0] * n
    for src, (c,) in counts[0]:
        per[src] = c
    N = sum(per)
    if N == 0:
        return [[] for _ in range(n)]
    off = [sum(per[:v]) for v in range(n)]
    wire_of = [[off[v] + i for i in range(per[v])] for v in range(n)]
    # the tiebreak rides along as two leading words
    objs = [[(v, i) + tuple(o) for i, o in enumerate(objects[v])] for v in range(n)]
    network = build_network(N)

    def swap(lo_obj, hi_obj):
        ka = (key(lo_obj[2:]), lo_obj[0], lo_obj[1])
        kb = (key(hi_obj[2:]), hi_obj[0], hi_obj[1])
        return 1 if kb < ka else 0

    def timed(level, decide):
        before = net.ledger.rounds_charged
        res = _comparator_level(net, objs, wire_of, level, N, decide)
        if level_rounds is not None:
            level_rounds.append(net.ledger.rounds_charged - before)
        return res

    for level in network.levels:
        res = timed(level, swap)
        pair = {}
        for a, b in level:
            pair[a], pair[b] = b, a
        for (v, i), ans in res.items():
            if ans:
                wire_of[v][i] = pair[wire_of[v][i]]

    # adjacent equal payloads share a rank
    def same(lo_obj, hi_obj):
        return 1 if key(lo_obj[2:]) == key(hi_obj[2:]) else 0

    dup_wires = []
    for parity in (0, 1):
        level = tuple((w, w + 1) for w in range(parity, N - 1, 2))
        if not level:
            continue
        res = timed(level, same)
        for (v, i), ans in res.items():
            w = wire_of[v][i]
            if ans and w % 2 != parity:
                dup_wires.append((v, w))
    senders = [[] for _ in range(n)]
    for v, w in sorted(dup_wires):
        senders[v].append(((w,), 0, n - 1))
    inbox = net.gen_route(senders, "netsort:duplicates")
    ranks = []
    for v in range(n):
        dups = sorted(p[0] for _, p in inbox[v])
        ranks.append([w - bisect.bisect_right(dups, w) for w in wire_of[v]])
    return ranks
