"""Sorting objects of up to ``ceil(n^(1-eps))`` words on the clique.

The protocol is a sample sort.  Every node marks *candidates* at regular
prefix-mass intervals of its locally sorted objects, a handful of candidates
become *delimiters*, and objects are shipped to the bucket that the
delimiters place them in.  Groups of more than ``ceil(n^(eps/2))`` nodes
first sort their candidates recursively on a prefix of the group and then
sort every bucket recursively on its own sub-group.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Callable, Optional

from .errors import LoadExceeded, SizeClassViolation
from .netsim import Network, ceil_pow


@dataclass(frozen=True)
class ObjectRecord:
    payload: tuple
    origin_node: int
    origin_index: int

    @property
    def words(self) -> int:
        return len(self.payload) + 2


def default_key(rec: ObjectRecord):
    return (rec.payload, rec.origin_node, rec.origin_index)


@dataclass(frozen=True)
class PartitionSpec:
    """Consecutive index sets ``x[boundaries[j]:boundaries[j+1]]``."""

    boundaries: tuple

    @property
    def k(self) -> int:
        return len(self.boundaries) - 1

    def slices(self):
        b = self.boundaries
        return [range(b[j], b[j + 1]) for j in range(self.k)]

    def owner_of(self, i: int) -> int:
        return bisect.bisect_right(self.boundaries, i, 0, self.k) - 1


@dataclass(frozen=True)
class DelimiterSet:
    delimiters: tuple
    group_count: int


def greedy_partition(x, k: int, x_max: int | None = None) -> PartitionSpec:
    """Cut ``x`` into ``k`` consecutive sets with sums at most ``X/k + x_max``.

    Sets ``1..k-1`` are closed as soon as their sum reaches ``X/k``; the last
    set takes whatever remains.  Trailing sets may be empty.
    """
    if k < 1:
        raise ValueError("k must be positive")
    x = list(x)
    if x_max is not None and any(v > x_max for v in x):
        raise ValueError("some x_i exceeds x_max")
    total = sum(x)
    bounds = [0]
    acc = 0
    for i, v in enumerate(x):
        if len(bounds) == k:
            break
        acc += v
        if acc * k >= total:
            bounds.append(i + 1)
            acc = 0
    while len(bounds) < k:
        bounds.append(len(x))
    bounds.append(len(x))
    return PartitionSpec(tuple(bounds))


def group_sizes(m: int, g: int) -> list:
    """Split ``m`` consecutive nodes into ``g`` groups of near-equal size."""
    q, r = divmod(m, g)
    return [q + 1 if j < r else q for j in range(g)]


# -- wire format ----------------------------------------------------------------

def encode(rec: ObjectRecord) -> tuple:
    """One object per message: origin node, origin index, then the payload."""
    return (rec.origin_node, rec.origin_index) + tuple(rec.payload)


def decode(words) -> ObjectRecord:
    return ObjectRecord(tuple(words[2:]), words[0], words[1])


def _candidates(objs, thr: int):
    """Indices of the first objects whose preceding mass reaches each
    multiple ``i * thr``, i >= 1."""
    out = []
    pre = 0
    nxt = thr
    for k, o in enumerate(objs):
        if pre >= nxt:
            out.append(k)
            nxt = (pre // thr + 1) * thr
        pre += o.words
    return out


def as_exponent(eps) -> Fraction:
    """Exact rational for ``eps``; floats are snapped to a small denominator."""
    if isinstance(eps, float):
        return Fraction(eps).limit_denominator(1000)
    return Fraction(eps)


def _check_consecutive(nodes):
    if list(nodes) != list(range(nodes[0], nodes[0] + len(nodes))):
        raise ValueError("node groups must be consecutive ranges")


def _check_mass(node, objs, cap):
    mass = sum(o.words for o in objs)
    if mass > cap:
        raise LoadExceeded(node, "bucket", mass, cap)


def _split(objs, delims, keyf):
    """Bucket j gets objects above delimiter j-1 and at most delimiter j."""
    dkeys = [keyf(d) for d in delims]
    buckets = [[] for _ in range(len(delims) + 1)]
    for o in objs:
        buckets[bisect.bisect_left(dkeys, keyf(o))].append(o)
    return buckets


def sort_group(net: Network, holdings: dict, nodes, eps, key: Optional[Callable] = None):
    """Redistribute the objects held by ``nodes`` into sorted node order.

    ``holdings`` maps node id to a list of :class:`ObjectRecord`.  Returns a
    new mapping for the same nodes in which every object on an earlier node
    is no larger than any object on a later node, and each node's list is
    sorted.
    """
    keyf = key or default_key
    nodes = list(nodes)
    if not nodes:
        return {}
    if len(nodes) == 1:
        v = nodes[0]
        return {v: sorted(holdings.get(v, []), key=keyf)}
    _check_consecutive(nodes)
    n = net.n
    eps = as_exponent(eps)
    g = ceil_pow(n, eps / 2)
    thr = ceil_pow(n, 1 - eps / 2)
    local = {v: sorted(holdings.get(v, []), key=keyf) for v in nodes}
    if len(nodes) <= max(g, 1):
        return _flat(net, local, nodes, thr, keyf)
    return _recursive(net, local, nodes, g, thr, eps, key, keyf)


def _flat(net, local, nodes, thr, keyf):
    cap = net.cap
    lo, hi = nodes[0], nodes[-1]
    senders = [[] for _ in range(net.size)]
    for v in nodes:
        for k in _candidates(local[v], thr):
            senders[v].append((encode(local[v][k]), lo, hi))
    inbox = net.gen_route(senders, "objsort:candidates")
    # every node of the group sees the same candidate set; use the first
    cands = sorted((decode(p) for _, p in inbox[lo]), key=keyf)
    step = -(-len(cands) // len(nodes)) if cands else 0
    delims = []
    if step:
        delims = [cands[r - 1] for r in range(step, len(cands) + 1, step)][:len(nodes) - 1]
    msgs = []
    for v in nodes:
        for j, bucket in enumerate(_split(local[v], delims, keyf)):
            for o in bucket:
                msgs.append((v, nodes[j], encode(o)))
    inbox = net.route(msgs, "objsort:buckets")
    out = {}
    for v in nodes:
        objs = [decode(p) for _, p in inbox[v]]
        _check_mass(v, objs, cap)
        out[v] = sorted(objs, key=keyf)
    return out


def _recursive(net, local, nodes, g, thr, eps, key, keyf):
    cap = net.cap
    lo, hi = nodes[0], nodes[-1]
    m = -(-len(nodes) // g)
    cand_nodes = nodes[:m]

    # candidates of the i-th node go to the (i // g)-th node
    msgs = []
    for i, v in enumerate(nodes):
        for k in _candidates(local[v], thr):
            msgs.append((v, nodes[i // g], encode(local[v][k])))
    inbox = net.route(msgs, "objsort:gather_candidates")
    cand_hold = {u: [decode(p) for _, p in inbox[u]] for u in cand_nodes}
    cand_sorted = sort_group(net, cand_hold, cand_nodes, eps, key)

    counts = net.broadcast({u: (len(cand_sorted[u]),) for u in cand_nodes},
                           label="objsort:candidate_counts", lo=lo, hi=hi)
    per = {src: p[0] for src, p in counts[lo]}
    total = sum(per.values())
    step = -(-total // g) if total else 0
    senders = [[] for _ in range(net.size)]
    base = 0
    for u in cand_nodes:
        c = per.get(u, 0)
        for k in range(c):
            r = base + k + 1
            if step and r % step == 0 and r // step <= g - 1:
                senders[u].append((encode(cand_sorted[u][k]), lo, hi))
        base += c
    inbox = net.gen_route(senders, "objsort:delimiters")
    delims = sorted((decode(p) for _, p in inbox[lo]), key=keyf)

    sizes = group_sizes(len(nodes), g)
    groups, at = [], 0
    for s in sizes:
        groups.append(nodes[at:at + s])
        at += s
    groups = [w for w in groups if w]
    buckets = {}
    for v in nodes:
        bk = _split(local[v], delims, keyf)
        buckets[v] = bk + [[] for _ in range(len(groups) - len(bk))]

    # sizes to group leaders, leaders answer with a target per sender
    msgs = []
    for v in nodes:
        for j, w in enumerate(groups):
            mass = sum(o.words for o in buckets[v][j])
            if mass:
                msgs.append((v, w[0], (j, mass)))
    inbox = net.route(msgs, "objsort:bucket_sizes")
    replies = []
    for j, w in enumerate(groups):
        xs = [0] * len(nodes)
        for src, (jj, mass) in inbox[w[0]]:
            if jj == j:
                xs[src - lo] = mass
        part = greedy_partition(xs, len(w), max(xs))
        for i, mass in enumerate(xs):
            if mass:
                replies.append((w[0], nodes[i], (j, part.owner_of(i))))
    inbox = net.route(replies, "objsort:bucket_targets")
    msgs = []
    for v in nodes:
        for _, (j, t) in inbox[v]:
            for o in buckets[v][j]:
                msgs.append((v, groups[j][t], encode(o)))
    inbox = net.route(msgs, "objsort:ship")
    received = {}
    for j, w in enumerate(groups):
        for u in w:
            objs = [decode(p) for _, p in inbox[u]]
            _check_mass(u, objs, cap)
            received[u] = objs

    def branch(w):
        return lambda sub: sort_group(sub, {u: received[u] for u in w}, w, eps, key)

    out = {}
    for res in net.parallel([branch(w) for w in groups]):
        out.update(res)
    return out


def assign_ranks(net: Network, sorted_hold: dict, nodes=None, key_equal=None):
    """Deliver distinct-smaller ranks of sorted objects to their origins.

    Returns ``{origin_node: {origin_index: rank}}``.  Equal payloads share a
    rank; ``key_equal`` overrides payload equality.
    """
    eq = key_equal or (lambda a, b: a.payload == b.payload)
    nodes = list(range(net.n)) if nodes is None else list(nodes)
    lo, hi = nodes[0], nodes[-1]
    # every node learns which nodes are nonempty
    cnt = net.broadcast({v: (len(sorted_hold.get(v, [])),) for v in nodes},
                        label="ranks:counts", lo=lo, hi=hi)
    nonempty = [src for src, p in cnt[lo] if p[0]]
    msgs = []
    for a, b in zip(nonempty, nonempty[1:]):
        msgs.append((a, b, encode(sorted_hold[a][-1])))
    inbox = net.route(msgs, "ranks:predecessor")
    distinct = {}
    first_new = {}
    for v in nonempty:
        objs = sorted_hold[v]
        prev = decode(inbox[v][0][1]) if inbox[v] else None
        d = 0
        flags = []
        for o in objs:
            new = prev is None or not eq(prev, o)
            flags.append(new)
            d += new
            prev = o
        distinct[v] = d
        first_new[v] = flags
    dc = net.broadcast({v: (distinct[v],) for v in nonempty},
                       label="ranks:distinct_counts", lo=lo, hi=hi)
    before = {}
    acc = 0
    seen = dict((src, p[0]) for src, p in dc[lo])
    for v in nodes:
        before[v] = acc
        acc += seen.get(v, 0)
    msgs = []
    for v in nonempty:
        r = before[v] - 1
        for o, new in zip(sorted_hold[v], first_new[v]):
            r += new
            msgs.append((v, o.origin_node, (o.origin_index, r)))
    inbox = net.route(msgs, "ranks:home")
    out = {v: {} for v in range(net.n)}
    for v in range(net.n):
        for _, (idx, r) in inbox[v]:
            out[v][idx] = r
    return out


def solve_object_sort(net: Network, objects, eps, key=None, max_object_words=None,
                      key_equal=None):
    """Rank every object of ``objects[v]`` (lists of word tuples).

    Returns per-node rank lists aligned with the input.  ``eps == 0`` runs
    the sorting-network backend instead of the sample sort.
    """
    n = net.n
    eps = as_exponent(eps)
    if not 0 <= eps <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    limit = ceil_pow(n, 1 - eps)
    if max_object_words is not None:
        limit = min(limit, max_object_words)
    for v, objs in enumerate(objects):
        for o in objs:
            if len(o) > limit:
                raise SizeClassViolation(
                    f"object of {len(o)} words on node {v} exceeds class limit {limit}")
        if sum(len(o) + 2 for o in objs) > net.cap:
            raise LoadExceeded(v, "storage", sum(len(o) + 2 for o in objs), net.cap)
    if eps == 0:
        from .netsort import network_sort
        return network_sort(net, objects)
    holdings = {v: [ObjectRecord(tuple(o), v, i) for i, o in enumerate(objects[v])]
                for v in range(n)}
    sorted_hold = sort_group(net, holdings, range(n), eps, key)
    ranks = assign_ranks(net, sorted_hold, key_equal=key_equal)
    return [[ranks[v][i] for i in range(len(objects[v]))] for v in range(n)]


def key_from_cmp(cmp):
    """Sort key for records ordered by ``cmp`` on payloads, then by origin."""
    k = cmp_to_key(cmp)
    return lambda rec: (k(rec.payload), rec.origin_node, rec.origin_index)
