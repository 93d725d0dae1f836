"""Synchronous Congested Clique simulator with round and load accounting.

Every communication step of the algorithms goes through a :class:`Network`.
Local computation is free; what is charged is routing, and each routing
invocation is validated against the per-node load cap ``c_L * n`` and the
per-word bit budget ``c_w * ceil(log2 n)`` before anything is delivered.

Two routing backends exist.  ``abstract`` treats Lenzen's scheme as a black
box and charges ``ceil(max_load / n) + 2`` rounds.  ``explicit`` actually
schedules every word through a two-hop greedy relay, one raw round at a
time, and refuses any round in which an ordered pair carries more than
``c_m`` words.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import (
    AuxBudgetExceeded,
    BandwidthExceeded,
    DescriptorTooLarge,
    IndexOutOfRange,
    LoadExceeded,
    TargetOverloaded,
    Unresolvable,
    WordOverflow,
)

GEN_ROUTE_ROUNDS = 4
AUX_ROUND_FACTOR = 2
# queries are constant-size, so any size class fits; this one keeps the
# sampled candidates lighter than the queries they stand for
QUERY_SORT_EPS = Fraction(2, 3)
BACKENDS = ("abstract", "explicit")


def ceil_pow(n: int, x) -> int:
    """Return ``ceil(n ** x)``.

    Rational exponents are resolved exactly, so perfect powers never drift
    up by one through floating point error.  Float exponents (the suffix
    array schedule) use a tolerance of 1e-9.
    """
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        if x <= 0:
            return 1
        p, q = x.numerator, x.denominator
        target = n ** p
        m = max(1, int(round(target ** (1.0 / q))))
        while m ** q < target:
            m += 1
        while m > 1 and (m - 1) ** q >= target:
            m -= 1
        return m
    v = math.exp(float(x) * math.log(n))
    return max(1, math.ceil(v - 1e-9))


def log2_ceil(n: int) -> int:
    return max(1, (n - 1).bit_length())


@dataclass(frozen=True)
class SimConfig:
    n_nodes: int
    word_bits_factor: int = 4
    load_factor: int = 8
    words_per_pair_per_round: int = 1
    aux_factor: int = 4
    routing_backend: str = "abstract"
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("n_nodes must be at least 2")
        for name in ("word_bits_factor", "load_factor",
                     "words_per_pair_per_round", "aux_factor"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.routing_backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.routing_backend!r}")

    @property
    def n(self) -> int:
        return self.n_nodes

    @property
    def load_cap(self) -> int:
        return self.load_factor * self.n_nodes

    @property
    def word_limit(self) -> int:
        return 1 << (self.word_bits_factor * log2_ceil(self.n_nodes))

    @property
    def aux_cap(self) -> int:
        return self.aux_factor * self.n_nodes


@dataclass
class Invocation:
    primitive: str
    label: str
    rounds: int
    max_send: int
    max_recv: int


@dataclass
class RoundLedger:
    rounds_charged: int = 0
    raw_rounds: int = 0
    per_round_pair_counts: dict = field(default_factory=dict)
    max_send_load: int = 0
    max_recv_load: int = 0
    aux_nodes_peak: int = 0
    comparisons: int = 0
    invocations: list = field(default_factory=list)

    def record(self, inv: Invocation):
        self.invocations.append(inv)
        self.rounds_charged += inv.rounds
        self.max_send_load = max(self.max_send_load, inv.max_send)
        self.max_recv_load = max(self.max_recv_load, inv.max_recv)

    def rounds_by_primitive(self) -> dict:
        out = Counter()
        for inv in self.invocations:
            out[inv.primitive] += inv.rounds
        return dict(out)

    def summary(self) -> dict:
        return {
            "rounds": self.rounds_charged,
            "max_send": self.max_send_load,
            "max_recv": self.max_recv_load,
            "aux_peak": self.aux_nodes_peak,
            "comparisons": self.comparisons,
        }


@dataclass
class DistributedArray:
    """One logical array cut into per-node pieces, concatenated in node order."""

    pieces: list

    @classmethod
    def from_list(cls, values: Sequence[int], n: int, piece_len: int | None = None):
        values = list(values)
        if piece_len is None:
            piece_len = max(1, -(-len(values) // n))
        pieces = [values[i * piece_len:(i + 1) * piece_len] for i in range(n)]
        if sum(len(p) for p in pieces) != len(values):
            raise ValueError("piece_len too small to hold the array on n nodes")
        return cls(pieces)

    @property
    def total_len(self) -> int:
        return sum(len(p) for p in self.pieces)

    def offsets(self) -> list:
        out, acc = [], 0
        for p in self.pieces:
            out.append(acc)
            acc += len(p)
        return out

    def to_list(self) -> list:
        return [x for p in self.pieces for x in p]


@dataclass(frozen=True)
class Query:
    resolving_node: int
    content: int


class Network:
    """A (possibly auxiliary-extended) clique of ``size`` simulated nodes."""

    def __init__(self, config: SimConfig, ledger: RoundLedger | None = None,
                 size: int | None = None, aux_base: int = 0):
        self.config = config
        self.n = config.n_nodes
        self.size = size if size is not None else config.n_nodes
        self.ledger = ledger if ledger is not None else RoundLedger()
        self.aux_base = aux_base
        self._touched = None
        self._virtual = self.size != self.n
        self.ledger.aux_nodes_peak = max(self.ledger.aux_nodes_peak, aux_base)

    # -- validation helpers -------------------------------------------------

    @property
    def cap(self) -> int:
        return self.config.load_cap

    def check_words(self, words):
        limit = self.config.word_limit
        for w in words:
            if w < 0 or w >= limit:
                raise WordOverflow(w, limit)

    def check_array(self, arr: DistributedArray):
        if len(arr.pieces) != self.n:
            raise ValueError("array must have one piece per real node")
        for v, p in enumerate(arr.pieces):
            if len(p) > self.cap:
                raise LoadExceeded(v, "storage", len(p), self.cap)

    def _touch(self, *nodes):
        if self._touched is not None:
            self._touched.update(nodes)

    # -- routing --------------------------------------------------------------

    def route(self, messages, label: str = "route"):
        """Deliver ``(src, dst, payload)`` triples; return per-node inboxes.

        Inbox entries are ``(src, payload)`` ordered by source node, then by
        the message's position among that source's messages.  Messages with
        ``src == dst`` are local moves: delivered, but not charged.
        """
        size = self.size
        inbox = [[] for _ in range(size)]
        send = [0] * size
        recv = [0] * size
        normalized = []
        remote = False
        for idx, (src, dst, payload) in enumerate(messages):
            payload = tuple(payload)
            self.check_words(payload)
            if not (0 <= src < size and 0 <= dst < size):
                raise IndexOutOfRange(f"node id out of range: {src}->{dst}")
            if src != dst:
                send[src] += len(payload)
                recv[dst] += len(payload)
                remote = True
            normalized.append((src, idx, dst, payload))
        cap = self.cap
        for v in range(size):
            if send[v] > cap:
                raise LoadExceeded(v, "send", send[v], cap)
            if recv[v] > cap:
                raise LoadExceeded(v, "receive", recv[v], cap)
        normalized.sort(key=lambda m: (m[0], m[1]))
        for src, _, dst, payload in normalized:
            inbox[dst].append((src, payload))
            if src != dst:
                self._touch(src, dst)
        max_send, max_recv = max(send, default=0), max(recv, default=0)
        if not remote:
            rounds = 0
        elif self.config.routing_backend == "abstract":
            rounds = -(-max(max_send, max_recv) // self.n) + 2
        else:
            rounds = self._explicit_schedule(normalized)
        self.ledger.record(Invocation("route", label, rounds, max_send, max_recv))
        return inbox

    def _explicit_schedule(self, normalized) -> int:
        """Two-hop greedy relay; returns the number of raw rounds used.

        Each word picks the intermediate that keeps the larger of its two hop
        counters smallest.  Hops where the intermediate coincides with an
        endpoint are local and free.
        """
        size = self.size
        c_m = self.config.words_per_pair_per_round
        hop1 = Counter()
        hop2 = Counter()
        words = []
        for src, _, dst, payload in normalized:
            if src != dst:
                words.extend((src, dst) for _ in payload)
        words.sort()
        for src, dst in words:
            best, best_key = None, None
            for i in range(size):
                a = 0 if i == src else hop1[src, i] + 1
                b = 0 if i == dst else hop2[i, dst] + 1
                key = (max(a, b), a + b, (i - src - dst) % size)
                if best_key is None or key < best_key:
                    best, best_key = i, key
            if best != src:
                hop1[src, best] += 1
            if best != dst:
                hop2[best, dst] += 1
        total = 0
        for hop in (hop1, hop2):
            remaining = dict(hop)
            while remaining:
                rnd = self.ledger.raw_rounds + total
                counts = {}
                for pair in list(remaining):
                    k = min(c_m, remaining[pair])
                    counts[pair] = k
                    remaining[pair] -= k
                    if remaining[pair] == 0:
                        del remaining[pair]
                for (s, d), k in counts.items():
                    if k > c_m:
                        raise BandwidthExceeded(rnd, s, d, k, c_m)
                    if not self._virtual:
                        self.ledger.per_round_pair_counts[rnd, s, d] = k
                total += 1
        self.ledger.raw_rounds += total
        return total

    def gen_route(self, senders, label: str = "gen_route"):
        """Range-addressed delivery.

        ``senders[v]`` lists ``(payload, lo, hi)``: the payload goes to every
        node in ``lo..hi`` inclusive.  A node may be the target of at most
        ``c_L * n`` words; a sender's descriptor (payload plus the two range
        words) must itself fit in ``c_L * n`` words.
        """
        size = self.size
        cap = self.cap
        recv = [0] * size
        any_msg = False
        max_desc = 0
        diff = [0] * (size + 1)
        for v, entries in enumerate(senders):
            desc = 0
            for payload, lo, hi in entries:
                if not (0 <= lo <= hi < size):
                    raise IndexOutOfRange(f"bad range {lo}..{hi}")
                self.check_words(payload)
                desc += len(payload) + 2
                diff[lo] += len(payload)
                diff[hi + 1] -= len(payload)
                any_msg = True
            if desc > cap:
                raise DescriptorTooLarge(v, desc, cap)
            max_desc = max(max_desc, desc)
        acc = 0
        for u in range(size):
            acc += diff[u]
            recv[u] = acc
            if acc > cap:
                raise TargetOverloaded(u, acc, cap)
        inbox = [[] for _ in range(size)]
        for v, entries in enumerate(senders):
            for payload, lo, hi in entries:
                payload = tuple(payload)
                for u in range(lo, hi + 1):
                    inbox[u].append((v, payload))
                if self._touched is not None:
                    self._touched.add(v)
                    self._touched.update(range(lo, hi + 1))
        rounds = GEN_ROUTE_ROUNDS if any_msg else 0
        self.ledger.record(
            Invocation("gen_route", label, rounds, max_desc, max(recv, default=0)))
        return inbox

    def broadcast(self, per_node_payloads, label="broadcast", lo=0, hi=None):
        """Every node sends its payload (possibly empty) to nodes ``lo..hi``."""
        hi = self.size - 1 if hi is None else hi
        senders = [[] for _ in range(self.size)]
        for v, payload in per_node_payloads.items() if isinstance(
                per_node_payloads, dict) else enumerate(per_node_payloads):
            if payload:
                senders[v].append((payload, lo, hi))
        inbox = self.gen_route(senders, label)
        return inbox

    def fetch_following(self, pieces, width: int, label="fetch_following"):
        """Give every node the ``width`` array entries that follow its piece.

        Each entry is shipped backwards to the consecutive range of nodes whose
        piece ends within ``width`` positions before it.
        """
        n = len(pieces)
        ends = []
        acc = 0
        starts = []
        for p in pieces:
            starts.append(acc)
            acc += len(p)
            ends.append(acc - 1)
        senders = [[] for _ in range(self.size)]
        if width > 0:
            for u in range(n):
                for k, val in enumerate(pieces[u]):
                    j = starts[u] + k
                    lo = bisect.bisect_left(ends, j - width, 0, u)
                    hi = bisect.bisect_left(ends, j, 0, u) - 1
                    if lo > hi:
                        break
                    senders[u].append(((val,), lo, hi))
        inbox = self.gen_route(senders, label)
        out = []
        for v in range(n):
            out.append([p[0] for _, p in inbox[v]])
        return out

    # -- composition ------------------------------------------------------------

    def _fork(self) -> "Network":
        child = Network(self.config, RoundLedger(), self.size, self.aux_base)
        child._virtual = self._virtual
        child.ledger.raw_rounds = self.ledger.raw_rounds
        child._touched = set()
        return child

    def parallel(self, branches: Sequence[Callable[["Network"], object]]):
        """Run branches on disjoint node sets concurrently.

        The parent is charged the maximum of the branches' rounds.
        """
        if not branches:
            return []
        results, forks = [], []
        for fn in branches:
            sub = self._fork()
            results.append(fn(sub))
            forks.append(sub)
        seen = set()
        for sub in forks:
            if seen & sub._touched:
                raise ValueError("parallel branches touched overlapping nodes")
            seen |= sub._touched
        if self._touched is not None:
            self._touched |= seen
        led = self.ledger
        base = led.raw_rounds
        led.rounds_charged += max(s.ledger.rounds_charged for s in forks)
        led.raw_rounds = max(s.ledger.raw_rounds for s in forks)
        for sub in forks:
            sl = sub.ledger
            led.invocations.extend(sl.invocations)
            led.max_send_load = max(led.max_send_load, sl.max_send_load)
            led.max_recv_load = max(led.max_recv_load, sl.max_recv_load)
            led.aux_nodes_peak = max(led.aux_nodes_peak, sl.aux_nodes_peak)
            led.comparisons += sl.comparisons
            led.per_round_pair_counts.update(sl.per_round_pair_counts)
        assert led.raw_rounds >= base
        return results

    def with_aux_nodes(self, k: int, body: Callable[["Network"], object]):
        """Run ``body`` on this clique extended by ``k`` auxiliary nodes.

        Auxiliary ids are ``size .. size + k - 1``.  Each round of the body is
        charged twice on this network's ledger; nesting compounds the factor.
        """
        total_aux = self.aux_base + k
        if total_aux > self.config.aux_cap:
            raise AuxBudgetExceeded(total_aux, self.config.aux_cap)
        child = Network(self.config, RoundLedger(), self.size + k, total_aux)
        child._virtual = self._virtual or k > 0
        result = body(child)
        cl = child.ledger
        led = self.ledger
        factor = AUX_ROUND_FACTOR if k > 0 else 1
        charged = factor * cl.rounds_charged
        led.invocations.append(
            Invocation("aux", f"aux[{k}]", charged, cl.max_send_load, cl.max_recv_load))
        led.rounds_charged += charged
        led.max_send_load = max(led.max_send_load, cl.max_send_load)
        led.max_recv_load = max(led.max_recv_load, cl.max_recv_load)
        led.aux_nodes_peak = max(led.aux_nodes_peak, cl.aux_nodes_peak)
        led.comparisons += cl.comparisons
        if self._touched is not None:
            self._touched.update(range(self.size))
        return result

    # -- query routing ------------------------------------------------------

    def query_route(self, queries, states, resolve, label="query_route"):
        """Answer one-word queries at their resolving nodes.

        ``queries[v]`` is a list of :class:`Query` (or ``(node, content)``
        pairs) issued by node ``v``; ``states[u]`` is the resolvable state
        held by node ``u``; ``resolve(state, content)`` produces the one-word
        answer.  Returns answers positionally aligned with ``queries``.

        The queries are sorted by resolving node, run boundaries are
        broadcast, every resolver with ``s`` queries is copied onto
        ``ceil(s / n)`` auxiliary nodes, and each copy answers at most ``n``
        queries.
        """
        from .objsort import ObjectRecord, sort_group

        n = self.n
        assert self.size == n, "query_route runs on the real clique"
        qs = [[q if isinstance(q, Query) else Query(*q) for q in qv] for qv in queries]
        for v, qv in enumerate(qs):
            if len(qv) > self.cap:
                raise LoadExceeded(v, "queries", len(qv), self.cap)
            for q in qv:
                if not 0 <= q.resolving_node < n:
                    raise Unresolvable(q, "no such node")
        for u, st in enumerate(states):
            if len(st) > self.cap:
                raise LoadExceeded(u, "state", len(st), self.cap)
        answers = [[None] * len(qv) for qv in qs]

        holdings = {v: [ObjectRecord((q.resolving_node, q.content), v, i)
                        for i, q in enumerate(qs[v])] for v in range(n)}
        sorted_hold = sort_group(self, holdings, list(range(n)), QUERY_SORT_EPS)

        counts = self.broadcast([(len(sorted_hold[v]),) for v in range(n)],
                                label=label + ":counts")
        per = [0] * n
        for src, (c,) in counts[0]:
            per[src] = c
        bases = [sum(per[:v]) for v in range(n)]
        # run ends: the last global rank of each resolver inside each node
        senders = [[] for _ in range(n)]
        for v in range(n):
            objs = sorted_hold[v]
            for k, o in enumerate(objs):
                if k + 1 == len(objs) or objs[k + 1].payload[0] != o.payload[0]:
                    senders[v].append(((bases[v] + k, o.payload[0]), 0, n - 1))
        bnd = self.gen_route(senders, label + ":boundaries")
        # every node now derives the same run table; take node 0's view
        last_rank = {}
        for _, (r, res) in bnd[0]:
            last_rank[res] = max(last_rank.get(res, -1), r)
        first_rank, s = {}, {}
        prev = -1
        for res in sorted(last_rank):
            first_rank[res] = prev + 1
            s[res] = last_rank[res] - prev
            prev = last_rank[res]
        copies = {res: -(-s[res] // n) for res in sorted(s)}
        copy_base, acc = {}, 0
        for res in sorted(copies):
            copy_base[res] = n + acc
            acc += copies[res]
        k_aux = acc
        # the holder of each sorted query remembers where it sent it
        plan = {v: [] for v in range(n)}
        for v in range(n):
            for k, o in enumerate(sorted_hold[v]):
                res = o.payload[0]
                j = bases[v] + k - first_rank[res]
                plan[v].append(copy_base[res] + j // n)

        def body(aux: Network):
            gs = [[] for _ in range(aux.size)]
            for res in sorted(copies):
                lo = copy_base[res]
                gs[res].append((tuple(states[res]), lo, lo + copies[res] - 1))
            copied = aux.gen_route(gs, label + ":copy_state")
            state_of = {}
            for res in sorted(copies):
                for c in range(copies[res]):
                    node = copy_base[res] + c
                    state_of[node] = copied[node][0][1] if copied[node] else ()
            msgs = []
            for v in range(n):
                for k, o in enumerate(sorted_hold[v]):
                    msgs.append((v, plan[v][k], (o.payload[1],)))
            fan = aux.route(msgs, label + ":fan_out")
            back = []
            for node in range(n, aux.size):
                for src, (content,) in fan[node]:
                    try:
                        ans = resolve(state_of[node], content)
                    except (IndexError, KeyError, ValueError) as exc:
                        raise Unresolvable(content, str(exc)) from exc
                    back.append((node, src, (ans,)))
            return aux.route(back, label + ":answers")

        replies = self.with_aux_nodes(k_aux, body)
        # each holder matches replies in send order per copy
        ret = []
        for v in range(n):
            per_copy = {}
            for src, (ans,) in replies[v]:
                per_copy.setdefault(src, []).append(ans)
            cursor = Counter()
            for k, o in enumerate(sorted_hold[v]):
                c = plan[v][k]
                ans = per_copy[c][cursor[c]]
                cursor[c] += 1
                ret.append((v, o.origin_node, (ans,)))
        home = self.route(ret, label + ":home")
        # origins receive answers ordered by the global query order
        for v in range(n):
            order = sorted(range(len(qs[v])),
                           key=lambda i: (qs[v][i].resolving_node, qs[v][i].content, i))
            got = [p[0] for _, p in home[v]]
            assert len(got) == len(order)
            for i, ans in zip(order, got):
                answers[v][i] = ans
        return answers

    # -- distributed range minimum --------------------------------------------

    def distributed_rmq(self, array: DistributedArray, queries, label="rmq"):
        """Answer 1-based inclusive range-minimum queries over ``array``."""
        n = self.n
        self.check_array(array)
        cap = self.cap
        info = self.broadcast([(len(p), min(p) if p else 0) for p in array.pieces],
                              label=label + ":lengths_minima")
        lens = [0] * n
        mins = [None] * n
        for src, p in info[0]:
            lens[src], mins[src] = p[0], (p[1] if p[0] else None)
        offs, acc = [], 0
        for ln in lens:
            offs.append(acc)
            acc += ln
        total = acc
        starts = [offs[v] + 1 for v in range(n)]

        def holder(i):
            v = bisect.bisect_right(starts, i) - 1
            while lens[v] == 0:
                v -= 1
            return v

        subq = [[] for _ in range(n)]
        plans = [[] for _ in range(n)]
        for v, qv in enumerate(queries):
            for (i, j) in qv:
                if not (1 <= i <= j <= total):
                    raise IndexOutOfRange(f"RMQ ({i},{j}) outside 1..{total}")
                a, b = holder(i), holder(j)
                parts = []
                if a == b:
                    parts.append(len(subq[v]))
                    subq[v].append(Query(a, (i - 1 - offs[a]) * cap + (j - 1 - offs[a])))
                    mid = None
                else:
                    parts.append(len(subq[v]))
                    subq[v].append(Query(a, (i - 1 - offs[a]) * cap + lens[a] - 1))
                    parts.append(len(subq[v]))
                    subq[v].append(Query(b, 0 * cap + (j - 1 - offs[b])))
                    mids = [mins[u] for u in range(a + 1, b) if lens[u]]
                    mid = min(mids) if mids else None
                plans[v].append((parts, mid))

        def resolve(state, content):
            lo, hi = divmod(content, cap)
            if hi >= len(state) or lo > hi:
                raise IndexError("range outside local piece")
            return min(state[lo:hi + 1])

        ans = self.query_route(subq, array.pieces, resolve, label=label + ":edges")
        out = []
        for v in range(n):
            res = []
            for parts, mid in plans[v]:
                vals = [ans[v][k] for k in parts]
                if mid is not None:
                    vals.append(mid)
                res.append(min(vals))
            out.append(res)
        return out
