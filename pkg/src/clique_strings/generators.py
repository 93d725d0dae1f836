"""Deterministic input generators for experiments and tests.

Every generator draws from its own Philox stream keyed by ``(seed, stream)``,
so adding a generator never shifts the output of another.  Sizes are given
as a word budget; ``budget(n, density)`` turns a density into one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .netsim import ceil_pow
from .objsort import as_exponent

STREAMS = {
    "objects": 1,
    "strings": 2,
    "pm": 3,
    "sa": 4,
    "netsort": 5,
}

KINDS = {
    "objsort": ("uniform", "near-duplicate"),
    "netsort": ("uniform", "near-duplicate"),
    "strsort": ("uniform", "periodic", "near-duplicate"),
    "sa": ("uniform", "periodic"),
    "pm": ("short", "long", "periodic", "planted"),
}


def rng_for(seed: int, stream: str | int) -> np.random.Generator:
    key = STREAMS.get(stream, stream)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, key])))


def budget(n: int, density: float, load_factor: int = 8) -> int:
    """Total words for a run filling ``density`` of ``load_factor * n^2``."""
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    return int(density * load_factor * n * n)


def _ints(rng, lo, hi, size):
    """Uniform integers in ``[lo, hi]`` as a Python list."""
    return [int(x) for x in rng.integers(lo, hi + 1, size=size)]


def _fill(rng, words: int, max_len: int, alphabet: int, lo: int = 1) -> list:
    out, used = [], 0
    while used < words:
        ln = min(int(rng.integers(1, max_len + 1)), words - used)
        out.append(tuple(_ints(rng, lo, lo + alphabet - 1, ln)))
        used += ln
    return out


def _spread(items, n: int, weight=len) -> list:
    """Deal ``items`` to nodes in order, keeping per-node weight near even."""
    total = sum(weight(x) for x in items)
    per = -(-total // n) if total else 0
    out = [[] for _ in range(n)]
    v, acc = 0, 0
    for x in items:
        if acc >= per and v < n - 1:
            v, acc = v + 1, 0
        out[v].append(x)
        acc += weight(x)
    return out


def period_of(s) -> int:
    """Smallest ``p`` with ``s[i] == s[i + p]`` for all valid ``i``."""
    s = list(s)
    for p in range(1, len(s) + 1):
        if all(s[i] == s[i + p] for i in range(len(s) - p)):
            return p
    return len(s)


# -- objects ---------------------------------------------------------------------

@dataclass
class ObjectInput:
    objects: list           # per node, list of word tuples
    kind: str


def gen_objects(n: int, seed: int, words: int, eps=None, kind: str = "uniform",
                max_len: int | None = None, alphabet: int = 4) -> ObjectInput:
    """Objects totalling ``words`` payload words, dealt evenly over the nodes.

    Lengths are uniform in ``[1, max_len]``; by default ``max_len`` is the
    size class limit for ``eps`` (``n // 2`` when ``eps`` is 0 or None).
    Values start at 0.
    """
    rng = rng_for(seed, "objects")
    if max_len is None:
        e = as_exponent(eps) if eps is not None else 0
        max_len = ceil_pow(n, 1 - e) if e > 0 else max(1, n // 2)
    if kind == "uniform":
        items = _fill(rng, words, max_len, alphabet, lo=0)
    elif kind == "near-duplicate":
        base = _fill(rng, max(1, words // 8), max_len, alphabet, lo=0)
        items, used = [], 0
        while used < words:
            b = base[int(rng.integers(len(base)))]
            b = b[:words - used]
            if rng.random() < 0.25:
                k = int(rng.integers(len(b)))
                b = b[:k] + (int(b[k]) + 1,) + b[k + 1:]
            items.append(b)
            used += len(b)
    else:
        raise ValueError(f"unknown object generator {kind!r}")
    order = rng.permutation(len(items))
    items = [items[i] for i in order]
    return ObjectInput(_spread(items, n), kind)


# -- strings ---------------------------------------------------------------------

@dataclass
class StringInput:
    strings: list
    kind: str
    period: int | None = None


def gen_strings(n: int, seed: int, chars: int, kind: str = "uniform",
                max_len: int | None = None, alphabet: int = 4) -> StringInput:
    """Strings totalling ``chars`` characters (values ``1..alphabet``).

    Lengths are uniform in ``[1, max_len]`` (default ``n``).  The first
    string always has length ``min(max_len, chars)`` so the longest string
    does not depend on luck.
    """
    rng = rng_for(seed, "strings")
    max_len = max_len or n
    first = min(max_len, chars)
    if kind == "uniform":
        items = [tuple(_ints(rng, 1, alphabet, first))]
        items += _fill(rng, chars - first, max_len, alphabet)
        return StringInput(items, kind)
    if kind == "periodic":
        q = int(rng.integers(1, 4))
        base = _ints(rng, 1, alphabet, q)
        items, used = [], 0
        while used < chars:
            ln = first if not items else min(int(rng.integers(1, max_len + 1)), chars - used)
            items.append(tuple(base[i % q] for i in range(ln)))
            used += ln
        return StringInput(items, kind, period_of(base * 2))
    if kind == "near-duplicate":
        proto = _ints(rng, 1, alphabet, first)
        items, used = [], 0
        while used < chars:
            ln = first if not items else min(int(rng.integers(1, max_len + 1)), chars - used)
            s = proto[:ln]
            if items and rng.random() < 0.5:
                k = int(rng.integers(ln))
                s = s[:k] + [s[k] % alphabet + 1] + s[k + 1:]
            items.append(tuple(s))
            used += ln
        return StringInput(items, kind)
    raise ValueError(f"unknown string generator {kind!r}")


def gen_sa_string(n: int, seed: int, chars: int, kind: str = "uniform",
                  alphabet: int = 4) -> StringInput:
    rng = rng_for(seed, "sa")
    if kind == "uniform":
        return StringInput([tuple(_ints(rng, 1, alphabet, chars))], kind)
    if kind == "periodic":
        q = int(rng.integers(1, 6))
        base = _ints(rng, 1, alphabet, q)
        s = tuple(base[i % q] for i in range(chars))
        return StringInput([s], kind, period_of(s))
    raise ValueError(f"unknown suffix array generator {kind!r}")


# -- pattern matching ------------------------------------------------------------------

@dataclass
class PMCase:
    P: tuple
    T: tuple
    kind: str
    period: int | None = None
    plants: list = field(default_factory=list)


def gen_pm(n: int, seed: int, chars: int, kind: str = "short", alphabet: int = 2) -> PMCase:
    """Pattern and text with ``|P| + |T| = chars``.

    ``short`` has ``|P| <= n``; the other kinds have ``n < |P| <= |T|``, which
    needs ``chars > 2n``.  ``periodic`` repeats one short block in both
    strings with a few flipped characters in the text; ``planted`` copies the
    pattern into a random text at recorded offsets.
    """
    rng = rng_for(seed, "pm")
    if kind == "short":
        m = int(rng.integers(1, min(n, chars - 1) + 1))
        P = tuple(_ints(rng, 1, alphabet, m))
        T = tuple(_ints(rng, 1, alphabet, chars - m))
        return PMCase(P, T, kind)
    if chars < 2 * n + 2:
        raise ValueError("long patterns need more than 2n characters")
    m = int(rng.integers(n + 1, chars // 2 + 1))
    if kind == "long":
        P = tuple(_ints(rng, 1, alphabet, m))
        T = tuple(_ints(rng, 1, alphabet, chars - m))
        return PMCase(P, T, kind)
    if kind == "periodic":
        q = int(rng.integers(1, 4))
        base = _ints(rng, 1, alphabet, q)
        P = tuple(base[i % q] for i in range(m))
        T = [base[i % q] for i in range(chars - m)]
        for _ in range(int(rng.integers(0, 4))):
            k = int(rng.integers(len(T)))
            T[k] = T[k] % alphabet + 1
        return PMCase(P, tuple(T), kind, period_of(P))
    if kind == "planted":
        P = tuple(_ints(rng, 1, alphabet, m))
        T = _ints(rng, 1, alphabet, chars - m)
        plants, at = [], 0
        while True:
            gap = int(rng.integers(0, m + 1))
            if at + gap + m > len(T):
                break
            at += gap
            T[at:at + m] = P
            plants.append(at)
            at += m
        return PMCase(P, tuple(T), kind, plants=plants)
    raise ValueError(f"unknown pattern matching generator {kind!r}")
