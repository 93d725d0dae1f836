"""Batch experiment runner: generate inputs, run on the simulator, verify,
and report rounds and loads as CSV."""

from __future__ import annotations

import argparse
import csv
import io
import os
import struct
import sys
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from . import generators as gen
from .errors import LedgerViolation
from .netsim import BACKENDS, Network, SimConfig
from .objsort import solve_object_sort
from .oracle import naive_pm, naive_sa_lcp, naive_string_sort

PROBLEMS = ("objsort", "strsort", "pm", "sa", "netsort")
CSV_FIELDS = ("problem", "n", "seed", "rounds", "max_send", "max_recv", "aux_peak",
              "comparisons", "verified", "wall_ms")
CL_ENV = "CLIQUE_STRINGS_CL"

# fractions of c_L * n^2 that every pipeline handles within its load caps
DEFAULT_DENSITY = {
    "objsort": 1 / 16,
    "strsort": 1 / 16,
    "pm": 1 / 16,
    "sa": 1 / 64,
    "netsort": 1 / 64,
}

EXIT_OK, EXIT_VERIFY, EXIT_LEDGER, EXIT_IO = 0, 2, 3, 4


@dataclass(frozen=True)
class ExperimentSpec:
    problem: str
    n: int
    seed: int = 0
    epsilon: Fraction = Fraction(2, 3)
    input_path: str | None = None
    density: float | None = None
    verify: bool = False
    backend: str = "abstract"
    kind: str | None = None

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.n < 8 or self.n > 1024 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two in [8, 1024]")
        if self.density is not None and not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def effective_density(self) -> float:
        return self.density if self.density is not None else DEFAULT_DENSITY[self.problem]

    @property
    def effective_kind(self) -> str:
        return self.kind or gen.KINDS[self.problem][0]


@dataclass
class RunReport:
    problem: str
    n: int
    seed: int
    rounds_charged: int
    max_send_load: int
    max_recv_load: int
    aux_nodes_peak: int
    comparisons: int
    verified: bool
    wall_ms: float
    error: str | None = None
    mismatch: str | None = None

    def row(self) -> dict:
        return {
            "problem": self.problem, "n": self.n, "seed": self.seed,
            "rounds": self.rounds_charged, "max_send": self.max_send_load,
            "max_recv": self.max_recv_load, "aux_peak": self.aux_nodes_peak,
            "comparisons": self.comparisons,
            "verified": "true" if self.verified else "false",
            "wall_ms": f"{self.wall_ms:.1f}",
        }


def load_factor() -> int:
    raw = os.environ.get(CL_ENV)
    if raw is None:
        return 8
    value = int(raw)
    if value < 1:
        raise ValueError(f"{CL_ENV} must be a positive integer")
    return value


# -- file formats ---------------------------------------------------------------------

def write_strings(path, strings):
    with open(path, "wb") as fh:
        for s in strings:
            fh.write(bytes(s) + b"\n")


def read_strings(path) -> list:
    data = Path(path).read_bytes()
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    out = []
    for ln in lines:
        if not ln or 0 in ln:
            raise ValueError("strings must be non-empty with bytes in 1..255")
        out.append(tuple(ln))
    return out


def write_objects(path, objects):
    flat = [o for node in objects for o in node]
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(flat)))
        for o in flat:
            fh.write(struct.pack(f"<Q{len(o)}Q", len(o), *o))


def read_objects(path) -> list:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise ValueError("object file too short")
    (count,), at = struct.unpack_from("<Q", data), 8
    out = []
    for _ in range(count):
        (ln,) = struct.unpack_from("<Q", data, at)
        at += 8
        out.append(struct.unpack_from(f"<{ln}Q", data, at))
        at += 8 * ln
    if at != len(data):
        raise ValueError("trailing bytes in object file")
    return out


def write_pm(path, P, T):
    write_strings(path, [P, T])


def read_pm(path):
    lines = read_strings(path)
    if len(lines) != 2:
        raise ValueError("pattern file needs exactly two lines: P then T")
    return lines[0], lines[1]


def emit_input(spec: ExperimentSpec, path, cl: int = 8):
    """Write the generated input of ``spec`` in its file format."""
    data = generate(spec, cl)
    if spec.problem in ("objsort", "netsort"):
        write_objects(path, data)
    elif spec.problem == "pm":
        write_pm(path, data.P, data.T)
    else:
        write_strings(path, data.strings)


# -- running ------------------------------------------------------------------------------

def generate(spec: ExperimentSpec, cl: int = 8):
    n = spec.n
    words = gen.budget(n, spec.effective_density, cl)
    kind = spec.effective_kind
    if spec.problem == "objsort":
        return gen.gen_objects(n, spec.seed, words, spec.epsilon, kind).objects
    if spec.problem == "netsort":
        return gen.gen_objects(n, spec.seed, words, 0, kind).objects
    if spec.problem == "strsort":
        return gen.gen_strings(n, spec.seed, words, kind)
    if spec.problem == "sa":
        return gen.gen_sa_string(n, spec.seed, words, kind)
    return gen.gen_pm(n, spec.seed, words, kind)


def _load(spec: ExperimentSpec):
    path = spec.input_path
    if spec.problem in ("objsort", "netsort"):
        return gen._spread(read_objects(path), spec.n)
    if spec.problem == "pm":
        P, T = read_pm(path)
        return gen.PMCase(P, T, "file")
    strings = read_strings(path)
    if spec.problem == "sa":
        strings = strings[:1]
    return gen.StringInput(strings, "file")


def _first_diff(got, want) -> str | None:
    if got == want:
        return None
    if len(got) != len(want):
        return f"length {len(got)} != expected {len(want)}"
    i = next(k for k, (a, b) in enumerate(zip(got, want)) if a != b)
    return f"index {i}: got {got[i]}, expected {want[i]}"


def _execute(spec: ExperimentSpec, net: Network, data) -> str | None:
    """Run the pipeline and describe the first disagreement with the oracle,
    or return None (always None when verification is off)."""
    from .netsort import network_sort
    from .patmatch import PMInput, pm
    from .sacon import lcp_arrays, split_string
    from .strsort import StringSet, string_sort

    n = spec.n
    if spec.problem in ("objsort", "netsort"):
        if spec.problem == "objsort":
            ranks = solve_object_sort(net, data, spec.epsilon)
        else:
            ranks = network_sort(net, data)
        if not spec.verify:
            return None
        got = [r for rs in ranks for r in rs]
        return _first_diff(got, naive_string_sort([o for node in data for o in node]))
    if spec.problem == "strsort":
        res = string_sort(net, StringSet.from_strings(data.strings, n))
        return _first_diff(res.flat(), naive_string_sort(data.strings)) if spec.verify else None
    if spec.problem == "sa":
        S = data.strings[0]
        res = lcp_arrays(net, split_string(S, n))
        if not spec.verify:
            return None
        sa, lcp = naive_sa_lcp(S)
        if diff := _first_diff(res.sa, sa):
            return f"SA {diff}"
        if diff := _first_diff(res.lcp, lcp):
            return f"LCP {diff}"
        return None
    res = pm(net, PMInput.from_strings(data.P, data.T, n))
    if not spec.verify:
        return None
    got, want = res.offsets(), naive_pm(data.P, data.T)
    if got != want:
        return (f"offsets missing {sorted(want - got)[:5]}, "
                f"spurious {sorted(got - want)[:5]}")
    if not set(data.plants) <= got:
        return f"planted offsets missing {sorted(set(data.plants) - got)[:5]}"
    return None


def run(spec: ExperimentSpec, cl: int | None = None) -> RunReport:
    cl = load_factor() if cl is None else cl
    data = _load(spec) if spec.input_path else generate(spec, cl)
    net = Network(SimConfig(spec.n, load_factor=cl, routing_backend=spec.backend,
                            seed=spec.seed))
    start = time.perf_counter()
    error = None
    mismatch = None
    try:
        mismatch = _execute(spec, net, data)
    except LedgerViolation as exc:
        error = f"ledger: {exc}"
    wall = (time.perf_counter() - start) * 1000
    led = net.ledger
    return RunReport(spec.problem, spec.n, spec.seed, led.rounds_charged, led.max_send_load,
                     led.max_recv_load, led.aux_nodes_peak, led.comparisons,
                     bool(spec.verify and mismatch is None and error is None), wall, error,
                     mismatch)


def sweep(template: ExperimentSpec, problems, n_list, seeds, cl: int | None = None):
    """Cross product of runs in (problem, n, seed) order."""
    return [run(replace(template, problem=p, n=n, seed=s), cl)
            for p in problems for n in n_list for s in seeds]


def write_csv(reports, fh, header: bool = True):
    w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    if header:
        w.writeheader()
    for r in reports:
        w.writerow(r.row())


# -- command line -------------------------------------------------------------------------

def _int_list(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clique-strings", description=__doc__)
    ap.add_argument("--problem", required=True,
                    help="one of %s, or a comma-separated list" % ", ".join(PROBLEMS))
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epsilon", type=Fraction, default=Fraction(2, 3),
                    help="size-class exponent for objsort, e.g. 2/3")
    ap.add_argument("--density", type=float, default=None,
                    help="fraction of c_L*n^2 words to generate")
    ap.add_argument("--kind", default=None, help="input generator variant")
    ap.add_argument("--input", default=None, help="read the input from this file")
    ap.add_argument("--emit-input", default=None, metavar="PATH",
                    help="write the generated input to PATH and exit")
    ap.add_argument("--backend", choices=sorted(BACKENDS), default="abstract")
    ap.add_argument("--verify", action="store_true")
    ap.add_argument("--csv", default=None, metavar="PATH", help="append rows to PATH")
    ap.add_argument("--sweep-n", type=_int_list, default=None)
    ap.add_argument("--seeds", type=_int_list, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    problems = [p.strip() for p in args.problem.split(",")]
    try:
        cl = load_factor()
        template = ExperimentSpec(problems[0], args.n, args.seed, args.epsilon, args.input,
                                  args.density, args.verify, args.backend, args.kind)
        for p in problems[1:]:
            replace(template, problem=p)
        if args.emit_input:
            emit_input(template, args.emit_input, cl)
            return EXIT_OK
        n_list = args.sweep_n or [args.n]
        seeds = args.seeds or [args.seed]
        reports = sweep(template, problems, n_list, seeds, cl)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if args.input or args.emit_input else EXIT_VERIFY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    buf = io.StringIO()
    write_csv(reports, buf)
    sys.stdout.write(buf.getvalue())
    if args.csv:
        try:
            path = Path(args.csv)
            fresh = not path.exists() or path.stat().st_size == 0
            with open(path, "a", newline="") as fh:
                write_csv(reports, fh, header=fresh)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    for r in reports:
        for msg in (r.error, r.mismatch):
            if msg:
                print(f"{r.problem} n={r.n} seed={r.seed}: {msg}", file=sys.stderr)
    if any(r.error for r in reports):
        return EXIT_LEDGER
    if args.verify and not all(r.verified for r in reports):
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
