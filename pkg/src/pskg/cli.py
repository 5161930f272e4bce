"""``pskg`` command line: gen, partition, analyze, compare, bound.

Exit status is 0 on success, 1 on a usage error, 2 on a runtime failure,
and 3 when ``compare`` finds the graphs differ.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import io as pio
from .analysis import (
    DEFAULT_THRESHOLDS,
    PATTERN_KINDS,
    PatternError,
    compare_patterns,
    graph_patterns,
)
from .initiator import MODELS, GraphSpec, InitiatorError, derive_marginals, parse_inline_initiator
from .initiator import parse_initiator
from .partition import compute_partition, imbalance_bound, uniform_partition
from .runner import run_generation

log = logging.getLogger("pskg")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_DIFFER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _echo_config(cmd: str, cfg: dict) -> None:
    print(f"config: {json.dumps({'command': cmd, **cfg}, sort_keys=True)}", file=sys.stderr)


def _load_initiator(args):
    if args.initiator_inline is not None:
        return parse_inline_initiator(args.initiator_inline)
    if args.initiator is None:
        raise UsageError("one of --initiator or --initiator-inline is required")
    path = Path(args.initiator)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read initiator file {path}: {exc.strerror or exc}") from None
    try:
        return parse_initiator(text)
    except InitiatorError as exc:
        raise InitiatorError(f"{path}: {exc}") from None


def _add_initiator_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--initiator", metavar="PATH", help="initiator matrix file")
    g.add_argument("--initiator-inline", metavar="ROWS",
                   help='inline initiator, rows split by ";", e.g. "0.45,0.26;0.26,0.02"')


def _write_bytes(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from None


def cmd_generate(args) -> int:
    P = _load_initiator(args)
    seed = args.seed if args.seed is not None else time.time_ns() & ((1 << 64) - 1)
    spec = GraphSpec(P, args.k, args.edges, seed=seed, model=args.model, workers=args.workers)
    _echo_config("gen", {**spec.fingerprint(), "workers": spec.workers, "balance": args.balance,
                         "format": args.format, "dedupe": args.dedupe,
                         "initiator": P.p.tolist()})
    t0 = time.perf_counter()
    g = run_generation(spec, balance=args.balance, processes=args.processes)
    if args.dedupe:
        g = g.dedupe()
    elapsed = time.perf_counter() - t0
    meta = {**spec.fingerprint(), "initiator": json.dumps(P.p.tolist())}
    _write_bytes(args.out, pio.write_edge_list(g, args.format, meta))
    print(f"edges: {len(g)}", file=sys.stderr)
    print(f"elapsed: {elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_partition(args) -> int:
    P = _load_initiator(args)
    if args.workers < 1:
        raise UsageError(f"--workers must be at least 1, got {args.workers}")
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    marg = derive_marginals(P)
    _echo_config("partition", {"k": args.k, "workers": args.workers, "balance": args.balance,
                               "initiator": P.p.tolist()})
    make = compute_partition if args.balance == "load" else uniform_partition
    table = make(marg, args.k, args.workers)
    _write_bytes(args.out, pio.write_partition_table(table))
    return EXIT_OK


def _parse_patterns(text: str) -> list[str]:
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in PATTERN_KINDS]
    if bad or not kinds:
        raise UsageError(f"unknown pattern(s) {bad}; valid names: {', '.join(PATTERN_KINDS)}")
    return kinds


def _read_graph(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read edge list {path}: {exc.strerror or exc}") from None
    try:
        return pio.read_edge_list(data)
    except pio.FormatError as exc:
        raise pio.FormatError(f"{path}: {exc}") from None


def _pattern_settings(args) -> dict:
    return {"direction": args.direction, "bin_ratio": args.bin_ratio, "max_h": args.max_hops,
            "hop_sources": args.hop_sources, "scree_m": args.top_m,
            "netvalue_m": args.netvalue_m, "seed": args.hop_seed}


def cmd_analyze(args) -> int:
    kinds = _parse_patterns(args.patterns)
    settings = _pattern_settings(args)
    _echo_config("analyze", {"in": args.input, "patterns": kinds, **settings})
    g = _read_graph(args.input)
    pats = graph_patterns(g, kinds, **settings)
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror or exc}") from None
    for kind, s in pats.items():
        _write_bytes(str(out / f"{kind}.csv"), pio.write_series_csv(s))
    print(f"wrote {len(pats)} pattern file(s) to {out}", file=sys.stderr)
    return EXIT_OK


def _parse_thresholds(text: str | None) -> dict[str, float]:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in PATTERN_KINDS:
            raise UsageError(f"bad threshold {item!r}; use kind=value with kinds {', '.join(PATTERN_KINDS)}")
        try:
            out[key] = float(val)
        except ValueError:
            raise UsageError(f"bad threshold value in {item!r}") from None
    return out


def _load_patterns(path: str, kinds, settings):
    p = Path(path)
    if p.is_dir():
        pats = {}
        for kind in kinds:
            f = p / f"{kind}.csv"
            if f.exists():
                pats[kind] = pio.read_series_csv(f.read_bytes(), kind)
        if not pats:
            raise FileNotFoundError(f"no pattern CSVs found in {p}")
        return pats
    return graph_patterns(_read_graph(path), kinds, **settings)


def cmd_compare(args) -> int:
    kinds = _parse_patterns(args.patterns)
    thresholds = {**DEFAULT_THRESHOLDS, **_parse_thresholds(args.thresholds)}
    settings = _pattern_settings(args)
    _echo_config("compare", {"a": args.a, "b": args.b, "patterns": kinds,
                             "thresholds": thresholds, **settings})
    pa = _load_patterns(args.a, kinds, settings)
    pb = _load_patterns(args.b, kinds, settings)
    shared = [k for k in kinds if k in pa and k in pb]
    report = compare_patterns({k: pa[k] for k in shared}, {k: pb[k] for k in shared}, thresholds)
    print("pattern\tdistance\tthreshold\tverdict")
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_DIFFER


def cmd_bound(args) -> int:
    _echo_config("bound", {"edges": args.edges, "workers": args.workers, "alpha": args.alpha})
    try:
        b = imbalance_bound(args.edges, args.workers, args.alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"per_worker_mean\t{b.per_worker_mean!r}")
    print(f"delta\t{b.delta!r}")
    print(f"upper\t{b.upper!r}")
    return EXIT_OK


def _add_pattern_flags(p, default_patterns=",".join(PATTERN_KINDS)):
    p.add_argument("--patterns", default=default_patterns,
                   help=f"comma-separated subset of {', '.join(PATTERN_KINDS)}")
    p.add_argument("--direction", choices=("out", "in", "total"), default="out")
    p.add_argument("--bin-ratio", type=float, default=2.0)
    p.add_argument("--max-hops", type=int, default=8)
    p.add_argument("--hop-sources", type=int, default=None,
                   help="sample this many BFS roots instead of all vertices")
    p.add_argument("--hop-seed", type=int, default=0, help="seed for sampled BFS roots")
    p.add_argument("--top-m", type=int, default=20, help="number of singular values")
    p.add_argument("--netvalue-m", type=int, default=100, help="number of eigenvector components")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pskg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a graph")
    _add_initiator_flags(p)
    p.add_argument("--model", choices=MODELS, default="pskg")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--edges", type=float, required=True)
    p.add_argument("--seed", type=int, default=None, help="default: derived from the clock")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--processes", type=int, default=None,
                   help="OS processes to run workers in (default: min(workers, CPUs))")
    p.add_argument("--balance", choices=("load", "uniform"), default="load")
    p.add_argument("--format", choices=pio.EDGE_FORMATS, default="tsv")
    p.add_argument("--dedupe", action="store_true", help="drop repeated edges")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("partition", help="compute the load-balanced vertex partition")
    _add_initiator_flags(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--workers", type=int, required=True)
    p.add_argument("--balance", choices=("load", "uniform"), default="load")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("analyze", help="write graph pattern CSVs")
    p.add_argument("--in", dest="input", required=True)
    _add_pattern_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="compare patterns of two graphs or analyze dirs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--thresholds", help='e.g. "degree=0.15,hop=0.1"')
    _add_pattern_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bound", help="max-load confidence bound")
    p.add_argument("--edges", type=float, required=True)
    p.add_argument("--workers", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pskg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InitiatorError, pio.FormatError, PatternError) as exc:
        print(f"pskg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"pskg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
