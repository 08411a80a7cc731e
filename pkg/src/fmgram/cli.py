"""Command-line entry point: build, query, audit, bench, serve.

Exit codes: 0 success; 2 build/usage errors (empty corpus, oversized
document, unreadable input); 3 missing or unreadable index; 4 invalid
query; 5 malformed benchmark file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .api import load_config, serve
from .builder import (DEFAULT_SHARD_BYTES, build_corpus)
from .contam import (DEFAULT_SAMPLE_CAP, audit_benchmark, emit_bulletin,
                     load_benchmark_jsonl)
from .engine import CorpusIndex, DEFAULT_MAX_DOCS
from .errors import (BadMagic, ChecksumMismatch, DocTooLarge, EmptyCorpus,
                     EmptyQuery, InvalidQuery, MalformedBenchmark,
                     ShardUnavailable, UnknownIndex, VersionMismatch)
from .fmcore import BUILD_STEPS, DEFAULT_ISA_RATE, DEFAULT_SA_RATE
from .ingest import read_documents

INDEX_ERRORS = (UnknownIndex, ShardUnavailable, BadMagic, VersionMismatch,
                ChecksumMismatch)
QUERY_ERRORS = (EmptyQuery, InvalidQuery)
BUILD_ERRORS = (EmptyCorpus, DocTooLarge, OSError, ValueError)

_SIZE_SUFFIXES = {"kib": 1 << 10, "mib": 1 << 20, "gib": 1 << 30}


def parse_size(text: str) -> int:
    """Parse a byte size: plain digits or a KiB/MiB/GiB suffix."""
    t = text.strip().lower()
    for suffix, mult in _SIZE_SUFFIXES.items():
        if t.endswith(suffix):
            return int(float(t[:-len(suffix)]) * mult)
    return int(t)


def _power_of_two(text: str) -> int:
    v = int(text)
    if v < 1 or v & (v - 1):
        raise argparse.ArgumentTypeError(f"{v} is not a power of two >= 1")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} is not a positive integer")
    return v


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmgram",
        description="Exact-match search over compressed full-text indexes.")
    parser.add_argument("--version", action="version",
                        version=f"fmgram {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a corpus index from JSONL files")
    p.add_argument("--input", nargs="+", required=True,
                   help="JSON Lines files with a 'text' field per line")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--name", default=None,
                   help="corpus name (default: output directory name)")
    p.add_argument("--sa-rate", type=_power_of_two, default=DEFAULT_SA_RATE)
    p.add_argument("--isa-rate", type=_power_of_two, default=DEFAULT_ISA_RATE)
    p.add_argument("--shard-bytes", type=parse_size,
                   default=DEFAULT_SHARD_BYTES,
                   help="target shard size (e.g. 16MiB; default 512MiB)")
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("count", help="count occurrences of a string")
    p.add_argument("--index", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--verify", action="store_true",
                   help="verify shard checksums while opening")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("search", help="retrieve documents containing a string")
    p.add_argument("--index", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--max-docs", type=_positive, default=DEFAULT_MAX_DOCS)
    p.add_argument("--verify", action="store_true")

    p = sub.add_parser("contam", help="audit a benchmark for contamination")
    p.add_argument("--index", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--field", default="text",
                   help="JSONL key holding the entry text (default: text)")
    p.add_argument("--cap", type=_positive, default=DEFAULT_SAMPLE_CAP)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True, help="bulletin output path")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("bench", help="measure query latency")
    p.add_argument("--index", required=True)
    p.add_argument("--query-lengths", type=_int_list, default=[1, 10, 100])
    p.add_argument("--context-lengths", type=_int_list, default=[10, 100])
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP query service")
    p.add_argument("--config", default=None,
                   help="JSON config path (default: $FMGRAM_CONFIG)")
    p.add_argument("--listen", default="127.0.0.1:8080")

    return parser


def cmd_index(args) -> int:
    def progress(rep):
        if not args.json:
            print(f"shard {rep.index}: {rep.docs} docs, "
                  f"{rep.text_bytes} bytes -> {rep.index_bytes} bytes")

    try:
        docs = read_documents(args.input)
        report = build_corpus(
            docs, args.out, name=args.name or Path(args.out).name,
            sa_rate=args.sa_rate, isa_rate=args.isa_rate,
            shard_bytes=args.shard_bytes, threads=args.threads,
            progress=progress)
    except BUILD_ERRORS as exc:
        print(f"index build failed: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps({
            "name": report.name,
            "shards": report.shard_count,
            "docs": report.doc_count,
            "corpus_bytes": report.total_text_bytes,
            "index_bytes": report.total_index_bytes,
            "ratio": report.ratio,
            "steps": {k: round(v, 4) for k, v in report.timings.items()},
        }, sort_keys=True))
        return 0
    for step in BUILD_STEPS:
        print(f"{step}: {report.timings.get(step, 0.0):.2f}s")
    print(f"shards: {report.shard_count}  docs: {report.doc_count}")
    print(f"index bytes: {report.total_index_bytes}  "
          f"corpus bytes: {report.total_text_bytes}")
    print(f"index/corpus size ratio: {report.ratio:.4f}")
    return 0


def cmd_count(args) -> int:
    try:
        with CorpusIndex.open(args.index, verify=args.verify) as ci:
            res = ci.count(args.query)
    except INDEX_ERRORS as exc:
        print(f"cannot open index: {exc}", file=sys.stderr)
        return 3
    except QUERY_ERRORS as exc:
        print(f"invalid query: {exc}", file=sys.stderr)
        return 4
    if args.json:
        print(json.dumps({"total": res.total, "per_shard": res.per_shard,
                          "latency_ms": round(res.latency_ms, 3)},
                         sort_keys=True))
    else:
        print(f"total: {res.total}")
        for i, c in enumerate(res.per_shard):
            print(f"shard {i}: {c}")
    return 0


def cmd_search(args) -> int:
    try:
        with CorpusIndex.open(args.index, verify=args.verify) as ci:
            res = ci.find_docs(args.query, max_docs=args.max_docs)
    except INDEX_ERRORS as exc:
        print(f"cannot open index: {exc}", file=sys.stderr)
        return 3
    except QUERY_ERRORS as exc:
        print(f"invalid query: {exc}", file=sys.stderr)
        return 4
    for hit in res.hits:
        print(json.dumps({
            "doc_id": hit.doc_id,
            "shard_id": hit.shard_id,
            "match_offset": hit.match_offset,
            "doc_text": hit.doc_text.decode("utf-8", errors="replace"),
            "metadata": hit.metadata,
        }, sort_keys=True, ensure_ascii=False))
    return 0


def cmd_contam(args) -> int:
    try:
        entries = load_benchmark_jsonl(args.benchmark, text_field=args.field)
    except (MalformedBenchmark, OSError) as exc:
        print(f"cannot load benchmark: {exc}", file=sys.stderr)
        return 5
    try:
        with CorpusIndex.open(args.index) as ci:
            report = audit_benchmark(ci, entries, sample_cap=args.cap,
                                     seed=args.seed)
    except INDEX_ERRORS as exc:
        print(f"cannot open index: {exc}", file=sys.stderr)
        return 3
    payload = emit_bulletin([report], args.report)
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"entries sampled: {report.sampled_size}")
        print(f"dirty rate: {report.dirty_rate:.4f}")
        print(f"suspicious rate: {report.suspicious_rate:.4f}")
        print(f"report written to {args.report}")
    return 0


def cmd_bench(args) -> int:
    try:
        with CorpusIndex.open(args.index) as ci:
            rep = ci.bench(args.query_lengths, args.context_lengths,
                           trials=args.trials, seed=args.seed)
    except INDEX_ERRORS as exc:
        print(f"cannot open index: {exc}", file=sys.stderr)
        return 3
    except EmptyCorpus as exc:
        print(f"bench failed: {exc}", file=sys.stderr)
        return 2
    except QUERY_ERRORS as exc:
        print(f"bench failed: {exc}", file=sys.stderr)
        return 4
    if args.json:
        print(json.dumps({
            "corpus": rep.corpus, "trials": rep.trials,
            "count_ms": {str(k): round(v, 4)
                         for k, v in rep.count_ms.items()},
            "reconstruct_ms": {str(k): round(v, 4)
                               for k, v in rep.reconstruct_ms.items()},
        }, sort_keys=True))
        return 0
    print(f"corpus: {rep.corpus}  trials: {rep.trials}")
    print("count latency (ms)")
    print(f"  {'|q|':>8}  {rep.corpus}")
    for qlen, ms in rep.count_ms.items():
        print(f"  {qlen:>8}  {ms:.4f}")
    print("reconstruct latency (ms)")
    print(f"  {'d':>8}  {rep.corpus}")
    for ctx, ms in rep.reconstruct_ms.items():
        print(f"  {ctx:>8}  {ms:.4f}")
    return 0


def cmd_serve(args) -> int:
    try:
        config = load_config(args.config)
        host, _, port = args.listen.rpartition(":")
        serve(config, host=host or "127.0.0.1", port=int(port))
    except (OSError, ValueError) as exc:
        print(f"cannot start service: {exc}", file=sys.stderr)
        return 2
    return 0


_COMMANDS = {
    "index": cmd_index,
    "count": cmd_count,
    "search": cmd_search,
    "contam": cmd_contam,
    "bench": cmd_bench,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
