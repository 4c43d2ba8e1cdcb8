"""Command line front end.

Subcommands: validate, generate, shuffle, analyze, oracle, compare. Traces
are read from a file path, from `-` (stdin), or from `builtin:<name>`.

Exit codes: 0 no races, 1 races found, 2 invalid input or usage.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from . import fastracer, fasttrack, oracle, workload
from .trace import (InvalidTraceError, ParseError, Trace, parse_trace, relinearize,
                    validate_trace, write_trace)


@dataclass
class Config:
    detector: str = "fastracer"
    threshold: int = 8
    cache_capacity: int = 4
    dedup: bool = False
    paper_strict: bool = False
    strict_validate: bool = False
    size_cap: int = 500

    def racer_options(self) -> fastracer.RacerOptions:
        return fastracer.RacerOptions(threshold=self.threshold,
                                      cache_capacity=self.cache_capacity,
                                      paper_strict=self.paper_strict)


def load_trace(spec: str) -> Trace:
    if spec.startswith("builtin:"):
        return workload.builtin(spec[len("builtin:"):])
    if spec == "-":
        return parse_trace(sys.stdin.read())
    with open(spec, "r", encoding="utf-8") as f:
        return parse_trace(f.read())


def _write_out(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _cmd_validate(args) -> int:
    trace = load_trace(args.trace)
    errors = validate_trace(trace, strict=args.strict)
    if not errors:
        print(f"OK events={len(trace.events)}")
        return 0
    for e in errors:
        print(f"INVALID line={e.position} reason={e.reason.value} {e.message}")
    return 2


def _cmd_generate(args) -> int:
    params = workload.GenParams(
        seed=args.seed, max_depth=args.max_depth, max_fanout=args.max_fanout,
        n_vars=args.n_vars, n_locks=args.n_locks, n_accesses=args.n_accesses,
        lock_prob=args.lock_prob, write_prob=args.write_prob,
        max_tasks=args.max_tasks, hot_frac=args.hot_frac)
    _write_out(args.out, write_trace(workload.generate(params)))
    return 0


def _cmd_shuffle(args) -> int:
    trace = load_trace(args.trace)
    _write_out(args.out, write_trace(relinearize(trace, args.seed)))
    return 0


def _cmd_analyze(args) -> int:
    cfg = Config(detector=args.detector, threshold=args.threshold,
                 cache_capacity=args.cache, dedup=args.dedup,
                 paper_strict=args.paper_strict, strict_validate=args.strict_validate)
    trace = load_trace(args.trace)
    if cfg.strict_validate:
        errors = validate_trace(trace, strict=True)
        if errors:
            raise InvalidTraceError(errors)
    if cfg.detector == "fastracer":
        result = fastracer.analyze_trace(trace, cfg.racer_options())
    else:
        result = fasttrack.ft_analyze(trace)
    for line in result.format_lines(dedup=cfg.dedup):
        print(line)
    if args.stats:
        for name in sorted(result.counters):
            print(f"STAT {name}={result.counters[name]}")
    return 1 if result.racy_vars else 0


def _cmd_oracle(args) -> int:
    cfg = Config(size_cap=args.max_events)
    trace = load_trace(args.trace)
    pairs = oracle.apparent_races(trace, max_events=cfg.size_cap)
    for p in pairs:
        print(f"PAIR var={p.a.var} a={p.a.task}@line{p.a.line} "
              f"b={p.b.task}@line{p.b.line} kinds={p.kinds}")
    racy = ",".join(str(v) for v in sorted({p.a.var for p in pairs}))
    print(f"SUMMARY pairs={len(pairs)} racy_vars={racy}")
    return 1 if pairs else 0


def _cmd_compare(args) -> int:
    cfg = Config(size_cap=args.max_events)
    trace = load_trace(args.trace)
    fr = fastracer.analyze_trace(trace, cfg.racer_options())
    ft = fasttrack.ft_analyze(trace)
    orc = oracle.apparent_racy_vars(trace, max_events=cfg.size_cap)

    def fmt(vars_: set[int]) -> str:
        return ",".join(str(v) for v in sorted(vars_))

    print(f"FASTRACER racy_vars={fmt(fr.racy_vars)}")
    print(f"FASTTRACK racy_vars={fmt(ft.racy_vars)}")
    print(f"ORACLE racy_vars={fmt(orc)}")
    if fr.racy_vars == orc:
        print("AGREE")
    else:
        print(f"DISAGREE fastracer_only={fmt(fr.racy_vars - orc)} "
              f"oracle_only={fmt(orc - fr.racy_vars)}")
    return 1 if orc else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskrace",
        description="Race detection over async-finish task traces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check trace well-formedness")
    p.add_argument("--trace", required=True)
    p.add_argument("--strict", action="store_true",
                   help="also require every task joined by end of trace")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("generate", help="emit a random well-formed trace")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--max-fanout", type=int, default=3)
    p.add_argument("--n-vars", type=int, default=8)
    p.add_argument("--n-locks", type=int, default=2)
    p.add_argument("--n-accesses", type=int, default=20)
    p.add_argument("--lock-prob", type=float, default=0.3)
    p.add_argument("--write-prob", type=float, default=0.4)
    p.add_argument("--max-tasks", type=int, default=12)
    p.add_argument("--hot-frac", type=float, default=0.2)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("shuffle", help="relinearize a trace under a seed")
    p.add_argument("--trace", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_shuffle)

    p = sub.add_parser("analyze", help="run a detector over a trace")
    p.add_argument("--detector", choices=("fastracer", "fasttrack"), default="fastracer")
    p.add_argument("--trace", required=True)
    p.add_argument("--threshold", type=int, default=8)
    p.add_argument("--cache", type=int, default=4)
    p.add_argument("--dedup", action="store_true",
                   help="one report per (var, task pair, kind)")
    p.add_argument("--paper-strict", action="store_true",
                   help="do not record read metadata for racy reads")
    p.add_argument("--strict-validate", action="store_true")
    p.add_argument("--stats", action="store_true", help="print counters")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("oracle", help="brute-force apparent race pairs")
    p.add_argument("--trace", required=True)
    p.add_argument("--max-events", type=int, default=500)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("compare", help="run both detectors and the oracle")
    p.add_argument("--trace", required=True)
    p.add_argument("--max-events", type=int, default=500)
    p.set_defaults(func=_cmd_compare)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (ParseError, InvalidTraceError, workload.UnknownBuiltinError,
            oracle.SizeLimitError, ValueError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
