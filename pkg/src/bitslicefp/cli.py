"""``bfp`` command line: gen, verify, bench, transpose.

Exit codes: 0 success, 1 verification mismatch, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bench import append_csv, run_bench
from .config import ConfigError, FormatConfig, generate, load_config, resolve_lane_width
from .format import FormatSpec, Rounding, pack_many, read_bfpraw
from .oracle import write_mismatch_csv
from .verify import EXHAUSTIVE_MAX_BITS, exhaustive_check, ieee32_check, random_check

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2

ALL_OPS = ("add", "sub", "mul", "div")


class UsageError(Exception):
    pass


def _load(path: str) -> FormatConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    return load_config(text, source=path)


def _ops(arg: str) -> tuple[str, ...]:
    return ALL_OPS if arg == "all" else (arg,)


def _modes(arg: str) -> tuple[Rounding, ...]:
    return (Rounding.RZ, Rounding.RN) if arg == "both" else (Rounding(arg),)


def _width(args, cfg: FormatConfig) -> int:
    try:
        return resolve_lane_width(getattr(args, "lane_width", None), cfg.lane_width)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_gen(args) -> int:
    cfg = _load(args.config)
    try:
        manifest = generate(cfg.spec, args.out, _width(args, cfg))
    except OSError as exc:
        raise UsageError(f"cannot write to {args.out}: {exc.strerror}") from None
    print(f"wrote {Path(args.out) / 'manifest.json'} ({len(manifest['entry_points'])} entry points)")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load(args.config)
    spec = cfg.spec
    width = _width(args, cfg)
    if args.exhaustive and spec.total_bits > EXHAUSTIVE_MAX_BITS:
        raise UsageError(
            f"{spec} has {spec.total_bits}-bit encodings; exhaustive checking is limited to "
            f"{EXHAUSTIVE_MAX_BITS} bits. Use --random N instead."
        )
    if args.ieee32:
        if (spec.exp_bits, spec.sig_bits, spec.ftz) != (8, 23, False):
            raise UsageError("--ieee32 needs exp_bits=8, sig_bits=23 and gradual subnormals")
        if args.mode not in ("RN",):
            raise UsageError("--ieee32 compares round-to-nearest only; pass --mode RN")
    mismatches = []
    for op in _ops(args.op):
        for mode in _modes(args.mode):
            if args.exhaustive:
                found = exhaustive_check(spec, op, mode, width)
                pairs = 1 << (2 * spec.total_bits)
            elif args.ieee32:
                found = ieee32_check(op, args.count, args.seed, width, spec)
                pairs = args.count
            else:
                found = random_check(spec, op, mode, args.random, args.seed, width)
                pairs = args.random
            print(f"{spec.name} {op} {mode.value}: {pairs} pairs, {len(found)} mismatches")
            mismatches.extend(found)
    report = args.report or f"{spec.name}_verify.csv"
    write_mismatch_csv(report, mismatches, spec)
    print(f"report: {report}")
    return EXIT_MISMATCH if mismatches else EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load(args.config)
    width = _width(args, cfg)
    if args.elements <= 0 or args.elements % width:
        raise UsageError(f"--elements must be a positive multiple of the lane width {width}")
    if args.reps < 1 or args.threads < 1:
        raise UsageError("--reps and --threads must be positive")
    records = run_bench(cfg.spec, _ops(args.op), _modes(args.mode), args.elements, args.reps,
                        width, args.threads, args.count_gates)
    append_csv(args.csv, records)
    for rec in records:
        line = (f"{rec.format_name} {rec.op} {rec.rounding} W={rec.lane_width}: "
                f"median {rec.ns_per_elem:.1f} ns/elem, best {rec.best_ns_per_elem:.1f}, "
                f"baseline {rec.baseline_ns_per_elem:.1f} ns/elem (x{rec.speedup:.2f})")
        if rec.gates_per_elem is not None:
            line += f", {rec.gates_per_elem} gates/elem"
        print(line)
    return EXIT_OK


def lane_dump(encodings: np.ndarray, spec: FormatSpec, width: int) -> list[str]:
    """Text rendering of the bitslice lanes; element 0 is the rightmost bit."""
    s, e = spec.sig_bits, spec.exp_bits
    lines = []
    for index, vec in enumerate(pack_many(encodings, spec, width)):
        count = min(width, len(encodings) - index * width)
        lines.append(f"vector {index}: {count} elements, {spec.total_bits} lanes of {width} bits")
        for j in reversed(range(spec.total_bits)):
            role = "sign" if j == s + e else (f"exp{j - s}" if j >= s else f"frac{j}")
            lines.append(f"  lane {j:2d} {role:>6}  {vec.ops.bits(vec.lanes[j]):0{width}b}")
    return lines


def cmd_transpose(args) -> int:
    cfg = _load(args.config)
    try:
        data = Path(args.file).read_bytes()
        encodings = read_bfpraw(data, cfg.spec)
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"{args.file}: {exc}") from None
    if args.lane_width is not None or cfg.lane_width is not None:
        width = _width(args, cfg)
    else:
        width = 8
        while width < len(encodings) and width < 1024:
            width *= 2
    for line in lane_dump(encodings, cfg.spec, width):
        print(line)
    return EXIT_OK


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bfp", description="Bitslice custom-precision floating point.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a format manifest and specialized interface")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check bitslice results against the scalar oracle")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("--op", choices=ALL_OPS + ("all",), default="all")
    p.add_argument("--mode", choices=("RZ", "RN", "both"), default="both")
    strategy = p.add_mutually_exclusive_group(required=True)
    strategy.add_argument("--exhaustive", action="store_true")
    strategy.add_argument("--random", type=_positive, metavar="N")
    strategy.add_argument("--ieee32", action="store_true")
    p.add_argument("--count", type=_positive, default=1_000_000, help="pairs for --ieee32")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.add_argument("--lane-width", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time the bitslice pipelines and write CSV rows")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("--op", choices=ALL_OPS + ("all",), default="all")
    p.add_argument("--mode", choices=("RZ", "RN", "both"), default="both")
    p.add_argument("--elements", type=int, required=True)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--csv", required=True)
    p.add_argument("--count-gates", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--lane-width", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("transpose", help="print the bitslice lanes of a .bfpraw file")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("file")
    p.add_argument("--lane-width", type=int)
    p.set_defaults(func=cmd_transpose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"bfp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
