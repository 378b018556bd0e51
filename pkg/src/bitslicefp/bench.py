"""Throughput benchmarks for the bitslice pipelines and a scalar baseline."""

from __future__ import annotations

import csv
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .arith import BFP_OPS
from .format import FormatSpec, Rounding, decode_scalar, encode_scalar, pack, pack_many
from .lanes import CountingLaneOps

__all__ = [
    "BENCH_HEADER",
    "BenchRecord",
    "finite_operands",
    "gate_count",
    "time_bitslice",
    "time_baseline",
    "run_bench",
    "mode_medians",
    "append_csv",
]

BENCH_HEADER = "format,op,rounding,lane_width,elements,ns_per_elem,mops,baseline_ns_per_elem"

# the scalar loop is slow; time it on at most this many elements
BASELINE_SAMPLE = 4096


@dataclass(frozen=True)
class BenchRecord:
    format_name: str
    op: str
    rounding: str
    lane_width: int
    elements: int
    ns_per_elem: float  # median over timed reps
    mops: float
    baseline_ns_per_elem: float
    best_ns_per_elem: float = math.nan
    gates_per_elem: int | None = None

    @property
    def speedup(self) -> float:
        """Scalar baseline time over bitslice time (>1 means bitslice wins)."""
        return self.baseline_ns_per_elem / self.ns_per_elem

    def csv_row(self) -> list[str]:
        return [
            self.format_name,
            self.op,
            self.rounding,
            str(self.lane_width),
            str(self.elements),
            f"{self.ns_per_elem:.4f}",
            f"{self.mops:.4f}",
            f"{self.baseline_ns_per_elem:.4f}",
        ]


def finite_operands(spec: FormatSpec, n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Random finite, nonzero-exponent operands (no specials)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(2):
        frac = rng.integers(0, 1 << spec.sig_bits, n, dtype=np.uint64)
        exp = rng.integers(1, spec.exp_max_field, n, dtype=np.uint64)
        sign = rng.integers(0, 2, n, dtype=np.uint64)
        out.append((sign << np.uint64(spec.exp_bits + spec.sig_bits)) | (exp << np.uint64(spec.sig_bits)) | frac)
    return out[0], out[1]


def gate_count(spec: FormatSpec, op: str, width: int) -> int:
    """Lane operations for one evaluation of ``op``: the per-element gate count."""
    ops = CountingLaneOps(width)
    a, b = finite_operands(spec, width, seed=1)
    x = pack(a, spec, ops=ops)
    y = pack(b, spec, ops=ops)
    ops.counter.reset()
    BFP_OPS[op](x, y)
    return ops.counter.total


def _run_shard(fn, pairs) -> int:
    t0 = time.perf_counter_ns()
    for x, y in pairs:
        fn(x, y)
    return time.perf_counter_ns() - t0


def time_bitslice(spec: FormatSpec, op: str, width: int, elements: int, reps: int,
                  threads: int = 1, seed: int = 0) -> list[int]:
    """Wall-clock nanoseconds for each timed rep (one warm-up rep is discarded)."""
    if elements % width:
        raise ValueError(f"elements ({elements}) must be a multiple of the lane width ({width})")
    a, b = finite_operands(spec, elements, seed)
    pairs = list(zip(pack_many(a, spec, width), pack_many(b, spec, width)))
    fn = BFP_OPS[op]
    shards = [pairs[i::threads] for i in range(threads)] if threads > 1 else [pairs]
    times = []
    with ThreadPoolExecutor(max_workers=threads) if threads > 1 else _NullPool() as pool:
        for rep in range(reps + 1):
            if threads > 1:
                t0 = time.perf_counter_ns()
                list(pool.map(lambda shard: _run_shard(fn, shard), shards))
                dt = time.perf_counter_ns() - t0
            else:
                dt = _run_shard(fn, pairs)
            if rep:
                times.append(dt)
    return times


class _NullPool:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


_FLOAT_OPS = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y if y else _div_zero(x, y),
}


def _div_zero(x: float, y: float) -> float:
    if x == 0 or math.isnan(x):
        return math.nan
    return math.copysign(math.inf, x) * math.copysign(1.0, y)


def time_baseline(spec: FormatSpec, op: str, elements: int, reps: int, seed: int = 0) -> list[float]:
    """Per-element ns of a scalar loop on standard-representation values.

    Each element runs the host's binary64 operation and is then rounded back
    into ``spec`` in software.
    """
    n = min(elements, BASELINE_SAMPLE)
    a, b = finite_operands(spec, n, seed)
    xs = [decode_scalar(int(v), spec) for v in a]
    ys = [decode_scalar(int(v), spec) for v in b]
    fn = _FLOAT_OPS[op]
    out = []
    for rep in range(reps + 1):
        t0 = time.perf_counter_ns()
        for x, y in zip(xs, ys):
            encode_scalar(fn(x, y), spec)
        dt = time.perf_counter_ns() - t0
        if rep:
            out.append(dt / n)
    return out


def run_bench(spec: FormatSpec, ops: Iterable[str], modes: Iterable, elements: int, reps: int,
              width: int, threads: int = 1, count_gates: bool = False) -> list[BenchRecord]:
    records = []
    for op in ops:
        for mode in modes:
            mspec = spec.with_rounding(mode)
            times = time_bitslice(mspec, op, width, elements, reps, threads)
            median_ns = statistics.median(times) / elements
            base = statistics.median(time_baseline(mspec, op, elements, max(1, min(reps, 5))))
            records.append(
                BenchRecord(
                    format_name=spec.name,
                    op=op,
                    rounding=Rounding(mode).value,
                    lane_width=width,
                    elements=elements,
                    ns_per_elem=median_ns,
                    mops=1e3 / median_ns,
                    baseline_ns_per_elem=base,
                    best_ns_per_elem=min(times) / elements,
                    gates_per_elem=gate_count(mspec, op, width) if count_gates else None,
                )
            )
    return records


def mode_medians(spec: FormatSpec, op: str, width: int, vectors: int, reps: int,
                 modes=("RZ", "RN"), seed: int = 0) -> dict[str, float]:
    """Median ns/elem per rounding mode, with modes alternating rep by rep.

    Interleaving puts slow drift of the host (frequency scaling, noisy
    neighbours) on every mode equally, so medians stay comparable.
    """
    fn = BFP_OPS[op]
    n = width * vectors
    pairs, samples = {}, {}
    for mode in modes:
        mspec = spec.with_rounding(mode)
        a, b = finite_operands(mspec, n, seed)
        pairs[mode] = list(zip(pack_many(a, mspec, width), pack_many(b, mspec, width)))
        samples[mode] = []
    for rep in range(reps + 1):
        for mode in modes:
            dt = _run_shard(fn, pairs[mode])
            if rep:
                samples[mode].append(dt / n)
    return {Rounding(m).value: statistics.median(v) for m, v in samples.items()}


def append_csv(path, records: Sequence[BenchRecord]) -> None:
    """Append rows, writing the header only when the file is new or empty."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            fh.write(BENCH_HEADER + "\n")
        for rec in records:
            writer.writerow(rec.csv_row())
