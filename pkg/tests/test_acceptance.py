"""Acceptance criteria. Each test carries a ``criterion`` marker; the terminal
summary prints one PASS/FAIL line per criterion.

Artifacts (CSV files) go to ``$BFP_ARTIFACT_DIR`` when set, else a temp dir.
"""

import csv
import os
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

import bitslicefp.arith as arith
from bitslicefp.arith import BFP_OPS
from bitslicefp.bench import (
    BENCH_HEADER,
    append_csv,
    finite_operands,
    gate_count,
    mode_medians,
    run_bench,
)
from bitslicefp.bitslice_int import mul_shift_add, ripple_add
from bitslicefp.cli import main
from bitslicefp.format import FP8, FP16, FP32, FormatSpec, pack, pack_many, unpack
from bitslicefp.lanes import CountingLaneOps
from bitslicefp.verify import exhaustive_check, ieee32_check, random_check

OPS = ("add", "sub", "mul", "div")
MODES = ("RZ", "RN")
WIDTHS = (8, 16, 32, 64, 128, 256)


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    env = os.environ.get("BFP_ARTIFACT_DIR")
    path = Path(env) if env else tmp_path_factory.mktemp("artifacts")
    path.mkdir(parents=True, exist_ok=True)
    return path


@pytest.mark.criterion("exhaustive fp8")
@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("op", OPS)
def test_exhaustive_fp8(op, mode):
    bad = exhaustive_check(FP8, op, mode)
    assert bad == [], bad[:5]


@pytest.mark.criterion("random 1e6 fp16/fp32")
@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("op", OPS)
@pytest.mark.parametrize("spec", [FP16, FP32], ids=["fp16", "fp32"])
def test_random_million(spec, op, mode):
    bad = random_check(spec, op, mode, 10**6, seed=2024)
    assert bad == [], bad[:5]


@pytest.mark.criterion("ieee binary32 cross-check")
@pytest.mark.parametrize("op", OPS)
def test_ieee32_million(op):
    bad = ieee32_check(op, 10**6, seed=7)
    assert bad == [], bad[:5]


TRANSPOSE_SPECS = [FP8, FP16, FP32, FormatSpec(11, 52), FormatSpec(3, 2), FormatSpec(11, 1)]


@pytest.mark.criterion("transposition round trip")
@pytest.mark.parametrize("width", WIDTHS)
@pytest.mark.parametrize("spec", TRANSPOSE_SPECS, ids=lambda s: s.name)
def test_transposition(spec, width):
    rng = np.random.default_rng(width * 131 + spec.total_bits)
    for _ in range(10_000):
        n = int(rng.integers(1, width + 1))
        arr = rng.integers(0, 1 << spec.total_bits, n, dtype=np.uint64, endpoint=False) \
            if spec.total_bits < 64 else rng.integers(0, 2**64, n, dtype=np.uint64, endpoint=False)
        assert np.array_equal(unpack(pack(arr, spec, width), n), arr)


def _gates(fn, n):
    ops = CountingLaneOps(8)
    a = [ops.ones] * n
    ops.counter.reset()
    fn(ops, a, a)
    return ops.counter.total


@pytest.mark.criterion("complexity")
@pytest.mark.parametrize("extra", [0, 1], ids=["stored", "with-hidden-bit"])
def test_significand_multiply_quadratic(extra):
    ratio = _gates(mul_shift_add, 16 + extra) / _gates(mul_shift_add, 8 + extra)
    assert 3.4 <= ratio <= 4.6, ratio


@pytest.mark.criterion("complexity")
@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_ripple_add_linear(n):
    ratio = _gates(ripple_add, 2 * n) / _gates(ripple_add, n)
    assert 1.9 <= ratio <= 2.1, ratio


@pytest.mark.criterion("complexity")
@pytest.mark.parametrize("op", OPS)
@pytest.mark.parametrize("spec", [FP8, FP16, FP32], ids=["fp8", "fp16", "fp32"])
def test_pipeline_gates_constant_across_width(spec, op):
    # each lane op is W bit operations shared by W elements, so the lane op
    # count is the per-element gate count and must not move with W
    counts = {w: gate_count(spec, op, w) for w in (8, 32, 256, 1024)}
    assert len(set(counts.values())) == 1, counts


@pytest.mark.criterion("rounding-mode trend")
@pytest.mark.parametrize("op", ["mul", "div"])
@pytest.mark.parametrize("spec", [FP8, FP16], ids=["fp8", "fp16"])
def test_rz_throughput_at_least_rn(spec, op):
    med = mode_medians(spec, op, 256, vectors=1, reps=301)
    print(f"{spec.name} {op}: RZ {med['RZ']:.1f} ns/elem, RN {med['RN']:.1f} ns/elem")
    assert med["RZ"] <= med["RN"]


@pytest.mark.criterion("rounding-mode trend")
@pytest.mark.parametrize("op", OPS)
@pytest.mark.parametrize("spec", [FP8, FP16, FP32], ids=["fp8", "fp16", "fp32"])
def test_rz_fewer_gates(spec, op):
    assert gate_count(spec.with_rounding("RZ"), op, 64) < gate_count(spec.with_rounding("RN"), op, 64)


@pytest.mark.criterion("lane-width trend")
def test_elements_per_evaluation_scale_with_width():
    for w in WIDTHS:
        a, b = finite_operands(FP8, w, seed=w)
        x, y = pack(a, FP8, w), pack(b, FP8, w)
        assert len(unpack(arith.bfp_add(x, y))) == w


@pytest.mark.criterion("lane-width trend")
def test_wider_lanes_are_faster(artifacts):
    elements = 8192
    a, b = finite_operands(FP8, elements, seed=5)
    work = {w: list(zip(pack_many(a, FP8, w), pack_many(b, FP8, w))) for w in (8, 32, 64, 256, 1024)}
    samples = {w: [] for w in work}
    for rep in range(16):
        for w, pairs in work.items():
            t0 = time.perf_counter_ns()
            for x, y in pairs:
                arith.bfp_add(x, y)
            if rep:
                samples[w].append((time.perf_counter_ns() - t0) / elements)
    med = {w: statistics.median(s) for w, s in samples.items()}
    with open(artifacts / "lane_width.csv", "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["format", "op", "rounding", "lane_width", "elements", "ns_per_elem", "ratio_vs_w32"])
        for w, ns in med.items():
            out.writerow(["fp8", "add", "RN", w, elements, f"{ns:.4f}", f"{ns / med[32]:.4f}"])
    ratio = med[256] / med[32]
    print(f"fp8 add ns/elem W=256 / W=32 = {ratio:.3f}")
    assert ratio <= 0.75


@pytest.mark.criterion("small-format baseline comparison")
def test_bench_reports_baseline_ratio(artifacts):
    path = artifacts / "bench.csv"
    if path.exists():
        path.unlink()
    records = run_bench(FP8, ["mul", "div"], MODES, elements=256 * 16, reps=7, width=256)
    append_csv(path, records)
    rows = list(csv.DictReader(path.open()))
    assert path.read_text().splitlines()[0] == BENCH_HEADER
    assert {(r["op"], r["rounding"]) for r in rows} == {(o, m) for o in ("mul", "div") for m in MODES}
    for r in rows:
        ratio = float(r["baseline_ns_per_elem"]) / float(r["ns_per_elem"])
        assert ratio > 0
        print(f"fp8 {r['op']} {r['rounding']}: baseline/bitslice = {ratio:.2f}")


@pytest.mark.criterion("cli contract")
def test_cli_exit_codes(tmp_path, monkeypatch):
    cfg = tmp_path / "fp8.cfg"
    cfg.write_text("name=fp8\nexp_bits=4\nsig_bits=3\nrounding=RZ\n")
    report = str(tmp_path / "r.csv")
    assert main(["verify", "-c", str(cfg), "--exhaustive", "--report", report]) == 0
    bad = tmp_path / "bad.cfg"
    bad.write_text("exp_bits=4\nsig_bits=3\n\nrounding=RZ\nlane=8\n")
    assert main(["verify", "-c", str(bad), "--exhaustive"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["bench"])
    assert info.value.code == 2
    monkeypatch.setattr(arith, "round_stage", lambda ops, sig, gs, mode: (list(sig), ops.zeros))
    assert main(["verify", "-c", str(cfg), "--mode", "RN", "--exhaustive", "--report", report]) == 1


@pytest.mark.criterion("cli contract")
def test_cli_config_errors_carry_line_numbers(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("# comment\nexp_bits=4\nsig_bits=99\nrounding=RZ\n")
    assert main(["gen", "-c", str(bad), "-o", str(tmp_path / "out")]) == 2
    assert f"{bad}:3: sig_bits=99 exceeds the maximum 52" in capsys.readouterr().err


@pytest.mark.criterion("cli contract")
def test_cli_bench_header_byte_exact(tmp_path):
    cfg = tmp_path / "fp8.cfg"
    cfg.write_text("name=fp8\nexp_bits=4\nsig_bits=3\nrounding=RN\n")
    out = tmp_path / "b.csv"
    assert main(["bench", "-c", str(cfg), "--op", "add", "--mode", "RZ", "--elements", "64",
                 "--reps", "1", "--csv", str(out), "--lane-width", "64"]) == 0
    assert out.read_bytes().startswith(
        b"format,op,rounding,lane_width,elements,ns_per_elem,mops,baseline_ns_per_elem\n")
