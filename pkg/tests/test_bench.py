import math

import numpy as np
import pytest

from bitslicefp.bench import (
    BENCH_HEADER,
    BenchRecord,
    append_csv,
    finite_operands,
    gate_count,
    mode_medians,
    run_bench,
    time_baseline,
    time_bitslice,
)
from bitslicefp.format import FP8, FP16, FPClass, classify


def test_finite_operands_have_no_specials():
    a, b = finite_operands(FP16, 5000, seed=4)
    for v in np.concatenate([a, b]).tolist():
        assert classify(v, FP16) in (FPClass.NORMAL,)


def test_time_bitslice_shapes():
    times = time_bitslice(FP8, "add", 16, 64, reps=3)
    assert len(times) == 3 and all(t > 0 for t in times)
    with pytest.raises(ValueError):
        time_bitslice(FP8, "add", 16, 40, reps=1)


def test_threads_give_same_shape():
    assert len(time_bitslice(FP8, "mul", 8, 64, reps=2, threads=2)) == 2


def test_baseline_positive():
    assert all(t > 0 for t in time_baseline(FP8, "div", 100, reps=2))


def test_run_bench_records():
    recs = run_bench(FP8, ["add", "div"], ["RZ", "RN"], 32, 2, 16, count_gates=True)
    assert [(r.op, r.rounding) for r in recs] == [("add", "RZ"), ("add", "RN"), ("div", "RZ"), ("div", "RN")]
    for r in recs:
        assert r.elements == 32 and r.lane_width == 16
        assert math.isclose(r.mops, 1e3 / r.ns_per_elem)
        assert r.best_ns_per_elem <= r.ns_per_elem
        assert r.speedup > 0
    assert recs[0].gates_per_elem < recs[1].gates_per_elem


@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
def test_gate_count_independent_of_width(op):
    counts = {gate_count(FP8, op, w) for w in (8, 32, 256)}
    assert len(counts) == 1


def test_append_csv(tmp_path):
    rec = BenchRecord("fp8", "mul", "RZ", 32, 64, 1234.5, 1e3 / 1234.5, 6000.0)
    path = tmp_path / "out.csv"
    append_csv(path, [rec])
    append_csv(path, [rec])
    lines = path.read_text().splitlines()
    assert lines == [BENCH_HEADER] + ["fp8,mul,RZ,32,64,1234.5000,0.8100,6000.0000"] * 2


def test_mode_medians():
    med = mode_medians(FP8, "mul", 16, 2, reps=3)
    assert set(med) == {"RZ", "RN"} and all(v > 0 for v in med.values())
