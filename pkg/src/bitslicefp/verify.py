"""Drivers that compare the bitslice pipelines with the scalar oracle."""

from __future__ import annotations

import numpy as np

from .arith import BFP_OPS
from .format import FormatSpec, Rounding, pack_many, unpack_many
from .oracle import Mismatch, oracle_batch

__all__ = [
    "directed_encodings",
    "random_operands",
    "run_bitslice",
    "compare",
    "exhaustive_check",
    "random_check",
    "ieee32_check",
    "native_binary32",
    "EXHAUSTIVE_MAX_BITS",
]

# 2**(2*16) operand pairs is the largest exhaustive sweep we accept
EXHAUSTIVE_MAX_BITS = 16


def directed_encodings(spec: FormatSpec) -> np.ndarray:
    """Zeros, infinities, NaNs and the edges of the subnormal/normal ranges, both signs."""
    s = spec.sig_bits
    one = spec.bias << s
    mags = [
        0,
        1,  # smallest subnormal
        spec.frac_mask,  # largest subnormal
        1 << s,  # smallest normal
        (1 << s) | 1,
        one,
        one | 1,
        one | spec.frac_mask,
        spec.max_finite,
        spec.max_finite - 1,
        spec.inf,
        spec.nan,
        spec.inf | 1,  # NaN with a non-canonical payload
    ]
    mags = sorted(set(mags))
    return np.array(mags + [m | spec.sign_mask for m in mags], dtype=np.uint64)


def _uniform(rng: np.random.Generator, nbits: int, n: int) -> np.ndarray:
    if nbits >= 64:
        return rng.integers(0, np.iinfo(np.uint64).max, n, dtype=np.uint64, endpoint=True)
    return rng.integers(0, 1 << nbits, n, dtype=np.uint64)


def _with_exponent(spec: FormatSpec, enc: np.ndarray, exps: np.ndarray) -> np.ndarray:
    sh = np.uint64(spec.sig_bits)
    field_mask = np.uint64(spec.exp_max_field) << sh
    return (enc & ~field_mask) | (exps.astype(np.uint64) << sh)


def random_operands(spec: FormatSpec, n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``n`` operand pairs mixing uniform bits with targeted hard cases.

    The first pairs are every combination of :func:`directed_encodings`;
    the rest blend uniform encodings, near-equal exponents (cancellation),
    values around 1, the subnormal range, the overflow range, and single
    directed specials against random partners.
    """
    rng = np.random.default_rng(seed)
    d = directed_encodings(spec)
    da, db = np.repeat(d, len(d)), np.tile(d, len(d))
    if n <= len(da):
        return da[:n].copy(), db[:n].copy()
    m = n - len(da)
    nb = spec.total_bits
    emax = spec.exp_max_field
    a = _uniform(rng, nb, m)
    b = _uniform(rng, nb, m)
    kind = rng.integers(0, 10, m)
    ea = (a >> np.uint64(spec.sig_bits)) & np.uint64(emax)

    near = (kind == 4) | (kind == 5)
    offset = rng.integers(-3, 4, m)
    eb = np.clip(ea.astype(np.int64) + offset, 0, emax)
    b = np.where(near, _with_exponent(spec, b, eb), b)

    around_one = kind == 6
    spread = max(1, min(spec.bias, spec.precision + 2))
    e1 = np.clip(spec.bias + rng.integers(-spread, spread + 1, m), 1, emax - 1)
    e2 = np.clip(spec.bias + rng.integers(-spread, spread + 1, m), 1, emax - 1)
    a = np.where(around_one, _with_exponent(spec, a, e1), a)
    b = np.where(around_one, _with_exponent(spec, b, e2), b)

    tiny = kind == 7
    lo_hi = min(emax - 1, max(2, spec.bias // 2))
    a = np.where(tiny, _with_exponent(spec, a, rng.integers(0, lo_hi + 1, m)), a)
    b = np.where(tiny, _with_exponent(spec, b, rng.integers(0, lo_hi + 1, m)), b)

    huge = kind == 8
    hi_lo = max(1, emax - 1 - max(2, spec.bias // 2))
    a = np.where(huge, _with_exponent(spec, a, rng.integers(hi_lo, emax, m)), a)
    b = np.where(huge, _with_exponent(spec, b, rng.integers(0, emax, m)), b)

    special = kind == 9
    pick = d[rng.integers(0, len(d), m)]
    first = rng.integers(0, 2, m).astype(bool)
    a = np.where(special & first, pick, a)
    b = np.where(special & ~first, pick, b)
    return np.concatenate([da, a]), np.concatenate([db, b])


def run_bitslice(op: str, a, b, spec: FormatSpec, width: int) -> np.ndarray:
    """Apply ``op`` element-wise through packed vectors of ``width`` lanes."""
    fn = BFP_OPS[op]
    xs = pack_many(a, spec, width)
    ys = pack_many(b, spec, width)
    return unpack_many([fn(x, y) for x, y in zip(xs, ys)], len(a))


def compare(op: str, a, b, got, expected, mode: Rounding) -> list[Mismatch]:
    bad = np.nonzero(np.asarray(got) != np.asarray(expected))[0]
    return [
        Mismatch(int(a[i]), int(b[i]), op, mode.value, int(got[i]), int(expected[i]))
        for i in bad
    ]


def _check(spec, op, mode, a, b, width, oracle=None) -> list[Mismatch]:
    mode = Rounding(mode)
    spec = spec.with_rounding(mode)
    got = run_bitslice(op, a, b, spec, width)
    expected = (oracle or oracle_batch)(op, a, b, spec, mode)
    return compare(op, a, b, got, expected, mode)


def exhaustive_check(spec: FormatSpec, op: str, mode, width: int = 1024, oracle=None) -> list[Mismatch]:
    """Every operand pair of ``spec``; an empty list means full agreement.

    ``oracle`` replaces :func:`oracle_batch` (used to sanity-check the
    detector itself).
    """
    if spec.total_bits > EXHAUSTIVE_MAX_BITS:
        raise ValueError(
            f"exhaustive check of {spec.total_bits}-bit encodings is infeasible; use random sampling"
        )
    codes = np.arange(1 << spec.total_bits, dtype=np.uint64)
    # one block of first operands at a time keeps memory bounded for 16-bit formats
    rows = max(1, (1 << 16) // len(codes))
    found = []
    for start in range(0, len(codes), rows):
        block = codes[start:start + rows]
        a = np.repeat(block, len(codes))
        b = np.tile(codes, len(block))
        found.extend(_check(spec, op, mode, a, b, width, oracle))
    return found


def random_check(spec: FormatSpec, op: str, mode, n: int, seed: int = 0, width: int = 1024) -> list[Mismatch]:
    a, b = random_operands(spec, n, seed)
    return _check(spec, op, mode, a, b, width)


_NUMPY_OPS = {"add": np.add, "sub": np.subtract, "mul": np.multiply, "div": np.divide}


def native_binary32(op: str, a, b) -> np.ndarray:
    fa = np.asarray(a, dtype=np.uint64).astype(np.uint32).view(np.float32)
    fb = np.asarray(b, dtype=np.uint64).astype(np.uint32).view(np.float32)
    with np.errstate(all="ignore"):
        r = _NUMPY_OPS[op](fa, fb)
    return r.view(np.uint32).astype(np.uint64)


def ieee32_check(op: str, n: int, seed: int = 0, width: int = 1024, spec: FormatSpec | None = None) -> list[Mismatch]:
    """Bitslice (1,8,23) RN against the host's binary32 unit; NaNs match by class."""
    from .format import FP32

    spec = (spec or FP32).with_rounding(Rounding.RN)
    if (spec.exp_bits, spec.sig_bits, spec.ftz) != (8, 23, False):
        raise ValueError("the binary32 cross-check needs a (1,8,23) format with gradual underflow")
    a, b = random_operands(spec, n, seed)
    got = run_bitslice(op, a, b, spec, width)
    native = native_binary32(op, a, b)
    exp_mask = np.uint64(0x7F800000)
    frac_mask = np.uint64(0x007FFFFF)

    def is_nan(x):
        return ((x & exp_mask) == exp_mask) & ((x & frac_mask) != 0)

    both_nan = is_nan(got) & is_nan(native)
    got_cmp = np.where(both_nan, native, got)
    return compare(op, a, b, got_cmp, native, Rounding.RN)

