"""Exact scalar reference arithmetic for custom formats.

Every result is computed with Python integers and rounded once, so it is
correctly rounded by construction. Nothing here touches lanes or circuits:
a bug shared with the bitslice pipelines would defeat the comparison.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .format import FormatSpec, FPClass, Rounding

__all__ = [
    "ExtendedValue",
    "Mismatch",
    "round_extended",
    "oracle_add",
    "oracle_sub",
    "oracle_mul",
    "oracle_div",
    "ORACLE_OPS",
    "oracle_batch",
    "write_mismatch_csv",
    "MISMATCH_HEADER",
]


class ExtendedValue(NamedTuple):
    """``(-1)**sign * (sig + t) * 2**exp`` with ``t = 0``, or ``0 < t < 1`` when ``sticky``."""

    sign: int
    exp: int
    sig: int
    sticky: bool = False


def _signed_zero(sign: int, spec: FormatSpec) -> int:
    return spec.sign_mask if sign else 0


def round_extended(v: ExtendedValue, spec: FormatSpec, mode: Rounding | str | None = None) -> int:
    """Round an exact (or sticky-bounded) value to an encoding of ``spec``."""
    if mode is None:
        mode = spec.rounding
    elif mode.__class__ is not Rounding:
        mode = Rounding(mode)
    sign, exp, sig, sticky = v
    if sig == 0 and not sticky:
        return _signed_zero(sign, spec)
    s = spec.sig_bits
    # sig == 0 with sticky is a nonzero tail below 2**exp
    top = (sig.bit_length() - 1 if sig else -1) + exp
    quantum = max(top, spec.emin) - s
    shift = quantum - exp
    if shift > 0:
        keep = sig >> shift
        guard = (sig >> (shift - 1)) & 1
        rest = bool(sig & ((1 << (shift - 1)) - 1)) or sticky
    else:
        if sticky:
            raise ValueError("sticky tail lies above the rounding position")
        keep = sig << -shift
        guard, rest = 0, False
    if mode is Rounding.RN and guard and (rest or keep & 1):
        keep += 1
    hidden = 1 << s
    if keep >> (s + 1):
        keep >>= 1
        quantum += 1
    if keep & hidden:
        biased = quantum + s + spec.bias
        frac = keep ^ hidden
    else:
        biased, frac = 0, keep
    if biased >= spec.exp_max_field:
        body = spec.inf if mode is Rounding.RN else spec.max_finite
        return body | (spec.sign_mask if sign else 0)
    if biased == 0 and spec.ftz:
        frac = 0
    return (sign << (spec.exp_bits + s)) | (biased << s) | frac


class _Operand(NamedTuple):
    sign: int
    cls: FPClass
    exp: int  # weight of the significand LSB
    sig: int


def _operand(enc: int, spec: FormatSpec) -> _Operand:
    enc = int(enc)
    s = spec.sig_bits
    sign = enc >> (spec.exp_bits + s)
    biased = (enc >> s) & spec.exp_max_field
    frac = enc & spec.frac_mask
    if biased == spec.exp_max_field:
        return _Operand(sign, FPClass.NAN if frac else FPClass.INF, 0, 0)
    if biased:
        return _Operand(sign, FPClass.NORMAL, biased - spec.bias - s, frac | (1 << s))
    if frac and not spec.ftz:
        return _Operand(sign, FPClass.SUBNORMAL, spec.emin - s, frac)
    return _Operand(sign, FPClass.ZERO, spec.emin - s, 0)


def oracle_add(a: int, b: int, spec: FormatSpec, mode=None) -> int:
    x, y = _operand(a, spec), _operand(b, spec)
    if x.cls is FPClass.NAN or y.cls is FPClass.NAN:
        return spec.nan
    if x.cls is FPClass.INF or y.cls is FPClass.INF:
        if x.cls is FPClass.INF and y.cls is FPClass.INF and x.sign != y.sign:
            return spec.nan
        inf = x if x.cls is FPClass.INF else y
        return spec.inf | (spec.sign_mask if inf.sign else 0)
    if x.sig == 0 and y.sig == 0:
        return _signed_zero(x.sign & y.sign, spec)
    if y.sig == 0:
        return round_extended(ExtendedValue(x.sign, x.exp, x.sig), spec, mode)
    if x.sig == 0:
        return round_extended(ExtendedValue(y.sign, y.exp, y.sig), spec, mode)
    if x.exp < y.exp:
        x, y = y, x
    # x keeps p + 3 extra bits; y is truncated onto that grid and the bits
    # that fall off become a sticky tail (only possible when x is normal and
    # far larger, so the difference below cannot change sign)
    grid = x.exp - (spec.precision + 3)
    big = x.sig << (x.exp - grid)
    drop = grid - y.exp
    if drop <= 0:
        small, tail = y.sig << -drop, False
    else:
        small, tail = y.sig >> drop, bool(y.sig & ((1 << drop) - 1))
    sign = x.sign
    if x.sign == y.sign:
        total = big + small
    else:
        total = big - small
        if tail:
            # big - (small + t) == (total - 1) + (1 - t)
            total -= 1
        elif total < 0:
            total, sign = -total, 1 - sign
        elif total == 0:
            return _signed_zero(0, spec)
    return round_extended(ExtendedValue(sign, grid, total, tail), spec, mode)


def oracle_sub(a: int, b: int, spec: FormatSpec, mode=None) -> int:
    return oracle_add(a, int(b) ^ spec.sign_mask, spec, mode)


def oracle_mul(a: int, b: int, spec: FormatSpec, mode=None) -> int:
    x, y = _operand(a, spec), _operand(b, spec)
    sign = x.sign ^ y.sign
    if x.cls is FPClass.NAN or y.cls is FPClass.NAN:
        return spec.nan
    if x.cls is FPClass.INF or y.cls is FPClass.INF:
        if x.cls is FPClass.ZERO or y.cls is FPClass.ZERO:
            return spec.nan
        return spec.inf | (spec.sign_mask if sign else 0)
    return round_extended(ExtendedValue(sign, x.exp + y.exp, x.sig * y.sig), spec, mode)


def oracle_div(a: int, b: int, spec: FormatSpec, mode=None) -> int:
    x, y = _operand(a, spec), _operand(b, spec)
    sign = x.sign ^ y.sign
    if x.cls is FPClass.NAN or y.cls is FPClass.NAN:
        return spec.nan
    if x.cls is FPClass.INF:
        if y.cls is FPClass.INF:
            return spec.nan
        return spec.inf | (spec.sign_mask if sign else 0)
    if y.cls is FPClass.INF:
        return _signed_zero(sign, spec)
    if y.cls is FPClass.ZERO:
        if x.cls is FPClass.ZERO:
            return spec.nan
        return spec.inf | (spec.sign_mask if sign else 0)
    if x.cls is FPClass.ZERO:
        return _signed_zero(sign, spec)
    # enough quotient bits that the rounding position sits above the remainder
    k = max(0, spec.precision + 3 + y.sig.bit_length() - x.sig.bit_length())
    q, r = divmod(x.sig << k, y.sig)
    return round_extended(ExtendedValue(sign, x.exp - y.exp - k, q, r != 0), spec, mode)


ORACLE_OPS: dict[str, Callable[..., int]] = {
    "add": oracle_add,
    "sub": oracle_sub,
    "mul": oracle_mul,
    "div": oracle_div,
}


def oracle_batch(op: str, a: Iterable[int], b: Iterable[int], spec: FormatSpec, mode=None) -> np.ndarray:
    fn = ORACLE_OPS[op]
    mode = spec.rounding if mode is None else Rounding(mode)
    return np.array([fn(int(x), int(y), spec, mode) for x, y in zip(a, b)], dtype=np.uint64)


@dataclass(frozen=True, order=True)
class Mismatch:
    a: int
    b: int
    op: str
    mode: str
    got: int
    expected: int


MISMATCH_HEADER = ["a_hex", "b_hex", "op", "mode", "got_hex", "expected_hex"]


def write_mismatch_csv(path, mismatches: Iterable[Mismatch], spec: FormatSpec) -> None:
    digits = -(-spec.total_bits // 4)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MISMATCH_HEADER)
        for m in sorted(mismatches):
            writer.writerow([
                f"{m.a:0{digits}x}", f"{m.b:0{digits}x}", m.op, m.mode,
                f"{m.got:0{digits}x}", f"{m.expected:0{digits}x}",
            ])
