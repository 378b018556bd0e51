"""Integer circuits over bitslice fields.

A field is a list of lanes, index 0 holding the least significant bit of
every element. All circuits are pure and take the :class:`~bitslicefp.lanes.LaneOps`
of their operands as the first argument.
"""

from __future__ import annotations

from typing import Sequence

from .lanes import LaneOps, mux
from .transpose import from_lanes, to_lanes

__all__ = [
    "field_from_ints",
    "field_to_ints",
    "const_field",
    "zero_extend",
    "or_reduce",
    "and_reduce",
    "ripple_add",
    "ripple_sub",
    "less_than",
    "negate",
    "increment",
    "var_shift_right",
    "var_shift_left",
    "normalize_left",
    "mul_shift_add",
    "restoring_div",
]

Field = list


def field_from_ints(ops: LaneOps, values, n: int) -> Field:
    return [ops.lane(bits) for bits in to_lanes(values, n, ops.width)]


def field_to_ints(ops: LaneOps, field: Sequence, count: int | None = None) -> list[int]:
    raw = [ops.bits(lane) for lane in field]
    return [int(v) for v in from_lanes(raw, ops.width, count)]


def const_field(ops: LaneOps, value: int, n: int) -> Field:
    """Field holding the same constant in every element (no gates)."""
    return [ops.ones if (value >> i) & 1 else ops.zeros for i in range(n)]


def zero_extend(ops: LaneOps, field: Sequence, n: int) -> Field:
    if len(field) > n:
        raise ValueError(f"cannot extend a {len(field)}-bit field to {n} bits")
    return list(field) + [ops.zeros] * (n - len(field))


def or_reduce(ops: LaneOps, lanes: Sequence):
    if not lanes:
        return ops.zeros
    acc = lanes[0]
    for lane in lanes[1:]:
        acc = acc | lane
    return acc


def and_reduce(ops: LaneOps, lanes: Sequence):
    if not lanes:
        return ops.ones
    acc = lanes[0]
    for lane in lanes[1:]:
        acc = acc & lane
    return acc


def ripple_add(ops: LaneOps, a: Sequence, b: Sequence, carry_in=None):
    """Per element ``(a + b + carry_in) mod 2**n``; returns ``(sum, carry_out)``."""
    if len(a) != len(b):
        raise ValueError(f"field widths differ: {len(a)} != {len(b)}")
    carry = ops.zeros if carry_in is None else carry_in
    result = []
    for t1, t2 in zip(a, b):
        xxor = t1 ^ t2
        aand = t1 & t2
        result.append(xxor ^ carry)
        carry = (carry & xxor) | aand
    return result, carry


def ripple_sub(ops: LaneOps, a: Sequence, b: Sequence):
    """Per element ``(a - b) mod 2**n``; the borrow lane is set where ``a < b``."""
    diff, carry = ripple_add(ops, a, [ops.not_(x) for x in b], ops.ones)
    return diff, ops.not_(carry)


def less_than(ops: LaneOps, a: Sequence, b: Sequence):
    """Unsigned ``a < b`` per element: the borrow of ``a - b`` without the difference."""
    if len(a) != len(b):
        raise ValueError(f"field widths differ: {len(a)} != {len(b)}")
    carry = ops.ones
    for t1, t2 in zip(a, b):
        nb = ops.not_(t2)
        carry = (carry & (t1 ^ nb)) | (t1 & nb)
    return ops.not_(carry)


def negate(ops: LaneOps, a: Sequence) -> Field:
    """Two's complement ``-a mod 2**n``."""
    out, _ = increment(ops, [ops.not_(x) for x in a], ops.ones)
    return out


def increment(ops: LaneOps, field: Sequence, cond):
    """Per element ``field + cond``; returns ``(sum, carry_out)``."""
    carry = cond
    out = []
    for f in field:
        out.append(f ^ carry)
        carry = f & carry
    return out, carry


def _stage_selects(ops: LaneOps, amount: Sequence, n: int):
    """Pair each shift distance ``2**k < n`` with its select lane.

    Amount bits whose distance reaches ``n`` are OR-ed into one saturating
    select, returned separately.
    """
    stages = []
    saturate = []
    for k, sel in enumerate(amount):
        if (1 << k) < n:
            stages.append((1 << k, sel))
        else:
            saturate.append(sel)
    return stages, (or_reduce(ops, saturate) if saturate else None)


def var_shift_right(ops: LaneOps, field: Sequence, amount: Sequence, collect_sticky: bool = False):
    """Log shifter: per element ``value >> min(amount, n)``, zero filled.

    With ``collect_sticky`` the second result is the OR of every bit shifted
    out, gathered stage by stage; otherwise it is all zeros.
    """
    n = len(field)
    cur = list(field)
    sticky = ops.zeros
    stages, sat = _stage_selects(ops, amount, n)
    for d, sel in stages:
        if collect_sticky:
            sticky = sticky | (sel & or_reduce(ops, cur[:d]))
        nsel = ops.not_(sel)
        cur = [mux(sel, cur[i + d], cur[i]) for i in range(n - d)] + [
            cur[i] & nsel for i in range(n - d, n)
        ]
    if sat is not None:
        if collect_sticky:
            sticky = sticky | (sat & or_reduce(ops, cur))
        nsat = ops.not_(sat)
        cur = [x & nsat for x in cur]
    return cur, sticky


def var_shift_left(ops: LaneOps, field: Sequence, amount: Sequence) -> Field:
    """Log shifter: per element ``(value << min(amount, n)) mod 2**n``."""
    n = len(field)
    cur = list(field)
    stages, sat = _stage_selects(ops, amount, n)
    for d, sel in stages:
        nsel = ops.not_(sel)
        cur = [cur[i] & nsel for i in range(d)] + [
            mux(sel, cur[i - d], cur[i]) for i in range(d, n)
        ]
    if sat is not None:
        nsat = ops.not_(sat)
        cur = [x & nsat for x in cur]
    return cur


def normalize_left(ops: LaneOps, field: Sequence):
    """Shift each element left until its top bit is set.

    Returns ``(shifted, shift_count, is_zero)``. ``shift_count`` has
    ``ceil(log2 n) + 1`` lanes; zero elements report a count of ``n``.
    """
    n = len(field)
    if n < 1:
        raise ValueError("cannot normalize an empty field")
    stages = max(n - 1, 0).bit_length()
    cur = list(field)
    count = [ops.zeros] * (stages + 1)
    for k in reversed(range(stages)):
        d = 1 << k
        z = ops.not_(or_reduce(ops, cur[n - d:]))
        nz = ops.not_(z)
        cur = [cur[i] & nz for i in range(d)] + [mux(z, cur[i - d], cur[i]) for i in range(d, n)]
        count[k] = z
    # cur is zero only where the input was zero
    is_zero = ops.not_(cur[n - 1])
    count = [mux(is_zero, ops.ones if (n >> i) & 1 else ops.zeros, c) for i, c in enumerate(count)]
    return cur, count, is_zero


def mul_shift_add(ops: LaneOps, a: Sequence, b: Sequence) -> Field:
    """Exact ``2n``-bit product: one AND-masked partial product per bit of ``b``."""
    n = len(a)
    if len(b) != n:
        raise ValueError(f"field widths differ: {n} != {len(b)}")
    acc = [ops.zeros] * (2 * n)
    for i, bi in enumerate(b):
        partial = [aj & bi for aj in a]
        total, carry = ripple_add(ops, acc[i:i + n], partial)
        acc[i:i + n] = total
        acc[i + n] = carry
    return acc


def restoring_div(ops: LaneOps, num: Sequence, den: Sequence, q_bits: int):
    """Digit-recurrence division, one quotient bit per trial subtraction.

    Per element computes ``floor(num * 2**(q_bits-1) / den)`` into ``q_bits``
    lanes, MSB first; the quotient has its binary point after the top bit, so
    it fits whenever ``num < 2*den``. Also returns a lane flagging a nonzero
    final remainder. Elements with ``den == 0`` give unspecified bits.
    """
    if q_bits < 1:
        raise ValueError("q_bits must be positive")
    w = max(len(num), len(den)) + 1
    rem = zero_extend(ops, num, w)
    d = zero_extend(ops, den, w)
    quot = [ops.zeros] * q_bits
    for step in range(q_bits):
        trial, borrow = ripple_sub(ops, rem, d)
        quot[q_bits - 1 - step] = ops.not_(borrow)
        rem = [mux(borrow, r, t) for r, t in zip(rem, trial)]
        if step != q_bits - 1:
            # remainder < den here, so doubling never drops a set bit
            rem = [ops.zeros] + rem[:-1]
    return quot, or_reduce(ops, rem)
