"""Floating-point add/sub, mul and div on bitslice vectors.

Every pipeline is built only from the circuits in :mod:`bitslicefp.bitslice_int`
and ends with :func:`apply_special_masks`. Results are correctly rounded in
the vector's rounding mode. Exponents are carried internally in a signed
field wide enough that no intermediate wraps.
"""

from __future__ import annotations

from typing import NamedTuple

from .bitslice_int import (
    and_reduce,
    const_field,
    increment,
    less_than,
    mul_shift_add,
    negate,
    normalize_left,
    or_reduce,
    restoring_div,
    ripple_add,
    ripple_sub,
    var_shift_left,
    var_shift_right,
    zero_extend,
)
from .format import BfpVector, FormatSpec, Rounding
from .lanes import LaneOps, mux

__all__ = [
    "GuardState",
    "bfp_add",
    "bfp_sub",
    "bfp_mul",
    "bfp_div",
    "round_stage",
    "apply_special_masks",
    "exp_width",
    "BFP_OPS",
]


class GuardState(NamedTuple):
    guard: object
    sticky: object


class _Operand(NamedTuple):
    sign: object
    exp: list  # effective biased exponent: subnormals read as 1
    sig: list  # fraction plus hidden bit, p lanes
    is_zero: object
    is_inf: object
    is_nan: object


def exp_width(spec: FormatSpec) -> int:
    """Lanes for signed internal exponents of ``spec``."""
    return max(spec.exp_bits, (2 * spec.precision).bit_length()) + 2


def _operand(v: BfpVector) -> _Operand:
    ops, spec = v.ops, v.spec
    frac = list(v.fraction)
    expo = list(v.exponent)
    exp_nz = or_reduce(ops, expo)
    exp_ones = and_reduce(ops, expo)
    frac_nz = or_reduce(ops, frac)
    is_nan = exp_ones & frac_nz
    is_inf = exp_ones & ops.not_(frac_nz)
    if spec.ftz:
        frac = [f & exp_nz for f in frac]
        is_zero = ops.not_(exp_nz)
    else:
        is_zero = ops.not_(exp_nz | frac_nz)
    eff_exp = [expo[0] | ops.not_(exp_nz)] + expo[1:]
    return _Operand(v.sign, eff_exp, frac + [exp_nz], is_zero, is_inf, is_nan)


def _add_const(ops: LaneOps, field: list, k: int) -> list:
    n = len(field)
    out, _ = ripple_add(ops, field, const_field(ops, k % (1 << n), n))
    return out


def _swap(sel, a, b):
    t = sel & (a ^ b)
    return a ^ t, b ^ t


def round_stage(ops: LaneOps, sig: list, gs: GuardState, mode: Rounding | str):
    """Round a truncated significand using its guard/sticky lanes.

    Returns ``(sig, carry)``; the carry lane flags significands that rolled
    over to zero and need an exponent bump. RZ drops the guard state.
    """
    if Rounding(mode) is Rounding.RZ:
        return list(sig), ops.zeros
    up = gs.guard & (gs.sticky | sig[0])
    return increment(ops, sig, up)


def _round_and_pack(ops: LaneOps, spec: FormatSpec, sign, exp: list, sig: list, gs) -> list:
    """Round, then encode with overflow saturation and subnormal handling.

    ``exp`` is the biased exponent assuming the top lane of ``sig`` is the
    hidden bit; where that lane is clear the result is subnormal or zero and
    the exponent field is forced to 0.
    """
    s, e = spec.sig_bits, spec.exp_bits
    if spec.rounding is Rounding.RN:
        sig, carry = round_stage(ops, sig, gs(), Rounding.RN)
        exp, _ = increment(ops, exp, carry)
        hidden = sig[-1] | carry
    else:
        hidden = sig[-1]
    exp = [x & hidden for x in exp]
    ovf = or_reduce(ops, exp[e:]) | and_reduce(ops, exp[:e])
    novf = ops.not_(ovf)
    frac = sig[:s]
    if spec.rounding is Rounding.RN:
        exp_f = [x | ovf for x in exp[:e]]
        frac = [f & novf for f in frac]
    else:
        exp_f = [exp[0] & novf] + [x | ovf for x in exp[1:e]]
        frac = [f | ovf for f in frac]
    if spec.ftz:
        normal = or_reduce(ops, exp_f)
        frac = [f & normal for f in frac]
    return frac + exp_f + [sign]


def apply_special_masks(result: BfpVector, x: BfpVector, y: BfpVector, op_kind: str) -> BfpVector:
    """Overwrite elements whose operands force NaN, infinity or zero."""
    ops, spec = result.ops, result.spec
    s = spec.sig_bits
    a, b = _operand(x), _operand(y)
    if op_kind in ("add", "sub"):
        b_sign = ops.not_(b.sign) if op_kind == "sub" else b.sign
        nan = a.is_nan | b.is_nan | (a.is_inf & b.is_inf & (a.sign ^ b_sign))
        inf = (a.is_inf | b.is_inf) & ops.not_(nan)
        inf_sign = mux(a.is_inf, a.sign, b_sign)
        zero = ops.zeros
    elif op_kind == "mul":
        nan = a.is_nan | b.is_nan | (a.is_inf & b.is_zero) | (b.is_inf & a.is_zero)
        inf = (a.is_inf | b.is_inf) & ops.not_(nan)
        inf_sign = a.sign ^ b.sign
        zero = ops.zeros
    elif op_kind == "div":
        nan = a.is_nan | b.is_nan | (a.is_zero & b.is_zero) | (a.is_inf & b.is_inf)
        inf = (a.is_inf | b.is_zero) & ops.not_(nan)
        inf_sign = a.sign ^ b.sign
        zero = b.is_inf & ops.not_(nan)
    else:
        raise ValueError(f"unknown op kind {op_kind!r}")
    lanes = list(result.lanes)
    special = nan | inf | zero
    keep = ops.not_(special)
    for i in range(s):
        lanes[i] = lanes[i] & keep
    lanes[s - 1] = lanes[s - 1] | nan
    nzero = ops.not_(zero)
    for i in range(s, s + spec.exp_bits):
        lanes[i] = (lanes[i] & nzero) | nan | inf
    lanes[-1] = mux(inf, inf_sign, lanes[-1]) & ops.not_(nan)
    return BfpVector(spec, ops, tuple(lanes))


def _add(x: BfpVector, y: BfpVector, subtract: bool) -> BfpVector:
    x.check_compatible(y)
    ops, spec = x.ops, x.spec
    s, e = spec.sig_bits, spec.exp_bits
    ew = exp_width(spec)
    a, b = _operand(x), _operand(y)
    b_sign = ops.not_(b.sign) if subtract else b.sign

    # order by magnitude: encodings compare like the values they hold
    swap = less_than(ops, list(x.lanes[: e + s]), list(y.lanes[: e + s]))
    big_sig, small_sig = zip(*(_swap(swap, p, q) for p, q in zip(a.sig, b.sig)))
    big_exp, small_exp = zip(*(_swap(swap, p, q) for p, q in zip(a.exp, b.exp)))
    big_sign, small_sign = _swap(swap, a.sign, b_sign)
    eff_sub = big_sign ^ small_sign

    # align with three spare low lanes; the sticky is jammed into lane 0
    dist, _ = ripple_sub(ops, list(big_exp), list(small_exp))
    pad = [ops.zeros] * 3
    aligned, sticky = var_shift_right(ops, pad + list(small_sig), dist, collect_sticky=True)
    aligned[0] = aligned[0] | sticky
    total, carry = ripple_add(ops, pad + list(big_sig), [t ^ eff_sub for t in aligned], eff_sub)
    total.append(carry & ops.not_(eff_sub))

    # renormalize so the top lane is the hidden bit, never below exponent 1
    _, lz, is_zero = normalize_left(ops, total)
    lz = zero_extend(ops, lz, ew)
    limit = zero_extend(ops, list(big_exp), ew)
    use_lz = less_than(ops, lz, limit)
    amount = [mux(use_lz, p, q) for p, q in zip(lz, limit)]
    shifted = var_shift_left(ops, total, amount)
    exp, _ = increment(ops, limit, ops.ones)
    exp, _ = ripple_sub(ops, exp, amount)

    sign = big_sign & ops.not_(is_zero & eff_sub)
    gs = lambda: GuardState(shifted[3], shifted[2] | shifted[1] | shifted[0])  # noqa: E731
    lanes = _round_and_pack(ops, spec, sign, exp, shifted[4:], gs)
    return apply_special_masks(BfpVector(spec, ops, tuple(lanes)), x, y, "sub" if subtract else "add")


def bfp_add(x: BfpVector, y: BfpVector) -> BfpVector:
    return _add(x, y, subtract=False)


def bfp_sub(x: BfpVector, y: BfpVector) -> BfpVector:
    return _add(x, y, subtract=True)


def bfp_mul(x: BfpVector, y: BfpVector) -> BfpVector:
    x.check_compatible(y)
    ops, spec = x.ops, x.spec
    p = spec.precision
    e = spec.exp_bits
    ew = exp_width(spec)
    rn = spec.rounding is Rounding.RN
    a, b = _operand(x), _operand(y)
    sign = a.sign ^ b.sign

    prod = mul_shift_add(ops, a.sig, b.sig)
    normed, lz, _ = normalize_left(ops, prod)
    lz = zero_extend(ops, lz, ew)

    # ex + ey - bias in one pass: carry-in supplies the +1 and the
    # remaining -2**(e-1) only touches the lanes from e-1 upward
    expsum, _ = ripple_add(ops, zero_extend(ops, a.exp, ew), zero_extend(ops, b.exp, ew), ops.ones)
    upper = _add_const(ops, expsum[e - 1:], -1)
    biased = expsum[: e - 1] + upper

    neg = biased[-1]
    underflow = neg | less_than(ops, biased, lz)
    exp_norm, _ = ripple_sub(ops, biased, lz)
    exp_norm, _ = increment(ops, exp_norm, ops.ones)

    # subnormal results: shift so the exponent reads exactly 1
    nneg = ops.not_(neg)
    right = [t & neg for t in negate(ops, biased)]
    left = [t & nneg for t in biased]
    low, lost = var_shift_right(ops, prod, right, collect_sticky=rn)
    low = var_shift_left(ops, low, left)

    res = [mux(underflow, p_, q) for p_, q in zip(low, normed)]
    one = const_field(ops, 1, ew)
    exp = [mux(underflow, p_, q) for p_, q in zip(one, exp_norm)]
    gs = lambda: GuardState(res[p - 1], or_reduce(ops, res[: p - 1]) | (lost & underflow))  # noqa: E731
    lanes = _round_and_pack(ops, spec, sign, exp, res[p:], gs)
    return apply_special_masks(BfpVector(spec, ops, tuple(lanes)), x, y, "mul")


def bfp_div(x: BfpVector, y: BfpVector) -> BfpVector:
    x.check_compatible(y)
    ops, spec = x.ops, x.spec
    p = spec.precision
    ew = exp_width(spec)
    rn = spec.rounding is Rounding.RN
    a, b = _operand(x), _operand(y)
    sign = a.sign ^ b.sign

    # normalize subnormal operands, then pre-shift the dividend so the
    # quotient lands in [1, 2)
    mx, cx, _ = normalize_left(ops, a.sig)
    my, cy, _ = normalize_left(ops, b.sig)
    lt = less_than(ops, mx, my)
    nlt = ops.not_(lt)
    num = [mx[0] & nlt] + [mux(lt, mx[i - 1], mx[i]) for i in range(1, p)] + [mx[p - 1] & lt]

    # ex - cx - ey + cy + bias - lt
    top, _ = ripple_add(ops, zero_extend(ops, a.exp, ew), zero_extend(ops, cy, ew))
    bottom, _ = ripple_add(ops, zero_extend(ops, b.exp, ew), zero_extend(ops, cx, ew))
    exp, _ = ripple_add(ops, top, [ops.not_(t) for t in bottom], nlt)
    exp = _add_const(ops, exp, spec.bias)

    quot, rem_nz = restoring_div(ops, num, my, p + 1 if rn else p)

    underflow = exp[-1] | ops.not_(or_reduce(ops, exp))
    right, _ = ripple_sub(ops, const_field(ops, 1, ew), exp)
    right = [t & underflow for t in right]
    quot, lost = var_shift_right(ops, quot, right, collect_sticky=rn)
    one = const_field(ops, 1, ew)
    exp = [mux(underflow, p_, q) for p_, q in zip(one, exp)]
    if rn:
        sig = quot[1:]
        gs = lambda: GuardState(quot[0], lost | rem_nz)  # noqa: E731
    else:
        sig, gs = quot, None
    lanes = _round_and_pack(ops, spec, sign, exp, sig, gs)
    return apply_special_masks(BfpVector(spec, ops, tuple(lanes)), x, y, "div")


BFP_OPS = {"add": bfp_add, "sub": bfp_sub, "mul": bfp_mul, "div": bfp_div}
