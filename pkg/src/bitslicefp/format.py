"""Custom floating-point formats and their bitslice vectors.

An encoding is a ``1 + e + s`` bit unsigned integer laid out sign, exponent,
fraction from MSB to LSB, with IEEE-754 style special values. A
:class:`BfpVector` stores up to W encodings transposed into ``1 + e + s``
lanes, lane 0 holding every element's fraction LSB and the last lane the signs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .lanes import LaneOps
from .transpose import as_u64, from_lanes, to_lanes

__all__ = [
    "Rounding",
    "Subnormals",
    "FPClass",
    "FormatSpec",
    "ScalarCustom",
    "BfpVector",
    "FP8",
    "FP16",
    "FP32",
    "FP64",
    "classify",
    "decode_fields",
    "encode_scalar",
    "decode_scalar",
    "pack",
    "unpack",
    "pack_many",
    "unpack_many",
    "read_bfpraw",
    "write_bfpraw",
    "bytes_per_encoding",
]


class Rounding(str, enum.Enum):
    RZ = "RZ"  # toward zero
    RN = "RN"  # to nearest, ties to even


class Subnormals(str, enum.Enum):
    GRADUAL = "gradual"
    FTZ = "ftz"


class FPClass(enum.Enum):
    ZERO = "zero"
    SUBNORMAL = "subnormal"
    NORMAL = "normal"
    INF = "inf"
    NAN = "nan"


@dataclass(frozen=True)
class FormatSpec:
    """A sign bit, ``exp_bits`` of biased exponent and ``sig_bits`` stored fraction bits."""

    exp_bits: int
    sig_bits: int
    rounding: Rounding = Rounding.RN
    subnormals: Subnormals = Subnormals.GRADUAL
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rounding", Rounding(self.rounding))
        object.__setattr__(self, "subnormals", Subnormals(self.subnormals))
        if not 2 <= self.exp_bits <= 11:
            raise ValueError(f"exp_bits must be in [2, 11], got {self.exp_bits}")
        if not 1 <= self.sig_bits <= 52:
            raise ValueError(f"sig_bits must be in [1, 52], got {self.sig_bits}")
        if not self.name:
            object.__setattr__(self, "name", f"e{self.exp_bits}s{self.sig_bits}")

    @cached_property
    def total_bits(self) -> int:
        return 1 + self.exp_bits + self.sig_bits

    @cached_property
    def precision(self) -> int:
        """Significand width including the hidden bit."""
        return self.sig_bits + 1

    @cached_property
    def bias(self) -> int:
        return (1 << (self.exp_bits - 1)) - 1

    @cached_property
    def exp_max_field(self) -> int:
        return (1 << self.exp_bits) - 1

    @cached_property
    def emin(self) -> int:
        return 1 - self.bias

    @cached_property
    def ftz(self) -> bool:
        return self.subnormals is Subnormals.FTZ

    @cached_property
    def sign_mask(self) -> int:
        return 1 << (self.exp_bits + self.sig_bits)

    @cached_property
    def frac_mask(self) -> int:
        return (1 << self.sig_bits) - 1

    @cached_property
    def inf(self) -> int:
        return self.exp_max_field << self.sig_bits

    @cached_property
    def nan(self) -> int:
        """The canonical quiet NaN: positive, top fraction bit set."""
        return self.inf | (1 << (self.sig_bits - 1))

    @cached_property
    def max_finite(self) -> int:
        return ((self.exp_max_field - 1) << self.sig_bits) | self.frac_mask

    def with_rounding(self, rounding) -> "FormatSpec":
        return FormatSpec(self.exp_bits, self.sig_bits, rounding, self.subnormals, self.name)

    def __str__(self) -> str:
        return (
            f"{self.name}(1,{self.exp_bits},{self.sig_bits},"
            f"{self.rounding.value},{self.subnormals.value})"
        )


FP8 = FormatSpec(4, 3, name="fp8")
FP16 = FormatSpec(5, 10, name="fp16")
FP32 = FormatSpec(8, 23, name="fp32")
FP64 = FormatSpec(11, 52, name="fp64")


class ScalarCustom(NamedTuple):
    sign: int
    biased_exp: int
    fraction: int
    cls: FPClass


def decode_fields(enc: int, spec: FormatSpec) -> ScalarCustom:
    enc = int(enc)
    if enc < 0 or enc >> spec.total_bits:
        raise ValueError(f"encoding {enc:#x} has more than {spec.total_bits} bits")
    sign = enc >> (spec.exp_bits + spec.sig_bits)
    biased = (enc >> spec.sig_bits) & spec.exp_max_field
    frac = enc & spec.frac_mask
    if biased == spec.exp_max_field:
        cls = FPClass.NAN if frac else FPClass.INF
    elif biased == 0:
        cls = FPClass.SUBNORMAL if frac else FPClass.ZERO
    else:
        cls = FPClass.NORMAL
    return ScalarCustom(sign, biased, frac, cls)


def classify(enc: int, spec: FormatSpec) -> FPClass:
    return decode_fields(enc, spec).cls


def decode_scalar(enc: int, spec: FormatSpec) -> float:
    """Exact value of an encoding as a binary64 float."""
    sign, biased, frac, cls = decode_fields(enc, spec)
    if cls is FPClass.NAN:
        return math.nan
    if cls is FPClass.INF:
        return -math.inf if sign else math.inf
    if cls is FPClass.NORMAL:
        value = math.ldexp(frac | (1 << spec.sig_bits), biased - spec.bias - spec.sig_bits)
    else:
        value = math.ldexp(frac, spec.emin - spec.sig_bits)
    return -value if sign else value


def encode_scalar(x: float, spec: FormatSpec) -> int:
    """Round a binary64 value into ``spec`` under its rounding and subnormal policy."""
    from .oracle import ExtendedValue, round_extended

    x = float(x)
    if math.isnan(x):
        return spec.nan
    sign = 1 if math.copysign(1.0, x) < 0 else 0
    if math.isinf(x):
        return spec.inf | (spec.sign_mask if sign else 0)
    if x == 0.0:
        return spec.sign_mask if sign else 0
    mant, exp = math.frexp(abs(x))
    sig = int(math.ldexp(mant, 53))
    return round_extended(ExtendedValue(sign, exp - 53, sig), spec, spec.rounding)


@dataclass(frozen=True)
class BfpVector:
    """W custom-precision floats in bitslice layout."""

    spec: FormatSpec
    ops: LaneOps
    lanes: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.lanes) != self.spec.total_bits:
            raise ValueError(
                f"{self.spec} needs {self.spec.total_bits} lanes, got {len(self.lanes)}"
            )

    @property
    def width(self) -> int:
        return self.ops.width

    @property
    def fraction(self) -> tuple:
        return self.lanes[: self.spec.sig_bits]

    @property
    def exponent(self) -> tuple:
        s = self.spec.sig_bits
        return self.lanes[s: s + self.spec.exp_bits]

    @property
    def sign(self):
        return self.lanes[-1]

    def check_compatible(self, other: "BfpVector") -> None:
        if other.spec != self.spec:
            raise ValueError(f"format mismatch: {self.spec} vs {other.spec}")
        if other.ops != self.ops:
            raise ValueError(f"lane mismatch: {self.ops} vs {other.ops}")


def _ops_for(width: int | None, ops: LaneOps | None) -> LaneOps:
    if ops is not None:
        if width is not None and width != ops.width:
            raise ValueError(f"width {width} disagrees with {ops}")
        return ops
    if width is None:
        raise ValueError("pass a lane width or a LaneOps")
    return LaneOps(width)


def _check_encodings(arr: np.ndarray, spec: FormatSpec) -> None:
    if spec.total_bits < 64 and len(arr) and int(arr.max()) >> spec.total_bits:
        raise ValueError(f"encoding exceeds {spec.total_bits} bits for {spec}")


def pack(encodings, spec: FormatSpec, width: int | None = None, ops: LaneOps | None = None) -> BfpVector:
    """Transpose up to W encodings into one bitslice vector (zero filled)."""
    ops = _ops_for(width, ops)
    arr = as_u64(encodings)
    if len(arr) > ops.width:
        raise ValueError(f"{len(arr)} encodings do not fit in lane width {ops.width}")
    _check_encodings(arr, spec)
    raw = to_lanes(arr, spec.total_bits, ops.width)
    return BfpVector(spec, ops, tuple(ops.lane(bits) for bits in raw))


def unpack(v: BfpVector, count: int | None = None) -> np.ndarray:
    """First ``count`` encodings of ``v`` (all W by default) as uint64."""
    if count is not None and count > v.width:
        raise ValueError(f"count {count} exceeds lane width {v.width}")
    return from_lanes([v.ops.bits(lane) for lane in v.lanes], v.width, count)


def pack_many(encodings, spec: FormatSpec, width: int | None = None, ops: LaneOps | None = None) -> list[BfpVector]:
    """Pack an arbitrarily long array as consecutive W-element vectors."""
    ops = _ops_for(width, ops)
    arr = as_u64(encodings)
    _check_encodings(arr, spec)
    w = ops.width
    nvec = -(-len(arr) // w)
    if nvec == 0:
        return []
    buf = np.zeros(nvec * w, dtype=np.uint64)
    buf[: len(arr)] = arr
    buf = buf.reshape(nvec, w)
    n = spec.total_bits
    shifts = np.arange(n, dtype=np.uint64)
    bits = ((buf[:, None, :] >> shifts[None, :, None]) & np.uint64(1)).astype(np.uint8)
    packed = np.packbits(bits, axis=2, bitorder="little")
    return [
        BfpVector(spec, ops, tuple(ops.lane(int.from_bytes(row.tobytes(), "little")) for row in vec))
        for vec in packed
    ]


def unpack_many(vectors: Sequence[BfpVector], count: int | None = None) -> np.ndarray:
    if not vectors:
        return np.zeros(0, dtype=np.uint64)
    out = np.concatenate([unpack(v) for v in vectors])
    return out if count is None else out[:count]


def bytes_per_encoding(spec: FormatSpec) -> int:
    return -(-spec.total_bits // 8)


def read_bfpraw(data: bytes, spec: FormatSpec) -> np.ndarray:
    """Decode contiguous little-endian encodings of ``ceil(bits/8)`` bytes each."""
    size = bytes_per_encoding(spec)
    if len(data) % size:
        raise ValueError(f"{len(data)} bytes is not a multiple of {size}-byte encodings")
    rows = np.frombuffer(data, dtype=np.uint8).reshape(-1, size).astype(np.uint64)
    weights = np.uint64(8) * np.arange(size, dtype=np.uint64)
    arr = (rows << weights[None, :]).sum(axis=1, dtype=np.uint64)
    _check_encodings(arr, spec)
    return arr


def write_bfpraw(encodings, spec: FormatSpec) -> bytes:
    arr = as_u64(encodings)
    _check_encodings(arr, spec)
    size = bytes_per_encoding(spec)
    return arr.astype("<u8").view(np.uint8).reshape(-1, 8)[:, :size].tobytes()
