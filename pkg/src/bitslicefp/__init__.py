"""Bitslice vector arithmetic on custom-precision floating point."""

from .arith import apply_special_masks, bfp_add, bfp_div, bfp_mul, bfp_sub, round_stage
from .config import generate, parse_config, render_config
from .format import (
    FP8,
    FP16,
    FP32,
    BfpVector,
    FormatSpec,
    FPClass,
    Rounding,
    Subnormals,
    classify,
    decode_scalar,
    encode_scalar,
    pack,
    pack_many,
    unpack,
    unpack_many,
)
from .lanes import CountingLaneOps, LaneOps, OpCounter

__version__ = "0.1.0"

__all__ = [
    "FP8",
    "FP16",
    "FP32",
    "BfpVector",
    "CountingLaneOps",
    "FPClass",
    "FormatSpec",
    "LaneOps",
    "OpCounter",
    "Rounding",
    "Subnormals",
    "apply_special_masks",
    "bfp_add",
    "bfp_div",
    "bfp_mul",
    "bfp_sub",
    "classify",
    "decode_scalar",
    "encode_scalar",
    "generate",
    "pack",
    "pack_many",
    "parse_config",
    "render_config",
    "round_stage",
    "unpack",
    "unpack_many",
]
