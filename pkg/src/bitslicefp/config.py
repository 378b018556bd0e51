"""Flat ``key=value`` format configs and the per-format library generator."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .format import FormatSpec, Rounding, Subnormals, bytes_per_encoding
from .lanes import MAX_WIDTH, check_width

__all__ = [
    "ConfigError",
    "FormatConfig",
    "DEFAULT_LANE_WIDTH",
    "ENTRY_POINTS",
    "load_config",
    "parse_config",
    "render_config",
    "resolve_lane_width",
    "generate",
]

DEFAULT_LANE_WIDTH = MAX_WIDTH
ENTRY_POINTS = ("pack", "unpack", "add", "sub", "mul", "div")
REQUIRED = ("exp_bits", "sig_bits", "rounding")
KNOWN = ("name", "exp_bits", "sig_bits", "rounding", "subnormals", "lane_width")
_BOUNDS = {"exp_bits": (2, 11), "sig_bits": (1, 52)}


class ConfigError(ValueError):
    def __init__(self, line: int, message: str, source: str = "<config>"):
        self.line = line
        self.source = source
        super().__init__(f"{source}:{line}: {message}")


@dataclass(frozen=True)
class FormatConfig:
    spec: FormatSpec
    lane_width: int | None = None


def _int_value(key: str, raw: str, lineno: int, source: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        raise ConfigError(lineno, f"{key} must be an integer, got {raw!r}", source) from None


def load_config(text: str, source: str = "<config>") -> FormatConfig:
    values: dict[str, tuple[str, int]] = {}
    lines = text.splitlines()
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(lineno, f"expected key=value, got {body!r}", source)
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KNOWN:
            raise ConfigError(lineno, f"unknown key {key!r}", source)
        if key in values:
            raise ConfigError(lineno, f"duplicate key {key!r} (first set on line {values[key][1]})", source)
        values[key] = (raw, lineno)

    for key in REQUIRED:
        if key not in values:
            raise ConfigError(len(lines) + 1, f"missing required key {key!r}", source)

    widths = {}
    for key, (lo, hi) in _BOUNDS.items():
        raw, lineno = values[key]
        v = _int_value(key, raw, lineno, source)
        if v < lo:
            raise ConfigError(lineno, f"{key}={v} is below the minimum {lo}", source)
        if v > hi:
            raise ConfigError(lineno, f"{key}={v} exceeds the maximum {hi}", source)
        widths[key] = v

    raw, lineno = values["rounding"]
    try:
        rounding = Rounding(raw.upper())
    except ValueError:
        raise ConfigError(lineno, f"rounding must be RZ or RN, got {raw!r}", source) from None

    subnormals = Subnormals.GRADUAL
    if "subnormals" in values:
        raw, lineno = values["subnormals"]
        try:
            subnormals = Subnormals(raw.lower())
        except ValueError:
            raise ConfigError(lineno, f"subnormals must be gradual or ftz, got {raw!r}", source) from None

    lane_width = None
    if "lane_width" in values:
        raw, lineno = values["lane_width"]
        lane_width = _int_value("lane_width", raw, lineno, source)
        try:
            check_width(lane_width)
        except ValueError as exc:
            raise ConfigError(lineno, str(exc), source) from None

    name = ""
    if "name" in values:
        name, lineno = values["name"]
        if not name.isidentifier():
            raise ConfigError(lineno, f"name must be an identifier, got {name!r}", source)

    spec = FormatSpec(widths["exp_bits"], widths["sig_bits"], rounding, subnormals, name)
    return FormatConfig(spec, lane_width)


def parse_config(text: str, source: str = "<config>") -> FormatSpec:
    return load_config(text, source).spec


def render_config(spec: FormatSpec, lane_width: int | None = None) -> str:
    lines = [
        f"name={spec.name}",
        f"exp_bits={spec.exp_bits}",
        f"sig_bits={spec.sig_bits}",
        f"rounding={spec.rounding.value}",
        f"subnormals={spec.subnormals.value}",
    ]
    if lane_width is not None:
        lines.append(f"lane_width={lane_width}")
    return "\n".join(lines) + "\n"


def resolve_lane_width(explicit: int | None = None, configured: int | None = None) -> int:
    """Command line beats config, config beats ``BFP_LANE_WIDTH``, which beats the default."""
    for width in (explicit, configured):
        if width is not None:
            return check_width(width)
    env = os.environ.get("BFP_LANE_WIDTH")
    if env:
        try:
            return check_width(int(env))
        except ValueError as exc:
            raise ValueError(f"BFP_LANE_WIDTH: {exc}") from None
    return DEFAULT_LANE_WIDTH


_INTERFACE = '''"""Bitslice vector interface specialized for {name}: 1 sign, {e} exponent, {s} fraction bits.

Rounding {rounding}, {subnormals} underflow, {width}-element vectors.
Generated by bitslicefp; regenerate instead of editing.
"""

from bitslicefp import arith as _arith
from bitslicefp import format as _format
from bitslicefp.lanes import LaneOps as _LaneOps

SPEC = _format.FormatSpec(
    exp_bits={e}, sig_bits={s}, rounding="{rounding}", subnormals="{subnormals}", name="{name}"
)
LANE_WIDTH = {width}
OPS = _LaneOps(LANE_WIDTH)


def pack(encodings):
    return _format.pack(encodings, SPEC, ops=OPS)


def unpack(vector, count=None):
    return _format.unpack(vector, count)


def add(x, y):
    return _arith.bfp_add(x, y)


def sub(x, y):
    return _arith.bfp_sub(x, y)


def mul(x, y):
    return _arith.bfp_mul(x, y)


def div(x, y):
    return _arith.bfp_div(x, y)
'''

INTERFACE_FILE = "interface.py"
MANIFEST_FILE = "manifest.json"


def generate(spec: FormatSpec, out_dir, lane_width: int | None = None) -> dict:
    """Write ``manifest.json`` plus a specialized ``interface.py`` into ``out_dir``.

    Output is deterministic: regenerating yields byte-identical files.
    """
    width = resolve_lane_width(configured=lane_width)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "name": spec.name,
        "exp_bits": spec.exp_bits,
        "sig_bits": spec.sig_bits,
        "total_bits": spec.total_bits,
        "bias": spec.bias,
        "rounding": spec.rounding.value,
        "subnormals": spec.subnormals.value,
        "lane_width": width,
        "lanes_per_vector": spec.total_bits,
        "bytes_per_encoding": bytes_per_encoding(spec),
        "entry_points": list(ENTRY_POINTS),
        "interface": INTERFACE_FILE,
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (out / INTERFACE_FILE).write_text(
        _INTERFACE.format(
            name=spec.name,
            e=spec.exp_bits,
            s=spec.sig_bits,
            rounding=spec.rounding.value,
            subnormals=spec.subnormals.value,
            width=width,
        )
    )
    return manifest
