"""Standard <-> bitslice transposition of unsigned integer arrays.

``to_lanes`` turns up to W unsigned integers of ``n_bits`` each into
``n_bits`` W-bit lanes (lane j holds bit j of every element; element k sits at
lane bit k). ``from_lanes`` is its inverse. Both go through ``np.packbits``
with little bit order, so each lane is built in one vectorized step.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .lanes import check_width

__all__ = ["to_lanes", "from_lanes", "to_lanes_naive", "from_lanes_naive", "as_u64"]


def as_u64(values: Iterable[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object or arr.dtype.kind not in "ui":
        arr = np.array([int(v) for v in np.ravel(arr)], dtype=np.uint64)
    return np.ascontiguousarray(arr.ravel().astype(np.uint64, copy=False))


def to_lanes(values, n_bits: int, width: int) -> list[int]:
    check_width(width)
    vals = as_u64(values)
    if len(vals) > width:
        raise ValueError(f"{len(vals)} elements do not fit in lane width {width}")
    if n_bits < 64 and len(vals) and int(vals.max()) >> n_bits:
        raise ValueError(f"value does not fit in {n_bits} bits")
    buf = np.zeros(width, dtype=np.uint64)
    buf[: len(vals)] = vals
    shifts = np.arange(n_bits, dtype=np.uint64)
    bits = ((buf[None, :] >> shifts[:, None]) & np.uint64(1)).astype(np.uint8)
    packed = np.packbits(bits, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def from_lanes(lanes: Sequence[int], width: int, count: int | None = None) -> np.ndarray:
    check_width(width)
    if count is None:
        count = width
    if count > width:
        raise ValueError(f"count {count} exceeds lane width {width}")
    nbytes = width // 8
    if not lanes:
        return np.zeros(count, dtype=np.uint64)
    raw = b"".join(int(lane).to_bytes(nbytes, "little") for lane in lanes)
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(len(lanes), nbytes)
    bits = np.unpackbits(rows, axis=1, bitorder="little")[:, :count].astype(np.uint64)
    shifts = np.arange(len(lanes), dtype=np.uint64)
    return (bits << shifts[:, None]).sum(axis=0, dtype=np.uint64)


def to_lanes_naive(values: Sequence[int], n_bits: int) -> list[int]:
    """Bit-gather reference transposition, one bit at a time."""
    lanes = [0] * n_bits
    for k, v in enumerate(values):
        for j in range(n_bits):
            if (int(v) >> j) & 1:
                lanes[j] |= 1 << k
    return lanes


def from_lanes_naive(lanes: Sequence[int], count: int) -> list[int]:
    out = []
    for k in range(count):
        v = 0
        for j, lane in enumerate(lanes):
            v |= ((int(lane) >> k) & 1) << j
        out.append(v)
    return out
