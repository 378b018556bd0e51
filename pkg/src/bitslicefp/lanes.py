"""Lane primitives: W-bit words where bit k belongs to vector element k.

A plain lane is a Python ``int`` in ``[0, 2**W)``. Circuits are written with
the ``&``, ``|`` and ``^`` operators plus ``ops.not_``, so swapping in
:class:`CountingLaneOps` (whose lanes overload those operators) instruments a
circuit without touching its code or adding branches to the plain path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

__all__ = [
    "MIN_WIDTH",
    "MAX_WIDTH",
    "LaneOps",
    "CountingLane",
    "CountingLaneOps",
    "OpCounter",
    "Lane",
    "check_width",
    "mux",
]

MIN_WIDTH = 8
MAX_WIDTH = 1024


def check_width(width: int) -> int:
    if not isinstance(width, int) or isinstance(width, bool):
        raise TypeError(f"lane width must be an int, got {type(width).__name__}")
    if width < MIN_WIDTH or width > MAX_WIDTH or width & (width - 1):
        raise ValueError(
            f"lane width must be a power of two in [{MIN_WIDTH}, {MAX_WIDTH}], got {width}"
        )
    return width


class LaneOps:
    """Constants and the NOT primitive for plain integer lanes of one width."""

    counting = False

    def __init__(self, width: int):
        self.width = check_width(width)
        self.mask = (1 << width) - 1
        self.zeros = 0
        self.ones = self.mask
        # bound builtin: NOT without a Python-level call frame
        self.not_ = self.mask.__xor__

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.width})"

    def __eq__(self, other: object) -> bool:
        return type(other) is type(self) and other.width == self.width

    def __hash__(self) -> int:
        return hash((type(self), self.width))

    def lane(self, bits: int) -> int:
        if bits < 0 or bits > self.mask:
            raise ValueError(f"lane value {bits:#x} does not fit in {self.width} bits")
        return bits

    def bits(self, lane) -> int:
        """Raw integer content of a lane."""
        return lane

    def and_(self, a, b):
        return a & b

    def or_(self, a, b):
        return a | b

    def xor(self, a, b):
        return a ^ b

    def all_zeros(self):
        return self.zeros

    def all_ones(self):
        return self.ones


@dataclass
class OpCounter:
    and_count: int = 0
    or_count: int = 0
    xor_count: int = 0
    not_count: int = 0

    @property
    def total(self) -> int:
        return self.and_count + self.or_count + self.xor_count + self.not_count

    def reset(self) -> None:
        self.and_count = self.or_count = self.xor_count = self.not_count = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "and": self.and_count,
            "or": self.or_count,
            "xor": self.xor_count,
            "not": self.not_count,
            "total": self.total,
        }


class CountingLane:
    """Lane that tallies every bitwise operation into a shared counter."""

    __slots__ = ("bits", "counter")

    def __init__(self, bits: int, counter: OpCounter):
        self.bits = bits
        self.counter = counter

    def _other(self, other) -> int:
        if type(other) is not CountingLane:
            raise TypeError("counting lanes cannot be mixed with plain lanes")
        return other.bits

    def __and__(self, other):
        self.counter.and_count += 1
        return CountingLane(self.bits & self._other(other), self.counter)

    def __or__(self, other):
        self.counter.or_count += 1
        return CountingLane(self.bits | self._other(other), self.counter)

    def __xor__(self, other):
        self.counter.xor_count += 1
        return CountingLane(self.bits ^ self._other(other), self.counter)

    def __eq__(self, other) -> bool:
        return type(other) is CountingLane and other.bits == self.bits

    def __hash__(self) -> int:
        return hash(self.bits)

    def __repr__(self) -> str:
        return f"CountingLane({self.bits:#x})"


class CountingLaneOps(LaneOps):
    """Lane ops whose lanes count AND/OR/XOR/NOT into ``self.counter``.

    Each instance owns its counter, so concurrent counted evaluations on
    separate instances never interfere.
    """

    counting = True

    def __init__(self, width: int, counter: OpCounter | None = None):
        super().__init__(width)
        self.counter = counter if counter is not None else OpCounter()
        self.zeros = CountingLane(0, self.counter)
        self.ones = CountingLane(self.mask, self.counter)
        self.not_ = self._not

    def _not(self, a: CountingLane) -> CountingLane:
        self.counter.not_count += 1
        return CountingLane(a.bits ^ self.mask, self.counter)

    def lane(self, bits: int) -> CountingLane:
        return CountingLane(super().lane(bits), self.counter)

    def bits(self, lane: CountingLane) -> int:
        return lane.bits


Lane = Union[int, CountingLane]


def mux(sel, a, b):
    """Per bit: ``a`` where ``sel`` is set, else ``b``. Three gates."""
    return b ^ (sel & (a ^ b))
