"""Numeric primitives shared by every stage of the flow.

Constants are plain Python integers.  Signed values use two's complement
over ``mbw + 1`` bits; digit vectors are stored LSB first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class ConstantError(ValueError):
    """Raised for an unusable set of target constants."""


def clog2(v: int) -> int:
    """Smallest ``b`` with ``2**b >= v`` (``v >= 1``)."""
    if v < 1:
        raise ValueError(f"clog2 undefined for {v}")
    return (v - 1).bit_length()


def signed_width(lo: int, hi: int) -> int:
    """Bits needed to hold every integer of ``[lo, hi]`` in two's complement."""
    w = 1
    while not (-(1 << (w - 1)) <= lo and hi <= (1 << (w - 1)) - 1):
        w += 1
    return w


def to_twos(v: int, width: int) -> int:
    return v & ((1 << width) - 1)


def from_twos(u: int, width: int) -> int:
    u &= (1 << width) - 1
    return u - (1 << width) if u >> (width - 1) else u


@dataclass(frozen=True)
class ConstantSet:
    """Ordered target constants with their derived widths.

    ``m`` is the select-input width and ``mbw`` the maximum constant
    bit-width; every target fits in ``mbw + 1`` signed bits.
    """

    targets: tuple[int, ...]
    ibw: int
    n: int = field(init=False)
    m: int = field(init=False)
    mbw: int = field(init=False)

    def __post_init__(self):
        targets = tuple(int(c) for c in self.targets)
        object.__setattr__(self, "targets", targets)
        if not targets:
            raise ConstantError("empty constant list")
        if len(set(targets)) != len(targets):
            dups = sorted({c for c in targets if targets.count(c) > 1})
            raise ConstantError(f"duplicate constants: {dups}")
        if 0 in targets:
            raise ConstantError("zero is not a valid target constant")
        if self.ibw < 1:
            raise ConstantError(f"ibw must be >= 1, got {self.ibw}")
        n = len(targets)
        mbw = max(1, clog2(max(abs(c) for c in targets)))
        # ceil(log2) undercounts a positive power of two by one bit
        if max(targets) > (1 << mbw) - 1:
            mbw += 1
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", clog2(n) if n > 1 else 0)
        object.__setattr__(self, "mbw", mbw)

    @property
    def lo(self) -> int:
        """Lowest value of the decoy range."""
        return -(1 << self.mbw)

    @property
    def hi(self) -> int:
        return (1 << self.mbw) - 1

    @property
    def x_range(self) -> tuple[int, int]:
        return -(1 << (self.ibw - 1)), (1 << (self.ibw - 1)) - 1


def constant_set_new(values: Iterable[int], ibw: int) -> ConstantSet:
    return ConstantSet(tuple(values), ibw)


@dataclass(frozen=True)
class DigitVector:
    """Signed-digit expansion, ``digits[t]`` weighs ``2**t``.

    ``negative`` is the explicit sign used by the binary (sign-magnitude)
    form; CSD vectors carry their sign in the digits and leave it False.
    """

    digits: tuple[int, ...]
    negative: bool = False

    @property
    def width(self) -> int:
        return len(self.digits)

    @property
    def value(self) -> int:
        v = sum(d << t for t, d in enumerate(self.digits))
        return -v if self.negative else v

    def nonzero(self) -> list[tuple[int, int]]:
        """``(position, digit)`` pairs of the nonzero digits, LSB first."""
        return [(t, d) for t, d in enumerate(self.digits) if d]

    def __str__(self) -> str:
        sym = {1: "1", 0: "0", -1: "-"}
        s = "".join(sym[d] for d in reversed(self.digits))
        return ("-" if self.negative else "") + s


def to_binary_digits(c: int, width: int) -> DigitVector:
    mag = abs(c)
    if mag >= 1 << width:
        raise OverflowError(f"|{c}| does not fit in {width} bits")
    digits = tuple((mag >> t) & 1 for t in range(width))
    return DigitVector(digits, negative=c < 0)


def to_csd(c: int) -> DigitVector:
    digits = []
    while c:
        if c & 1:
            d = 2 - (c & 3)  # +1 when c = 1 mod 4, -1 when c = 3 mod 4
            c -= d
        else:
            d = 0
        digits.append(d)
        c >>= 1
    return DigitVector(tuple(digits))


def hamming(a: int, b: int, width: int) -> int:
    """Bit positions in which ``a`` and ``b`` differ over ``width`` bits."""
    for v in (a, b):
        if not -(1 << (width - 1)) <= v < (1 << width):
            raise OverflowError(f"{v} not representable in {width} bits")
    return (to_twos(a, width) ^ to_twos(b, width)).bit_count()


def bits_of(v: int, width: int) -> list[int]:
    """Two's-complement bits of ``v``, LSB first."""
    u = to_twos(v, width)
    return [(u >> t) & 1 for t in range(width)]


def int_of(bits: Sequence[int], signed: bool = True) -> int:
    u = sum((b & 1) << t for t, b in enumerate(bits))
    return from_twos(u, len(bits)) if signed and bits else u
