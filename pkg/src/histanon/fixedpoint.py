"""Q16.16 weights and a 48.16 accumulator for segment counting.

Weights are 32-bit raw integers with 16 fractional bits, so a full user
contribution is ``1 << 16``. Accumulators keep the same 16 fractional bits
in a 64-bit word; integer addition keeps accumulation exact and
order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

FRAC_BITS = 16
ONE = 1 << FRAC_BITS
_W_MAX = (1 << 32) - 1
_A_MAX = (1 << 64) - 1


@dataclass(frozen=True, order=True)
class Weight16_16:
    raw: int

    def __post_init__(self) -> None:
        if not 0 <= self.raw <= _W_MAX:
            raise OverflowError(f"Q16.16 raw value out of range: {self.raw}")

    def __float__(self) -> float:
        return self.raw / 65536.0


@dataclass(frozen=True, order=True)
class Accum48_16:
    raw: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.raw <= _A_MAX:
            raise OverflowError(f"accumulator raw value out of range: {self.raw}")

    def __float__(self) -> float:
        return self.raw / 65536.0

    def __add__(self, w: Weight16_16) -> "Accum48_16":
        return accum_add(self, w)


def weight_unit() -> Weight16_16:
    return Weight16_16(ONE)


def reciprocal(h: int) -> Weight16_16:
    """1/h truncated toward zero: ``raw = floor(2**16 / h)``."""
    if h < 1:
        raise ValueError(f"reciprocal needs h >= 1, got {h}")
    return Weight16_16(ONE // h)


def accum_add(a: Accum48_16, w: Weight16_16) -> Accum48_16:
    raw = a.raw + w.raw
    if raw > _A_MAX:
        raise OverflowError("64-bit segment accumulator overflow")
    return Accum48_16(raw)


def meets_threshold(a: Accum48_16 | int, k: int) -> bool:
    """Exact integer test ``a >= k``; accepts an accumulator or its raw value."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    raw = a.raw if isinstance(a, Accum48_16) else a
    return raw >= k << FRAC_BITS


def to_float(x: Weight16_16 | Accum48_16 | int) -> float:
    raw = x if isinstance(x, int) else x.raw
    return raw / 65536.0
