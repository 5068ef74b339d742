"""Gray-coded QAM mapping."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .const import MODULATION_ORDERS
from .exceptions import DomainError, SizeError

# 2-bit Gray code per axis: sign bit first, then magnitude bit
_PAM4_LEVELS = np.array([3.0, 1.0, -3.0, -1.0])  # labels 00, 01, 10, 11


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-average-power Gray constellation; points[label] is the symbol of label."""

    order: int
    points: np.ndarray

    @property
    def bits_per_symbol(self) -> int:
        return int(self.order).bit_length() - 1

    def labels(self, bits: np.ndarray) -> np.ndarray:
        """Pack bits (MSB first) into integer labels."""
        bits = np.asarray(bits, dtype=np.int64).reshape(-1)
        width = self.bits_per_symbol
        if bits.size % width:
            raise SizeError(f"{bits.size} bits is not a multiple of {width}")
        if np.any((bits != 0) & (bits != 1)):
            raise DomainError("bits must be 0 or 1")
        return bits.reshape(-1, width) @ (1 << np.arange(width)[::-1])

    def bits(self, labels: np.ndarray) -> np.ndarray:
        """Unpack integer labels into bits (MSB first)."""
        labels = np.asarray(labels, dtype=np.int64).reshape(-1, 1)
        shifts = np.arange(self.bits_per_symbol)[::-1]
        return ((labels >> shifts) & 1).astype(np.int8).reshape(-1)

    def decide(self, symbols: np.ndarray) -> np.ndarray:
        """Labels of the nearest points; ties go to the lower label."""
        symbols = np.asarray(symbols, dtype=np.complex128).reshape(-1, 1)
        distances = np.abs(symbols - self.points[None, :]) ** 2
        return np.argmin(distances, axis=1)


@lru_cache(maxsize=None)
def constellation(order: int) -> Constellation:
    """Return the Gray constellation of a supported order."""
    if order == 4:
        # 00, 01, 11, 10 counterclockwise from the first quadrant
        points = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2)
    elif order == 16:
        labels = np.arange(16)
        points = (_PAM4_LEVELS[labels >> 2] + 1j * _PAM4_LEVELS[labels & 3]) / np.sqrt(10)
    else:
        raise DomainError(f"modulation order {order} not in {MODULATION_ORDERS}")
    points.setflags(write=False)
    return Constellation(order, points)


def qam_modulate(bits: np.ndarray, order: int) -> np.ndarray:
    """Map bits to unit-average-power Gray QAM symbols."""
    const = constellation(order)
    return const.points[const.labels(bits)]


def qam_demodulate(symbols: np.ndarray, order: int) -> np.ndarray:
    """Hard minimum-distance demapping of symbols to bits."""
    const = constellation(order)
    return const.bits(const.decide(symbols))
