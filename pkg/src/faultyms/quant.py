"""Uniform symmetric message quantizer and the sign-magnitude word codec.

Levels are addressed by index ``i = 0 .. 2M`` with value ``(i - M) * step``,
where ``M = 2**(bits-1) - 1``.  A stored message is a ``bits``-wide word whose
most significant bit is the sign (1 = negative) and whose remaining bits hold
the magnitude ``g`` in natural binary, so zero has two words ("+0", "-0").
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_BITS = 16


@dataclass(frozen=True)
class QuantGrid:
    bits: int
    step: float = 1.0

    def __post_init__(self):
        if not isinstance(self.bits, (int, np.integer)) or not 2 <= self.bits <= MAX_BITS:
            raise ValueError(f"bits must be an integer in [2, {MAX_BITS}], got {self.bits!r}")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"step must be positive and finite, got {self.step!r}")

    @property
    def max_mag_index(self) -> int:
        return 2 ** (self.bits - 1) - 1

    @property
    def n_levels(self) -> int:
        return 2 * self.max_mag_index + 1

    @property
    def zero_index(self) -> int:
        return self.max_mag_index

    @property
    def n_words(self) -> int:
        return 2 ** self.bits

    @cached_property
    def levels(self) -> np.ndarray:
        M = self.max_mag_index
        return self.step * np.arange(-M, M + 1, dtype=float)

    @cached_property
    def bounds(self) -> np.ndarray:
        """Interval edges; level ``i`` owns ``(bounds[i], bounds[i+1]]``."""
        lv = self.levels
        return np.concatenate([[-np.inf], 0.5 * (lv[:-1] + lv[1:]), [np.inf]])

    def value(self, index: int) -> float:
        self._check_index(index)
        return (index - self.max_mag_index) * self.step

    def mirror_index(self, index: int) -> int:
        self._check_index(index)
        return 2 * self.max_mag_index - index

    def _check_index(self, index):
        if not 0 <= index < self.n_levels:
            raise IndexError(f"level index {index} outside [0, {self.n_levels - 1}]")


def quantize(x: float, grid: QuantGrid) -> int:
    """Level index of ``sign(x) * step * floor(|x|/step + 1/2)``, saturated."""
    if not math.isfinite(x):
        raise ValueError(f"cannot quantize non-finite value {x!r}")
    mag = min(math.floor(abs(x) / grid.step + 0.5), grid.max_mag_index)
    return grid.zero_index + (mag if x >= 0 else -mag)


def quantize_array(x, grid: QuantGrid) -> np.ndarray:
    """Vectorized :func:`quantize` returning signed magnitude indices ``i - M``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot quantize non-finite values")
    mag = np.minimum(np.floor(np.abs(x) / grid.step + 0.5), grid.max_mag_index)
    return np.where(x < 0, -mag, mag).astype(np.int64)


def encode(index: int, grid: QuantGrid, zero_sign: int | None = None) -> int:
    """Sign-magnitude word for a level.

    ``zero_sign`` (+1 or -1) selects "+0" or "-0" and must be given exactly
    when the level is zero.
    """
    grid._check_index(index)
    v = index - grid.zero_index
    if v == 0:
        if zero_sign not in (1, -1):
            raise ValueError("zero level needs zero_sign of +1 or -1")
        sign = 1 if zero_sign < 0 else 0
    else:
        if zero_sign is not None:
            raise ValueError("zero_sign is only valid for the zero level")
        sign = 1 if v < 0 else 0
    return (sign << (grid.bits - 1)) | abs(v)


def decode(word: int, grid: QuantGrid) -> int:
    if not 0 <= word < grid.n_words:
        raise ValueError(f"word {word} is not a {grid.bits}-bit pattern")
    g = word & grid.max_mag_index
    return grid.zero_index - g if word >> (grid.bits - 1) else grid.zero_index + g


def negate(word: int, grid: QuantGrid) -> int:
    return word ^ (1 << (grid.bits - 1))


def decode_words(words: np.ndarray, bits: int) -> np.ndarray:
    """Signed magnitude indices for an array of words."""
    mask = (1 << (bits - 1)) - 1
    g = (words & mask).astype(np.int64)
    return np.where(words >> (bits - 1) != 0, -g, g)


def encode_values(v: np.ndarray, bits: int, rng: np.random.Generator) -> np.ndarray:
    """Words for signed magnitude indices; zeros get a fair random sign bit."""
    v = np.asarray(v, dtype=np.int64)
    neg = v < 0
    zero = v == 0
    if zero.any():
        neg = neg.copy()
        neg[zero] = rng.random(int(zero.sum())) < 0.5
    return (neg.astype(np.int64) << (bits - 1)) | np.abs(v)
