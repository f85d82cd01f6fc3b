"""I.i.d. bit-flip read errors on sign-magnitude message words."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .quant import QuantGrid, MAX_BITS


def _check_delta(delta: float, upper: float = 0.5) -> float:
    delta = float(delta)
    if not 0.0 <= delta <= upper:
        raise ValueError(f"crossover probability must lie in [0, {upper}], got {delta}")
    return delta


def pattern_error_prob(e: int, delta: float, bits: int) -> float:
    """Probability that a read applies error word ``e``."""
    delta = _check_delta(delta)
    w = bin(e).count("1")
    return delta**w * (1.0 - delta) ** (bits - w)


@lru_cache(maxsize=64)
def _transition(delta: float, bits: int) -> np.ndarray:
    words = np.arange(2**bits, dtype=np.uint32)
    d = np.bitwise_count(words[:, None] ^ words[None, :]).astype(float)
    T = delta**d * (1.0 - delta) ** (bits - d)
    T.flags.writeable = False
    return T


@lru_cache(maxsize=64)
def _level_kernel(delta: float, bits: int) -> np.ndarray:
    # level -> word (zero splits evenly onto +0/-0), words -> words, word -> level
    M = 2 ** (bits - 1) - 1
    L = 2 * M + 1
    words = np.arange(2**bits)
    g = words & M
    word_level = np.where(words >> (bits - 1) != 0, M - g, M + g)
    lift = np.zeros((L, 2**bits))
    for i in range(L):
        v = i - M
        if v == 0:
            lift[i, 0] = lift[i, 1 << (bits - 1)] = 0.5
        else:
            lift[i, (1 << (bits - 1)) | -v if v < 0 else v] = 1.0
    collapse = np.zeros((2**bits, L))
    collapse[words, word_level] = 1.0
    K = lift @ _transition(delta, bits) @ collapse
    K.flags.writeable = False
    return K


@dataclass(frozen=True)
class FaultChannel:
    delta: float
    bits: int
    transition: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", _check_delta(self.delta))
        if not 2 <= self.bits <= MAX_BITS:
            raise ValueError(f"bits must lie in [2, {MAX_BITS}]")
        object.__setattr__(self, "transition", _transition(self.delta, self.bits))

    @property
    def level_kernel(self) -> np.ndarray:
        """Row-stochastic level-to-level matrix of the read fault."""
        return _level_kernel(self.delta, self.bits)


def corrupt_pmf(pmf, channel: FaultChannel):
    """Distribution of a stored message after one faulty read.

    Accepts a :class:`~faultyms.de.LevelPmf` (returns one) or a bare mass
    vector over the level alphabet (returns an array).
    """
    from .de import LevelPmf

    if isinstance(pmf, LevelPmf):
        if pmf.grid.bits != channel.bits:
            raise ValueError(f"bit width mismatch: pmf has {pmf.grid.bits}, channel {channel.bits}")
        return LevelPmf(pmf.grid, pmf.mass @ channel.level_kernel)
    mass = np.asarray(pmf, dtype=float)
    if mass.shape != (2**channel.bits - 1,):
        raise ValueError(f"mass vector of length {mass.shape} does not match {channel.bits} bits")
    return mass @ channel.level_kernel


def corrupt_words(words, delta: float, bits: int, rng: np.random.Generator) -> np.ndarray:
    """XOR each word with an error word of i.i.d. Bernoulli(delta) bits.

    ``delta`` up to 1 is accepted here so tests can probe the complement case.
    """
    delta = _check_delta(delta, upper=1.0)
    words = np.asarray(words)
    if delta == 0.0:
        return words.copy()
    flips = rng.random(words.shape + (bits,)) < delta
    err = flips @ (1 << np.arange(bits))
    return words ^ err.astype(words.dtype)


def corrupt_message(word: int, channel: FaultChannel, rng: np.random.Generator) -> int:
    return int(corrupt_words(np.array([word], dtype=np.int64), channel.delta, channel.bits, rng)[0])
