"""Density evolution for quantized min-sum decoding of regular LDPC ensembles.

Message PMFs live on the level alphabet of a :class:`QuantGrid`.  With a
nonzero crossover probability every message PMF that feeds a node update is
first passed through the read-fault transform; the channel PMF is not.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb
from scipy.stats import norm

from .fault import FaultChannel, corrupt_pmf
from .quant import QuantGrid

log = logging.getLogger(__name__)


class BracketError(ValueError):
    """The threshold search bracket does not straddle the threshold."""


class NoThresholdError(BracketError):
    """Even the low end of the bracket fails to reach the target error rate."""


@dataclass(frozen=True)
class LevelPmf:
    grid: QuantGrid
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.shape != (self.grid.n_levels,):
            raise ValueError(f"expected {self.grid.n_levels} masses, got shape {mass.shape}")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def point(cls, grid: QuantGrid, index: int) -> "LevelPmf":
        m = np.zeros(grid.n_levels)
        m[index] = 1.0
        return cls(grid, m)

    @classmethod
    def delta_at_zero(cls, grid: QuantGrid) -> "LevelPmf":
        return cls.point(grid, grid.zero_index)

    def mirror(self) -> "LevelPmf":
        return LevelPmf(self.grid, self.mass[::-1].copy())

    def total(self) -> float:
        return float(self.mass.sum())

    def __getitem__(self, index):
        return self.mass[index]


@dataclass(frozen=True)
class EnsembleConfig:
    d_v: int
    d_c: int

    def __post_init__(self):
        if self.d_v < 2 or self.d_c < 2:
            raise ValueError(f"degrees must be >= 2, got ({self.d_v}, {self.d_c})")
        if self.d_v >= self.d_c:
            warnings.warn(f"({self.d_v},{self.d_c}) ensemble has non-positive design rate", stacklevel=2)

    @property
    def rate(self) -> float:
        return 1.0 - self.d_v / self.d_c


@dataclass(frozen=True)
class DeParams:
    grid: QuantGrid
    delta: float = 0.0
    max_iters: int = 200
    alpha: float = 10.0
    eta: float | None = None  # absolute target, overrides alpha * delta

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if not 0.0 <= self.delta <= 0.5:
            raise ValueError(f"delta must lie in [0, 1/2], got {self.delta}")
        if self.eta is not None and not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")

    @property
    def target(self) -> float:
        if self.eta is not None:
            return self.eta
        if self.delta == 0:
            raise ValueError("fault-free runs need an absolute eta (alpha * delta is zero)")
        return self.alpha * self.delta


@dataclass
class DeTrace:
    pe: list[float] = field(default_factory=list)
    reason: str = "max_iters"  # or "target"

    @property
    def iterations(self) -> int:
        return len(self.pe)

    @property
    def min_pe(self) -> float:
        return min(self.pe)

    def first_below(self, level: float) -> int | None:
        """1-based iteration at which P_e first drops to ``level`` or below."""
        for i, p in enumerate(self.pe, start=1):
            if p <= level:
                return i
        return None


def channel_pmf(sigma2: float, grid: QuantGrid) -> LevelPmf:
    """Quantized channel LLR law for the all-(+1) BPSK codeword.

    The LLR ``2y/sigma2`` is Gaussian with mean ``2/sigma2`` and variance
    ``4/sigma2``; each level collects the measure of its interval.
    """
    if not sigma2 > 0:
        raise ValueError(f"noise variance must be positive, got {sigma2}")
    mu, sd = 2.0 / sigma2, 2.0 / math.sqrt(sigma2)
    z = (grid.bounds - mu) / sd
    lo, hi = z[:-1], z[1:]
    # upper tails via sf keep the small masses accurate on both sides
    mass = np.where(lo >= 0, norm.sf(lo) - norm.sf(hi), norm.cdf(hi) - norm.cdf(lo))
    mass = np.clip(mass, 0.0, None)
    return LevelPmf(grid, mass / mass.sum())


def _check_mass(p: np.ndarray, d_c: int) -> np.ndarray:
    n = d_c - 1
    L = p.size
    M = L // 2
    # tails over magnitudes a = 1..M, plus a sentinel zero for a = M+1
    t_pos = np.append(np.cumsum(p[::-1])[::-1][M + 1:], 0.0)   # P(X >= a)
    t_neg = np.append(np.cumsum(p)[:M][::-1], 0.0)             # P(X <= -a)
    even = np.zeros(M + 1)
    odd = np.zeros(M + 1)
    # k counts negative inputs; all terms positive so no cancellation
    for k in range(n + 1):
        term = comb(n, k, exact=True) * t_neg**k * t_pos ** (n - k)
        if k % 2:
            odd += term
        else:
            even += term
    q = np.empty(L)
    q[M + 1:] = even[:-1] - even[1:]
    q[:M] = (odd[:-1] - odd[1:])[::-1]
    q[M] = -math.expm1(n * math.log1p(-min(p[M], 1.0))) if p[M] < 1 else 1.0
    q = np.clip(q, 0.0, None)
    return q / q.sum()


def check_update(p: LevelPmf, d_c: int) -> LevelPmf:
    """Law of the min-sum check output for ``d_c - 1`` i.i.d. inputs ``~ p``."""
    if d_c < 2:
        raise ValueError("d_c must be >= 2")
    return LevelPmf(p.grid, _check_mass(p.mass, d_c))


def _fold(c: np.ndarray, M: int) -> np.ndarray:
    centre = c.size // 2
    out = c[centre - M: centre + M + 1].copy()
    out[0] += c[: centre - M].sum()
    out[-1] += c[centre + M + 1:].sum()
    return out


def _sum_mass(p0: np.ndarray, q: np.ndarray, copies: int) -> np.ndarray:
    c = p0
    for _ in range(copies):
        c = np.convolve(c, q)
    out = _fold(c, p0.size // 2)
    return out / out.sum()


def var_update(p0: LevelPmf, q: LevelPmf, d_v: int) -> LevelPmf:
    """Law of the saturated variable-node output: ``p0`` plus ``d_v - 1`` copies of ``q``."""
    if p0.grid != q.grid:
        raise ValueError("channel and check PMFs live on different grids")
    if d_v < 2:
        raise ValueError("d_v must be >= 2")
    return LevelPmf(p0.grid, _sum_mass(p0.mass, q.mass, d_v - 1))


def decision_pmf(p0: LevelPmf, q: LevelPmf, d_v: int) -> LevelPmf:
    """Law of the saturated decision value: ``p0`` plus ``d_v`` copies of ``q``."""
    if p0.grid != q.grid:
        raise ValueError("channel and check PMFs live on different grids")
    if d_v < 2:
        raise ValueError("d_v must be >= 2")
    return LevelPmf(p0.grid, _sum_mass(p0.mass, q.mass, d_v))


def _pe(d: np.ndarray) -> float:
    M = d.size // 2
    return float(0.5 * d[M] + d[:M].sum())


def bit_error_prob(d: LevelPmf) -> float:
    return _pe(d.mass)


def de_run(
    ensemble: EnsembleConfig,
    sigma2: float,
    params: DeParams,
    *,
    stop_at_target: bool = True,
    faulty: bool | None = None,
) -> DeTrace:
    """Iterate density evolution and record P_e per iteration.

    Iteration 1 decides on the channel PMF alone (the initial check messages
    are an exact zero that is never read from memory).  ``faulty`` defaults to
    ``delta > 0``; forcing it on with ``delta = 0`` runs the identity fault
    transform.  With ``stop_at_target=False`` all ``max_iters`` iterations run.
    """
    grid = params.grid
    if faulty is None:
        faulty = params.delta > 0
    K = FaultChannel(params.delta, grid.bits).level_kernel if faulty else None
    eta = params.target if stop_at_target else None

    p0 = channel_pmf(sigma2, grid).mass
    q = LevelPmf.delta_at_zero(grid).mass
    dv, dc = ensemble.d_v, ensemble.d_c
    trace = DeTrace()
    for it in range(1, params.max_iters + 1):
        pe = _pe(_sum_mass(p0, q, dv))
        trace.pe.append(pe)
        if eta is not None and pe <= eta:
            trace.reason = "target"
            break
        if it == params.max_iters:
            break
        p = _sum_mass(p0, q, dv - 1)
        if K is not None:
            p = p @ K
        q = _check_mass(p, dc)
        if K is not None:
            q = q @ K
    return trace


def _succeeds(ensemble, sigma2, params) -> tuple[bool, DeTrace]:
    tr = de_run(ensemble, sigma2, params)
    return tr.reason == "target", tr


def threshold_search(
    ensemble: EnsembleConfig,
    params: DeParams,
    sigma2_lo: float = 0.2,
    sigma2_hi: float = 1.0,
    resolution: float = 5e-4,
) -> float:
    """Largest noise variance for which DE reaches the target error rate.

    A point succeeds when P_e drops to the target at any iteration up to
    ``max_iters``.  Bisection stops once the bracket is no wider than
    ``resolution`` and returns its midpoint.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    if not 0 < sigma2_lo < sigma2_hi:
        raise ValueError(f"need 0 < sigma2_lo < sigma2_hi, got ({sigma2_lo}, {sigma2_hi})")
    ok, tr = _succeeds(ensemble, sigma2_lo, params)
    if not ok:
        raise NoThresholdError(
            f"target {params.target:.3g} not reached at sigma2={sigma2_lo} "
            f"(lowest P_e {tr.min_pe:.3g}); lower the bracket or raise eta"
        )
    ok, _ = _succeeds(ensemble, sigma2_hi, params)
    if ok:
        raise BracketError(f"target still reached at sigma2_hi={sigma2_hi}; raise the bracket")
    lo, hi = sigma2_lo, sigma2_hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        ok, _ = _succeeds(ensemble, mid, params)
        if ok:
            lo = mid
        else:
            hi = mid
    log.debug("threshold (%d,%d) delta=%g: [%.6f, %.6f]", ensemble.d_v, ensemble.d_c, params.delta, lo, hi)
    return 0.5 * (lo + hi)
