"""Experiment runners behind the CLI: threshold tables, P_e traces, bit-width
sweeps and the DE versus Monte Carlo comparison.

Each runner returns a list of flat row dicts.  Independent grid cells are
farmed out to a process pool and gathered back in cell order.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .de import BracketError, DeParams, DeTrace, EnsembleConfig, de_run, threshold_search
from .mc import estimate_ber
from .quant import QuantGrid

TABLE_ENSEMBLES = ((3, 6), (4, 8), (5, 10), (6, 12))
TABLE_DELTAS = (1e-3, 1e-4, 1e-5, 1e-6)


def quant_step(mode: str, bits: int, step: float = 1.0) -> float:
    """Step for dynamic-range (fixed step) or precision (``2**(3-bits)``) quantization."""
    mode = mode.upper()
    if mode == "DR":
        return step
    if mode == "PR":
        return 2.0 ** (3 - bits)
    raise ValueError(f"unknown quantization mode {mode!r}")


def parallel_map(fn, cells, workers: int | None = 1) -> list:
    workers = workers or os.cpu_count() or 1
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(fn, cells))


@dataclass(frozen=True)
class ThresholdCell:
    d_v: int
    d_c: int
    bits: int
    step: float
    delta: float        # fault rate used by the decoder (0 for MS)
    eta: float
    max_iters: int = 200
    sigma2_lo: float = 0.2
    sigma2_hi: float = 1.0
    resolution: float = 5e-4


def solve_cell(cell: ThresholdCell) -> tuple[float | None, str]:
    params = DeParams(QuantGrid(cell.bits, cell.step), delta=cell.delta, max_iters=cell.max_iters, eta=cell.eta)
    try:
        s = threshold_search(EnsembleConfig(cell.d_v, cell.d_c), params,
                             cell.sigma2_lo, cell.sigma2_hi, cell.resolution)
    except BracketError as exc:
        return None, f"{type(exc).__name__}: {exc}"
    return s, "ok"


def table_rows(
    ensembles=TABLE_ENSEMBLES,
    deltas=TABLE_DELTAS,
    bits: int = 5,
    step: float = 1.0,
    alpha: float = 10.0,
    max_iters: int = 200,
    sigma2_lo: float = 0.2,
    sigma2_hi: float = 1.0,
    resolution: float = 5e-4,
    workers: int | None = 1,
) -> list[dict]:
    """Thresholds for MS and faulty MS; both use the target ``alpha * delta``."""
    meta = []
    cells = []
    for dv, dc in ensembles:
        for decoder in ("MS", "F-MS"):
            for delta in deltas:
                cells.append(ThresholdCell(dv, dc, bits, step, delta if decoder == "F-MS" else 0.0,
                                           alpha * delta, max_iters, sigma2_lo, sigma2_hi, resolution))
                meta.append((dv, dc, decoder, delta))
    rows = []
    for (dv, dc, decoder, delta), cell, (s, status) in zip(meta, cells, parallel_map(solve_cell, cells, workers)):
        rows.append(dict(d_v=dv, d_c=dc, decoder=decoder, delta=delta, eta=cell.eta,
                         sigma2_star=s, status=status))
    return rows


@dataclass(frozen=True)
class TraceCell:
    d_v: int
    d_c: int
    bits: int
    step: float
    delta: float
    sigma2: float
    max_iters: int


def trace_cell(cell: TraceCell) -> DeTrace:
    params = DeParams(QuantGrid(cell.bits, cell.step), delta=cell.delta, max_iters=cell.max_iters)
    return de_run(EnsembleConfig(cell.d_v, cell.d_c), cell.sigma2, params, stop_at_target=False)


def trace_rows(
    ensemble=(3, 6),
    deltas=(0.0, 1e-5),
    sigma2s=(0.6576,),
    bits: int = 5,
    step: float = 1.0,
    max_iters: int = 200,
    workers: int | None = 1,
) -> list[dict]:
    """Full-length P_e traces (no early stop) for every (delta, sigma2) pair."""
    dv, dc = ensemble
    cells = [TraceCell(dv, dc, bits, step, d, s, max_iters) for s in sigma2s for d in deltas]
    rows = []
    for cell, tr in zip(cells, parallel_map(trace_cell, cells, workers)):
        for it, pe in enumerate(tr.pe, start=1):
            rows.append(dict(d_v=dv, d_c=dc, delta=cell.delta, sigma2=cell.sigma2, iteration=it, pe=pe))
    return rows


def iteration_gap(reference: DeTrace, faulty: DeTrace, level: float) -> int | None:
    """Extra iterations the faulty trace needs to first reach ``level``."""
    a, b = reference.first_below(level), faulty.first_below(level)
    if a is None or b is None:
        return None
    return b - a


def bits_rows(
    ensemble=(3, 6),
    bits_range=range(2, 8),
    delta: float = 1e-3,
    alpha: float = 10.0,
    dr_step: float = 1.0,
    max_iters: int = 200,
    sigma2_lo: float = 0.2,
    sigma2_hi: float = 1.0,
    resolution: float = 5e-4,
    workers: int | None = 1,
) -> list[dict]:
    dv, dc = ensemble
    eta = alpha * delta
    keys, cells = [], []
    for b in bits_range:
        for mode in ("DR", "PR"):
            step = quant_step(mode, b, dr_step)
            for decoder in ("MS", "F-MS"):
                d = delta if decoder == "F-MS" else 0.0
                cells.append(ThresholdCell(dv, dc, b, step, d, eta, max_iters, sigma2_lo, sigma2_hi, resolution))
                keys.append((b, mode, step, decoder))
    rows = []
    for (b, mode, step, decoder), (s, status) in zip(keys, parallel_map(solve_cell, cells, workers)):
        rows.append(dict(bits=b, mode=mode, step=step, decoder=decoder, delta=delta, eta=eta,
                         sigma2_star=s, status=status))
    return rows


def mc_rows(
    ensemble=(3, 6),
    N: int = 100_000,
    sigma2: float = 0.55,
    bits: int = 5,
    step: float = 1.0,
    delta: float = 1e-4,
    iterations: int = 10,
    trials: int = 20,
    seed: int = 0,
    workers: int | None = 1,
    n_se: float = 3.0,
    rel_slack: float = 0.1,
) -> list[dict]:
    """Monte Carlo BER per iteration next to the DE prediction.

    ``agree`` flags ``|mc - de| <= n_se * stderr + rel_slack * de``.
    """
    dv, dc = ensemble
    params = DeParams(QuantGrid(bits, step), delta=delta, max_iters=iterations)
    de = de_run(EnsembleConfig(dv, dc), sigma2, params, stop_at_target=False)
    est = estimate_ber(N, dv, dc, sigma2, params, trials, base_seed=seed, workers=workers)
    rows = []
    for it in range(iterations):
        m, se, p = float(est.mean[it]), float(est.stderr[it]), de.pe[it]
        tol = (n_se * se if np.isfinite(se) else 0.0) + rel_slack * p
        rows.append(dict(iteration=it + 1, mc_ber=m, mc_stderr=se, de_pe=p, agree=abs(m - p) <= tol))
    return rows
