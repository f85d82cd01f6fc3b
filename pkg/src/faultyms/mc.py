"""Finite-length flooding min-sum decoder with faulty message reads.

Graphs come from the configuration model: the ``N*d_v`` variable sockets are
matched to check sockets by a uniform random permutation.  Edge ``e`` belongs
to variable ``e // d_v``.  All messages are stored as sign-magnitude words and
every read of a stored message passes through the bit-flip channel; the
quantized channel LLRs are read fault-free.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .de import DeParams
from .fault import corrupt_words
from .quant import QuantGrid, decode_words, encode_values, quantize_array


def _child(seed, k: int) -> np.random.SeedSequence:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.SeedSequence(entropy=ss.entropy, spawn_key=tuple(ss.spawn_key) + (k,))


@dataclass(frozen=True)
class TannerGraph:
    n_var: int
    n_chk: int
    d_v: int
    d_c: int
    edge_check: np.ndarray = field(repr=False)    # check node of each edge
    check_edges: np.ndarray = field(repr=False)   # (n_chk, d_c) edge ids per check
    n_multi_edges: int = 0

    @classmethod
    def from_edge_checks(cls, edge_check, d_v: int, d_c: int) -> "TannerGraph":
        edge_check = np.asarray(edge_check, dtype=np.int64)
        E = edge_check.size
        if E % d_v or E % d_c:
            raise ValueError("edge count is not compatible with the degrees")
        n_var, n_chk = E // d_v, E // d_c
        counts = np.bincount(edge_check, minlength=n_chk)
        if counts.size != n_chk or np.any(counts != d_c):
            raise ValueError("every check node needs exactly d_c edges")
        check_edges = np.argsort(edge_check, kind="stable").reshape(n_chk, d_c)
        pairs = np.arange(E) // d_v * n_chk + edge_check
        n_multi = E - np.unique(pairs).size
        for a in (edge_check, check_edges):
            a.flags.writeable = False
        return cls(n_var, n_chk, d_v, d_c, edge_check, check_edges, int(n_multi))

    @property
    def n_edges(self) -> int:
        return self.edge_check.size

    def var_degrees(self) -> np.ndarray:
        return np.full(self.n_var, self.d_v)

    def check_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_check, minlength=self.n_chk)

    def parity_matrix(self) -> np.ndarray:
        """Dense GF(2) parity-check matrix (multi-edges cancel in pairs)."""
        H = np.zeros((self.n_chk, self.n_var), dtype=np.uint8)
        np.add.at(H, (self.edge_check, np.arange(self.n_edges) // self.d_v), 1)
        return H % 2


def sample_graph(N: int, d_v: int, d_c: int, seed=None) -> TannerGraph:
    if N < 1 or (N * d_v) % d_c:
        raise ValueError(f"N*d_v = {N * d_v} is not divisible by d_c = {d_c}")
    rng = np.random.default_rng(seed)
    sockets = rng.permutation(N * d_v)
    return TannerGraph.from_edge_checks(sockets // d_c, d_v, d_c)


# scalar kernels, used by tests to check the update-rule symmetries

def vn_update(m0: int, incoming, M: int) -> int:
    """Saturated variable-node output from the channel value and other inputs."""
    return max(-M, min(M, m0 + sum(incoming)))


def cn_update(incoming) -> int:
    """Min-sum check-node output: sign product times minimum magnitude."""
    neg = sum(1 for m in incoming if m < 0) % 2
    mag = min(abs(m) for m in incoming)
    return -mag if neg else mag


@dataclass
class TrialResult:
    iterations: int
    errors: np.ndarray          # bit errors at each iteration
    n: int
    last_vc: np.ndarray | None = field(default=None, repr=False)
    last_cv: np.ndarray | None = field(default=None, repr=False)

    @property
    def final_errors(self) -> int:
        return int(self.errors[-1])

    @property
    def ber(self) -> np.ndarray:
        return self.errors / self.n


def _check_pass(v: np.ndarray) -> np.ndarray:
    """Min-sum outputs for a (n_chk, d_c) array of input values."""
    mag = np.abs(v)
    neg = v < 0
    parity = neg.sum(axis=1) % 2 == 1
    two = np.partition(mag, 1, axis=1)
    first = mag.argmin(axis=1)
    out = np.broadcast_to(two[:, :1], mag.shape).copy()
    rows = np.arange(v.shape[0])
    out[rows, first] = two[:, 1]
    return np.where(parity[:, None] ^ neg, -out, out)


def decode_llrs(
    graph: TannerGraph,
    ch: np.ndarray,
    grid: QuantGrid,
    delta: float,
    n_iters: int,
    seed,
    codeword=None,
) -> TrialResult:
    """Run ``n_iters`` flooding iterations on quantized channel values.

    ``ch`` holds signed magnitude indices (level value / step).  ``codeword``
    is the transmitted +-1 sequence, all +1 by default.  Iteration 1 decides on
    the channel alone.
    """
    b, M = grid.bits, grid.max_mag_index
    x = np.ones(graph.n_var, dtype=np.int64) if codeword is None else np.asarray(codeword)
    rng_fault = np.random.default_rng(_child(seed, 0))
    rng_tie = np.random.default_rng(_child(seed, 1))
    N, dv = graph.n_var, graph.d_v
    ce = graph.check_edges
    errors = np.zeros(n_iters, dtype=np.int64)
    qv = np.zeros((N, dv), dtype=np.int64)
    q_words = None
    vc = cv = None
    for it in range(n_iters):
        if q_words is not None:
            qv = decode_words(corrupt_words(q_words, delta, b, rng_fault), b).reshape(N, dv)
        total = ch + qv.sum(axis=1)
        signed = total * x
        ties = int(np.count_nonzero(signed == 0))
        errors[it] = np.count_nonzero(signed < 0) + (rng_tie.binomial(ties, 0.5) if ties else 0)
        vc = np.clip(total[:, None] - qv, -M, M).ravel()
        if it == n_iters - 1:
            break
        p_words = encode_values(vc, b, rng_tie)
        pv = decode_words(corrupt_words(p_words, delta, b, rng_fault), b)
        cv = np.empty(graph.n_edges, dtype=np.int64)
        cv[ce.ravel()] = _check_pass(pv[ce]).ravel()
        q_words = encode_values(cv, b, rng_tie)
    return TrialResult(n_iters, errors, N, last_vc=vc, last_cv=cv)


def simulate_and_decode(graph: TannerGraph, sigma2: float, params: DeParams, seed=None, codeword=None) -> TrialResult:
    """Transmit over BPSK-AWGN, quantize the LLRs and decode for ``params.max_iters`` iterations."""
    if not sigma2 > 0:
        raise ValueError("noise variance must be positive")
    x = np.ones(graph.n_var) if codeword is None else np.asarray(codeword, dtype=float)
    rng_noise = np.random.default_rng(_child(seed, 0))
    y = x + rng_noise.normal(0.0, np.sqrt(sigma2), graph.n_var)
    ch = quantize_array(2.0 * y / sigma2, params.grid)
    return decode_llrs(graph, ch, params.grid, params.delta, params.max_iters, _child(seed, 1),
                       codeword=None if codeword is None else x.astype(np.int64))


@dataclass
class BerEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    rates: np.ndarray = field(repr=False)   # (n_trials, iterations)

    @property
    def n_trials(self) -> int:
        return self.rates.shape[0]


def trial_seeds(base_seed, t: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    ss = _child(base_seed, t)
    return _child(ss, 0), _child(ss, 1)


def _one_trial(args):
    N, d_v, d_c, sigma2, params, base_seed, t = args
    g_seed, d_seed = trial_seeds(base_seed, t)
    graph = sample_graph(N, d_v, d_c, g_seed)
    return simulate_and_decode(graph, sigma2, params, d_seed).ber


def estimate_ber(
    N: int,
    d_v: int,
    d_c: int,
    sigma2: float,
    params: DeParams,
    n_trials: int,
    base_seed=0,
    workers: int | None = 1,
) -> BerEstimate:
    """Per-iteration BER over independent trials, each on a fresh graph."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    jobs = [(N, d_v, d_c, sigma2, params, base_seed, t) for t in range(n_trials)]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and n_trials > 1:
        with ProcessPoolExecutor(max_workers=min(workers, n_trials)) as pool:
            rates = list(pool.map(_one_trial, jobs))
    else:
        rates = [_one_trial(j) for j in jobs]
    rates = np.vstack(rates)
    mean = rates.mean(axis=0)
    if n_trials > 1:
        stderr = rates.std(axis=0, ddof=1) / np.sqrt(n_trials)
    else:
        stderr = np.full_like(mean, np.nan)
    return BerEstimate(mean, stderr, rates)
