"""Density evolution and Monte Carlo analysis of quantized min-sum LDPC
decoding with unreliable (bit-flip) message memory."""

__version__ = "0.1.0"

from .quant import QuantGrid, quantize, quantize_array, encode, decode, negate
from .fault import FaultChannel, pattern_error_prob, corrupt_pmf, corrupt_message, corrupt_words
from .de import (
    LevelPmf,
    EnsembleConfig,
    DeParams,
    DeTrace,
    BracketError,
    NoThresholdError,
    channel_pmf,
    check_update,
    var_update,
    decision_pmf,
    bit_error_prob,
    de_run,
    threshold_search,
)
from .mc import TannerGraph, TrialResult, BerEstimate, sample_graph, simulate_and_decode, estimate_ber

__all__ = [
    "QuantGrid", "quantize", "quantize_array", "encode", "decode", "negate",
    "FaultChannel", "pattern_error_prob", "corrupt_pmf", "corrupt_message", "corrupt_words",
    "LevelPmf", "EnsembleConfig", "DeParams", "DeTrace", "BracketError", "NoThresholdError",
    "channel_pmf", "check_update", "var_update", "decision_pmf", "bit_error_prob",
    "de_run", "threshold_search",
    "TannerGraph", "TrialResult", "BerEstimate", "sample_graph", "simulate_and_decode",
    "estimate_ber",
]
