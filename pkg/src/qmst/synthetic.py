"""Synthetic panels: long-memory ARFIMA(0,d,0) signals and correlated
Gaussian pairs for validation experiments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from ._rng import substream
from .panel import SeriesPanel


@dataclass(frozen=True)
class ArfimaParams:
    d: float
    T: int
    truncation: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not abs(self.d) < 0.5:
            raise ValueError(f"|d| must be < 0.5 for stationarity, got {self.d}")
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        if self.T < 1:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class CorrelatedPairParams:
    gamma: float
    T: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.T < 1:
            raise ValueError("T must be positive")


def ma_weights(d: float, truncation: int) -> np.ndarray:
    """MA(inf) weights a_j = Gamma(j+d) / (Gamma(j+1) Gamma(d)).

    Computed by the stable recurrence a_j = a_{j-1} (j-1+d)/j, a_0 = 1.
    """
    a = np.empty(truncation + 1)
    a[0] = 1.0
    for j in range(1, truncation + 1):
        a[j] = a[j - 1] * (j - 1 + d) / j
    return a


def arfima_series(params: ArfimaParams, rng) -> np.ndarray:
    a = ma_weights(params.d, params.truncation)
    K = params.truncation
    eps = rng.standard_normal(params.T + K)
    # full convolution: samples K.. have all K+1 taps inside the noise
    return fftconvolve(eps, a, mode="full")[K : K + params.T]


def arfima_panel(n: int, params: ArfimaParams) -> SeriesPanel:
    """n mutually independent ARFIMA(0,d,0) series of length T."""
    if n < 1:
        raise ValueError("need at least one series")
    series = np.empty((n, params.T))
    for i in range(n):
        series[i] = arfima_series(params, substream(params.seed, i))
    labels = [f"A{i:03d}" for i in range(n)]
    meta = {
        "generator": "arfima",
        "d": params.d,
        "truncation": params.truncation,
        "seed": params.seed,
    }
    return SeriesPanel(labels, series, meta)


def correlated_pair_panel(n_pairs: int, params: CorrelatedPairParams) -> SeriesPanel:
    """Pairs (x, y) with y = gamma*x + sqrt(1-gamma^2)*eta, eta iid N(0,1).

    Columns are interleaved as x000, y000, x001, y001, ...
    """
    if n_pairs < 1:
        raise ValueError("need at least one pair")
    g = params.gamma
    series = np.empty((2 * n_pairs, params.T))
    labels = []
    for p in range(n_pairs):
        rng = substream(params.seed, p)
        x = rng.standard_normal(params.T)
        eta = rng.standard_normal(params.T)
        series[2 * p] = x
        series[2 * p + 1] = g * x + np.sqrt(1.0 - g * g) * eta
        labels += [f"x{p:03d}", f"y{p:03d}"]
    meta = {"generator": "correlated_pairs", "gamma": g, "seed": params.seed}
    return SeriesPanel(labels, series, meta)
