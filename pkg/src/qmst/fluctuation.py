"""Detrending engine.

Each series is split into 2*floor(T/s) boxes of length s anchored at
both ends.  Within a box the series is integrated (cumulative sum) and
an order-m polynomial is removed by least squares on an orthonormal
basis; box covariances/variances of the residuals feed signed q-order
fluctuation functions.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoxPartition:
    s: int
    m_s: int
    starts: np.ndarray  # 2*m_s box start offsets, forward family first

    @property
    def n_boxes(self):
        return 2 * self.m_s


@dataclass(frozen=True)
class FluctuationSet:
    """Signed cross term and the two auto terms for one (pair, s, q, m)."""

    f_xy: float
    f_xx: float
    f_yy: float
    s: int
    q: float
    m: int


def partition(T: int, s: int) -> BoxPartition:
    """Box layout at scale s: floor(T/s) boxes from each end.

    When s divides T the two families coincide positionally; both are
    kept and the 1/(2*M_s) normalization downstream makes that
    equivalent to single counting.
    """
    s = int(s)
    if s < 1:
        raise ValueError("scale must be positive")
    if s > T:
        raise ValueError(f"scale s={s} exceeds series length T={T}")
    m_s = T // s
    fwd = np.arange(m_s) * s
    bwd = T - (np.arange(m_s) + 1) * s
    return BoxPartition(s, m_s, np.concatenate([fwd, bwd]))


def _detrend_projector(s: int, m: int) -> np.ndarray:
    """Orthonormal basis Q (s x (m+1)) for order-m fits on a length-s box.

    Chebyshev columns on abscissae mapped to [-1, 1], orthonormalized by
    QR; residual = y - Q (Q^T y).  Well conditioned for any practical s.
    """
    x = np.linspace(-1.0, 1.0, s)
    V = np.polynomial.chebyshev.chebvander(x, m)
    Q, _ = np.linalg.qr(V)
    return Q


_PROJECTOR_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _projector(s, m):
    key = (s, m)
    if key not in _PROJECTOR_CACHE:
        _PROJECTOR_CACHE[key] = _detrend_projector(s, m)
    return _PROJECTOR_CACHE[key]


def _validate_scale(s, m, T):
    if s < m + 2:
        raise ValueError(f"scale s={s} too small for order m={m}; need s >= m+2")
    if s > T:
        raise ValueError(f"scale s={s} exceeds series length T={T}")
    if s > T // 4:
        warnings.warn(
            f"scale s={s} leaves only {2 * (T // s)} boxes for T={T}; "
            "fluctuation averages will be statistically weak",
            stacklevel=3,
        )


def residual_matrix(series, s: int, m: int = 2) -> np.ndarray:
    """Detrended integrated signal for every box: shape (2*M_s, s)."""
    x = np.asarray(series, dtype=float)
    T = x.shape[0]
    _validate_scale(s, m, T)
    part = partition(T, s)
    boxes = x[part.starts[:, None] + np.arange(s)]
    profile = np.cumsum(boxes, axis=1)
    Q = _projector(s, m)
    return profile - (profile @ Q) @ Q.T


def detrended_residuals(series, box_start: int, s: int, m: int = 2) -> np.ndarray:
    """Residuals for a single box (box profile minus order-m fit)."""
    x = np.asarray(series, dtype=float)
    if box_start < 0 or box_start + s > x.shape[0]:
        raise ValueError(f"box [{box_start}, {box_start + s}) out of bounds")
    if s < m + 2:
        raise ValueError(f"scale s={s} too small for order m={m}")
    profile = np.cumsum(x[box_start : box_start + s])
    Q = _projector(s, m)
    return profile - Q @ (Q.T @ profile)


def box_moments(res_x, res_y):
    """Per-box covariance f2_xy = mean(res_x * res_y); may be negative."""
    res_x = np.asarray(res_x, dtype=float)
    res_y = np.asarray(res_y, dtype=float)
    if res_x.shape != res_y.shape:
        raise ValueError("residual vectors must have equal shape")
    return float(np.mean(res_x * res_y))


def cross_profile(res_x: np.ndarray, res_y: np.ndarray) -> np.ndarray:
    """f2_xy per box from two residual matrices (2*M_s,)."""
    return np.mean(res_x * res_y, axis=1)


def signed_q_average(f2: np.ndarray, q: float) -> float:
    """(1/2M_s) sum of sign(f2)*|f2|^(q/2); plain mean at q=2."""
    if q == 0:
        raise ValueError("q=0 is not supported (the q/2 power degenerates)")
    if q < 0 and np.any(f2 == 0):
        raise ArithmeticError("zero box moment with q<0: divergent term")
    if q == 2:
        return float(np.mean(f2))
    return float(np.mean(np.sign(f2) * np.abs(f2) ** (q / 2.0)))


def auto_q_average(f2: np.ndarray, q: float) -> float:
    """(1/2M_s) sum of f2^(q/2) for non-negative auto moments."""
    if q == 0:
        raise ValueError("q=0 is not supported (the q/2 power degenerates)")
    if q < 0 and np.any(f2 == 0):
        raise ArithmeticError("zero box variance with q<0: divergent term")
    if q == 2:
        return float(np.mean(f2))
    return float(np.mean(f2 ** (q / 2.0)))


def fluctuation(series_x, series_y, s: int, q: float, m: int = 2) -> FluctuationSet:
    """q-order fluctuation functions of a pair at scale s."""
    res_x = residual_matrix(series_x, s, m)
    res_y = residual_matrix(series_y, s, m)
    f2_xy = cross_profile(res_x, res_y)
    f2_xx = cross_profile(res_x, res_x)
    f2_yy = cross_profile(res_y, res_y)
    return FluctuationSet(
        f_xy=signed_q_average(f2_xy, q),
        f_xx=auto_q_average(f2_xx, q),
        f_yy=auto_q_average(f2_yy, q),
        s=int(s),
        q=float(q),
        m=int(m),
    )


class FluctuationEngine:
    """Caches per-series residual matrices and auto fluctuation values.

    Denominators of the correlation coefficient depend on single series
    only; caching them turns the N^2 pair loop into N detrending passes
    plus cheap per-pair products.
    """

    def __init__(self, series, m: int = 2):
        self._series = np.asarray(series, dtype=float)
        if self._series.ndim != 2:
            raise ValueError("expected an (N, T) array of series")
        self.m = int(m)
        self._residuals: dict[tuple[int, int], np.ndarray] = {}
        self._auto_f2: dict[tuple[int, int], np.ndarray] = {}
        self._auto_fq: dict[tuple[int, int, float], float] = {}

    @property
    def n_series(self):
        return self._series.shape[0]

    @property
    def length(self):
        return self._series.shape[1]

    def residuals(self, i: int, s: int) -> np.ndarray:
        key = (i, s)
        if key not in self._residuals:
            self._residuals[key] = residual_matrix(self._series[i], s, self.m)
        return self._residuals[key]

    def auto_profile(self, i: int, s: int) -> np.ndarray:
        key = (i, s)
        if key not in self._auto_f2:
            r = self.residuals(i, s)
            self._auto_f2[key] = cross_profile(r, r)
        return self._auto_f2[key]

    def auto_fluctuation(self, i: int, s: int, q: float) -> float:
        key = (i, s, q)
        if key not in self._auto_fq:
            self._auto_fq[key] = auto_q_average(self.auto_profile(i, s), q)
        return self._auto_fq[key]

    def pair_profile(self, i: int, j: int, s: int) -> np.ndarray:
        return cross_profile(self.residuals(i, s), self.residuals(j, s))

    def drop_scale(self, s: int):
        """Release cached residuals for one scale (memory control)."""
        for key in [k for k in self._residuals if k[1] == s]:
            del self._residuals[key]
