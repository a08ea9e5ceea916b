"""Panel transforms: log-returns, shuffling, Gaussianization, signs,
amplitude-partition shuffling.

All stochastic transforms derive one RNG stream per series from
(seed, series index), so the output is identical no matter how the
series are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .panel import PricePanel, SeriesPanel

AMP_MODES = ("amp-shuffle-above", "amp-shuffle-below")
TRANSFORM_KINDS = ("shuffle", "gaussianize", "sign", *AMP_MODES)


@dataclass(frozen=True)
class TransformSpec:
    """One step of a transform chain.

    threshold_sigma applies only to the amp-shuffle kinds and is a
    multiple of the per-series standard deviation.  `signed` selects
    whether the threshold is compared against r(t) itself rather than
    |r(t)| (both readings of the partition rule are supported).
    """

    kind: str
    threshold_sigma: float | None = None
    seed: int = 0
    signed: bool = False

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind in AMP_MODES:
            if self.threshold_sigma is None or not self.threshold_sigma > 0:
                raise ValueError("amp-shuffle requires threshold_sigma > 0")


def log_returns(prices: PricePanel, dt: int = 1, drop_gaps: bool = False) -> SeriesPanel:
    """Non-overlapping log-returns at stride `dt` (in rows).

    r_k = ln p((k+1)dt) - ln p(k dt); output length floor((T-1)/dt).
    With `drop_gaps` and timestamps present, returns spanning a
    timestamp gap larger than dt rows' nominal spacing are removed
    panel-wide.
    """
    dt = int(dt)
    if dt < 1:
        raise ValueError("dt must be a positive integer")
    T = prices.length
    if dt >= T:
        raise ValueError(f"dt={dt} must be smaller than series length {T}")
    n = (T - 1) // dt
    idx = np.arange(n + 1) * dt
    logp = np.log(prices.prices[:, idx])
    r = logp[:, 1:] - logp[:, :-1]
    meta = {"transform_chain": [f"log_returns(dt={dt})"], "dt": dt}
    if prices.timestamps is not None:
        ts = prices.timestamps[idx]
        if drop_gaps:
            step = np.diff(ts)
            nominal = dt * _nominal_spacing(prices.timestamps)
            keep = step == nominal
            r = r[:, keep]
            ts = ts[1:][keep]
            meta["transform_chain"].append("drop_gap_returns")
        else:
            ts = ts[1:]
        meta["timestamps"] = ts
    if r.shape[1] < 1:
        raise ValueError("no returns left after gap filtering")
    return SeriesPanel(list(prices.labels), r, meta)


def _nominal_spacing(ts):
    # most common consecutive spacing, treated as the intra-session step
    steps = np.diff(ts)
    vals, counts = np.unique(steps, return_counts=True)
    return int(vals[np.argmax(counts)])


def shuffle(panel: SeriesPanel, seed: int = 0) -> SeriesPanel:
    """Independently permute each series (value multiset preserved)."""
    out = np.empty_like(panel.series)
    for i in range(panel.n_series):
        rng = substream(seed, i)
        out[i] = panel.series[i][rng.permutation(panel.length)]
    return panel.with_series(out, f"shuffle(seed={seed})")


def gaussianize(panel: SeriesPanel, seed: int = 0) -> SeriesPanel:
    """Rank-preserving remap of each series onto a standard-normal sample.

    The k-th smallest original value is replaced by the k-th smallest of
    T fresh N(0,1) draws; ties are broken by original index order.
    """
    if panel.length < 2:
        raise ValueError("gaussianize needs series of length >= 2")
    out = np.empty_like(panel.series)
    for i in range(panel.n_series):
        rng = substream(seed, i)
        draws = np.sort(rng.standard_normal(panel.length))
        order = np.argsort(panel.series[i], kind="stable")
        out[i, order] = draws
    return panel.with_series(out, f"gaussianize(seed={seed})")


def sign_series(panel: SeriesPanel) -> SeriesPanel:
    """Replace values by their signs (+1, -1, or 0)."""
    return panel.with_series(np.sign(panel.series), "sign")


def amplitude_partition_shuffle(panel: SeriesPanel, spec: TransformSpec) -> SeriesPanel:
    """Permute, within each series, the values in one amplitude class.

    Mode "amp-shuffle-above" selects values with amplitude strictly above
    threshold_sigma times the series' sample standard deviation;
    "amp-shuffle-below" selects strictly below.  The complement keeps its
    positions and values.  Amplitude is |r(t)| unless spec.signed.
    """
    if spec.kind not in AMP_MODES:
        raise ValueError(f"not an amplitude-shuffle spec: {spec.kind!r}")
    out = panel.series.copy()
    for i in range(panel.n_series):
        x = panel.series[i]
        sigma = float(np.std(x, ddof=1)) if panel.length > 1 else 0.0
        amp = x if spec.signed else np.abs(x)
        cut = spec.threshold_sigma * sigma
        mask = amp > cut if spec.kind == "amp-shuffle-above" else amp < cut
        k = int(mask.sum())
        if k > 1:
            rng = substream(spec.seed, i)
            out[i, np.flatnonzero(mask)] = x[mask][rng.permutation(k)]
    step = f"{spec.kind}({spec.threshold_sigma}sigma, signed={spec.signed}, seed={spec.seed})"
    return panel.with_series(out, step)


def apply_transform(panel: SeriesPanel, spec: TransformSpec) -> SeriesPanel:
    """Dispatch a TransformSpec to its implementation."""
    if spec.kind == "shuffle":
        return shuffle(panel, spec.seed)
    if spec.kind == "gaussianize":
        return gaussianize(panel, spec.seed)
    if spec.kind == "sign":
        return sign_series(panel)
    return amplitude_partition_shuffle(panel, spec)
