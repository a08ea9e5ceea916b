"""Panel containers and CSV I/O.

A panel is a set of N aligned real-valued series of equal length T.
CSV layout: header row of labels, one column per series, one row per
timestamp; an optional leading ``t`` column carries integer timestamps.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

TIME_COLUMN = "t"


@dataclass(frozen=True)
class PricePanel:
    """Strictly positive price series, one row per label in `prices` (N x T)."""

    labels: list[str]
    prices: np.ndarray
    timestamps: np.ndarray | None = None

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        _check_labels(self.labels, prices)
        bad = np.argwhere(~(prices > 0))
        if bad.size:
            i, j = bad[0]
            raise ValueError(
                f"non-positive price at series {self.labels[i]!r}, index {j}: {prices[i, j]}"
            )
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=np.int64)
            if ts.shape != (prices.shape[1],):
                raise ValueError("timestamps length must match series length")
            if np.any(np.diff(ts) <= 0):
                raise ValueError("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", ts)

    @property
    def n_series(self):
        return self.prices.shape[0]

    @property
    def length(self):
        return self.prices.shape[1]


@dataclass(frozen=True)
class SeriesPanel:
    """N aligned finite-valued series (N x T) plus a provenance record."""

    labels: list[str]
    series: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        series = np.asarray(self.series, dtype=float)
        object.__setattr__(self, "series", series)
        _check_labels(self.labels, series)
        if not np.all(np.isfinite(series)):
            raise ValueError("panel contains non-finite values")

    @property
    def n_series(self):
        return self.series.shape[0]

    @property
    def length(self):
        return self.series.shape[1]

    def with_series(self, series, step: str) -> "SeriesPanel":
        """Copy with new values and `step` appended to the transform chain."""
        meta = dict(self.meta)
        meta["transform_chain"] = list(meta.get("transform_chain", [])) + [step]
        return SeriesPanel(list(self.labels), series, meta)


def _check_labels(labels, values):
    if values.ndim != 2:
        raise ValueError(f"expected 2-D panel, got shape {values.shape}")
    if len(labels) != values.shape[0]:
        raise ValueError(f"{len(labels)} labels for {values.shape[0]} series")
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate labels in panel")
    if values.shape[1] < 1:
        raise ValueError("empty series")


def _parse_csv(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty CSV")
    header = [h.strip() for h in lines[0].split(",")]
    has_time = header and header[0] == TIME_COLUMN
    labels = header[1:] if has_time else header
    if not labels:
        raise ValueError("CSV header has no series labels")
    rows = []
    times = []
    for k, ln in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != len(header):
            raise ValueError(f"row {k}: expected {len(header)} cells, got {len(cells)}")
        if any(c == "" for c in cells):
            raise ValueError(f"row {k}: missing cell")
        if has_time:
            times.append(int(cells[0]))
            cells = cells[1:]
        rows.append([float(c) for c in cells])
    values = np.asarray(rows, dtype=float).T
    timestamps = np.asarray(times, dtype=np.int64) if has_time else None
    return labels, values, timestamps


def read_series_csv(path) -> SeriesPanel:
    with open(path, "r", encoding="utf-8") as fh:
        labels, values, ts = _parse_csv(fh.read())
    meta = {"source": str(path)}
    if ts is not None:
        meta["timestamps"] = ts
    return SeriesPanel(labels, values, meta)


def read_price_csv(path) -> PricePanel:
    with open(path, "r", encoding="utf-8") as fh:
        labels, values, ts = _parse_csv(fh.read())
    return PricePanel(labels, values, ts)


def write_series_csv(path, panel: SeriesPanel):
    ts = panel.meta.get("timestamps")
    buf = io.StringIO()
    header = list(panel.labels) if ts is None else [TIME_COLUMN, *panel.labels]
    buf.write(",".join(header) + "\n")
    cols = panel.series.T
    for i in range(panel.length):
        row = [format(v, ".12g") for v in cols[i]]
        if ts is not None:
            row.insert(0, str(int(ts[i])))
        buf.write(",".join(row) + "\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())
