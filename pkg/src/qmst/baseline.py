"""Pearson-coefficient baseline and the normalized scalar product that
compares Pearson and detrended correlation structures pair by pair."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .correlation import rho_matrix_grid
from .fluctuation import FluctuationEngine
from .panel import SeriesPanel


@dataclass(frozen=True)
class PearsonMatrix:
    labels: list[str]
    values: np.ndarray
    dt: int


@dataclass(frozen=True)
class SimilarityReport:
    """Normalized scalar products keyed by (dt, s, q)."""

    values: dict[tuple[int, int, float], float]
    n_pairs: int


def aggregate_returns(panel: SeriesPanel, dt: int) -> SeriesPanel:
    """Coarsen unit-interval returns to interval dt by block sums."""
    dt = int(dt)
    if dt < 1:
        raise ValueError("dt must be positive")
    if dt == 1:
        return panel
    n = panel.length // dt
    if n < 2:
        raise ValueError(f"dt={dt} leaves fewer than 2 samples")
    blocks = panel.series[:, : n * dt].reshape(panel.n_series, n, dt)
    return panel.with_series(blocks.sum(axis=2), f"aggregate(dt={dt})")


def pearson_matrix(panel: SeriesPanel, dt: int = 1) -> PearsonMatrix:
    """Product-moment correlations of dt-aggregated returns."""
    agg = aggregate_returns(panel, dt)
    sd = np.std(agg.series, axis=1)
    flat = [panel.labels[i] for i in np.flatnonzero(sd == 0)]
    if flat:
        raise ValueError(f"constant series: {flat[:3]}")
    values = np.corrcoef(agg.series)
    np.fill_diagonal(values, 1.0)
    return PearsonMatrix(list(panel.labels), values, dt)


def vectorize_upper(values) -> np.ndarray:
    """Row-major upper triangle: all pairs with X1 first, then X2, ..."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError("expected a square matrix")
    iu = np.triu_indices(v.shape[0], k=1)
    return v[iu]


def scalar_product(c_vec, rho_vec) -> float:
    """P = <c, rho> / (|c| |rho|), in [-1, 1]."""
    c = np.asarray(c_vec, dtype=float)
    r = np.asarray(rho_vec, dtype=float)
    if c.shape != r.shape:
        raise ValueError("vectors must have equal length")
    nc, nr = np.linalg.norm(c), np.linalg.norm(r)
    if nc == 0 or nr == 0:
        raise ValueError("zero-norm vector")
    return float(np.dot(c, r) / (nc * nr))


def similarity_report(panel: SeriesPanel, dts, scales, q_values,
                      m: int = 2) -> SimilarityReport:
    """P(dt, s, q) between Pearson networks at each dt and detrended
    networks at each (s, q).  The detrended side always uses the
    unit-interval panel.
    """
    engine = FluctuationEngine(panel.series, m)
    rho_vecs = {}
    for s in scales:
        mats = rho_matrix_grid(panel, int(s), q_values, m, engine=engine)
        for q, mat in mats.items():
            rho_vecs[(int(s), q)] = vectorize_upper(mat.values)
        engine.drop_scale(int(s))
    values = {}
    for dt in dts:
        c_vec = vectorize_upper(pearson_matrix(panel, int(dt)).values)
        for (s, q), r_vec in rho_vecs.items():
            values[(int(dt), s, q)] = scalar_product(c_vec, r_vec)
    n = panel.n_series
    return SimilarityReport(values, n * (n - 1) // 2)


def write_similarity_csv(path, report: SimilarityReport):
    """Rows are (dt, s) combinations, columns the q grid."""
    keys = sorted(report.values)
    dts = sorted({k[0] for k in keys})
    scales = sorted({k[1] for k in keys})
    qs = sorted({k[2] for k in keys})
    buf = io.StringIO()
    buf.write("dt,s," + ",".join(f"q={q:g}" for q in qs) + "\n")
    for dt in dts:
        for s in scales:
            row = [str(dt), str(s)]
            row += [format(report.values[(dt, s, q)], ".12g") for q in qs]
            buf.write(",".join(row) + "\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())
