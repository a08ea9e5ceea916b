"""q-dependent detrended cross-correlation matrices, the metric
transform d = sqrt(2(1 - rho)), and the triangle-inequality audit."""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass

import numpy as np

from .fluctuation import FluctuationEngine, signed_q_average
from .panel import SeriesPanel

CLAMP_EPS = 1e-12


@dataclass(frozen=True)
class RhoMatrix:
    labels: list[str]
    values: np.ndarray
    s: int
    q: float
    m: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        n = len(self.labels)
        if v.shape != (n, n):
            raise ValueError("matrix shape does not match labels")


@dataclass(frozen=True)
class DistanceMatrix:
    labels: list[str]
    values: np.ndarray
    s: int
    q: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class TriangleAuditReport:
    triples_checked: int
    violations: int
    worst_slack: float


def rho_from_fluctuations(f_xy: float, f_xx: float, f_yy: float, q: float,
                          audit_mode: bool = False) -> float:
    """rho_q = F_xy / sqrt(F_xx F_yy) with the q<0 reciprocal fold.

    For q < 0 the coefficient is unbounded; audit mode maps |rho| > 1 to
    1/rho, which is only legitimate inside the triangle audit.
    """
    if not (f_xx > 0 and f_yy > 0):
        raise ValueError("zero auto-fluctuation (constant series?)")
    rho = f_xy / np.sqrt(f_xx * f_yy)
    if q < 0:
        if not audit_mode:
            raise ValueError("q < 0 is only supported in audit mode")
        if abs(rho) > 1.0:
            rho = 1.0 / rho
    return float(rho)


def rho_q(series_x, series_y, s: int, q: float, m: int = 2,
          audit_mode: bool = False) -> float:
    """Coefficient for a single pair of series."""
    engine = FluctuationEngine(np.vstack([series_x, series_y]), m)
    f_xy = signed_q_average(engine.pair_profile(0, 1, s), q)
    return rho_from_fluctuations(
        f_xy, engine.auto_fluctuation(0, s, q), engine.auto_fluctuation(1, s, q),
        q, audit_mode=audit_mode,
    )


def _check_range(values, q, labels):
    over = np.abs(values) - 1.0
    worst = float(np.max(over))
    if worst > CLAMP_EPS and q >= 0:
        i, j = np.unravel_index(np.argmax(over), values.shape)
        raise ArithmeticError(
            f"|rho|={values[i, j]} out of range for q={q} "
            f"at pair ({labels[i]}, {labels[j]}): upstream bug"
        )
    # floating-point dust only
    np.clip(values, -1.0, 1.0, out=values)


def rho_matrix_grid(panel: SeriesPanel, s: int, q_values, m: int = 2,
                    engine: FluctuationEngine | None = None,
                    audit_mode: bool = False) -> dict[float, RhoMatrix]:
    """All-pairs rho matrices for one scale and several q values.

    Per-pair box covariance profiles are computed once and reused across
    the q grid.
    """
    n = panel.n_series
    if n < 2:
        raise ValueError("need at least 2 series")
    if engine is None:
        engine = FluctuationEngine(panel.series, m)
    q_values = [float(q) for q in q_values]
    denom = {}
    for q in q_values:
        col = np.empty(n)
        for i in range(n):
            try:
                col[i] = engine.auto_fluctuation(i, s, q)
            except (ValueError, ArithmeticError) as exc:
                raise type(exc)(f"series {panel.labels[i]!r}: {exc}") from exc
            if not col[i] > 0:
                raise ValueError(
                    f"series {panel.labels[i]!r} has zero fluctuation at s={s}, q={q}"
                )
        denom[q] = col
    out = {q: np.eye(n) for q in q_values}
    for i in range(n):
        for j in range(i + 1, n):
            f2 = engine.pair_profile(i, j, s)
            for q in q_values:
                f_xy = signed_q_average(f2, q)
                rho = f_xy / np.sqrt(denom[q][i] * denom[q][j])
                if q < 0:
                    if not audit_mode:
                        raise ValueError("q < 0 is only supported in audit mode")
                    if abs(rho) > 1.0:
                        rho = 1.0 / rho
                out[q][i, j] = out[q][j, i] = rho
    result = {}
    for q in q_values:
        _check_range(out[q], q, panel.labels)
        result[q] = RhoMatrix(list(panel.labels), out[q], int(s), q, int(m))
    return result


def rho_matrix(panel: SeriesPanel, s: int, q: float, m: int = 2,
               audit_mode: bool = False) -> RhoMatrix:
    return rho_matrix_grid(panel, s, [q], m, audit_mode=audit_mode)[float(q)]


def to_distance(rho: RhoMatrix) -> DistanceMatrix:
    """Elementwise d = sqrt(2(1 - rho)); zero diagonal by construction."""
    v = rho.values.copy()
    over = np.max(v) - 1.0
    if over > CLAMP_EPS and rho.q >= 0:
        raise ArithmeticError(f"rho entry exceeds 1 by {over}: upstream bug")
    np.clip(v, -1.0, 1.0, out=v)
    d = np.sqrt(2.0 * (1.0 - v))
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(list(rho.labels), d, rho.s, rho.q)


def triangle_audit(d: DistanceMatrix) -> TriangleAuditReport:
    """Test d_XY + d_YZ >= d_XZ over all orientations of all triples.

    A triple counts as one violation no matter how many of its three
    orientations fail; worst_slack is the most negative slack seen.
    """
    v = d.values
    n = v.shape[0]
    if n < 3:
        raise ValueError("triangle audit needs at least 3 nodes")
    idx = np.array(list(itertools.combinations(range(n), 3)))
    i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
    ij, jk, ik = v[i, j], v[j, k], v[i, k]
    slacks = np.stack([ij + jk - ik, ij + ik - jk, ik + jk - ij])
    worst = slacks.min(axis=0)
    violations = int(np.sum(worst < 0))
    return TriangleAuditReport(
        triples_checked=len(idx),
        violations=violations,
        worst_slack=float(worst.min()),
    )


def write_matrix_csv(path, labels, values):
    """Symmetric matrix CSV: label header row and column, 12 significant digits."""
    buf = io.StringIO()
    buf.write("," + ",".join(labels) + "\n")
    for lab, row in zip(labels, values):
        buf.write(lab + "," + ",".join(format(v, ".12g") for v in row) + "\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def read_matrix_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    labels = lines[0].split(",")[1:]
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        rows.append([float(c) for c in cells[1:]])
    values = np.asarray(rows, dtype=float)
    if values.shape != (len(labels), len(labels)):
        raise ValueError("matrix CSV is not square")
    return labels, values
