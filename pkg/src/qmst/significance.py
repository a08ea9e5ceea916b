"""Surrogate-ensemble significance thresholds and edge filtering.

The null hypothesis is that observed coefficients arise from random
processes sharing the empirical marginals.  Each surrogate set shuffles
every series independently; the threshold is mean + 2 sd of the
per-set maximum coefficient over all pairs.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .correlation import RhoMatrix, rho_matrix_grid
from .fluctuation import FluctuationEngine
from .panel import SeriesPanel
from .transforms import shuffle
from .tree import Edge, Tree


@dataclass(frozen=True)
class ThresholdEntry:
    tau: float
    mean_max: float
    sd_max: float
    n_sets: int
    seed: int


@dataclass(frozen=True)
class ThresholdTable:
    entries: dict[tuple[int, float], ThresholdEntry]

    def tau(self, s: int, q: float) -> float:
        return self.entries[(int(s), float(q))].tau


def surrogate_maxima(panel: SeriesPanel, scales, q_values, n_sets: int, seed: int):
    """Per-set maxima of rho over all pairs, keyed by (s, q).

    Set k shuffles with streams derived from (seed, k); sets are
    independent jobs and the fold over k is ordered, so results do not
    depend on scheduling.
    """
    if n_sets < 2:
        raise ValueError("need at least 2 surrogate sets")
    maxima = {(int(s), float(q)): np.empty(n_sets) for s in scales for q in q_values}
    n = panel.n_series
    iu = np.triu_indices(n, k=1)
    for k in range(n_sets):
        surrogate = shuffle(panel, seed=derive_set_seed(seed, k))
        engine = FluctuationEngine(surrogate.series, m=2)
        for s in scales:
            mats = rho_matrix_grid(surrogate, int(s), q_values, engine=engine)
            for q, mat in mats.items():
                maxima[(int(s), q)][k] = float(np.max(mat.values[iu]))
            engine.drop_scale(int(s))
    return maxima


def derive_set_seed(seed: int, index: int) -> int:
    # well-mixed per-set seed; plain addition would collide with the
    # per-series streams derived inside shuffle()
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def surrogate_thresholds(panel: SeriesPanel, scales, q_values,
                         n_sets: int = 50, seed: int = 0) -> ThresholdTable:
    """tau = mean + 2 * sample sd of the per-set maxima, per (s, q)."""
    maxima = surrogate_maxima(panel, scales, q_values, n_sets, seed)
    entries = {}
    for key, vals in maxima.items():
        mean = float(np.mean(vals))
        sd = float(np.std(vals, ddof=1))
        entries[key] = ThresholdEntry(mean + 2.0 * sd, mean, sd, n_sets, int(seed))
    return ThresholdTable(entries)


def filter_tree(tree: Tree, rho: RhoMatrix, tau: float) -> Tree:
    """Drop edges with rho < tau, then drop isolated nodes.

    Idempotent at fixed tau; raising tau never adds edges or nodes.
    """
    index = {lab: i for i, lab in enumerate(rho.labels)}
    missing = [lab for lab in tree.labels if lab not in index]
    if missing:
        raise ValueError(f"tree labels absent from rho matrix: {missing[:3]}")
    kept = []
    for e in tree.edges:
        r = float(rho.values[index[e.a], index[e.b]])
        if r >= tau:
            kept.append(Edge(e.a, e.b, e.distance, r, significant=True))
    connected = {lab for e in kept for lab in (e.a, e.b)}
    labels = [lab for lab in tree.labels if lab in connected]
    return Tree(labels, kept, s=tree.s, q=tree.q, filtered=True)


def write_threshold_csv(path, table: ThresholdTable):
    buf = io.StringIO()
    buf.write("s,q,tau,mean_max,sd_max,n_sets,seed\n")
    for (s, q), e in sorted(table.entries.items()):
        buf.write(
            f"{s},{q:g},{e.tau:.12g},{e.mean_max:.12g},{e.sd_max:.12g},{e.n_sets},{e.seed}\n"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def read_threshold_csv(path) -> ThresholdTable:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    entries = {}
    for ln in lines[1:]:
        s, q, tau, mean_max, sd_max, n_sets, seed = ln.split(",")
        entries[(int(s), float(q))] = ThresholdEntry(
            float(tau), float(mean_max), float(sd_max), int(n_sets), int(seed)
        )
    return ThresholdTable(entries)
