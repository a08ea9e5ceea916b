"""scikit-learn style wrappers.

Arrays follow the sklearn convention: X has shape (n_samples,
n_series), one column per series.  The functional core works on
(n_series, n_samples); these wrappers transpose at the boundary.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from . import transforms
from .correlation import rho_matrix_grid, to_distance
from .panel import SeriesPanel
from .significance import filter_tree, surrogate_thresholds
from .transforms import TransformSpec
from .tree import kruskal


def _as_panel(X, ensure_min_samples=2):
    X = check_array(X, ensure_min_samples=ensure_min_samples)
    labels = [f"c{i:04d}" for i in range(X.shape[1])]
    return SeriesPanel(labels, X.T)


class _PanelTransformer(BaseEstimator, TransformerMixin):
    """Stateless column-wise panel transform."""

    def fit(self, X, y=None):
        check_array(X)
        return self

    def transform(self, X):
        panel = _as_panel(X, ensure_min_samples=1)
        return self._apply(panel).series.T

    def _apply(self, panel):  # pragma: no cover - abstract
        raise NotImplementedError


class LogReturns(BaseEstimator, TransformerMixin):
    """ln p(t+dt) - ln p(t) at stride dt on positive price columns."""

    def __init__(self, dt=1):
        self.dt = dt

    def fit(self, X, y=None):
        check_array(X)
        return self

    def transform(self, X):
        X = check_array(X, ensure_min_samples=2)
        from .panel import PricePanel

        labels = [f"c{i:04d}" for i in range(X.shape[1])]
        prices = PricePanel(labels, X.T)
        return transforms.log_returns(prices, self.dt).series.T


class PanelShuffler(_PanelTransformer):
    """Independent uniform permutation of each column."""

    def __init__(self, random_state=0):
        self.random_state = random_state

    def _apply(self, panel):
        return transforms.shuffle(panel, seed=int(self.random_state))


class Gaussianizer(_PanelTransformer):
    """Rank-preserving remap of each column onto a Gaussian sample."""

    def __init__(self, random_state=0):
        self.random_state = random_state

    def _apply(self, panel):
        return transforms.gaussianize(panel, seed=int(self.random_state))


class SignTransformer(_PanelTransformer):
    """Replace values by their signs."""

    def _apply(self, panel):
        return transforms.sign_series(panel)


class AmplitudeShuffler(_PanelTransformer):
    """Permute values in one amplitude class of each column.

    mode "above" shuffles |x| > threshold_sigma * sd, "below" shuffles
    |x| < threshold_sigma * sd; `signed` compares x instead of |x|.
    """

    def __init__(self, mode="above", threshold_sigma=1.8, signed=False, random_state=0):
        self.mode = mode
        self.threshold_sigma = threshold_sigma
        self.signed = signed
        self.random_state = random_state

    def _apply(self, panel):
        spec = TransformSpec(
            kind=f"amp-shuffle-{self.mode}",
            threshold_sigma=self.threshold_sigma,
            seed=int(self.random_state),
            signed=self.signed,
        )
        return transforms.amplitude_partition_shuffle(panel, spec)


class DetrendedCorrelation(BaseEstimator):
    """q-dependent detrended cross-correlation structure of a panel.

    fit(X) computes, for columns of X, the coefficient matrix `rho_`
    and the metric distances `distance_` at (scale, q, order).
    """

    def __init__(self, scale=20, q=2.0, order=2):
        self.scale = scale
        self.q = q
        self.order = order

    def fit(self, X, y=None):
        panel = _as_panel(X, ensure_min_samples=2 * int(self.scale))
        mats = rho_matrix_grid(panel, int(self.scale), [float(self.q)], int(self.order))
        rho = mats[float(self.q)]
        self.n_features_in_ = panel.n_series
        self.rho_ = rho.values
        self.distance_ = to_distance(rho).values
        return self

    def fit_transform(self, X, y=None):
        """Return the distance matrix (metric embedding of the panel)."""
        return self.fit(X).distance_


class QMinimumSpanningTree(BaseEstimator):
    """q-dependent MST of a panel, optionally significance-filtered.

    After fit, `tree_` holds the spanning tree built on the full
    distance matrix; with n_surrogates > 0, `filtered_tree_` holds the
    forest left after removing edges below the surrogate threshold
    `tau_` and `significant_` marks surviving edges.
    """

    def __init__(self, scale=20, q=2.0, order=2, n_surrogates=0, random_state=0):
        self.scale = scale
        self.q = q
        self.order = order
        self.n_surrogates = n_surrogates
        self.random_state = random_state

    def fit(self, X, y=None):
        panel = _as_panel(X, ensure_min_samples=2 * int(self.scale))
        s, q = int(self.scale), float(self.q)
        rho = rho_matrix_grid(panel, s, [q], int(self.order))[q]
        dist = to_distance(rho)
        self.rho_ = rho.values
        self.tree_ = kruskal(dist, rho)
        if self.n_surrogates:
            table = surrogate_thresholds(
                panel, [s], [q], n_sets=int(self.n_surrogates),
                seed=int(self.random_state),
            )
            self.tau_ = table.tau(s, q)
            self.filtered_tree_ = filter_tree(self.tree_, rho, self.tau_)
        return self
