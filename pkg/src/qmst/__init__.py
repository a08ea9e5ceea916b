"""q-dependent detrended cross-correlation coefficients and
q-dependent minimum spanning trees for panels of nonstationary series."""

__version__ = "0.1.0"

from .baseline import (
    PearsonMatrix,
    SimilarityReport,
    pearson_matrix,
    scalar_product,
    similarity_report,
    vectorize_upper,
)
from .correlation import (
    DistanceMatrix,
    RhoMatrix,
    TriangleAuditReport,
    rho_matrix,
    rho_matrix_grid,
    rho_q,
    to_distance,
    triangle_audit,
)
from .estimators import (
    AmplitudeShuffler,
    DetrendedCorrelation,
    Gaussianizer,
    LogReturns,
    PanelShuffler,
    QMinimumSpanningTree,
    SignTransformer,
)
from .fluctuation import FluctuationEngine, FluctuationSet, fluctuation, partition
from .panel import PricePanel, SeriesPanel, read_price_csv, read_series_csv, write_series_csv
from .pipeline import RunConfig, parse_config, run_pipeline
from .significance import ThresholdTable, filter_tree, surrogate_thresholds
from .synthetic import ArfimaParams, CorrelatedPairParams, arfima_panel, correlated_pair_panel
from .transforms import (
    TransformSpec,
    amplitude_partition_shuffle,
    gaussianize,
    log_returns,
    shuffle,
    sign_series,
)
from .tree import Tree, TreeComparison, TreeMetrics, compare, kruskal, metrics
