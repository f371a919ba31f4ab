"""Time-series dataset similarity from Gaussian window sketches.

Each dataset is reduced to the mean and covariance of N fixed-length,
min-max-normalized windows. Datasets are compared with the closed-form
2-Wasserstein distance between the fitted Gaussians.
"""
__version__ = "0.1.0"

from .analysis import (
    CorrelationReport,
    DistanceMatrix,
    correlate,
    export_heatmap,
    export_matrix,
    load_matrix,
    matrix_from_params,
    pairwise_matrix,
)
from .baselines import (
    dtw_distance,
    dtw_mean_distance,
    euclidean_mean_distance,
    linkage_distance,
    linkage_distances,
)
from .gaussian import MvnParams, fit_mvn, load_sketch, save_sketch, wasserstein_distance
from .ingest import (
    SampleMatrix,
    SamplingConfig,
    TimeSeriesDataset,
    load_dataset,
    minmax_normalize,
    sample_windows,
)
from .layout import LayoutCoordinates, export_layout, kamada_kawai_layout
