"""Deterministic grid search over clustering hyperparameters.

The compiled core does the work; this package re-exports it and adds a
manifest reader for finished runs.
"""

import json
from pathlib import Path

from ._core import (
    ClusterAssignment,
    ClustertuneError,
    ConfigError,
    DegenerateMetricError,
    DomainError,
    IngestionError,
    InsufficientDataError,
    IoError,
    MetricUndefinedError,
    ParameterError,
    SchemaError,
    TestUndefinedError,
    agglomerative,
    calinski_harabasz,
    davies_bouldin,
    expand_grid,
    kmeans,
    nmf,
    profile_clusters,
    regularized_incomplete_beta,
    run,
    silhouette,
    welch_t_test,
)

__version__ = "0.1.0"


def load_manifest(run_dir):
    """Parsed manifest.json of a run directory."""
    return json.loads((Path(run_dir) / "manifest.json").read_text(encoding="utf-8"))


__all__ = [name for name in dir() if not name.startswith("_")]
