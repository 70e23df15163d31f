import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import clustertune as ct

DEMO_DIR = Path(os.environ.get("CLUSTERTUNE_DEMO_DIR", Path(__file__).resolve().parents[2] / "demo"))


def blobs(seed=3):
    rng = np.random.default_rng(seed)
    centers = np.array([[30, 0, 0, 10, 0], [0, 30, 0, 0, 10], [0, 0, 30, 10, 10]], dtype=float)
    data = np.vstack([c + rng.normal(size=(100, 5)) for c in centers])
    truth = np.repeat(np.arange(3), 100)
    return data, truth


def same_partition(a, b):
    return {frozenset(np.flatnonzero(np.asarray(a) == v)) for v in set(a)} == {
        frozenset(np.flatnonzero(np.asarray(b) == v)) for v in set(b)
    }


def test_hand_metric_values():
    labels = [0, 0, 1, 1]
    assert ct.silhouette(np.array([[0.0], [1.0], [5.0], [6.0]]), labels) == pytest.approx(0.79798, abs=5e-6)
    assert ct.calinski_harabasz(np.array([[0.0], [1.0], [10.0], [11.0]]), labels) == pytest.approx(200.0)
    assert ct.davies_bouldin(np.array([[0.0], [1.0], [5.0], [6.0]]), labels) == pytest.approx(0.2)
    assert math.isinf(ct.calinski_harabasz(np.array([[0.0, 0], [0, 0], [10, 10], [10, 10]]), labels))


def test_metric_errors_map_to_python_exceptions():
    with pytest.raises(ct.MetricUndefinedError):
        ct.silhouette(np.zeros((4, 1)), [0, 0, 0, 0])
    assert issubclass(ct.MetricUndefinedError, ct.ClustertuneError)


def test_clusterers_recover_blobs():
    data, truth = blobs()
    km = ct.kmeans(data, 3, seed=1)
    assert km.k == 3 and km.algorithm == "kmeans"
    assert same_partition(km.labels, truth)
    assert sorted(km.cluster_sizes) == [100, 100, 100]
    for linkage in ("ward", "complete", "average", "single"):
        assert same_partition(ct.agglomerative(data, 3, linkage).labels, truth)
    assignment, w, h = ct.nmf(data - data.min(axis=0), 3, seed=1)
    assert w.shape == (300, 3) and h.shape == (3, 5)
    assert (w >= 0).all() and (h >= 0).all()
    with pytest.raises(ct.ParameterError):
        ct.agglomerative(data, 3, "centroid")
    with pytest.raises(ct.ParameterError):
        ct.kmeans(data, 301)


def test_kmeans_is_deterministic():
    data, _ = blobs(9)
    assert ct.kmeans(data, 4, seed=5).labels == ct.kmeans(data, 4, seed=5).labels


def test_welch_and_incomplete_beta():
    assert ct.welch_t_test(1.0, 1.0, 10, 1.0, 2.0, 12) == pytest.approx(1.0)
    assert ct.regularized_incomplete_beta(1.0, 3.0, 0.25) == pytest.approx(1 - 0.75**3, abs=1e-12)


def test_profile_clusters():
    data, truth = blobs()
    stats = ct.profile_clusters(data, list(truth), 3, columns=list("abcde"))
    assert len(stats) == 15
    assert stats[0]["feature"] == "a" and stats[0]["cluster_id"] == 0
    assert stats[0]["significant"] and stats[0]["z_score"] > 1


def test_expand_grid_ids():
    cfg = {"dataset": {"path": "x.csv"}, "algorithms": {"ahc": {"k": [2], "linkage": ["ward", "single"]}}}
    cands = ct.expand_grid(json.dumps(cfg))
    assert [c["candidate_id"] for c in cands] == ["ahc_v0", "ahc_v1"]
    assert cands[0]["params"] == "k=2;linkage=ward"
    with pytest.raises(ct.ConfigError):
        ct.expand_grid(json.dumps({"dataset": {"path": "x"}, "algorithms": {"dbscan": {"eps": [1]}}}))


def test_demo_run(tmp_path):
    manifest_path = ct.run(DEMO_DIR / "config.json", tmp_path / "run", jobs=2)
    assert Path(manifest_path).is_file()
    manifest = ct.load_manifest(tmp_path / "run")
    assert manifest["schema_version"] == 1
    assert len(manifest["candidates"]) == 16
    for c in manifest["candidates"]:
        assert (tmp_path / "run" / c["profile_csv"]).is_file()
        assert (tmp_path / "run" / c["chart_svg"]).is_file()
    with pytest.raises(ct.ConfigError):
        ct.run(tmp_path / "missing.json", tmp_path / "never")
