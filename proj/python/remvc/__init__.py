"""Multi-view contrastive urban region embeddings.

Thin wrappers over the compiled ``_remvc`` module: configs go in as dicts and
reports come back as dicts.
"""

import json

from . import _remvc
from ._remvc import (ConfigError, Dataset, Error, NumericError, ParseError, RequestError, ShapeError,
                     ValidationError, ari, embed, f_measure, fingerprint_warning, gradcheck, info_nce, kmeans,
                     lasso_fit, load_checkpoint, load_dataset, nmi, tfidf_baseline)

__all__ = [
    "ConfigError", "Dataset", "Error", "NumericError", "ParseError", "RequestError", "ShapeError",
    "ValidationError", "ablate", "ari", "cluster", "embed", "f_measure", "fingerprint_warning", "gradcheck",
    "info_nce", "ingest", "kmeans", "lasso_fit", "load_checkpoint", "load_dataset", "nmi", "popularity",
    "synth", "tfidf_baseline", "train",
]


def _dump(config):
    return "" if config is None else json.dumps(config)


def synth(config=None):
    """Synthetic city; keys L, K, F, H, trips, pois_per_region, seed, poi_signal, mob_signal."""
    return _remvc.synth_city(_dump(config))


def ingest(regions, trips, pois, popularity=None, hours=24, threads=1):
    dataset, report = _remvc.ingest(str(regions), str(trips), str(pois),
                                    None if popularity is None else str(popularity), hours, threads)
    return dataset, json.loads(report)


def train(dataset, config=None):
    """Train with TrainConfig keys (nested ``model`` for the architecture); returns a checkpoint."""
    return _remvc.train(dataset, _dump(config))


def history(checkpoint):
    return json.loads(checkpoint.history)


def cluster(embeddings, labels, k=29, seed=42):
    return json.loads(_remvc.evaluate_clustering(embeddings, list(labels), k, seed))


def popularity(embeddings, y, folds=5, seed=42, penalty=0.1):
    return json.loads(_remvc.cross_validate_popularity(embeddings, y, folds, seed, penalty))


def ablate(dataset, config=None, k=None, folds=5, penalty=0.1, seed=42, threads=1):
    return json.loads(_remvc.run_ablation_suite(dataset, _dump(config), k, folds, penalty, seed, threads))
