"""Python bindings for the sprig retrieval core."""

import json as _json

from . import _sprig
from ._sprig import (
    Bm25Index,
    Corpus,
    Graph,
    SprigError,
    adaptive_mix_weight,
    compute_metrics,
    extract_entities,
    load_vectors,
    paired_bootstrap,
    rrf_fuse,
    tfidf_edge_weight,
    write_vectors,
)

__all__ = [
    "Bm25Index",
    "Corpus",
    "Engine",
    "Graph",
    "SprigError",
    "adaptive_mix_weight",
    "compute_metrics",
    "config_hash",
    "evaluate",
    "extract_entities",
    "index",
    "load_vectors",
    "paired_bootstrap",
    "rrf_fuse",
    "significance",
    "tfidf_edge_weight",
    "write_vectors",
]


def _dump(config):
    return config if isinstance(config, str) else _json.dumps(config)


class Engine(_sprig.Engine):
    """Loads the dataset named by `config` (dict or JSON text) and builds
    every artifact the configured method needs."""

    def __init__(self, config):
        super().__init__(_dump(config))


def config_hash(config):
    return _sprig.config_hash(_dump(config))


def index(config):
    """Same as `sprig index`; returns the manifest."""
    return _json.loads(_sprig.index(_dump(config)))


def evaluate(config):
    """Same as `sprig eval`; returns aggregate metrics."""
    return _sprig.evaluate(_dump(config))


def significance(config, baseline, runs):
    return _sprig.significance(_dump(config), baseline, list(runs))
