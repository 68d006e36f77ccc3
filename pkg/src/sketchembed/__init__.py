"""Streaming linear-sketch vertex embeddings for community detection.

Vertices of a graph given as a turnstile stream of edge updates are embedded
by a CountSketch or subsampled randomized Hadamard operator applied to their
adjacency rows, then clustered with k-means.
"""
from .clustering import kmeans, spectral_embed
from .engine import StreamEngine, run_stream
from .graph import EdgeUpdate, Partition, UpdateStream
from .metrics import MetricsReport, accuracy, evaluate, pairwise_pr
from .sbm import SbmSpec, flat_spec, graphchallenge_spec, sample_sbm, two_level_spec
from .sketch import CstOperator, FwhtOperator, dimension_for, make_operator

__version__ = "0.1.0"

__all__ = [
    "CstOperator", "EdgeUpdate", "FwhtOperator", "MetricsReport", "Partition", "SbmSpec",
    "StreamEngine", "UpdateStream", "accuracy", "dimension_for", "evaluate", "flat_spec",
    "graphchallenge_spec", "kmeans", "make_operator", "pairwise_pr", "run_stream",
    "sample_sbm", "spectral_embed", "two_level_spec",
]
