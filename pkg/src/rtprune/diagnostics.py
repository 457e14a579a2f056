"""Ranking-overlap diagnostics between token norms and attention scores.

For each decoder layer, the top-K tokens by attention weight are
compared against the top-K tokens by embedding norm.  The layerwise
ratio is the overlap with that single layer; the cumulative ratio uses
the union of top-K sets over all layers seen so far.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput


def top_k_indices(values, k: int) -> np.ndarray:
    """Indices of the k largest values; ties go to the lower index."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInput(f"expected a non-empty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("values contain NaN or Inf")
    if not (1 <= k <= arr.size):
        raise InvalidInput(f"k must lie in [1, {arr.size}], got {k}")
    order = np.argsort(-arr, kind="stable")
    return order[:k]


def tir(norms, attention, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-K intersection ratios, one pair of curves over layers.

    ``attention`` is an L x N matrix of per-layer token scores;
    ``norms`` is the length-N vector the scores are compared against.
    Returns (layerwise, cumulative), each of length L with values in
    [0, 1].  The cumulative curve is non-decreasing.
    """
    norm_vec = np.asarray(norms, dtype=np.float64)
    attn = np.asarray(attention, dtype=np.float64)
    if norm_vec.ndim != 1 or norm_vec.size == 0:
        raise InvalidInput(f"norms must be a non-empty 1-D array, got shape {norm_vec.shape}")
    if attn.ndim != 2 or attn.shape[0] == 0:
        raise InvalidInput(f"attention must be a non-empty L x N matrix, got shape {attn.shape}")
    if attn.shape[1] != norm_vec.size:
        raise InvalidInput(
            f"attention width {attn.shape[1]} does not match {norm_vec.size} norms"
        )
    if not np.all(np.isfinite(attn)):
        raise InvalidInput("attention contains NaN or Inf")

    norm_top = frozenset(top_k_indices(norm_vec, k).tolist())
    layers = attn.shape[0]
    layerwise = np.zeros(layers)
    cumulative = np.zeros(layers)
    union: set[int] = set()
    for layer in range(layers):
        layer_top = set(top_k_indices(attn[layer], k).tolist())
        layerwise[layer] = len(norm_top & layer_top) / k
        union |= layer_top
        cumulative[layer] = len(norm_top & union) / k
    return layerwise, cumulative
