"""Token-matrix primitives: norms, cosine similarity, dominant-token selection.

A token matrix is an N x D array, one embedding vector per row.  All
routines validate their input once and compute in float64.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTokenWarning, InvalidInput


def as_token_matrix(tokens) -> np.ndarray:
    """Validate ``tokens`` and return it as a 2-D float64 array.

    Raises InvalidInput for wrong rank, empty axes, or non-finite entries.
    A float64 C-contiguous input is returned as-is, without copying.
    """
    arr = np.asarray(tokens, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInput(f"token matrix must be 2-D, got {arr.ndim}-D")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInput(f"token matrix must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("token matrix contains NaN or Inf")
    return np.ascontiguousarray(arr)


def token_norms(tokens) -> np.ndarray:
    """Euclidean norm of each token row, shape (N,)."""
    arr = as_token_matrix(tokens)
    return np.linalg.norm(arr, axis=1)


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors.

    A zero vector has no direction; the similarity is defined as 0.0 and a
    DegenerateTokenWarning is emitted.
    """
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.ndim != 1 or vb.ndim != 1 or va.shape != vb.shape:
        raise InvalidInput(
            f"expected two 1-D vectors of equal length, got shapes {va.shape} and {vb.shape}"
        )
    if va.size == 0:
        raise InvalidInput("vectors must be non-empty")
    if not (np.all(np.isfinite(va)) and np.all(np.isfinite(vb))):
        raise InvalidInput("vector contains NaN or Inf")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        warnings.warn("cosine similarity with a zero vector", DegenerateTokenWarning)
        return 0.0
    return float(np.dot(va, vb) / (na * nb))


def _unit_rows(arr: np.ndarray) -> np.ndarray:
    """Rows scaled to unit norm; all-zero rows stay zero (with a warning)."""
    norms = np.linalg.norm(arr, axis=1)
    zero = norms == 0.0
    if np.any(zero):
        warnings.warn(
            f"{int(zero.sum())} all-zero token row(s) treated as direction-free",
            DegenerateTokenWarning,
        )
    safe = np.where(zero, 1.0, norms)
    return arr / safe[:, None]


def mean_pairwise_similarity(tokens) -> float:
    """Mean cosine similarity over all unordered token pairs.

    Requires at least two tokens.  The result lies in [-1, 1]; identical
    nonzero rows give exactly 1 up to rounding.
    """
    arr = as_token_matrix(tokens)
    n = arr.shape[0]
    if n < 2:
        raise InvalidInput("mean pairwise similarity needs at least 2 tokens")
    unit = _unit_rows(arr)
    gram = unit @ unit.T
    # Off-diagonal sum counts each unordered pair twice; N(N-1) ordered pairs.
    total = float(gram.sum() - np.trace(gram))
    return total / (n * (n - 1))


@dataclass(frozen=True)
class SelectionResult:
    """Partition of token indices into a kept set and a prune set."""

    kept_indices: np.ndarray
    pruned_indices: np.ndarray
    norms: np.ndarray
    m: int
    r: float


def select_dominant(tokens, r: float) -> SelectionResult:
    """Keep the M tokens with the largest row norms.

    M = clamp(round(N * (1 - r)), 1, N).  Ties on the norm are broken
    toward the lower row index.  Both index arrays come back ascending.
    """
    r = float(r)
    if not (0.0 <= r < 1.0):
        raise InvalidInput(f"prune ratio must lie in [0, 1), got {r}")
    arr = as_token_matrix(tokens)
    n = arr.shape[0]
    m = min(max(round(n * (1.0 - r)), 1), n)
    norms = np.linalg.norm(arr, axis=1)
    # Stable sort of negated norms: equal norms keep ascending index order.
    order = np.argsort(-norms, kind="stable")
    kept = np.sort(order[:m])
    pruned = np.sort(order[m:])
    return SelectionResult(kept_indices=kept, pruned_indices=pruned, norms=norms, m=m, r=r)
