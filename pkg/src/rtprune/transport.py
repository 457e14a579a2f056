"""Optimal-transport merging of pruned tokens into kept tokens.

Kept and pruned tokens are matched by entropy-regularized optimal
transport on cosine scores.  The score matrix is augmented with a
dustbin row and column holding a constant score, so unmatched mass on
either side has somewhere to go.  The plan is computed with log-space
alternating normalizations; ending on the column update makes the
column marginals exact up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyPruneSet, InvalidInput, NumericalFailure
from .tokens import SelectionResult, _unit_rows, as_token_matrix


@dataclass(frozen=True)
class SinkhornConfig:
    """Knobs for the transport solve and the merge step."""

    iterations: int = 100
    z: float = 0.2
    temperature: float = 1.0
    merge_alpha: float = 0.1

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise InvalidInput(f"iterations must be >= 1, got {self.iterations}")
        if not np.isfinite(self.z):
            raise InvalidInput("dustbin score must be finite")
        if not (self.temperature > 0.0 and np.isfinite(self.temperature)):
            raise InvalidInput(f"temperature must be positive, got {self.temperature}")
        if not (self.merge_alpha >= 0.0 and np.isfinite(self.merge_alpha)):
            raise InvalidInput(f"merge weight must be >= 0, got {self.merge_alpha}")


@dataclass(frozen=True)
class TransportPlan:
    """Solved plan with the dustbins split off.

    ``plan`` is the M x (N - M) block mapping kept rows to pruned
    columns; ``augmented`` keeps the dustbin row and column for
    diagnostics.  ``converged_residual`` is the largest absolute
    violation of either augmented marginal.
    """

    plan: np.ndarray
    augmented: np.ndarray
    row_mass: np.ndarray
    col_mass: np.ndarray
    iterations: int
    converged_residual: float


def build_scores(tokens, sel: SelectionResult) -> np.ndarray:
    """Cosine score matrix between kept rows and pruned rows, M x (N - M)."""
    arr = as_token_matrix(tokens)
    if sel.pruned_indices.size == 0:
        raise EmptyPruneSet("selection kept every token; no scores to build")
    kept = _unit_rows(arr[sel.kept_indices])
    pruned = _unit_rows(arr[sel.pruned_indices])
    scores = kept @ pruned.T
    # Rounding can push |cos| a hair past 1; keep the documented range.
    np.clip(scores, -1.0, 1.0, out=scores)
    return scores


def augment(scores, z: float) -> np.ndarray:
    """Border ``scores`` with a dustbin row and column holding ``z``."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
        raise InvalidInput(f"score matrix must be 2-D and non-empty, got shape {s.shape}")
    if not np.isfinite(z):
        raise InvalidInput("dustbin score must be finite")
    m, c = s.shape
    out = np.full((m + 1, c + 1), float(z))
    out[:m, :c] = s
    return out


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    """Max-shifted log-sum-exp along ``axis``."""
    shift = np.max(a, axis=axis, keepdims=True)
    total = np.sum(np.exp(a - shift), axis=axis)
    return np.squeeze(shift, axis=axis) + np.log(total)


def _require_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericalFailure(f"non-finite values in {what}")


def sinkhorn(augmented_scores, config: SinkhornConfig = SinkhornConfig()) -> TransportPlan:
    """Solve the dustbin-augmented transport problem in log space.

    Row marginals are 1 per kept token and N - M for the dustbin row;
    column marginals are 1 per pruned token and M for the dustbin
    column, so both sides carry total mass N.
    """
    s = np.asarray(augmented_scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 2 or s.shape[1] < 2:
        raise InvalidInput(
            f"augmented scores must be 2-D with both sides >= 2, got shape {s.shape}"
        )
    if not np.all(np.isfinite(s)):
        raise InvalidInput("augmented scores contain NaN or Inf")

    m = s.shape[0] - 1
    c = s.shape[1] - 1
    z = s / config.temperature

    log_mu = np.zeros(m + 1)
    log_mu[-1] = np.log(c)
    log_nu = np.zeros(c + 1)
    log_nu[-1] = np.log(m)

    u = np.zeros(m + 1)
    v = np.zeros(c + 1)
    for _ in range(config.iterations):
        u = log_mu - _logsumexp(z + v[None, :], axis=1)
        v = log_nu - _logsumexp(z + u[:, None], axis=0)

    _require_finite(u, "row scaling")
    _require_finite(v, "column scaling")
    aug = np.exp(z + u[:, None] + v[None, :])
    _require_finite(aug, "transport plan")

    mu = np.ones(m + 1)
    mu[-1] = float(c)
    nu = np.ones(c + 1)
    nu[-1] = float(m)
    residual = max(
        float(np.max(np.abs(aug.sum(axis=1) - mu))),
        float(np.max(np.abs(aug.sum(axis=0) - nu))),
    )

    plan = aug[:-1, :-1].copy()
    return TransportPlan(
        plan=plan,
        augmented=aug,
        row_mass=plan.sum(axis=1),
        col_mass=plan.sum(axis=0),
        iterations=config.iterations,
        converged_residual=residual,
    )


def merge(tokens, sel: SelectionResult, plan: TransportPlan, alpha: float) -> np.ndarray:
    """Fold pruned rows into kept rows: kept + alpha * plan @ pruned.

    With alpha == 0 the kept rows are returned bit-identical, skipping
    the matrix product entirely.
    """
    alpha = float(alpha)
    if not (alpha >= 0.0 and np.isfinite(alpha)):
        raise InvalidInput(f"merge weight must be >= 0, got {alpha}")
    arr = as_token_matrix(tokens)
    kept = arr[sel.kept_indices]
    if alpha == 0.0:
        return kept
    pruned = arr[sel.pruned_indices]
    if plan.plan.shape != (kept.shape[0], pruned.shape[0]):
        raise InvalidInput(
            f"plan shape {plan.plan.shape} does not match selection "
            f"({kept.shape[0]} kept, {pruned.shape[0]} pruned)"
        )
    return kept + alpha * (plan.plan @ pruned)
