"""End-to-end pruning pipeline: ratio -> selection -> transport -> merge.

The pipeline only sequences the stage functions and times them; every
output row is exactly the row the merge step produced.  With a fixed
ratio of 0 (or any ratio that keeps all tokens) the transport and merge
stages are skipped and the output is the input, bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .density import (
    DynamicRatioConfig,
    PatchGrid,
    dynamic_ratio,
    patch_density,
    sobel_magnitude,
    to_gray,
)
from .errors import InvalidInput
from .tokens import as_token_matrix, mean_pairwise_similarity, select_dominant
from .transport import SinkhornConfig, augment, build_scores, merge, sinkhorn


@dataclass(frozen=True)
class FixedRatio:
    """Prune a caller-chosen fraction of tokens."""

    r: float

    def __post_init__(self) -> None:
        if not (0.0 <= float(self.r) < 1.0):
            raise InvalidInput(f"prune ratio must lie in [0, 1), got {self.r}")


@dataclass(frozen=True)
class DynamicRatio:
    """Derive the fraction from token similarity and image edge density."""

    config: DynamicRatioConfig = field(default_factory=DynamicRatioConfig)


@dataclass(frozen=True)
class PruneRequest:
    """One pruning job.

    ``image`` and ``grid`` are required with a DynamicRatio and ignored
    otherwise.  The image may be uint8 RGB (H, W, 3), uint8 grayscale
    (H, W), or float grayscale already scaled to [0, 1]; the grid must
    tile the image with exactly one patch per token.
    """

    tokens: np.ndarray
    ratio: FixedRatio | DynamicRatio
    sinkhorn: SinkhornConfig = field(default_factory=SinkhornConfig)
    image: np.ndarray | None = None
    grid: PatchGrid | None = None


@dataclass
class PruneReport:
    """What the pipeline did: ratio applied, tokens kept, stage timings.

    ``phi`` (mean pairwise token similarity), ``rho`` (mean patch edge
    density) and ``sinkhorn_residual`` are None for stages that did not
    run.  ``merged_mass_per_kept`` holds the plan's row sums, zeros when
    nothing was merged.
    """

    applied_r: float
    m: int
    kept_indices: np.ndarray
    phi: float | None
    rho: float | None
    sinkhorn_residual: float | None
    merged_mass_per_kept: np.ndarray
    timing_ms: dict[str, float]


def _as_gray(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim == 3:
        return to_gray(arr)
    if arr.ndim == 2:
        if arr.dtype == np.uint8:
            return arr.astype(np.float64) / 255.0
        return arr.astype(np.float64)
    raise InvalidInput(f"image must be (H, W) or (H, W, 3), got shape {arr.shape}")


def rtprune(request: PruneRequest) -> tuple[np.ndarray, PruneReport]:
    """Run the pipeline and return (pruned token matrix, report)."""
    t_start = time.perf_counter()
    timing = {"density": 0.0, "similarity": 0.0, "selection": 0.0, "transport": 0.0, "merge": 0.0}
    arr = as_token_matrix(request.tokens)
    n = arr.shape[0]

    phi: float | None = None
    rho: float | None = None
    if isinstance(request.ratio, DynamicRatio):
        if request.image is None or request.grid is None:
            raise InvalidInput("dynamic ratio needs an image and a patch grid")
        if request.grid.n_patches != n:
            raise InvalidInput(
                f"grid has {request.grid.n_patches} patches but there are {n} tokens"
            )
        t0 = time.perf_counter()
        grad = sobel_magnitude(_as_gray(request.image))
        density = patch_density(grad, request.grid, request.ratio.config.tau)
        rho = density.rho
        timing["density"] = (time.perf_counter() - t0) * 1e3
        t0 = time.perf_counter()
        phi = mean_pairwise_similarity(arr)
        timing["similarity"] = (time.perf_counter() - t0) * 1e3
        applied_r = dynamic_ratio(phi, rho, request.ratio.config)
    elif isinstance(request.ratio, FixedRatio):
        applied_r = float(request.ratio.r)
    else:
        raise InvalidInput(f"unsupported ratio mode {type(request.ratio).__name__}")

    t0 = time.perf_counter()
    sel = select_dominant(arr, applied_r)
    timing["selection"] = (time.perf_counter() - t0) * 1e3

    residual: float | None = None
    if sel.pruned_indices.size == 0:
        output = arr[sel.kept_indices]
        merged_mass = np.zeros(sel.m)
    else:
        t0 = time.perf_counter()
        scores = build_scores(arr, sel)
        plan = sinkhorn(augment(scores, request.sinkhorn.z), request.sinkhorn)
        residual = plan.converged_residual
        timing["transport"] = (time.perf_counter() - t0) * 1e3
        t0 = time.perf_counter()
        output = merge(arr, sel, plan, request.sinkhorn.merge_alpha)
        timing["merge"] = (time.perf_counter() - t0) * 1e3
        merged_mass = plan.row_mass

    timing["total"] = (time.perf_counter() - t_start) * 1e3
    report = PruneReport(
        applied_r=applied_r,
        m=sel.m,
        kept_indices=sel.kept_indices,
        phi=phi,
        rho=rho,
        sinkhorn_residual=residual,
        merged_mass_per_kept=merged_mass,
        timing_ms=timing,
    )
    return output, report


def report_as_dict(report: PruneReport) -> dict:
    """Report as plain JSON-serializable types.

    Scalar floats stay Python floats (serialized by repr, which
    round-trips exactly); index and mass arrays become lists.
    """
    return {
        "applied_r": float(report.applied_r),
        "M": int(report.m),
        "kept_indices": [int(i) for i in report.kept_indices],
        "phi": None if report.phi is None else float(report.phi),
        "rho": None if report.rho is None else float(report.rho),
        "sinkhorn_residual": (
            None if report.sinkhorn_residual is None else float(report.sinkhorn_residual)
        ),
        "merged_mass_per_kept": [float(x) for x in report.merged_mass_per_kept],
        "timing_ms": {k: float(v) for k, v in report.timing_ms.items()},
    }
