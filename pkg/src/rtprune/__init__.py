"""Visual-token pruning engine.

Selects dominant tokens by embedding norm, folds the rest in through a
dustbin-augmented optimal-transport plan, and can set the pruning ratio
adaptively from image edge density and token similarity.  Ships with an
analytic decoder FLOPs model and ranking-overlap diagnostics.
"""

from .costmodel import (
    DecoderCostConfig,
    attn_flops,
    calibrate_m,
    calibrated_config,
    ffn_flops,
    moe_flops,
    prune_at_layer_flops,
    total_flops,
)
from .density import (
    DynamicRatioConfig,
    GradientMap,
    PatchDensityMap,
    PatchGrid,
    dynamic_ratio,
    patch_density,
    sobel_magnitude,
    to_gray,
)
from .diagnostics import tir, top_k_indices
from .errors import (
    ConfigConflict,
    DegenerateTokenWarning,
    EmptyPruneSet,
    FileFormatError,
    InfeasibleCalibration,
    InvalidInput,
    NumericalFailure,
    RTPruneError,
)
from .netpbm import read_netpbm, write_netpbm
from .pipeline import (
    DynamicRatio,
    FixedRatio,
    PruneReport,
    PruneRequest,
    report_as_dict,
    rtprune,
)
from .tensorio import read_tensor, write_tensor
from .tokens import (
    SelectionResult,
    as_token_matrix,
    cosine_similarity,
    mean_pairwise_similarity,
    select_dominant,
    token_norms,
)
from .transport import SinkhornConfig, TransportPlan, augment, build_scores, merge, sinkhorn

__version__ = "0.1.0"

__all__ = [
    "ConfigConflict",
    "DecoderCostConfig",
    "DegenerateTokenWarning",
    "DynamicRatio",
    "DynamicRatioConfig",
    "EmptyPruneSet",
    "FileFormatError",
    "FixedRatio",
    "GradientMap",
    "InfeasibleCalibration",
    "InvalidInput",
    "NumericalFailure",
    "PatchDensityMap",
    "PatchGrid",
    "PruneReport",
    "PruneRequest",
    "RTPruneError",
    "SelectionResult",
    "SinkhornConfig",
    "TransportPlan",
    "as_token_matrix",
    "attn_flops",
    "augment",
    "build_scores",
    "calibrate_m",
    "calibrated_config",
    "cosine_similarity",
    "dynamic_ratio",
    "ffn_flops",
    "mean_pairwise_similarity",
    "merge",
    "moe_flops",
    "patch_density",
    "prune_at_layer_flops",
    "read_netpbm",
    "read_tensor",
    "report_as_dict",
    "rtprune",
    "select_dominant",
    "sinkhorn",
    "sobel_magnitude",
    "tir",
    "to_gray",
    "token_norms",
    "top_k_indices",
    "total_flops",
    "write_netpbm",
    "write_tensor",
]
