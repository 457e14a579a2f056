"""In-process bindings for the rtprune engine.

Arrays cross this boundary as contiguous row-major float32 buffers:
float32 input is consumed zero-copy when already C-contiguous,
non-contiguous input is copied once and flagged in the report, and
caller memory is never mutated.  Results come back as fresh float32
arrays computed by the exact code path the command-line tool uses, so
outputs are bit-identical to the file-based interface on equal inputs.

Validation failures raise the core exception types; each carries the
same ``code`` the CLI would exit with.  Calls are reentrant: no state
is shared between requests, and the heavy kernels run inside the
numeric backend, which releases the interpreter lock during long
operations, so concurrent pipelines can overlap requests.
"""

from __future__ import annotations

import numpy as np

import rtprune as _core
from rtprune import ConfigConflict, InvalidInput
from rtprune.pipeline import report_as_dict

__version__ = _core.__version__

__all__ = ["rtprune", "patch_density", "dynamic_ratio", "total_flops", "tir", "__version__"]


def _bound_array(value, name: str, ndim: int) -> tuple[np.ndarray, bool]:
    """Validate a float32 boundary array; copy (once) only if non-contiguous."""
    if not isinstance(value, np.ndarray):
        raise InvalidInput(f"{name} must be a numpy array, got {type(value).__name__}")
    if value.dtype != np.float32:
        raise InvalidInput(f"{name} must be float32, got dtype {value.dtype}")
    if value.ndim != ndim:
        raise InvalidInput(f"{name} must be {ndim}-D, got {value.ndim}-D")
    copied = not value.flags["C_CONTIGUOUS"]
    if copied:
        value = np.ascontiguousarray(value)
    return value, copied


def _image_array(value) -> np.ndarray:
    """Accept a uint8 image (grayscale or RGB) or float32 grayscale in [0, 1]."""
    if not isinstance(value, np.ndarray):
        raise InvalidInput(f"image must be a numpy array, got {type(value).__name__}")
    if value.dtype == np.uint8 and value.ndim in (2, 3):
        return value
    if value.dtype == np.float32 and value.ndim == 2:
        return value
    raise InvalidInput(
        f"image must be uint8 (H, W) or (H, W, 3), or float32 (H, W); "
        f"got dtype {value.dtype} with {value.ndim} dimension(s)"
    )


def rtprune(
    tokens: np.ndarray,
    *,
    ratio: float | None = None,
    dynamic: bool = False,
    image: np.ndarray | None = None,
    grid: tuple[int, int] | None = None,
    z: float = 0.2,
    alpha: float = 0.1,
    tau: float = 0.2,
    iterations: int = 100,
    temperature: float = 1.0,
    r_max: float = 0.5,
) -> tuple[np.ndarray, dict]:
    """Prune and merge a float32 token matrix.

    Exactly one of ``ratio`` (fixed fraction in [0, 1)) or
    ``dynamic=True`` (ratio derived from ``image`` densities and token
    similarity; needs ``image`` and ``grid=(grid_h, grid_w)``) must be
    given.  Returns (float32 M x D matrix, report dict).  The report
    mirrors the CLI report fields and adds ``input_copied``.
    """
    if dynamic and ratio is not None:
        raise ConfigConflict("ratio and dynamic are mutually exclusive")
    if not dynamic and ratio is None:
        raise ConfigConflict("one of ratio or dynamic is required")
    if dynamic and (image is None or grid is None):
        raise ConfigConflict("dynamic mode requires both image and grid")
    if not dynamic and (image is not None or grid is not None):
        raise ConfigConflict("image and grid are only valid in dynamic mode")
    if ratio is not None and not (0.0 <= ratio < 1.0):
        raise ConfigConflict(f"ratio must lie in [0, 1), got {ratio}")

    bound, copied = _bound_array(tokens, "tokens", 2)
    sinkhorn_config = _core.SinkhornConfig(
        iterations=iterations, z=z, temperature=temperature, merge_alpha=alpha
    )
    if dynamic:
        image_arr = _image_array(image)
        grid_h, grid_w = (int(grid[0]), int(grid[1]))
        patch_grid = _core.PatchGrid.for_image(
            image_arr.shape[0], image_arr.shape[1], grid_h, grid_w
        )
        ratio_mode: _core.FixedRatio | _core.DynamicRatio = _core.DynamicRatio(
            _core.DynamicRatioConfig(tau=tau, r_max=r_max)
        )
    else:
        image_arr = None
        patch_grid = None
        ratio_mode = _core.FixedRatio(float(ratio))

    output, report = _core.rtprune(
        _core.PruneRequest(
            tokens=bound,
            ratio=ratio_mode,
            sinkhorn=sinkhorn_config,
            image=image_arr,
            grid=patch_grid,
        )
    )
    doc = report_as_dict(report)
    doc["input_copied"] = copied
    return output.astype(np.float32), doc


def patch_density(
    image: np.ndarray, grid: tuple[int, int], tau: float = 0.2
) -> tuple[np.ndarray, float]:
    """Per-patch edge densities of an image.

    Returns (float32 vector of grid_h * grid_w densities in row-major
    grid order, mean density).
    """
    image_arr = _image_array(image)
    if image_arr.ndim == 3:
        gray = _core.to_gray(image_arr)
    elif image_arr.dtype == np.uint8:
        gray = image_arr.astype(np.float64) / 255.0
    else:
        gray = image_arr.astype(np.float64)
    patch_grid = _core.PatchGrid.for_image(
        gray.shape[0], gray.shape[1], int(grid[0]), int(grid[1])
    )
    density = _core.patch_density(_core.sobel_magnitude(gray), patch_grid, tau)
    return density.rho_k.astype(np.float32), density.rho


def dynamic_ratio(
    phi: float,
    rho: float,
    *,
    phi_lo: float = 0.0,
    phi_hi: float = 1.0,
    r_min: float = 0.0,
    r_max: float = 0.5,
) -> float:
    """Content-adaptive pruning ratio from similarity phi and density rho."""
    config = _core.DynamicRatioConfig(phi_lo=phi_lo, phi_hi=phi_hi, r_min=r_min, r_max=r_max)
    return _core.dynamic_ratio(phi, rho, config)


def total_flops(
    n: int,
    *,
    d: int = 1280,
    m: int = 6854,
    m1: int = 896,
    m2: int = 1792,
    k: int = 6,
    t1: int = 1,
    t2: int = 11,
) -> int:
    """Whole-stack decoder cost in FLOPs for n tokens, as an exact int."""
    config = _core.DecoderCostConfig(d=d, m=m, m1=m1, m2=m2, k=k, t1=t1, t2=t2)
    return _core.total_flops(int(n), config)


def tir(norms: np.ndarray, attention: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-K overlap curves between norms and per-layer attention.

    Returns (layerwise, cumulative) as float32 vectors of length L.
    """
    norms_arr, _ = _bound_array(norms, "norms", 1)
    attn_arr, _ = _bound_array(attention, "attention", 2)
    layerwise, cumulative = _core.tir(norms_arr, attn_arr, int(k))
    return layerwise.astype(np.float32), cumulative.astype(np.float32)
