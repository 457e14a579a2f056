"""Edge density and the content-adaptive pruning ratio.

An image is reduced to grayscale, Sobel gradient magnitudes are taken
over the interior (the one-pixel border has no full 3x3 neighborhood and
is excluded), and each grid patch is scored by the fraction of its
pixels whose magnitude clears a threshold.  The mean patch density and
the mean pairwise token similarity together set the pruning ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

# Horizontal-derivative kernel; the vertical one is its transpose-flip.
_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = np.array([[1.0, 2.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -2.0, -1.0]])


def to_gray(rgb) -> np.ndarray:
    """Luma grayscale of an 8-bit RGB image, scaled to [0, 1].

    Uses the 0.299 / 0.587 / 0.114 channel weights.
    """
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInput(f"expected an H x W x 3 image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInput("image must be non-empty")
    if arr.dtype != np.uint8:
        raise InvalidInput(f"expected 8-bit channel values, got dtype {arr.dtype}")
    r = arr[:, :, 0].astype(np.float64)
    g = arr[:, :, 1].astype(np.float64)
    b = arr[:, :, 2].astype(np.float64)
    return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0


@dataclass(frozen=True)
class GradientMap:
    """Per-pixel gradient magnitude plus the mask of pixels that have one.

    Border pixels are marked invalid and carry magnitude 0.
    """

    magnitude: np.ndarray
    valid: np.ndarray


def sobel_magnitude(gray) -> GradientMap:
    """Sobel gradient magnitude of a grayscale image in [0, 1].

    The image must be at least 3 x 3 so the interior is non-empty.
    """
    img = np.asarray(gray, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidInput(f"expected a 2-D grayscale image, got {img.ndim}-D")
    h, w = img.shape
    if h < 3 or w < 3:
        raise InvalidInput(f"image must be at least 3 x 3 for gradients, got {h} x {w}")
    if not np.all(np.isfinite(img)):
        raise InvalidInput("image contains NaN or Inf")
    if img.min() < 0.0 or img.max() > 1.0:
        raise InvalidInput("grayscale values must lie in [0, 1]")

    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    for di in range(3):
        for dj in range(3):
            wx = _SOBEL_X[di, dj]
            wy = _SOBEL_Y[di, dj]
            window = img[di : di + h - 2, dj : dj + w - 2]
            if wx != 0.0:
                gx[1:-1, 1:-1] += wx * window
            if wy != 0.0:
                gy[1:-1, 1:-1] += wy * window

    magnitude = np.hypot(gx, gy)
    valid = np.zeros(img.shape, dtype=bool)
    valid[1:-1, 1:-1] = True
    magnitude[~valid] = 0.0
    return GradientMap(magnitude=magnitude, valid=valid)


@dataclass(frozen=True)
class PatchGrid:
    """A grid_h x grid_w tiling of an image into equal patches."""

    grid_h: int
    grid_w: int
    patch_h: int
    patch_w: int

    def __post_init__(self) -> None:
        for name in ("grid_h", "grid_w", "patch_h", "patch_w"):
            if getattr(self, name) < 1:
                raise InvalidInput(f"{name} must be >= 1, got {getattr(self, name)}")

    @property
    def n_patches(self) -> int:
        return self.grid_h * self.grid_w

    @classmethod
    def for_image(cls, height: int, width: int, grid_h: int, grid_w: int) -> "PatchGrid":
        """Grid over an image; the grid must divide both dimensions."""
        if grid_h < 1 or grid_w < 1:
            raise InvalidInput(f"grid must be at least 1 x 1, got {grid_h} x {grid_w}")
        if height % grid_h != 0 or width % grid_w != 0:
            raise InvalidInput(
                f"grid {grid_h} x {grid_w} does not divide image {height} x {width}"
            )
        return cls(grid_h=grid_h, grid_w=grid_w, patch_h=height // grid_h, patch_w=width // grid_w)


@dataclass(frozen=True)
class PatchDensityMap:
    """Per-patch edge density (row-major over the grid) and its mean."""

    rho_k: np.ndarray
    rho: float
    tau: float


def patch_density(grad: GradientMap, grid: PatchGrid, tau: float = 0.2) -> PatchDensityMap:
    """Fraction of each patch's pixels with a valid gradient >= tau.

    The denominator is the full patch area, so border pixels count
    against the density even though they can never be active.
    """
    tau = float(tau)
    if not (tau >= 0.0 and np.isfinite(tau)):
        raise InvalidInput(f"threshold must be >= 0, got {tau}")
    h, w = grad.magnitude.shape
    if grad.valid.shape != (h, w):
        raise InvalidInput("gradient magnitude and validity mask shapes differ")
    if grid.grid_h * grid.patch_h != h or grid.grid_w * grid.patch_w != w:
        raise InvalidInput(
            f"grid {grid.grid_h} x {grid.grid_w} with patch {grid.patch_h} x {grid.patch_w} "
            f"does not tile a {h} x {w} image"
        )
    active = grad.valid & (grad.magnitude >= tau)
    counts = (
        active.reshape(grid.grid_h, grid.patch_h, grid.grid_w, grid.patch_w)
        .sum(axis=(1, 3))
        .astype(np.float64)
    )
    rho_k = (counts / (grid.patch_h * grid.patch_w)).reshape(-1)
    return PatchDensityMap(rho_k=rho_k, rho=float(rho_k.mean()), tau=tau)


@dataclass(frozen=True)
class DynamicRatioConfig:
    """Bounds and thresholds for the content-adaptive ratio."""

    tau: float = 0.2
    phi_lo: float = 0.0
    phi_hi: float = 1.0
    r_min: float = 0.0
    r_max: float = 0.5

    def __post_init__(self) -> None:
        if not (self.tau >= 0.0 and np.isfinite(self.tau)):
            raise InvalidInput(f"threshold must be >= 0, got {self.tau}")
        if not (self.phi_lo < self.phi_hi):
            raise InvalidInput(
                f"similarity window must have phi_lo < phi_hi, got [{self.phi_lo}, {self.phi_hi}]"
            )
        if not (0.0 <= self.r_min <= self.r_max < 1.0):
            raise InvalidInput(
                f"ratio bounds must satisfy 0 <= r_min <= r_max < 1, got [{self.r_min}, {self.r_max}]"
            )


def dynamic_ratio(phi: float, rho: float, config: DynamicRatioConfig = DynamicRatioConfig()) -> float:
    """Pruning ratio from mean token similarity and mean edge density.

    The similarity is normalized into [0, 1] over the configured window,
    scaled down by image busyness (1 - rho), and clamped to the ratio
    bounds.  Non-decreasing in phi, non-increasing in rho.
    """
    phi = float(phi)
    rho = float(rho)
    norm = (phi - config.phi_lo) / (config.phi_hi - config.phi_lo)
    norm = min(max(norm, 0.0), 1.0)
    r = norm * (1.0 - rho)
    return min(max(r, config.r_min), config.r_max)
