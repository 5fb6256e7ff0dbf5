"""Interpolation-and-fusion demosaicking, the comparison method.

The approach needs a pattern where unfiltered (white) pixels dominate:

1. a full-resolution luminance plane is interpolated from the white pixels,
2. low-resolution color planes are interpolated from the sparse R/G/B sites,
3. the two are fused ratio-style (Brovey pansharpening): each color plane is
   rescaled by luminance over the mean of the interpolated colors.

Both interpolations are normalized convolutions: convolve the zero-filled
samples and the binary support with the same kernel and divide, which makes
the scheme exact on constant images regardless of the sampling sites.
Pixels the kernel does not reach fall back to their nearest sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .cfa import CfaPattern, expand_mask
from .image import RawImage, RgbImage

PROFILE_TENT = "bilinear-tent"
PROFILE_GAUSSIAN = "gaussian"

#: Guard for the fusion denominator; configurable per call.
FUSION_EPS = 1e-6


@dataclass(frozen=True)
class InterpolationKernel:
    """Separable non-negative interpolation window.

    ``bilinear-tent`` falls linearly from 1 at the center to 0 just past
    ``radius``, so two samples bracketing a gap reproduce linear ramps
    exactly.  ``gaussian`` uses ``exp(-d^2 / (2 sigma^2))`` truncated at the
    same radius.
    """

    radius: int
    profile: str = PROFILE_TENT
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.profile not in (PROFILE_TENT, PROFILE_GAUSSIAN):
            raise ValueError(f"unknown kernel profile {self.profile!r}")
        if self.profile == PROFILE_GAUSSIAN and not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def weights(self) -> np.ndarray:
        """The ``(2r+1, 2r+1)`` window, center weight 1."""
        offsets = np.arange(-self.radius, self.radius + 1, dtype=np.float64)
        if self.profile == PROFILE_TENT:
            line = 1.0 - np.abs(offsets) / (self.radius + 1.0)
        else:
            line = np.exp(-0.5 * (offsets / self.sigma) ** 2)
        return line[:, None] * line[None, :]


def interpolate_sparse(
    y: np.ndarray, support: np.ndarray, kernel: InterpolationKernel
) -> np.ndarray:
    """Fill an ``(M, N)`` plane from samples at ``support``.

    Sampled pixels keep their values; the gaps are filled by normalized
    convolution, and pixels the kernel cannot reach take the value of the
    nearest sample.
    """
    y = np.asarray(y, dtype=np.float64)
    support = np.asarray(support, dtype=np.float64)
    if y.shape != support.shape or y.ndim != 2:
        raise ValueError(f"y {y.shape} and support {support.shape} must be equal 2-D")
    if not support.any():
        raise ValueError("support has no samples")
    w = kernel.weights()
    num = ndimage.convolve(y * support, w, mode="constant", cval=0.0)
    den = ndimage.convolve(support, w, mode="constant", cval=0.0)
    covered = den > 0.0
    out = np.zeros_like(y)
    out[covered] = num[covered] / den[covered]
    if not covered.all():
        nearest = ndimage.distance_transform_edt(
            support == 0.0, return_distances=False, return_indices=True
        )
        filled = y[tuple(nearest)]
        out[~covered] = filled[~covered]
    sampled = support != 0.0
    out[sampled] = y[sampled]
    return out


def baseline_demosaic(
    y: RawImage,
    pattern: CfaPattern,
    kernel: InterpolationKernel | None = None,
    fusion_eps: float = FUSION_EPS,
) -> RgbImage:
    """Reconstruct RGB from a raw mosaic by luminance/color interpolation and
    ratio fusion.

    The pattern must contain at least one white cell and at least one each
    of R, G, B.  The default kernel is a bilinear tent with radius equal to
    the larger tile dimension, wide enough to bridge every gap in the
    shipped patterns.
    """
    missing = {"R", "G", "B", "W"} - pattern.labels
    if missing:
        raise ValueError(
            f"pattern {pattern.name!r} lacks required filter(s): {sorted(missing)}"
        )
    if kernel is None:
        kernel = InterpolationKernel(radius=max(pattern.tile_height, pattern.tile_width))
    mask = expand_mask(pattern, y.height, y.width)
    luminance = interpolate_sparse(y.data, mask.planes[:, :, 3], kernel)
    colors = np.stack(
        [interpolate_sparse(y.data, mask.planes[:, :, k], kernel) for k in range(3)],
        axis=2,
    )
    # sensor noise can drive interpolants negative; a negative channel sum
    # would defeat the eps floor and blow the ratio up, so clip at zero
    # first (no-op on clean nonnegative scenes), bounding each output
    # channel by 3 * luminance
    colors = np.maximum(colors, 0.0)
    intensity = np.maximum(colors.mean(axis=2), fusion_eps)
    return RgbImage(colors * (luminance / intensity)[:, :, None])
