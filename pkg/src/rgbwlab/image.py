"""Dense image tensors shared by the acquisition model and the reconstructors.

Three containers cover the whole pipeline:

* :class:`RgbImage` -- an ``(M, N, 3)`` color image, the reconstruction target.
* :class:`SpectralImage` -- an ``(M, N, 4)`` scene with a panchromatic plane
  appended, channel order fixed as ``(R, G, B, W)``.
* :class:`RawImage` -- the ``(M, N)`` scalar mosaic a filtered sensor records.

All intensities are stored as float64 in a nominal ``[0, 1]`` range;
quantization happens only at I/O boundaries (see :mod:`rgbwlab.formats`).
Instances are immutable: the wrapped arrays are marked read-only, so values
can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Fixed channel order of every SpectralImage.
CHANNEL_NAMES = ("R", "G", "B", "W")
#: Number of planes in a SpectralImage (RGB + white).
NUM_CHANNELS = 4

_DEFAULT_WHITE_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


def _freeze(data: np.ndarray, ndim: int, what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{what} must be {ndim}-dimensional, got shape {arr.shape}")
    if any(s < 1 for s in arr.shape):
        raise ValueError(f"{what} has an empty dimension: shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{what} contains non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RgbImage:
    """An ``(M, N, 3)`` color image with finite float64 intensities."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = _freeze(self.data, 3, "RgbImage data")
        if arr.shape[2] != 3:
            raise ValueError(f"RgbImage needs 3 channels, got {arr.shape[2]}")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SpectralImage:
    """An ``(M, N, 4)`` scene tensor, channels ordered ``(R, G, B, W)``."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = _freeze(self.data, 3, "SpectralImage data")
        if arr.shape[2] != NUM_CHANNELS:
            raise ValueError(
                f"SpectralImage needs {NUM_CHANNELS} channels, got {arr.shape[2]}"
            )
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class RawImage:
    """The ``(M, N)`` scalar mosaic produced by the camera model."""

    data: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", _freeze(self.data, 2, "RawImage data"))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def synthesize_white(
    rgb: RgbImage, weights: tuple[float, float, float] = _DEFAULT_WHITE_WEIGHTS
) -> SpectralImage:
    """Append a synthetic panchromatic plane as a convex combination of R, G, B.

    ``weights`` must be non-negative and sum to 1, so the white plane stays
    pointwise inside ``[min(R,G,B), max(R,G,B)]``.  The default is the
    unweighted mean.  Datasets that carry a real panchromatic band should use
    :func:`attach_white` instead.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (3,):
        raise ValueError(f"weights must be 3 coefficients, got shape {w.shape}")
    if not np.isfinite(w).all() or (w < 0).any():
        raise ValueError("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    white = rgb.data @ w
    return SpectralImage(np.concatenate([rgb.data, white[:, :, None]], axis=2))


def attach_white(rgb: RgbImage, white: np.ndarray) -> SpectralImage:
    """Append a measured panchromatic plane to an RGB image."""
    plane = np.asarray(white, dtype=np.float64)
    if plane.shape != (rgb.height, rgb.width):
        raise ValueError(
            f"white plane shape {plane.shape} does not match image "
            f"({rgb.height}, {rgb.width})"
        )
    return SpectralImage(np.concatenate([rgb.data, plane[:, :, None]], axis=2))


def drop_white(x: SpectralImage) -> RgbImage:
    """Discard the panchromatic plane, keeping channels R, G, B bit-identical."""
    return RgbImage(x.data[:, :, :3])


def as_array(image) -> np.ndarray:
    """Return the underlying ndarray of an image container (or pass one through)."""
    if isinstance(image, np.ndarray):
        return image
    return image.data if hasattr(image, "data") else np.asarray(image, dtype=np.float64)
