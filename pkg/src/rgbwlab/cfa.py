"""Color-filter-array model: periodic patterns, one-hot masks, and the
linear acquisition operator with its adjoint.

A camera with a CFA keeps exactly one spectral sample per pixel.  We encode
the layout twice: a :class:`CfaPattern` is the small periodic tile of filter
labels, and a :class:`CfaMask` is its full-size expansion into four binary
planes ``H_k`` (one per channel, one-hot across channels at every pixel).
The acquisition then reads

    raw[i, j] = sum_k scene[i, j, k] * H_k[i, j]  (+ sensor noise)

which is linear in the scene; :func:`adjoint` is its exact transpose under
the Frobenius inner product and scatters raw values back into the planes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import CHANNEL_NAMES, NUM_CHANNELS, RawImage, SpectralImage

_LABELS = set(CHANNEL_NAMES)


@dataclass(frozen=True)
class CfaPattern:
    """A periodic filter tile; ``rows`` are strings over the alphabet RGBW."""

    name: str
    rows: tuple[str, ...]

    def __post_init__(self) -> None:
        rows = tuple(self.rows)
        if not rows:
            raise ValueError("pattern tile must have at least one row")
        width = len(rows[0])
        if width < 1:
            raise ValueError("pattern tile rows must be non-empty")
        for r in rows:
            if len(r) != width:
                raise ValueError("pattern tile rows must all have equal length")
            bad = set(r) - _LABELS
            if bad:
                raise ValueError(f"illegal filter label(s) {sorted(bad)} in tile")
        object.__setattr__(self, "rows", rows)

    @property
    def tile_height(self) -> int:
        return len(self.rows)

    @property
    def tile_width(self) -> int:
        return len(self.rows[0])

    @property
    def labels(self) -> frozenset:
        return frozenset("".join(self.rows))

    def channel_indices(self) -> np.ndarray:
        """Tile as an integer grid: 0=R, 1=G, 2=B, 3=W."""
        lut = {c: k for k, c in enumerate(CHANNEL_NAMES)}
        return np.array([[lut[c] for c in row] for row in self.rows], dtype=np.intp)


@dataclass(frozen=True)
class CfaMask:
    """Full-size one-hot mask: four binary planes stacked as ``(M, N, 4)``."""

    planes: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.planes, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != NUM_CHANNELS:
            raise ValueError(f"mask planes must be (M, N, {NUM_CHANNELS}), got {arr.shape}")
        if not np.isin(arr, (0.0, 1.0)).all():
            raise ValueError("mask planes must be binary")
        if not (arr.sum(axis=2) == 1.0).all():
            raise ValueError("mask must be one-hot: exactly one active plane per pixel")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "planes", arr)

    @property
    def height(self) -> int:
        return self.planes.shape[0]

    @property
    def width(self) -> int:
        return self.planes.shape[1]

    def channel_count(self, channel: str) -> int:
        """Number of pixels whose active filter is ``channel``."""
        return int(self.planes[:, :, CHANNEL_NAMES.index(channel)].sum())


@dataclass(frozen=True)
class NoiseSpec:
    """Additive zero-mean Gaussian sensor noise, reproducible from ``seed``."""

    std_dev: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not np.isfinite(self.std_dev) or self.std_dev < 0:
            raise ValueError(f"std_dev must be finite and >= 0, got {self.std_dev}")


def expand_mask(pattern: CfaPattern, height: int, width: int) -> CfaMask:
    """Tile a pattern periodically over an ``height x width`` sensor.

    ``H_k[i, j] = 1`` iff the tile cell at ``(i mod tile_h, j mod tile_w)``
    carries channel k's filter.
    """
    if height < 1 or width < 1:
        raise ValueError(f"mask size must be >= 1x1, got {height}x{width}")
    idx = pattern.channel_indices()
    reps = (-(-height // pattern.tile_height), -(-width // pattern.tile_width))
    tiled = np.tile(idx, reps)[:height, :width]
    planes = (tiled[:, :, None] == np.arange(NUM_CHANNELS)).astype(np.float64)
    return CfaMask(planes)


def _check_spatial(shape_a, shape_b, what: str) -> None:
    if shape_a != shape_b:
        raise ValueError(f"{what}: spatial shapes differ, {shape_a} vs {shape_b}")


def forward(x: SpectralImage, mask: CfaMask) -> RawImage:
    """Apply the deterministic acquisition: per-pixel channel selection."""
    _check_spatial((x.height, x.width), (mask.height, mask.width), "forward")
    return RawImage((x.data * mask.planes).sum(axis=2))


def adjoint(y: RawImage, mask: CfaMask) -> SpectralImage:
    """Transpose of :func:`forward`: channel k gets ``H_k * y``, zeros elsewhere."""
    _check_spatial((y.height, y.width), (mask.height, mask.width), "adjoint")
    return SpectralImage(mask.planes * y.data[:, :, None])


def add_noise(y: RawImage, spec: NoiseSpec) -> RawImage:
    """Add iid Gaussian noise from ``spec``; no clipping is applied.

    The output is deterministic given ``(spec.seed, y.shape)``; a zero
    ``std_dev`` returns the input bit-exactly.
    """
    if spec.std_dev == 0.0:
        return y
    rng = np.random.default_rng(spec.seed)
    return RawImage(y.data + rng.normal(0.0, spec.std_dev, size=y.data.shape))


# ---------------------------------------------------------------------------
# Built-in pattern registry.
#
# The shipped tiles are documented defaults: vendor data sheets rarely publish
# exact layouts, so each one lives in a versioned pattern file under
# ``rgbwlab/patterns/`` that users can override with their own file.
# ---------------------------------------------------------------------------

_BUILTIN_NAMES = ("bayer", "sparse3", "kodak", "sony")
_registry_cache: dict[str, CfaPattern] = {}


def builtin_pattern_names() -> tuple[str, ...]:
    """Names of the patterns shipped with the package."""
    return _BUILTIN_NAMES


def get_pattern(name: str) -> CfaPattern:
    """Look up a shipped pattern by name.

    Raises ``KeyError`` for unknown names; use
    :func:`rgbwlab.formats.load_pattern` for pattern files on disk.
    """
    if name not in _BUILTIN_NAMES:
        raise KeyError(f"unknown built-in pattern {name!r}; available: {_BUILTIN_NAMES}")
    if name not in _registry_cache:
        from importlib.resources import files

        from .formats import parse_pattern

        text = files("rgbwlab.patterns").joinpath(f"{name}.cfa").read_text("utf-8")
        _registry_cache[name] = parse_pattern(text)
    return _registry_cache[name]
