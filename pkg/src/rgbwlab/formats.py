"""File formats: pattern definition files, lossless rasters, the float
tensor container, and reference-dataset loading.

Pattern files are plain text: ``#`` comment lines, an optional ``name:``
line, and one row of ``R/G/B/W`` characters per tile row.

Rasters cover the quantized I/O boundary.  PNG handles 8-bit RGB/gray and
16-bit gray; binary netpbm (``.ppm``/``.pgm``) handles 8- and 16-bit for
both, including the 16-bit RGB case PNG-via-Pillow cannot write.  Integer
samples map to ``[0, 1]`` by dividing by ``2**depth - 1``; saving clamps to
``[0, 1]`` and rounds half away from zero.

Raw mosaics must survive the round trip to the solver without quantization
noise, so they travel in a small binary tensor container instead:

    bytes 0-7    magic ``RGBWTNSR``
    bytes 8-23   little-endian u32: version (=1), M, N, K
    payload      M*N*K little-endian float64, row-major, channel-last
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .cfa import CfaPattern
from .image import RgbImage, SpectralImage, attach_white, synthesize_white

RASTER_SUFFIXES = (".png", ".ppm", ".pgm")

TENSOR_MAGIC = b"RGBWTNSR"
TENSOR_VERSION = 1
_HEADER = struct.Struct("<IIII")  # version, M, N, K


# ---------------------------------------------------------------------------
# Pattern files
# ---------------------------------------------------------------------------

class PatternFormatError(ValueError):
    """A pattern file or string cannot be parsed."""


class IllegalCharacterError(PatternFormatError):
    def __init__(self, line: int, col: int, char: str):
        super().__init__(f"illegal character {char!r} at line {line}, column {col}")
        self.line = line
        self.col = col
        self.char = char


class RaggedGridError(PatternFormatError):
    pass


class EmptyPatternError(PatternFormatError):
    pass


def parse_pattern(text: str) -> CfaPattern:
    """Parse pattern text into a tile.

    Rejects ragged grids, empty grids and any grid character outside RGBW
    (reported with its 0-based line and column).
    """
    name = None
    rows: list[str] = []
    for line_no, raw_line in enumerate(text.splitlines()):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("name:"):
            if name is not None:
                raise PatternFormatError(f"duplicate name line at line {line_no}")
            name = line[len("name:"):].strip()
            continue
        for col, char in enumerate(line):
            if char not in "RGBW":
                raise IllegalCharacterError(line_no, col, char)
        rows.append(line)
    if not rows:
        raise EmptyPatternError("pattern has no grid rows")
    if len({len(r) for r in rows}) != 1:
        raise RaggedGridError("pattern grid rows have unequal lengths")
    return CfaPattern(name=name or "", rows=tuple(rows))


def serialize_pattern(pattern: CfaPattern) -> str:
    """Inverse of :func:`parse_pattern` (up to comments)."""
    lines = []
    if pattern.name:
        lines.append(f"name: {pattern.name}")
    lines.extend(pattern.rows)
    return "\n".join(lines) + "\n"


def load_pattern(path) -> CfaPattern:
    """Parse a pattern file; a missing name line defaults to the file stem."""
    path = Path(path)
    pattern = parse_pattern(path.read_text("utf-8"))
    if not pattern.name:
        pattern = CfaPattern(name=path.stem, rows=pattern.rows)
    return pattern


# ---------------------------------------------------------------------------
# Quantized rasters
# ---------------------------------------------------------------------------

class ImageFormatError(ValueError):
    """A raster file cannot be read or written as requested."""


def _quantize(values: np.ndarray, bit_depth: int) -> np.ndarray:
    if bit_depth not in (8, 16):
        raise ImageFormatError(f"unsupported bit depth {bit_depth}")
    maxval = (1 << bit_depth) - 1
    clipped = np.clip(values, 0.0, 1.0)
    q = np.floor(clipped * maxval + 0.5)
    return q.astype(np.uint8 if bit_depth == 8 else np.uint16)


def _to_unit(samples: np.ndarray, bit_depth: int) -> np.ndarray:
    return samples.astype(np.float64) / ((1 << bit_depth) - 1)


def _read_pnm(path: Path) -> tuple[np.ndarray, int]:
    data = path.read_bytes()
    if data[:2] not in (b"P5", b"P6"):
        raise ImageFormatError(f"{path}: not a binary PGM/PPM file")
    rgb = data[:2] == b"P6"
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments running to end of line.
    tokens: list[int] = []
    pos = 2
    while len(tokens) < 3:
        if pos >= len(data):
            raise ImageFormatError(f"{path}: truncated header")
        char = data[pos:pos + 1]
        if char == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise ImageFormatError(f"{path}: truncated header")
            continue
        if char.isspace():
            pos += 1
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        try:
            tokens.append(int(data[pos:end]))
        except ValueError as exc:
            raise ImageFormatError(f"{path}: bad header token") from exc
        pos = end
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = tokens
    if maxval == 255:
        depth, dtype = 8, np.dtype(">u1")
    elif maxval == 65535:
        depth, dtype = 16, np.dtype(">u2")
    else:
        raise ImageFormatError(f"{path}: unsupported maxval {maxval}")
    count = width * height * (3 if rgb else 1)
    payload = data[pos:pos + count * dtype.itemsize]
    if len(payload) != count * dtype.itemsize:
        raise ImageFormatError(f"{path}: truncated pixel data")
    samples = np.frombuffer(payload, dtype=dtype).astype(np.uint16 if depth == 16 else np.uint8)
    shape = (height, width, 3) if rgb else (height, width)
    return samples.reshape(shape), depth


def _write_pnm(path: Path, samples: np.ndarray, bit_depth: int) -> None:
    rgb = samples.ndim == 3
    magic = b"P6" if rgb else b"P5"
    if (rgb and path.suffix == ".pgm") or (not rgb and path.suffix == ".ppm"):
        raise ImageFormatError(f"{path}: suffix does not match {'color' if rgb else 'gray'} data")
    maxval = (1 << bit_depth) - 1
    header = magic + f"\n{samples.shape[1]} {samples.shape[0]}\n{maxval}\n".encode()
    payload = samples.astype(">u2" if bit_depth == 16 else ">u1").tobytes()
    path.write_bytes(header + payload)


def _read_raster(path: Path) -> tuple[np.ndarray, int]:
    """Integer samples plus their bit depth; shape (M, N) or (M, N, 3)."""
    if path.suffix in (".ppm", ".pgm"):
        return _read_pnm(path)
    if path.suffix != ".png":
        raise ImageFormatError(f"{path}: unsupported raster format {path.suffix!r}")
    try:
        with Image.open(path) as img:
            if img.mode == "RGBA":
                img = img.convert("RGB")
            arr = np.array(img)
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: unreadable image ({exc})") from exc
    if arr.dtype == np.uint8:
        depth = 8
    elif arr.dtype == np.uint16:
        depth = 16
    elif arr.dtype == np.int32 and arr.min() >= 0 and arr.max() <= 0xFFFF:
        arr = arr.astype(np.uint16)
        depth = 16
    else:
        raise ImageFormatError(f"{path}: unsupported sample type {arr.dtype}")
    if arr.ndim == 3 and arr.shape[2] != 3:
        raise ImageFormatError(f"{path}: expected 1 or 3 channels, got {arr.shape[2]}")
    return arr, depth


def load_image(path, bit_depth: int | None = None) -> RgbImage:
    """Read a raster as an RGB image in ``[0, 1]``.

    Grayscale files are replicated to three channels.  When ``bit_depth`` is
    given it must match the file's native depth.
    """
    samples, depth = _read_raster(Path(path))
    if bit_depth is not None and bit_depth != depth:
        raise ImageFormatError(f"{path}: file is {depth}-bit, expected {bit_depth}-bit")
    values = _to_unit(samples, depth)
    if values.ndim == 2:
        values = np.repeat(values[:, :, None], 3, axis=2)
    return RgbImage(values)


def load_plane(path, bit_depth: int | None = None) -> np.ndarray:
    """Read a raster as a single ``(M, N)`` plane (color inputs are averaged)."""
    samples, depth = _read_raster(Path(path))
    if bit_depth is not None and bit_depth != depth:
        raise ImageFormatError(f"{path}: file is {depth}-bit, expected {bit_depth}-bit")
    values = _to_unit(samples, depth)
    return values.mean(axis=2) if values.ndim == 3 else values


def save_image(image, path, bit_depth: int = 8) -> None:
    """Quantize to ``bit_depth`` and write losslessly.

    Accepts an :class:`RgbImage` or a bare 2-D/3-D array.  16-bit RGB
    requires ``.ppm`` (Pillow cannot encode 16-bit color PNG).
    """
    path = Path(path)
    values = image.data if isinstance(image, RgbImage) else np.asarray(image, dtype=np.float64)
    if values.ndim not in (2, 3) or (values.ndim == 3 and values.shape[2] != 3):
        raise ImageFormatError(f"cannot save array of shape {values.shape} as a raster")
    samples = _quantize(values, bit_depth)
    if path.suffix in (".ppm", ".pgm"):
        _write_pnm(path, samples, bit_depth)
        return
    if path.suffix != ".png":
        raise ImageFormatError(f"{path}: unsupported raster format {path.suffix!r}")
    if bit_depth == 16 and samples.ndim == 3:
        raise ImageFormatError("16-bit RGB PNG is not supported; use .ppm instead")
    Image.fromarray(samples).save(path)


# ---------------------------------------------------------------------------
# Float tensor container
# ---------------------------------------------------------------------------

class TensorFormatError(ValueError):
    """A tensor container violates the on-disk layout."""


class BadMagicError(TensorFormatError):
    pass


class BadVersionError(TensorFormatError):
    pass


class TruncatedPayloadError(TensorFormatError):
    pass


def write_tensor(path, array: np.ndarray) -> None:
    """Write a finite ``(M, N)`` or ``(M, N, K)`` float tensor bit-exactly."""
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise TensorFormatError(f"tensor must be 2-D or 3-D, got shape {arr.shape}")
    if any(s < 1 for s in arr.shape) or any(s > 0xFFFFFFFF for s in arr.shape):
        raise TensorFormatError(f"dimensions out of range: {arr.shape}")
    if not np.isfinite(arr).all():
        raise TensorFormatError("tensor contains non-finite values")
    header = TENSOR_MAGIC + _HEADER.pack(TENSOR_VERSION, *arr.shape)
    Path(path).write_bytes(header + arr.astype("<f8").tobytes())


def read_tensor(path) -> np.ndarray:
    """Read a tensor container back as an ``(M, N, K)`` float64 array."""
    data = Path(path).read_bytes()
    return decode_tensor(data)


def decode_tensor(data: bytes) -> np.ndarray:
    """Decode container bytes, validating the header strictly."""
    if len(data) < len(TENSOR_MAGIC) or data[: len(TENSOR_MAGIC)] != TENSOR_MAGIC:
        raise BadMagicError("bad magic; not a tensor container")
    body = data[len(TENSOR_MAGIC):]
    if len(body) < _HEADER.size:
        raise TruncatedPayloadError("truncated header")
    version, height, width, channels = _HEADER.unpack_from(body)
    if version != TENSOR_VERSION:
        raise BadVersionError(f"unsupported container version {version}")
    if min(height, width, channels) < 1:
        raise TensorFormatError(f"zero dimension in header: {(height, width, channels)}")
    payload = body[_HEADER.size:]
    expected = height * width * channels * 8
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"payload has {len(payload)} bytes, expected {expected}"
        )
    if len(payload) > expected:
        raise TensorFormatError(f"{len(payload) - expected} trailing bytes after payload")
    return np.frombuffer(payload, dtype="<f8").reshape(height, width, channels).copy()


# ---------------------------------------------------------------------------
# Reference datasets
# ---------------------------------------------------------------------------

def load_dataset(directory) -> list[tuple[str, SpectralImage]]:
    """Load a directory of RGB rasters as reference scenes.

    Every supported raster becomes one scene, ordered by filename.  A
    sibling ``<stem>_pan.<ext>`` raster supplies the measured panchromatic
    plane; otherwise the white plane is synthesized as the RGB mean.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageFormatError(f"{directory}: not a directory")
    scenes: list[tuple[str, SpectralImage]] = []
    for path in sorted(directory.iterdir()):
        if path.suffix not in RASTER_SUFFIXES or path.stem.endswith("_pan"):
            continue
        rgb = load_image(path)
        pan = next(
            (
                directory / f"{path.stem}_pan{ext}"
                for ext in RASTER_SUFFIXES
                if (directory / f"{path.stem}_pan{ext}").exists()
            ),
            None,
        )
        scene = attach_white(rgb, load_plane(pan)) if pan else synthesize_white(rgb)
        scenes.append((path.stem, scene))
    return scenes
