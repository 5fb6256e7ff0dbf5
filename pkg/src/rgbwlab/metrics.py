"""Reconstruction quality metrics and the evaluation CSV schema.

MSE is the primary score, computed over all pixels and channels of unclipped
float intensities in the reference's native ``[0, 1]`` scale.  PSNR is a
convenience companion.  Dataset-level results aggregate to mean and
population (divisor n) standard deviation, and serialize as CSV rows with
the fixed column set in :data:`CSV_FIELDS`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .image import as_array

CSV_FIELDS = ("pattern", "method", "noise_std", "seed", "image_id", "mse", "psnr")


def mse(estimate, reference) -> float:
    """Mean squared error over all entries of two equal-shape images."""
    a = as_array(estimate)
    b = as_array(reference)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float((diff * diff).mean())


def psnr(estimate, reference, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` marks an exact match."""
    err = mse(estimate, reference)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


def aggregate(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation of a non-empty sample.

    Accumulates in sorted order so the result is independent of how the
    caller ordered the values.
    """
    if not len(values):
        raise ValueError("cannot aggregate an empty list")
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    mean = float(ordered.mean())
    return mean, float(np.sqrt(((ordered - mean) ** 2).mean()))


@dataclass(frozen=True)
class EvalRecord:
    """One per-image evaluation outcome, matching :data:`CSV_FIELDS`."""

    pattern: str
    method: str
    noise_std: float
    seed: int
    image_id: str
    mse: float
    psnr: float

    def row(self) -> list[str]:
        return [
            self.pattern,
            self.method,
            repr(self.noise_std),
            str(self.seed),
            self.image_id,
            repr(self.mse),
            repr(self.psnr),
        ]


def write_records(stream: TextIO, records: Iterable[EvalRecord]) -> None:
    """Write evaluation records as CSV with a header row.

    Formatting uses ``repr`` for floats, so identical inputs always produce
    byte-identical output.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for record in records:
        writer.writerow(record.row())
