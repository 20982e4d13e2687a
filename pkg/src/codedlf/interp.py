"""Densification of sparse views for matching and l1 comparison."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InsufficientData
from .lf_core import SparseView

MIN_ROW_KNOTS = 4


@dataclass(frozen=True)
class DenseView:
    """Fully defined raster plus a coverage flag.

    ``coverage`` is 1 where a pixel lies between the first and last known
    sample of its row; extrapolated and vertically filled pixels are 0.
    """

    image: np.ndarray
    coverage: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.image.shape

    @classmethod
    def full(cls, image) -> "DenseView":
        img = np.asarray(image, dtype=np.float64)
        return cls(image=img, coverage=np.ones(img.shape, dtype=np.uint8))


def _vertical_fill(out: np.ndarray, row_ok: np.ndarray) -> None:
    """Fill rows lacking enough knots by linear interpolation between the
    nearest filled rows above and below (copying when only one exists)."""
    filled = np.flatnonzero(row_ok)
    missing = np.flatnonzero(~row_ok)
    if missing.size == 0:
        return
    pos = np.searchsorted(filled, missing)
    above = filled[np.clip(pos - 1, 0, filled.size - 1)]
    below = filled[np.clip(pos, 0, filled.size - 1)]
    for r, a, b in zip(missing, above, below):
        if a > r:  # nothing above
            out[r] = out[b]
        elif b < r:  # nothing below
            out[r] = out[a]
        else:
            w = (r - a) / (b - a)
            out[r] = (1.0 - w) * out[a] + w * out[b]


def densify(sv: SparseView) -> DenseView:
    """Fill a sparse view to a full raster.

    Rows with at least four known samples are interpolated with a
    piecewise-cubic Catmull-Rom (Hermite) curve through those samples and
    held constant beyond the outermost ones. Remaining rows are filled
    vertically. Results are clamped to [0, 1]; known samples are returned
    unchanged.

    Raises:
        InsufficientData: no row carries four known samples.
    """
    valid = np.asarray(sv.valid, dtype=bool)
    values = np.asarray(sv.values, dtype=np.float64)
    if np.count_nonzero(valid) < MIN_ROW_KNOTS:
        raise InsufficientData(f"need at least {MIN_ROW_KNOTS} known pixels, got {np.count_nonzero(valid)}")
    out, coverage, row_ok = kernels.fill_rows(values, valid, MIN_ROW_KNOTS)
    row_ok = np.asarray(row_ok, dtype=bool)
    if not row_ok.any():
        raise InsufficientData(f"no row has {MIN_ROW_KNOTS} or more known pixels")
    _vertical_fill(out, row_ok)
    np.clip(out, 0.0, 1.0, out=out)
    out[valid] = values[valid]
    return DenseView(image=out, coverage=coverage)
