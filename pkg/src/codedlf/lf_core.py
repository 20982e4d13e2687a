"""Two-view coded light-field acquisition on a single grayscale sensor.

Images are 2-D ``float64`` arrays of shape ``(height, width)`` with
intensities in [0, 1]; ``u`` is the column index and ``v`` the row index.
Masks are ``uint8`` arrays holding exactly 0 or 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

INDEPENDENT = "independent"
SHIFTED = "shifted"


def make_rng(*key: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by one or more integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def as_gray(image, name: str = "image") -> np.ndarray:
    """Validate and return ``image`` as a 2-D float64 array in [0, 1]."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidArgument(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise InvalidArgument(f"{name} intensities must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class CodingMask:
    """Pair of per-view binary transmittance rasters derived from one physical mask.

    ``phi0`` modulates view 0 (left), ``phi1`` modulates view 1 (right).
    """

    phi0: np.ndarray
    phi1: np.ndarray
    mode: str = INDEPENDENT
    shift_px: int = 0
    transmittance: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("phi0", "phi1"):
            arr = np.asarray(getattr(self, name))
            if arr.ndim != 2:
                raise InvalidArgument(f"{name} must be 2-D")
            if not np.all((arr == 0) | (arr == 1)):
                raise InvalidArgument(f"{name} entries must be exactly 0 or 1")
            arr = arr.astype(np.uint8)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.phi0.shape != self.phi1.shape:
            raise InvalidArgument("phi0 and phi1 must share dimensions")
        if self.mode not in (INDEPENDENT, SHIFTED):
            raise InvalidArgument(f"unknown mask mode {self.mode!r}")

    @property
    def height(self) -> int:
        return self.phi0.shape[0]

    @property
    def width(self) -> int:
        return self.phi0.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.phi0.shape

    @property
    def mask_id(self) -> str:
        """Stable identifier built from the generating parameters."""
        shift = f"{self.shift_px}" if self.mode == SHIFTED else "0"
        return f"{self.mode}-{self.width}x{self.height}-t{self.transmittance:g}-s{shift}-seed{self.seed}"

    def sidecar(self) -> dict:
        """Metadata written next to the PBM planes."""
        return {
            "mode": self.mode,
            "shift_px": int(self.shift_px),
            "transmittance": float(self.transmittance),
            "seed": int(self.seed),
        }


@dataclass(frozen=True)
class CodedImage:
    """Single-sensor measurement, stored before normalization (values in [0, 2])."""

    image: np.ndarray
    mask_id: str = ""


@dataclass(frozen=True)
class SparseMaskPair:
    sm0: np.ndarray
    sm1: np.ndarray

    def __iter__(self):
        return iter((self.sm0, self.sm1))

    def __getitem__(self, i: int) -> np.ndarray:
        return (self.sm0, self.sm1)[i]


@dataclass(frozen=True)
class SparseView:
    """A view known only at ``valid`` pixels; ``values`` is zero elsewhere."""

    values: np.ndarray
    valid: np.ndarray = field(repr=False)

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.valid))

    @property
    def density(self) -> float:
        return self.n_valid / self.valid.size


def generate_mask(
    width: int,
    height: int,
    transmittance: float = 0.5,
    mode: str = INDEPENDENT,
    shift_px: int = 0,
    seed: int = 0,
) -> CodingMask:
    """Draw a random binary coding mask.

    Each physical-mask entry is an independent Bernoulli(``transmittance``)
    draw. In ``independent`` mode the two view masks are separate draws; in
    ``shifted`` mode ``phi1`` is ``phi0`` moved right by ``shift_px`` columns
    with the vacated columns opaque.
    """
    if int(width) < 1 or int(height) < 1:
        raise InvalidArgument(f"mask dimensions must be >= 1, got {width}x{height}")
    if not 0.0 < transmittance < 1.0:
        raise InvalidArgument(f"transmittance must lie in (0, 1), got {transmittance}")
    width, height = int(width), int(height)
    rng = make_rng(seed)
    if mode == INDEPENDENT:
        phi0 = rng.random((height, width)) < transmittance
        phi1 = rng.random((height, width)) < transmittance
        shift_px = 0
    elif mode == SHIFTED:
        shift_px = int(shift_px)
        if not 0 <= shift_px < width:
            raise InvalidArgument(f"shift_px must lie in [0, width), got {shift_px}")
        physical = rng.random((height, width)) < transmittance
        phi0 = physical
        phi1 = np.zeros_like(physical)
        phi1[:, shift_px:] = physical[:, : width - shift_px]
    else:
        raise InvalidArgument(f"unknown mask mode {mode!r}")
    return CodingMask(
        phi0=phi0.astype(np.uint8),
        phi1=phi1.astype(np.uint8),
        mode=mode,
        shift_px=shift_px,
        transmittance=float(transmittance),
        seed=int(seed),
    )


def encode(view0, view1, mask: CodingMask) -> CodedImage:
    """Sum both views, each modulated by its binary mask."""
    v0 = as_gray(view0, "view0")
    v1 = as_gray(view1, "view1")
    if v0.shape != v1.shape or v0.shape != mask.shape:
        raise InvalidArgument(
            f"dimension mismatch: view0 {v0.shape}, view1 {v1.shape}, mask {mask.shape}"
        )
    ci = v0 * mask.phi0 + v1 * mask.phi1
    return CodedImage(image=ci, mask_id=mask.mask_id)


def sparse_masks(mask: CodingMask) -> SparseMaskPair:
    """Pixels where exactly one view reaches the sensor."""
    p0 = mask.phi0 > 0
    p1 = mask.phi1 > 0
    return SparseMaskPair(
        sm0=(p0 & ~p1).astype(np.uint8),
        sm1=(p1 & ~p0).astype(np.uint8),
    )


def extract_sparse_view(ci: CodedImage | np.ndarray, sm) -> SparseView:
    image = ci.image if isinstance(ci, CodedImage) else np.asarray(ci, dtype=np.float64)
    sm = np.asarray(sm)
    if image.shape != sm.shape:
        raise InvalidArgument(f"dimension mismatch: coded {image.shape}, sparse mask {sm.shape}")
    valid = sm.astype(bool)
    return SparseView(values=np.where(valid, image, 0.0), valid=valid)


def sparse_views(ci: CodedImage, mask: CodingMask) -> tuple[SparseView, SparseView]:
    """Both free reconstructions (left = view 0, right = view 1)."""
    sm = sparse_masks(mask)
    return extract_sparse_view(ci, sm.sm0), extract_sparse_view(ci, sm.sm1)
