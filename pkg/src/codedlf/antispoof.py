"""Reconstruction-free flat-presentation test on a coded capture.

If the scene is planar, its disparity is affine in image coordinates, so
three local disparity measurements predict the whole map. Warping the left
view with that prediction should then reproduce the right view. The mean
absolute residual is the flatness score: low for flat (spoof) scenes, high
for genuinely 3-D ones.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InsufficientData, InvalidArgument
from .interp import DenseView, densify
from .lf_core import CodedImage, CodingMask, sparse_views
from .stereo import (
    DEFAULT_PROBES,
    DEFAULT_SEARCH,
    DEFAULT_WINDOW,
    AffineDisparity,
    DisparityProbe,
    fit_affine_from_probes,
    local_disparity,
    probe_pixels,
    warp_left_to_right,
)

GENUINE = "genuine_3d"
SPOOF_FLAT = "spoof_flat"
SPOOF_CURVED = "spoof_curved"
LABELS = (GENUINE, SPOOF_FLAT, SPOOF_CURVED)


@dataclass(frozen=True)
class AntiSpoofConfig:
    probe_points: tuple = DEFAULT_PROBES
    window: int = DEFAULT_WINDOW
    search: tuple = DEFAULT_SEARCH
    threshold: float | None = None  # None until calibrated

    def __post_init__(self):
        pts = tuple(tuple(float(c) for c in p) for p in self.probe_points)
        if len(pts) != 3 or any(len(p) != 2 for p in pts):
            raise InvalidArgument("probe_points must hold three (u, v) pairs")
        (u1, v1), (u2, v2), (u3, v3) = pts
        if abs((u2 - u1) * (v3 - v1) - (u3 - u1) * (v2 - v1)) < 1e-9:
            raise InvalidArgument("probe_points are collinear")
        if self.threshold is not None and self.threshold < 0:
            raise InvalidArgument("threshold must be >= 0")
        object.__setattr__(self, "probe_points", pts)
        object.__setattr__(self, "search", (int(self.search[0]), int(self.search[1])))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["probe_points"] = [list(p) for p in self.probe_points]
        d["search"] = list(self.search)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AntiSpoofConfig":
        kw = {}
        if "probe_points" in d:
            kw["probe_points"] = tuple(tuple(p) for p in d["probe_points"])
        if "window" in d:
            kw["window"] = int(d["window"])
        if "search" in d:
            kw["search"] = tuple(d["search"])
        if d.get("threshold") is not None:
            kw["threshold"] = float(d["threshold"])
        return cls(**kw)


@dataclass(frozen=True)
class FlatnessScore:
    score: float
    covered_fraction: float
    probes: tuple[DisparityProbe, ...] = field(default=())
    plane: AffineDisparity | None = None


@dataclass(frozen=True)
class Decision:
    label: str
    score: FlatnessScore
    threshold_used: float


def score_dense_views(left: DenseView, right: DenseView, cfg: AntiSpoofConfig = AntiSpoofConfig()) -> FlatnessScore:
    """Flatness score of an already densified (left, right) pair."""
    H, W = left.shape
    probes = tuple(
        local_disparity(left, right, u, v, cfg.window, cfg.search)
        for u, v in probe_pixels(W, H, cfg.probe_points)
    )
    plane = fit_affine_from_probes(probes)
    warped = warp_left_to_right(left, plane)
    both = (warped.coverage != 0) & (right.coverage != 0)
    total, n = kernels.masked_l1(warped.image, right.image, both)
    if n == 0:
        raise InsufficientData("no pixel is covered by both the projected and the captured view")
    return FlatnessScore(score=total / n, covered_fraction=n / both.size, probes=probes, plane=plane)


def flatness_score(ci: CodedImage, mask: CodingMask, cfg: AntiSpoofConfig = AntiSpoofConfig()) -> FlatnessScore:
    """Score a coded capture without reconstructing the light field.

    Raises:
        InsufficientData, DegenerateProbes, AmbiguousMatch, OutOfBounds:
            the capture cannot be scored; this is not a class verdict.
    """
    image = ci.image if isinstance(ci, CodedImage) else np.asarray(ci)
    if image.shape != mask.shape:
        raise InvalidArgument(f"coded image {image.shape} and mask {mask.shape} differ in shape")
    sv_left, sv_right = sparse_views(ci, mask)
    return score_dense_views(densify(sv_left), densify(sv_right), cfg)


def classify(score: FlatnessScore | float, threshold: float) -> Decision:
    """Spoof when the flat-fit error does not exceed ``threshold`` (ties reject)."""
    if threshold < 0:
        raise InvalidArgument("threshold must be >= 0")
    if not isinstance(score, FlatnessScore):
        score = FlatnessScore(score=float(score), covered_fraction=1.0)
    label = SPOOF_FLAT if score.score <= threshold else GENUINE
    return Decision(label=label, score=score, threshold_used=float(threshold))


def load_config(path) -> AntiSpoofConfig:
    """Read an anti-spoofing config from JSON (top-level or under ``"antispoof"``)."""
    d = json.loads(Path(path).read_text())
    return AntiSpoofConfig.from_dict(d.get("antispoof", d))

