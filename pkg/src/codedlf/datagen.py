"""Synthetic labeled coded captures.

Scenes are described by a depth surface over the pixel grid. Disparity
follows from depth through ``d = B * f_u / z``; the right view is the left
(texture) view resampled at ``u + d(u, v)``.

Genuine scenes are smooth bumpy "face proxies" or two-layer scenes. Flat
spoofs are random planes; curved spoofs are partial cylinders, i.e. a bent
print.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import kernels, netpbm
from .antispoof import GENUINE, SPOOF_CURVED, SPOOF_FLAT
from .errors import InvalidArgument, InvalidSpec
from .lf_core import INDEPENDENT, CodedImage, CodingMask, encode, generate_mask, make_rng
from .stereo import Calibration, Plane3D, depth_to_disparity, plane_to_affine, save_disparity

PLANE = "plane"
CYLINDER = "cylinder"
FACE_PROXY = "face_proxy"
LAYERED = "layered"
KINDS = (PLANE, CYLINDER, FACE_PROXY, LAYERED)

# stream tags for derived seeds
_TEXTURE, _SCENE, _MASK = 1, 2, 3
_CLASS_TAG = {GENUINE: 11, SPOOF_FLAT: 12, SPOOF_CURVED: 13}
_ID_PREFIX = {GENUINE: "g", SPOOF_FLAT: "f", SPOOF_CURVED: "c"}

DEFAULT_MAX_DISPARITY = 32.0


def _fade(t):
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def value_noise(height: int, width: int, cell: float, rng: np.random.Generator) -> np.ndarray:
    """Smoothly interpolated lattice noise in [0, 1] with feature size ``cell``."""
    gh = int(np.ceil(height / cell)) + 2
    gw = int(np.ceil(width / cell)) + 2
    grid = rng.random((gh, gw))
    off_y, off_x = rng.random(2)
    y = np.arange(height) / cell + off_y
    x = np.arange(width) / cell + off_x
    yi = np.floor(y).astype(int)
    xi = np.floor(x).astype(int)
    fy = _fade(y - yi)[:, None]
    fx = _fade(x - xi)[None, :]
    v00 = grid[yi[:, None], xi[None, :]]
    v01 = grid[yi[:, None], xi[None, :] + 1]
    v10 = grid[yi[:, None] + 1, xi[None, :]]
    v11 = grid[yi[:, None] + 1, xi[None, :] + 1]
    top = v00 + fx * (v01 - v00)
    bot = v10 + fx * (v11 - v10)
    return top + fy * (bot - top)


def procedural_texture(
    height: int,
    width: int,
    seed: int,
    cells=(48.0, 24.0, 12.0),
    weights=(0.5, 0.3, 0.2),
    lo: float = 0.05,
    hi: float = 0.95,
) -> np.ndarray:
    """Band-limited multi-octave value noise stretched to ``[lo, hi]``."""
    rng = make_rng(seed, _TEXTURE)
    img = np.zeros((height, width))
    for cell, w in zip(cells, weights):
        img += w * value_noise(height, width, cell, rng)
    img -= img.min()
    peak = img.max()
    if peak > 0:
        img /= peak
    return lo + (hi - lo) * img


@dataclass
class SceneSpec:
    """What to render.

    ``depth_params`` by kind:
      plane: a, b, c
      cylinder: radius, apex_depth, axis ("vertical" | "horizontal"), axis_offset
      face_proxy: a, b, c (base plane) and bumps [[u, v, sigma_u, sigma_v, weight], ...]
        in relative coordinates, plus contrast_px (peak-to-peak bump disparity)
      layered: near, far (depths) and ellipse [u, v, ru, rv] (relative)
    ``texture`` is "procedural" or a path to a PGM file.
    """

    kind: str
    depth_params: dict
    width: int = 512
    height: int = 512
    calib: Calibration | None = None
    texture: str = "procedural"
    max_disparity: float = DEFAULT_MAX_DISPARITY

    def calibration(self) -> Calibration:
        return self.calib or Calibration.centered(self.width, self.height)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["calib"] = self.calibration().to_dict()
        return d


class StereoRender(NamedTuple):
    left: np.ndarray
    right: np.ndarray
    gt_disparity: np.ndarray

    @property
    def out_of_range(self) -> np.ndarray:
        """Right-view pixels whose source column falls outside the left view."""
        W = self.left.shape[1]
        x = np.arange(W)[None, :] + self.gt_disparity
        return (x < 0) | (x > W - 1)


def _grid(spec: SceneSpec):
    u = np.arange(spec.width, dtype=np.float64)[None, :]
    v = np.arange(spec.height, dtype=np.float64)[:, None]
    return u, v


def _cylinder_depth(spec: SceneSpec, calib: Calibration) -> np.ndarray:
    p = spec.depth_params
    R = float(p["radius"])
    apex = float(p["apex_depth"])
    offset = float(p.get("axis_offset", 0.0))
    zc = apex + R
    u, v = _grid(spec)
    if p.get("axis", "vertical") == "vertical":
        t = (u - calib.principal_u) / calib.focal_px + 0.0 * v
    else:
        t = (v - calib.principal_v) / calib.focal_px + 0.0 * u
    # ray (t z, z) against the circle (x - offset)^2 + (z - zc)^2 = R^2, nearest root
    half_b = t * offset + zc
    disc = half_b * half_b - (1.0 + t * t) * (offset * offset + zc * zc - R * R)
    if np.any(disc < 0):
        raise InvalidSpec("cylinder does not cover the field of view")
    return (half_b - np.sqrt(disc)) / (1.0 + t * t)


def min_cylinder_radius(apex: float, offset: float, axis: str, width: int, height: int,
                        calib: Calibration) -> float:
    """Smallest radius for which every viewing ray hits the cylinder.

    A ray with slope ``t`` meets the circle of radius R centered at
    ``(offset, apex + R)`` iff ``|(apex + R) t - offset| <= R sqrt(1 + t^2)``.
    """
    if axis == "vertical":
        ts = ((0 - calib.principal_u) / calib.focal_px, (width - 1 - calib.principal_u) / calib.focal_px)
    else:
        ts = ((0 - calib.principal_v) / calib.focal_px, (height - 1 - calib.principal_v) / calib.focal_px)
    r = 0.0
    for t in ts:
        sgn = 1.0 if t >= 0 else -1.0
        a = abs(t)
        r = max(r, (apex * a - sgn * offset) / (np.sqrt(1.0 + a * a) - a))
    return r


def _face_bumps(spec: SceneSpec) -> np.ndarray:
    p = spec.depth_params
    u, v = _grid(spec)
    ru = u / max(spec.width - 1, 1)
    rv = v / max(spec.height - 1, 1)
    field_ = np.zeros((spec.height, spec.width))
    for cu, cv, su, sv, w in p["bumps"]:
        field_ += w * np.exp(-0.5 * (((ru - cu) / su) ** 2 + ((rv - cv) / sv) ** 2))
    span = field_.max() - field_.min()
    if span <= 0:
        raise InvalidSpec("face_proxy bumps are flat")
    return (field_ - field_.min()) / span * float(p["contrast_px"])


def scene_disparity(spec: SceneSpec) -> np.ndarray:
    """Ground-truth disparity map of a scene, shape ``(height, width)``."""
    calib = spec.calibration()
    p = spec.depth_params
    if spec.kind == PLANE:
        d = plane_to_affine(Plane3D(p["a"], p["b"], p["c"]), calib).field(spec.width, spec.height)
    elif spec.kind == CYLINDER:
        d = depth_to_disparity(_cylinder_depth(spec, calib), calib)
    elif spec.kind == FACE_PROXY:
        base = plane_to_affine(Plane3D(p["a"], p["b"], p["c"]), calib).field(spec.width, spec.height)
        # bumps come toward the camera: depth = B f / (base + bump)
        depth = calib.baseline_m * calib.focal_px / (base + _face_bumps(spec))
        d = depth_to_disparity(depth, calib)
    elif spec.kind == LAYERED:
        near, far = float(p["near"]), float(p["far"])
        if not 0 < near < far:
            raise InvalidSpec("layered scene needs 0 < near < far")
        cu, cv, eu, ev = p["ellipse"]
        u, v = _grid(spec)
        inside = ((u / (spec.width - 1) - cu) / eu) ** 2 + ((v / (spec.height - 1) - cv) / ev) ** 2 <= 1.0
        depth = np.where(inside, near, far)
        d = depth_to_disparity(depth, calib)
    else:
        raise InvalidSpec(f"unknown scene kind {spec.kind!r}")
    d = np.asarray(d, dtype=np.float64)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise InvalidSpec("scene must lie entirely in front of the camera")
    if np.abs(d).max() > spec.max_disparity:
        raise InvalidSpec(f"disparity {np.abs(d).max():.2f} px exceeds max {spec.max_disparity}")
    return d


def render_stereo(spec: SceneSpec, seed: int) -> StereoRender:
    """Left texture view, right view and ground-truth disparity.

    The right view samples the left at ``u + d(u, v)`` linearly; sources past
    the image edge repeat the edge value (see ``StereoRender.out_of_range``).
    """
    if spec.kind not in KINDS:
        raise InvalidSpec(f"unknown scene kind {spec.kind!r}")
    spec.calibration().check_bounds(spec.width, spec.height)
    d = scene_disparity(spec)
    if spec.texture == "procedural":
        left = procedural_texture(spec.height, spec.width, seed)
    else:
        left = netpbm.read_pgm(spec.texture)
        if left.shape != (spec.height, spec.width):
            raise InvalidSpec(f"texture {spec.texture} is {left.shape}, scene is {(spec.height, spec.width)}")
    right, _ = kernels.warp_rows(left, d)
    return StereoRender(left=left, right=right, gt_disparity=d)


@dataclass(frozen=True)
class SceneDistributions:
    """Random scene parameter ranges (uniform unless noted)."""

    plane_slope: float = 0.15
    flat_depth: tuple = (0.4, 1.0)
    face_depth: tuple = (0.55, 1.0)
    face_contrast_px: tuple = (6.0, 12.0)
    layer_near: tuple = (0.45, 0.6)
    layer_step_px: tuple = (6.0, 12.0)
    cylinder_apex: tuple = (0.34, 0.45)
    # radius as a multiple of the smallest radius that still fills the view
    cylinder_radius_margin: tuple = (1.01, 1.12)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "SceneDistributions":
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


def _uniform(rng, lo_hi):
    return float(rng.uniform(lo_hi[0], lo_hi[1]))


def _face_bump_list(rng) -> list:
    """Head dome, nose, brow, cheeks (raised) and eye sockets (recessed), jittered."""
    j = lambda s: float(rng.uniform(-s, s))  # noqa: E731
    cu = 0.5 + j(0.05)
    cv = 0.52 + j(0.05)
    return [
        [cu + j(0.02), cv + j(0.02), 0.28 + j(0.04), 0.36 + j(0.04), 1.2 + j(0.2)],
        [cu + j(0.02), cv + j(0.02), 0.06 + j(0.01), 0.12 + j(0.02), 1.0],
        [cu + j(0.03), cv - 0.25 + j(0.03), 0.22 + j(0.03), 0.07 + j(0.01), 0.55 + j(0.1)],
        [cu - 0.2 + j(0.03), cv + 0.12 + j(0.03), 0.1 + j(0.02), 0.1 + j(0.02), 0.45 + j(0.1)],
        [cu + 0.2 + j(0.03), cv + 0.12 + j(0.03), 0.1 + j(0.02), 0.1 + j(0.02), 0.45 + j(0.1)],
        [cu - 0.14 + j(0.02), cv - 0.1 + j(0.02), 0.06 + j(0.01), 0.05 + j(0.01), -0.35 + j(0.1)],
        [cu + 0.14 + j(0.02), cv - 0.1 + j(0.02), 0.06 + j(0.01), 0.05 + j(0.01), -0.35 + j(0.1)],
        [cu, cv + 0.42 + j(0.03), 0.35, 0.15, 0.3 + j(0.1)],
    ]


def random_scene(kind: str, rng: np.random.Generator, width: int, height: int, calib: Calibration,
                 dist: SceneDistributions = SceneDistributions()) -> SceneSpec:
    s = dist.plane_slope
    bf = calib.baseline_m * calib.focal_px
    if kind == PLANE:
        params = {"a": float(rng.uniform(-s, s)), "b": float(rng.uniform(-s, s)), "c": _uniform(rng, dist.flat_depth)}
    elif kind == FACE_PROXY:
        params = {
            "a": float(rng.uniform(-s, s)),
            "b": float(rng.uniform(-s, s)),
            "c": _uniform(rng, dist.face_depth),
            "contrast_px": _uniform(rng, dist.face_contrast_px),
            "bumps": _face_bump_list(rng),
        }
    elif kind == LAYERED:
        near = _uniform(rng, dist.layer_near)
        step = _uniform(rng, dist.layer_step_px)
        params = {
            "near": near,
            "far": bf / (bf / near - step),
            "ellipse": [
                0.5 + float(rng.uniform(-0.05, 0.05)),
                0.55 + float(rng.uniform(-0.05, 0.05)),
                float(rng.uniform(0.25, 0.32)),
                float(rng.uniform(0.32, 0.4)),
            ],
        }
    elif kind == CYLINDER:
        apex = _uniform(rng, dist.cylinder_apex)
        axis = "vertical" if rng.random() < 0.5 else "horizontal"
        offset = float(rng.uniform(-0.004, 0.004))
        r_min = min_cylinder_radius(apex, offset, axis, width, height, calib)
        params = {
            "radius": r_min * _uniform(rng, dist.cylinder_radius_margin),
            "apex_depth": apex,
            "axis": axis,
            "axis_offset": offset,
        }
    else:
        raise InvalidSpec(f"unknown scene kind {kind!r}")
    return SceneSpec(kind=kind, depth_params=params, width=width, height=height, calib=calib)


@dataclass
class LabeledCapture:
    capture_id: str
    coded: CodedImage
    mask: CodingMask
    label: str
    gt_disparity: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MaskSettings:
    transmittance: float = 0.5
    mode: str = INDEPENDENT
    shift_px: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def derive_seed(*key: int) -> int:
    """63-bit seed derived from a key tuple."""
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1, dtype=np.uint64)[0] >> 1)


def _quantize(img: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0) / 255.0


def make_capture(label: str, index: int, kind: str, width: int, height: int, calib: Calibration,
                 master_seed: int, mask_settings: MaskSettings = MaskSettings(),
                 dist: SceneDistributions = SceneDistributions()) -> LabeledCapture:
    """One capture, fully determined by ``(master_seed, label, index)``.

    The texture depends only on ``(master_seed, index)``, so captures with
    the same index in different classes share it.
    """
    tag = _CLASS_TAG[label]
    rng = make_rng(master_seed, _SCENE, tag, index)
    spec = random_scene(kind, rng, width, height, calib, dist)
    tex_seed = derive_seed(master_seed, _TEXTURE, index)
    pair = render_stereo(spec, tex_seed)
    mask_seed = derive_seed(master_seed, _MASK, tag, index)
    mask = generate_mask(width, height, mask_settings.transmittance, mask_settings.mode,
                         mask_settings.shift_px, mask_seed)
    coded = encode(_quantize(pair.left), _quantize(pair.right), mask)
    return LabeledCapture(
        capture_id=f"{_ID_PREFIX[label]}{index:05d}",
        coded=coded,
        mask=mask,
        label=label,
        gt_disparity=pair.gt_disparity,
        provenance={
            "scene": spec.to_dict(),
            "texture_seed": tex_seed,
            "mask_seed": mask_seed,
            "master_seed": int(master_seed),
        },
    )


def dataset_plan(n_genuine: int, n_flat: int, n_curved: int, genuine_kinds=(FACE_PROXY, LAYERED),
                 layered_every: int = 4) -> list[tuple[str, int, str]]:
    """(label, index, kind) per capture. Every ``layered_every``-th genuine
    scene is layered when both genuine kinds are enabled."""
    for n in (n_genuine, n_flat, n_curved):
        if int(n) != n or n < 0:
            raise InvalidArgument(f"capture counts must be non-negative integers, got {n}")
    genuine_kinds = tuple(genuine_kinds)
    if not genuine_kinds or any(k not in (FACE_PROXY, LAYERED) for k in genuine_kinds):
        raise InvalidArgument(f"genuine kinds must be drawn from face_proxy/layered, got {genuine_kinds}")
    plan = []
    for i in range(int(n_genuine)):
        if len(genuine_kinds) == 1:
            kind = genuine_kinds[0]
        else:
            kind = LAYERED if i % layered_every == layered_every - 1 else FACE_PROXY
        plan.append((GENUINE, i, kind))
    plan += [(SPOOF_FLAT, i, PLANE) for i in range(int(n_flat))]
    plan += [(SPOOF_CURVED, i, CYLINDER) for i in range(int(n_curved))]
    return plan


def _make_from_plan(args):
    return make_capture(*args)


def make_dataset(n_genuine: int, n_flat: int, n_curved: int, dims=(512, 512), calib: Calibration | None = None,
                 master_seed: int = 0, mask_settings: MaskSettings = MaskSettings(),
                 dist: SceneDistributions = SceneDistributions(), genuine_kinds=(FACE_PROXY, LAYERED),
                 jobs: int = 1) -> list[LabeledCapture]:
    """Generate a labeled set; identical output for any ``jobs``."""
    width, height = int(dims[0]), int(dims[1])
    calib = calib or Calibration.centered(width, height)
    plan = dataset_plan(n_genuine, n_flat, n_curved, genuine_kinds)
    tasks = [(label, i, kind, width, height, calib, master_seed, mask_settings, dist) for label, i, kind in plan]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_make_from_plan, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_make_from_plan(t) for t in tasks]


MANIFEST_FIELDS = ["capture_id", "label", "kind", "path"]


def write_capture(root, cap: LabeledCapture) -> None:
    root = Path(root)
    cdir = root / "captures" / cap.capture_id
    cdir.mkdir(parents=True, exist_ok=True)
    netpbm.write_coded(cdir / "coded.pgm", cap.coded)
    netpbm.write_mask(cdir, cap.mask)
    meta = {"capture_id": cap.capture_id, "label": cap.label, "provenance": cap.provenance}
    (cdir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    ddir = root / "diagnostics" / cap.capture_id
    ddir.mkdir(parents=True, exist_ok=True)
    save_disparity(ddir / "gt_disparity.f32", cap.gt_disparity)


def write_manifest(root, captures) -> None:
    with open(Path(root) / "manifest.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS)
        w.writeheader()
        for cap in sorted(captures, key=lambda c: c.capture_id):
            w.writerow({
                "capture_id": cap.capture_id,
                "label": cap.label,
                "kind": cap.provenance["scene"]["kind"],
                "path": f"captures/{cap.capture_id}",
            })


def write_dataset(root, captures) -> None:
    """Write the on-disk layout; ground truth goes under ``diagnostics/`` only."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for cap in captures:
        write_capture(root, cap)
    write_manifest(root, captures)


def read_manifest(root) -> list[dict]:
    path = Path(root) / "manifest.csv"
    if not path.exists():
        raise FileNotFoundError(f"no manifest.csv in {root}")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def load_capture(capture_dir) -> tuple[CodedImage, CodingMask, dict]:
    """Coded image, mask and metadata of one capture directory."""
    cdir = Path(capture_dir)
    mask = netpbm.read_mask(cdir)
    coded = netpbm.read_coded(cdir / "coded.pgm", mask.mask_id)
    meta_path = cdir / "meta.json"
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return coded, mask, meta
