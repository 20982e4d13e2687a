"""Planar-scene disparity geometry, probe matching and view projection.

Disparity convention: a right-view pixel ``(u, v)`` shows the content of the
left view at ``(u + d(u, v), v)``. Views are rectified, so disparity is
purely horizontal.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import AmbiguousMatch, DegeneratePlane, DegenerateProbes, InvalidArgument, OutOfBounds
from .interp import DenseView

DEFAULT_PROBES = ((0.3, 0.3), (0.7, 0.3), (0.5, 0.75))
DEFAULT_WINDOW = 17
DEFAULT_SEARCH = (-32, 32)


@dataclass(frozen=True)
class Calibration:
    baseline_m: float = 0.01
    focal_px: float = 1000.0
    principal_u: float = 255.5
    principal_v: float = 255.5

    def __post_init__(self):
        if not self.baseline_m > 0 or not self.focal_px > 0:
            raise InvalidArgument("baseline and focal length must be positive")

    def check_bounds(self, width: int, height: int) -> None:
        if not (0 <= self.principal_u <= width - 1 and 0 <= self.principal_v <= height - 1):
            raise InvalidArgument(
                f"principal point ({self.principal_u}, {self.principal_v}) outside {width}x{height} image"
            )

    @classmethod
    def centered(cls, width: int, height: int, baseline_m: float = 0.01, focal_px: float = 1000.0):
        return cls(baseline_m, focal_px, (width - 1) / 2.0, (height - 1) / 2.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Calibration":
        return cls(
            baseline_m=float(d["baseline_m"]),
            focal_px=float(d["focal_px"]),
            principal_u=float(d["principal_u"]),
            principal_v=float(d["principal_v"]),
        )

    @classmethod
    def load(cls, path) -> "Calibration":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class Plane3D:
    """Plane ``c = a*x + b*y + z`` in camera coordinates (meters)."""

    a: float
    b: float
    c: float


@dataclass(frozen=True)
class AffineDisparity:
    alpha: float
    beta: float
    gamma: float

    def __call__(self, u, v):
        return self.alpha * u + self.beta * v + self.gamma

    def field(self, width: int, height: int) -> np.ndarray:
        """Dense disparity map of shape ``(height, width)``."""
        u = np.arange(width, dtype=np.float64)[None, :]
        v = np.arange(height, dtype=np.float64)[:, None]
        return self.alpha * u + self.beta * v + self.gamma


@dataclass(frozen=True)
class DisparityProbe:
    u: int
    v: int
    d: float
    cost: float


def plane_to_affine(plane: Plane3D, calib: Calibration) -> AffineDisparity:
    """Affine disparity induced by a 3-D plane seen by a rectified pair."""
    if plane.c == 0:
        raise DegeneratePlane("plane passes through the optical center (c == 0)")
    k = calib.baseline_m / plane.c
    return AffineDisparity(
        alpha=plane.a * k,
        beta=plane.b * k,
        gamma=k * (calib.focal_px - plane.a * calib.principal_u - plane.b * calib.principal_v),
    )


def disparity_to_depth(disparity, calib: Calibration):
    return calib.baseline_m * calib.focal_px / np.asarray(disparity, dtype=np.float64)


def depth_to_disparity(depth, calib: Calibration):
    return calib.baseline_m * calib.focal_px / np.asarray(depth, dtype=np.float64)


def _view_image(view) -> np.ndarray:
    return view.image if isinstance(view, DenseView) else np.asarray(view, dtype=np.float64)


def local_disparity(
    left,
    right,
    u: int,
    v: int,
    window: int = DEFAULT_WINDOW,
    search: tuple[int, int] = DEFAULT_SEARCH,
) -> DisparityProbe:
    """SAD block match of the right-view window at ``(u, v)`` along the left row.

    The integer optimum is refined by a parabola through the three costs
    around it; an exact (zero-cost) match and optima at either end of the
    search range are returned unrefined.

    Raises:
        InvalidArgument: even or too small window, or inverted search range.
        OutOfBounds: a candidate window leaves either image.
        AmbiguousMatch: the cost curve is constant.
    """
    L = _view_image(left)
    R = _view_image(right)
    if L.shape != R.shape:
        raise InvalidArgument(f"view shapes differ: {L.shape} vs {R.shape}")
    window = int(window)
    if window < 5 or window % 2 == 0:
        raise InvalidArgument(f"window must be odd and >= 5, got {window}")
    dmin, dmax = int(search[0]), int(search[1])
    if dmin > dmax:
        raise InvalidArgument(f"empty search range [{dmin}, {dmax}]")
    H, W = L.shape
    half = window // 2
    u, v = int(u), int(v)
    if (
        v - half < 0
        or v + half > H - 1
        or u - half < 0
        or u + half > W - 1
        or u + dmin - half < 0
        or u + dmax + half > W - 1
    ):
        raise OutOfBounds(
            f"window {window} at ({u}, {v}) with search [{dmin}, {dmax}] exceeds {W}x{H} image"
        )
    costs = kernels.sad_curve(L, R, u, v, half, dmin, dmax)
    if np.all(costs == costs[0]):
        raise AmbiguousMatch(f"flat matching cost at ({u}, {v})")
    i = int(np.argmin(costs))
    d = float(dmin + i)
    if 0 < i < costs.size - 1 and costs[i] > 0:
        c_m, c_0, c_p = costs[i - 1], costs[i], costs[i + 1]
        denom = c_m - 2.0 * c_0 + c_p
        if denom > 0:
            d += float(0.5 * (c_m - c_p) / denom)
    return DisparityProbe(u=u, v=v, d=d, cost=float(costs[i]) / (window * window))


def fit_affine_from_probes(probes) -> AffineDisparity:
    """Exact affine map through three disparity samples."""
    probes = list(probes)
    if len(probes) != 3:
        raise InvalidArgument(f"exactly 3 probes required, got {len(probes)}")
    A = np.array([[p.u, p.v, 1.0] for p in probes], dtype=np.float64)
    rhs = np.array([p.d for p in probes], dtype=np.float64)
    scale = max(1.0, float(np.abs(A[:, :2]).max())) ** 2
    if abs(np.linalg.det(A)) < 1e-9 * scale:
        raise DegenerateProbes("probe points are collinear")
    alpha, beta, gamma = np.linalg.solve(A, rhs)
    return AffineDisparity(float(alpha), float(beta), float(gamma))


def warp_left_to_right(left, disp) -> DenseView:
    """Project the left view to a right-view estimate.

    ``disp`` is an :class:`AffineDisparity` or a dense ``(H, W)`` disparity
    map. Pixels whose source leaves the image, or lands on uncovered left
    pixels, are cleared from the output coverage.
    """
    if isinstance(left, DenseView):
        img, cov = left.image, left.coverage
    else:
        img, cov = np.asarray(left, dtype=np.float64), None
    H, W = img.shape
    field = disp.field(W, H) if isinstance(disp, AffineDisparity) else np.asarray(disp, dtype=np.float64)
    out, ok = kernels.warp_rows(img, field, cov)
    return DenseView(image=out, coverage=ok)


def probe_pixels(width: int, height: int, rel_points=DEFAULT_PROBES) -> list[tuple[int, int]]:
    """Relative probe positions mapped to integer pixel coordinates."""
    return [
        (int(round(ru * (width - 1))), int(round(rv * (height - 1))))
        for ru, rv in rel_points
    ]


def save_disparity(path, disparity) -> None:
    """Write a float32 raster (``<path>``) with a JSON header (``<path>.json``)."""
    d = np.asarray(disparity, dtype="<f4")
    path = Path(path)
    path.write_bytes(d.tobytes(order="C"))
    header = {
        "width": int(d.shape[1]),
        "height": int(d.shape[0]),
        "dtype": "<f4",
        "order": "row-major",
        "convention": "right(u, v) = left(u + d(u, v), v); pixels",
    }
    Path(str(path) + ".json").write_text(json.dumps(header, indent=2) + "\n")


def load_disparity(path) -> np.ndarray:
    path = Path(path)
    header = json.loads(Path(str(path) + ".json").read_text())
    data = np.frombuffer(path.read_bytes(), dtype=header.get("dtype", "<f4"))
    return data.reshape(header["height"], header["width"]).astype(np.float64)
