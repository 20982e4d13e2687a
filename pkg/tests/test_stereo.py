from fractions import Fraction

import numpy as np
import pytest

from codedlf import kernels
from codedlf.errors import AmbiguousMatch, DegeneratePlane, DegenerateProbes, InvalidArgument, OutOfBounds
from codedlf.stereo import (
    AffineDisparity,
    Calibration,
    DisparityProbe,
    Plane3D,
    disparity_to_depth,
    depth_to_disparity,
    fit_affine_from_probes,
    load_disparity,
    local_disparity,
    plane_to_affine,
    probe_pixels,
    save_disparity,
    warp_left_to_right,
)

CAL = Calibration(baseline_m=0.01, focal_px=1000.0, principal_u=255.5, principal_v=255.5)


def test_fronto_parallel_plane():
    aff = plane_to_affine(Plane3D(0.0, 0.0, 0.5), CAL)
    assert aff.alpha == 0 and aff.beta == 0
    assert aff.gamma == pytest.approx(20.0)


def test_slanted_plane_coefficients():
    aff = plane_to_affine(Plane3D(0.2, 0.0, 0.5), CAL)
    assert aff.alpha == pytest.approx(0.004)
    assert aff.beta == 0
    assert aff.gamma == pytest.approx(0.02 * (1000 - 0.2 * 255.5))


def test_plane_through_center_rejected():
    with pytest.raises(DegeneratePlane):
        plane_to_affine(Plane3D(0.1, 0.1, 0.0), CAL)


def test_triangulation_oracle():
    """Intersect left-camera rays with the plane and reproject into the
    right camera (displaced by +B along x); the horizontal shift must match."""
    rng = np.random.default_rng(12)
    for _ in range(5):
        plane = Plane3D(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.3, 1.2))
        aff = plane_to_affine(plane, CAL)
        u = rng.uniform(0, 511, 100)
        v = rng.uniform(0, 511, 100)
        dx = (u - CAL.principal_u) / CAL.focal_px
        dy = (v - CAL.principal_v) / CAL.focal_px
        z = plane.c / (plane.a * dx + plane.b * dy + 1.0)
        x = dx * z
        u_right = CAL.focal_px * (x - CAL.baseline_m) / z + CAL.principal_u
        np.testing.assert_allclose(aff(u, v), u - u_right, rtol=0, atol=1e-9)


def test_second_differences_vanish_exactly():
    cal = Calibration(Fraction(1, 100), Fraction(1000), Fraction(511, 2), Fraction(511, 2))
    aff = plane_to_affine(Plane3D(Fraction(3, 20), Fraction(-1, 10), Fraction(7, 10)), cal)
    for u in range(0, 500, 37):
        for v in range(0, 500, 41):
            assert aff(u + 1, v) - 2 * aff(u, v) + aff(u - 1, v) == 0
            assert aff(u, v + 1) - 2 * aff(u, v) + aff(u, v - 1) == 0


def test_second_differences_vanish_in_floats():
    d = plane_to_affine(Plane3D(0.15, -0.1, 0.7), CAL).field(512, 512)
    tol = 8 * np.spacing(np.abs(d).max())
    assert np.abs(np.diff(d, 2, axis=1)).max() <= tol
    assert np.abs(np.diff(d, 2, axis=0)).max() <= tol


def test_depth_disparity_inverse():
    z = np.array([0.3, 0.5, 1.0])
    np.testing.assert_allclose(disparity_to_depth(depth_to_disparity(z, CAL), CAL), z)


def test_calibration_json_round_trip(tmp_path):
    CAL.save(tmp_path / "cal.json")
    assert Calibration.load(tmp_path / "cal.json") == CAL
    with pytest.raises(InvalidArgument):
        Calibration(baseline_m=0.0)
    with pytest.raises(InvalidArgument):
        CAL.check_bounds(100, 100)


def _shifted(texture, shift):
    left = texture(96, 200, seed=3)
    right, _ = kernels.warp_rows(left, np.full(left.shape, float(shift)))
    return left, np.asarray(right)


def test_local_disparity_integer_shift(texture):
    left, right = _shifted(texture, 3)
    p = local_disparity(left, right, 100, 48)
    assert p.d == 3.0 and p.cost == 0.0
    assert isinstance(p.d, float)


def test_local_disparity_zero_shift(texture):
    img = texture(96, 200, seed=4)
    assert local_disparity(img, img, 100, 48).d == 0.0


def test_local_disparity_subpixel_and_antisymmetry(texture):
    left, right = _shifted(texture, 2.4)
    fwd = local_disparity(left, right, 100, 48).d
    back = local_disparity(right, left, 100, 48).d
    assert abs(fwd - 2.4) < 0.2
    assert abs(fwd + back) < 0.2


def test_local_disparity_errors(texture):
    img = texture(96, 200, seed=5)
    with pytest.raises(InvalidArgument):
        local_disparity(img, img, 100, 48, window=16)
    with pytest.raises(InvalidArgument):
        local_disparity(img, img, 100, 48, search=(4, -4))
    with pytest.raises(OutOfBounds):
        local_disparity(img, img, 20, 48)
    with pytest.raises(AmbiguousMatch):
        flat = np.full((96, 200), 0.5)
        local_disparity(flat, flat, 100, 48)


def test_fit_round_trip():
    truth = AffineDisparity(0.004, -0.002, 17.5)
    probes = [DisparityProbe(u, v, truth(u, v), 0.0) for u, v in probe_pixels(512, 512)]
    fit = fit_affine_from_probes(probes)
    assert fit.alpha == pytest.approx(truth.alpha, abs=1e-12)
    assert fit.beta == pytest.approx(truth.beta, abs=1e-12)
    assert fit.gamma == pytest.approx(truth.gamma, abs=1e-9)


def test_fit_collinear_rejected():
    probes = [DisparityProbe(i * 10, i * 10, 1.0, 0.0) for i in range(3)]
    with pytest.raises(DegenerateProbes):
        fit_affine_from_probes(probes)
    with pytest.raises(InvalidArgument):
        fit_affine_from_probes(probes[:2])


def test_probe_pixels_default():
    assert probe_pixels(512, 512) == [(153, 153), (358, 153), (256, 383)]


def test_warp_identity():
    img = np.random.default_rng(0).random((20, 30))
    out = warp_left_to_right(img, AffineDisparity(0, 0, 0))
    assert np.array_equal(out.image, img) and out.coverage.all()


def test_warp_ramp_shift():
    img = np.tile(np.linspace(0, 1, 64), (8, 1))
    out = warp_left_to_right(img, AffineDisparity(0, 0, 5))
    cov = out.coverage.astype(bool)
    np.testing.assert_allclose(out.image[cov], (img + 5 / 63)[cov], atol=1e-6)
    assert not cov[:, -5:].any()


def test_warp_forward_backward_within_interpolation_bound(sinusoid):
    img = np.tile(sinusoid(1, 200, period_u=40)[0], (4, 1))
    gamma = 2.37
    fwd = warp_left_to_right(img, AffineDisparity(0, 0, gamma))
    back = warp_left_to_right(fwd, AffineDisparity(0, 0, -gamma))
    cov = back.coverage.astype(bool)
    # linear interpolation error is at most max|f''| / 8 per warp
    bound = 0.3 * (2 * np.pi / 40) ** 2 / 8
    assert cov[:, 10:-10].all()
    assert np.abs(back.image - img)[cov].max() <= 2 * bound


def test_disparity_file_round_trip(tmp_path):
    d = AffineDisparity(0.01, 0.02, 3.0).field(7, 5)
    save_disparity(tmp_path / "d.f32", d)
    np.testing.assert_allclose(load_disparity(tmp_path / "d.f32"), d, rtol=1e-6)
