import numpy as np
import pytest

from codedlf.errors import FormatError
from codedlf.lf_core import encode, generate_mask
from codedlf.netpbm import (
    decode_pbm_stream,
    encode_pbm,
    read_coded,
    read_mask,
    read_pgm,
    read_pgm_levels,
    write_coded,
    write_mask,
    write_pgm,
)


def test_pgm_round_trip_8bit(tmp_path):
    img = np.random.default_rng(0).integers(0, 256, (7, 9)) / 255.0
    write_pgm(tmp_path / "a.pgm", img)
    assert np.array_equal(read_pgm(tmp_path / "a.pgm"), img)


def test_pgm_16bit(tmp_path):
    img = np.linspace(0, 1, 12).reshape(3, 4)
    write_pgm(tmp_path / "b.pgm", img, maxval=1000)
    levels, maxval = read_pgm_levels(tmp_path / "b.pgm")
    assert maxval == 1000
    assert levels.max() == 1000


def test_coded_image_lossless_for_8bit_views(tmp_path):
    rng = np.random.default_rng(1)
    v0 = rng.integers(0, 256, (16, 20)) / 255.0
    v1 = rng.integers(0, 256, (16, 20)) / 255.0
    m = generate_mask(20, 16, seed=2)
    ci = encode(v0, v1, m)
    write_coded(tmp_path / "c.pgm", ci)
    back = read_coded(tmp_path / "c.pgm")
    np.testing.assert_allclose(back.image, ci.image, rtol=0, atol=1e-12)


def test_multi_image_pbm_stream():
    a = np.array([[1, 0, 1, 1, 0, 0, 1, 0, 1]], dtype=np.uint8)
    b = np.eye(3, dtype=np.uint8)
    planes = decode_pbm_stream(encode_pbm(a) + encode_pbm(b))
    assert len(planes) == 2
    assert np.array_equal(planes[0], a) and np.array_equal(planes[1], b)


def test_bad_magic():
    with pytest.raises(FormatError):
        decode_pbm_stream(b"P5\n2 2\n255\n\x00\x00\x00\x00")


def test_truncated_pbm():
    with pytest.raises(FormatError):
        decode_pbm_stream(encode_pbm(np.ones((4, 16), dtype=np.uint8))[:-1])


def test_mask_round_trip(tmp_path):
    m = generate_mask(33, 17, 0.4, mode="shifted", shift_px=2, seed=99)
    write_mask(tmp_path, m)
    back = read_mask(tmp_path)
    assert np.array_equal(back.phi0, m.phi0) and np.array_equal(back.phi1, m.phi1)
    assert (back.mode, back.shift_px, back.seed) == ("shifted", 2, 99)
    assert back.mask_id == m.mask_id
