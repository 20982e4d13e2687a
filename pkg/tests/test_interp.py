import numpy as np
import pytest

from codedlf.errors import InsufficientData
from codedlf.interp import densify
from codedlf.lf_core import SparseView, encode, extract_sparse_view, generate_mask, sparse_masks

# MAE over covered pixels measured when this interpolator was frozen: 0.012083
SINUSOID_MAE_BOUND = 0.0121


def _sparse(truth, valid):
    return SparseView(values=np.where(valid, truth, 0.0), valid=valid.astype(np.uint8))


def _random_valid(shape, density, seed):
    return np.random.default_rng(seed).random(shape) < density


def test_constant_image_is_reproduced():
    valid = _random_valid((32, 48), 0.25, 0)
    dv = densify(_sparse(np.full((32, 48), 0.37), valid))
    assert np.all(dv.image == 0.37)


def test_linear_ramp_is_exact_inside_coverage():
    u = np.arange(64)[None, :] * np.ones((40, 1))
    truth = 0.1 + 0.012 * u
    dv = densify(_sparse(truth, _random_valid(truth.shape, 0.25, 1)))
    cov = dv.coverage.astype(bool)
    assert cov.mean() > 0.8
    np.testing.assert_allclose(dv.image[cov], truth[cov], atol=1e-9)


def test_known_samples_are_untouched():
    rng = np.random.default_rng(2)
    truth = rng.random((30, 30))
    valid = _random_valid(truth.shape, 0.3, 3)
    dv = densify(_sparse(truth, valid))
    assert np.array_equal(dv.image[valid], truth[valid])
    assert dv.image.min() >= 0.0 and dv.image.max() <= 1.0


def test_sinusoid_error_bound(sinusoid):
    truth = sinusoid(512, 512)
    m = generate_mask(512, 512, 0.5, seed=2024)
    ci = encode(truth, truth, m)
    dv = densify(extract_sparse_view(ci, sparse_masks(m).sm0))
    cov = dv.coverage.astype(bool)
    mae = float(np.abs(dv.image - truth)[cov].mean())
    assert mae <= SINUSOID_MAE_BOUND


def test_error_decreases_with_density(sinusoid):
    truth = sinusoid(256, 256)
    errs = []
    for density in (0.10, 0.25, 0.50):
        dv = densify(_sparse(truth, _random_valid(truth.shape, density, 7)))
        cov = dv.coverage.astype(bool)
        errs.append(float(np.abs(dv.image - truth)[cov].mean()))
    assert errs[0] > errs[1] > errs[2]


def test_sparse_rows_filled_vertically():
    truth = np.full((6, 20), 0.5)
    truth[3] = 0.9
    valid = np.zeros((6, 20), dtype=bool)
    valid[[0, 2, 4, 5], ::3] = True
    valid[1, [2, 9]] = True  # too few knots
    dv = densify(_sparse(truth, valid))
    assert not dv.coverage[1].any() and not dv.coverage[3].any()
    np.testing.assert_allclose(dv.image[3, 5], 0.5)
    assert dv.image[1, 2] == 0.5


def test_too_few_samples():
    valid = np.zeros((5, 5), dtype=bool)
    valid[0, :3] = True
    with pytest.raises(InsufficientData):
        densify(_sparse(np.full((5, 5), 0.5), valid))


def test_no_row_with_enough_knots():
    valid = np.zeros((8, 8), dtype=bool)
    valid[:, 0] = True
    with pytest.raises(InsufficientData):
        densify(_sparse(np.full((8, 8), 0.5), valid))
