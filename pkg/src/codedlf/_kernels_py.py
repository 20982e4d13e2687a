"""Vectorized numpy implementations of the hot kernels.

Semantics match ``_kernels.pyx`` operation for operation, so both backends
return the same values up to floating-point reassociation (in practice
bit-identical on x86-64).
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND = "python"


def fill_rows(values, valid, min_knots=4):
    """Row-wise cubic Hermite fill through known samples.

    Tangents follow the non-uniform Catmull-Rom rule
    ``m_k = (p_{k+1} - p_{k-1}) / (x_{k+1} - x_{k-1})`` with one-sided
    differences at the first and last knot. Outside the outermost knots the
    nearest knot value is repeated.

    Returns:
        (filled, coverage, row_ok): ``filled`` is zero on rows with fewer
        than ``min_knots`` samples (``row_ok`` False there); ``coverage`` is
        1 between the first and last knot of each filled row.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=bool)
    H, W = values.shape
    out = np.zeros((H, W), dtype=np.float64)
    coverage = np.zeros((H, W), dtype=np.uint8)
    row_ok = valid.sum(axis=1) >= max(int(min_knots), 2)
    if not row_ok.any():
        return out, coverage, row_ok

    p = values[row_ok]
    k = valid[row_ok]
    n = p.shape[0]
    xs = np.arange(W)
    rows = np.arange(n)[:, None]

    # prev[x]: last knot <= x (-1 if none); nxt[x]: first knot >= x (W if none)
    prev = np.maximum.accumulate(np.where(k, xs, -1), axis=1)
    nxt = np.minimum.accumulate(np.where(k, xs, W)[:, ::-1], axis=1)[:, ::-1]
    # sentinel columns so x-1 / x+1 lookups stay in range
    prev_pad = np.concatenate([np.full((n, 1), -1), prev], axis=1)  # prev_pad[x] = prev[x-1]
    nxt_pad = np.concatenate([nxt, np.full((n, 1), W)], axis=1)  # nxt_pad[x+1] = nxt[x+1]
    before = prev_pad[:, :W]
    after = nxt_pad[:, 1:]

    # tangents at every column (only knot columns are ever read)
    has_b = before >= 0
    has_a = after < W
    bi = np.where(has_b, before, 0)
    ai = np.where(has_a, after, 0)
    pb = p[rows, bi]
    pa = p[rows, ai]
    with np.errstate(divide="ignore", invalid="ignore"):
        m_central = (pa - pb) / (ai - bi)
        m_fwd = (pa - p) / (ai - xs)
        m_bwd = (p - pb) / (xs - bi)
    tan = np.where(has_b & has_a, m_central, np.where(has_a, m_fwd, np.where(has_b, m_bwd, 0.0)))

    left = prev
    right = np.where(left >= 0, nxt_pad[rows, np.clip(left + 1, 0, W)], W)
    inner = (left >= 0) & (right < W)
    li = np.where(left >= 0, left, 0)
    ri = np.where(inner, right, li)
    h = (ri - li).astype(np.float64)
    h_safe = np.where(inner, h, 1.0)
    t = (xs - li) / h_safe
    t2 = t * t
    t3 = t2 * t
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    pL = p[rows, li]
    pR = p[rows, ri]
    mL = tan[rows, li]
    mR = tan[rows, ri]
    # offset form keeps constant segments exact
    interp = pL + (pR - pL) * h01 + h_safe * (h10 * mL + h11 * mR)

    first = nxt[:, :1]
    last = prev[:, -1:]
    seg = np.where(inner, interp, 0.0)
    seg = np.where(xs < first, p[rows, first], seg)
    seg = np.where((xs >= last), p[rows, last], seg)
    seg = np.where(k, p, seg)
    out[row_ok] = seg
    coverage[row_ok] = ((xs >= first) & (xs <= last)).astype(np.uint8)
    return out, coverage, row_ok


def sad_curve(left, right, u, v, half, dmin, dmax):
    """Sum of absolute differences between the right window at ``(u, v)``
    and the left window at ``(u + d, v)`` for every integer d in
    ``[dmin, dmax]``. Bounds are the caller's responsibility."""
    win = 2 * half + 1
    ref = right[v - half : v + half + 1, u - half : u + half + 1]
    strip = left[v - half : v + half + 1, u + dmin - half : u + dmax + half + 1]
    cand = sliding_window_view(strip, win, axis=1)  # (win, n_d, win)
    costs = np.abs(cand - ref[:, None, :]).sum(axis=2).sum(axis=0)
    return np.ascontiguousarray(costs, dtype=np.float64)


def warp_rows(image, disp, coverage=None):
    """Sample ``image(u + disp(u, v), v)`` with linear interpolation.

    Out-of-range sources take the clamped edge value and are flagged 0 in
    the returned validity raster; sources touching uncovered pixels are also
    flagged when ``coverage`` is given.
    """
    image = np.ascontiguousarray(image, dtype=np.float64)
    H, W = image.shape
    x = np.arange(W, dtype=np.float64)[None, :] + np.broadcast_to(np.asarray(disp, dtype=np.float64), (H, W))
    in_range = (x >= 0.0) & (x <= W - 1)
    xc = np.clip(x, 0.0, W - 1)
    x0 = np.floor(xc).astype(np.intp)
    x1 = np.minimum(x0 + 1, W - 1)
    f = xc - x0
    rows = np.arange(H)[:, None]
    out = (1.0 - f) * image[rows, x0] + f * image[rows, x1]
    ok = in_range
    if coverage is not None:
        cov = np.asarray(coverage, dtype=bool)
        ok = ok & cov[rows, x0] & ((f == 0.0) | cov[rows, x1])
    return out, ok.astype(np.uint8)


def masked_l1(a, b, mask):
    """(sum of |a - b| over mask, number of mask pixels)."""
    m = np.asarray(mask, dtype=bool)
    return float(np.abs(a[m] - b[m]).sum()), int(np.count_nonzero(m))
