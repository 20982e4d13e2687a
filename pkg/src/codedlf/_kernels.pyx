# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Semantics mirror ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs

cnp.import_array()

BACKEND = "cython"


def fill_rows(values, valid, int min_knots=4):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] known = np.ascontiguousarray(valid, dtype=np.uint8)
    cdef Py_ssize_t H = vals.shape[0]
    cdef Py_ssize_t W = vals.shape[1]
    out_arr = np.zeros((H, W), dtype=np.float64)
    cov_arr = np.zeros((H, W), dtype=np.uint8)
    ok_arr = np.zeros(H, dtype=np.uint8)
    knots_arr = np.empty(W, dtype=np.intp)
    tan_arr = np.empty(W, dtype=np.float64)
    cdef double[:, ::1] p = vals
    cdef unsigned char[:, ::1] k = known
    cdef double[:, ::1] out = out_arr
    cdef unsigned char[:, ::1] cov = cov_arr
    cdef unsigned char[::1] ok = ok_arr
    cdef Py_ssize_t[::1] kx = knots_arr
    cdef double[::1] tan = tan_arr
    cdef Py_ssize_t r, x, j, n, xl, xr
    cdef double h, t, t2, t3, pl, pr
    if min_knots < 2:
        min_knots = 2
    with nogil:
        for r in range(H):
            n = 0
            for x in range(W):
                if k[r, x]:
                    kx[n] = x
                    n += 1
            if n < min_knots:
                continue
            ok[r] = 1
            for j in range(n):
                if j == 0:
                    tan[j] = (p[r, kx[1]] - p[r, kx[0]]) / <double>(kx[1] - kx[0])
                elif j == n - 1:
                    tan[j] = (p[r, kx[j]] - p[r, kx[j - 1]]) / <double>(kx[j] - kx[j - 1])
                else:
                    tan[j] = (p[r, kx[j + 1]] - p[r, kx[j - 1]]) / <double>(kx[j + 1] - kx[j - 1])
            for x in range(kx[0]):
                out[r, x] = p[r, kx[0]]
            for x in range(kx[n - 1], W):
                out[r, x] = p[r, kx[n - 1]]
            for x in range(kx[0], kx[n - 1] + 1):
                cov[r, x] = 1
            for j in range(n - 1):
                xl = kx[j]
                xr = kx[j + 1]
                h = <double>(xr - xl)
                out[r, xl] = p[r, xl]
                pl = p[r, xl]
                pr = p[r, xr]
                for x in range(xl + 1, xr):
                    t = (x - xl) / h
                    t2 = t * t
                    t3 = t2 * t
                    out[r, x] = (pl + (pr - pl) * (-2.0 * t3 + 3.0 * t2)
                                 + h * ((t3 - 2.0 * t2 + t) * tan[j] + (t3 - t2) * tan[j + 1]))
    return out_arr, cov_arr, ok_arr.astype(bool)


def sad_curve(left, right, Py_ssize_t u, Py_ssize_t v, Py_ssize_t half,
              Py_ssize_t dmin, Py_ssize_t dmax):
    cdef const double[:, ::1] L = np.ascontiguousarray(left, dtype=np.float64)
    cdef const double[:, ::1] R = np.ascontiguousarray(right, dtype=np.float64)
    cdef Py_ssize_t nd = dmax - dmin + 1
    costs_arr = np.zeros(nd, dtype=np.float64)
    cdef double[::1] costs = costs_arr
    cdef Py_ssize_t i, dy, dx, d
    cdef double acc, row
    with nogil:
        for i in range(nd):
            d = dmin + i
            acc = 0.0
            for dy in range(-half, half + 1):
                row = 0.0
                for dx in range(-half, half + 1):
                    row += fabs(L[v + dy, u + d + dx] - R[v + dy, u + dx])
                acc += row
            costs[i] = acc
    return costs_arr


def warp_rows(image, disp, coverage=None):
    cdef const double[:, ::1] img = np.ascontiguousarray(image, dtype=np.float64)
    cdef Py_ssize_t H = img.shape[0]
    cdef Py_ssize_t W = img.shape[1]
    cdef const double[:, ::1] D = np.ascontiguousarray(np.broadcast_to(disp, (H, W)), dtype=np.float64)
    cdef bint use_cov = coverage is not None
    cov_src = np.ascontiguousarray(coverage if use_cov else np.ones((1, 1)), dtype=np.uint8)
    cdef const unsigned char[:, ::1] C = cov_src
    out_arr = np.empty((H, W), dtype=np.float64)
    ok_arr = np.empty((H, W), dtype=np.uint8)
    cdef double[:, ::1] out = out_arr
    cdef unsigned char[:, ::1] ok = ok_arr
    cdef Py_ssize_t r, x, x0, x1
    cdef double xs, f, wmax = <double>(W - 1)
    cdef unsigned char good
    with nogil:
        for r in range(H):
            for x in range(W):
                xs = x + D[r, x]
                good = 1 if (xs >= 0.0 and xs <= wmax) else 0
                if xs < 0.0:
                    xs = 0.0
                elif xs > wmax:
                    xs = wmax
                x0 = <Py_ssize_t>floor(xs)
                x1 = x0 + 1 if x0 + 1 < W else W - 1
                f = xs - x0
                out[r, x] = (1.0 - f) * img[r, x0] + f * img[r, x1]
                if use_cov and good:
                    if not C[r, x0] or (f != 0.0 and not C[r, x1]):
                        good = 0
                ok[r, x] = good
    return out_arr, ok_arr


def masked_l1(a, b, mask):
    cdef const double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(b, dtype=np.float64)
    cdef const unsigned char[:, ::1] M = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t r, x
    cdef double acc = 0.0
    cdef Py_ssize_t n = 0
    with nogil:
        for r in range(A.shape[0]):
            for x in range(A.shape[1]):
                if M[r, x]:
                    acc += fabs(A[r, x] - B[r, x])
                    n += 1
    return acc, n
