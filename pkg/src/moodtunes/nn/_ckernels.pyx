# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution and pooling kernels.

Same contracts as _pykernels: valid padding, stride 1 convolutions, pool
stride = window, ties in max windows resolved to the first (row-major)
element. Fused on float32/float64 so the gradient checker can run the
same code paths in double precision. Inner loops run over the filter
axis, which is contiguous in every operand, so the C compiler can
vectorize them.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef fused real:
    float
    double


cdef inline object _empty(tuple shape, bint double_precision):
    if double_precision:
        return np.empty(shape, dtype=np.float64)
    return np.empty(shape, dtype=np.float32)


cdef inline object _zeros(tuple shape, bint double_precision):
    if double_precision:
        return np.zeros(shape, dtype=np.float64)
    return np.zeros(shape, dtype=np.float32)


def conv1d_forward(const real[:, :, ::1] x, const real[:, :, ::1] w, const real[::1] b):
    cdef Py_ssize_t batch = x.shape[0], t = x.shape[1], c = x.shape[2]
    cdef Py_ssize_t k = w.shape[0], f = w.shape[2]
    cdef Py_ssize_t out_t = t - k + 1
    cdef Py_ssize_t n, i, j, ci, fi
    cdef real xv

    y_arr = _empty((batch, out_t, f), real is double)
    cdef real[:, :, ::1] y = y_arr

    with nogil:
        for n in range(batch):
            for i in range(out_t):
                for fi in range(f):
                    y[n, i, fi] = b[fi]
                for j in range(k):
                    for ci in range(c):
                        xv = x[n, i + j, ci]
                        for fi in range(f):
                            y[n, i, fi] += xv * w[j, ci, fi]
    return y_arr


def conv1d_backward(const real[:, :, ::1] x, const real[:, :, ::1] w, const real[:, :, ::1] gy):
    cdef Py_ssize_t batch = x.shape[0], t = x.shape[1], c = x.shape[2]
    cdef Py_ssize_t k = w.shape[0], f = w.shape[2]
    cdef Py_ssize_t out_t = gy.shape[1]
    cdef Py_ssize_t n, i, j, ci, fi
    cdef real xv, acc

    gx_arr = _zeros((batch, t, c), real is double)
    gw_arr = _zeros((k, c, f), real is double)
    gb_arr = _zeros((f,), real is double)
    cdef real[:, :, ::1] gx = gx_arr
    cdef real[:, :, ::1] gw = gw_arr
    cdef real[::1] gb = gb_arr

    with nogil:
        for n in range(batch):
            for i in range(out_t):
                for fi in range(f):
                    gb[fi] += gy[n, i, fi]
                for j in range(k):
                    for ci in range(c):
                        xv = x[n, i + j, ci]
                        acc = 0
                        for fi in range(f):
                            gw[j, ci, fi] += xv * gy[n, i, fi]
                            acc += gy[n, i, fi] * w[j, ci, fi]
                        gx[n, i + j, ci] += acc
    return gx_arr, gw_arr, gb_arr


def conv2d_forward(const real[:, :, :, ::1] x, const real[:, :, :, ::1] w, const real[::1] b):
    cdef Py_ssize_t batch = x.shape[0], h = x.shape[1], wd = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t kh = w.shape[0], kw = w.shape[1], f = w.shape[3]
    cdef Py_ssize_t out_h = h - kh + 1, out_w = wd - kw + 1
    cdef Py_ssize_t n, i, j, di, dj, ci, fi
    cdef real xv

    y_arr = _empty((batch, out_h, out_w, f), real is double)
    cdef real[:, :, :, ::1] y = y_arr

    with nogil:
        for n in range(batch):
            for i in range(out_h):
                for j in range(out_w):
                    for fi in range(f):
                        y[n, i, j, fi] = b[fi]
                    for di in range(kh):
                        for dj in range(kw):
                            for ci in range(c):
                                xv = x[n, i + di, j + dj, ci]
                                for fi in range(f):
                                    y[n, i, j, fi] += xv * w[di, dj, ci, fi]
    return y_arr


def conv2d_backward(const real[:, :, :, ::1] x, const real[:, :, :, ::1] w, const real[:, :, :, ::1] gy):
    cdef Py_ssize_t batch = x.shape[0], h = x.shape[1], wd = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t kh = w.shape[0], kw = w.shape[1], f = w.shape[3]
    cdef Py_ssize_t out_h = gy.shape[1], out_w = gy.shape[2]
    cdef Py_ssize_t n, i, j, di, dj, ci, fi
    cdef real xv, acc

    gx_arr = _zeros((batch, h, wd, c), real is double)
    gw_arr = _zeros((kh, kw, c, f), real is double)
    gb_arr = _zeros((f,), real is double)
    cdef real[:, :, :, ::1] gx = gx_arr
    cdef real[:, :, :, ::1] gw = gw_arr
    cdef real[::1] gb = gb_arr

    with nogil:
        for n in range(batch):
            for i in range(out_h):
                for j in range(out_w):
                    for fi in range(f):
                        gb[fi] += gy[n, i, j, fi]
                    for di in range(kh):
                        for dj in range(kw):
                            for ci in range(c):
                                xv = x[n, i + di, j + dj, ci]
                                acc = 0
                                for fi in range(f):
                                    gw[di, dj, ci, fi] += xv * gy[n, i, j, fi]
                                    acc += gy[n, i, j, fi] * w[di, dj, ci, fi]
                                gx[n, i + di, j + dj, ci] += acc
    return gx_arr, gw_arr, gb_arr


def maxpool2d_forward(const real[:, :, :, ::1] x, Py_ssize_t pool):
    cdef Py_ssize_t batch = x.shape[0], h = x.shape[1], wd = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t out_h = h // pool, out_w = wd // pool
    cdef Py_ssize_t n, i, j, ci, di, dj, best
    cdef real best_val, v

    y_arr = _empty((batch, out_h, out_w, c), real is double)
    idx_arr = np.empty((batch, out_h, out_w, c), dtype=np.int64)
    cdef real[:, :, :, ::1] y = y_arr
    cdef cnp.int64_t[:, :, :, ::1] idx = idx_arr

    with nogil:
        for n in range(batch):
            for i in range(out_h):
                for j in range(out_w):
                    for ci in range(c):
                        best = 0
                        best_val = x[n, i * pool, j * pool, ci]
                        for di in range(pool):
                            for dj in range(pool):
                                v = x[n, i * pool + di, j * pool + dj, ci]
                                if v > best_val:
                                    best_val = v
                                    best = di * pool + dj
                        y[n, i, j, ci] = best_val
                        idx[n, i, j, ci] = best
    return y_arr, idx_arr


def maxpool2d_backward(x_shape, const cnp.int64_t[:, :, :, ::1] idx, const real[:, :, :, ::1] gy, Py_ssize_t pool):
    cdef Py_ssize_t batch = gy.shape[0], out_h = gy.shape[1], out_w = gy.shape[2], c = gy.shape[3]
    cdef Py_ssize_t n, i, j, ci, flat

    gx_arr = _zeros(tuple(x_shape), real is double)
    cdef real[:, :, :, ::1] gx = gx_arr

    with nogil:
        for n in range(batch):
            for i in range(out_h):
                for j in range(out_w):
                    for ci in range(c):
                        flat = idx[n, i, j, ci]
                        gx[n, i * pool + flat // pool, j * pool + flat % pool, ci] += gy[n, i, j, ci]
    return gx_arr
