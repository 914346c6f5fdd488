"""Numpy implementations of the convolution and pooling kernels.

Fallback backend for moodtunes.nn.kernels; the compiled extension in
_ckernels.pyx implements the same functions with identical semantics
(valid padding, stride 1, pool stride = window, first-max wins ties).
"""

from __future__ import annotations

import numpy as np


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x: (B, T, C), w: (K, C, F), b: (F,) -> (B, T-K+1, F)."""
    batch, t, _ = x.shape
    k, _, f = w.shape
    out_t = t - k + 1
    y = np.broadcast_to(b, (batch, out_t, f)).astype(x.dtype, copy=True)
    for i in range(k):
        y += x[:, i : i + out_t, :] @ w[i]
    return y


def conv1d_backward(x: np.ndarray, w: np.ndarray, gy: np.ndarray):
    """Gradients of conv1d w.r.t. input, weights, bias."""
    k = w.shape[0]
    out_t = gy.shape[1]
    gx = np.zeros_like(x)
    gw = np.empty_like(w)
    for i in range(k):
        gx[:, i : i + out_t, :] += gy @ w[i].T
        gw[i] = np.einsum("btc,btf->cf", x[:, i : i + out_t, :], gy)
    gb = gy.sum(axis=(0, 1))
    return gx, gw, gb


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x: (B, H, W, C), w: (kh, kw, C, F), b: (F,) -> (B, H', W', F)."""
    batch, h, wdt, _ = x.shape
    kh, kw, _, f = w.shape
    out_h, out_w = h - kh + 1, wdt - kw + 1
    y = np.broadcast_to(b, (batch, out_h, out_w, f)).astype(x.dtype, copy=True)
    for i in range(kh):
        for j in range(kw):
            y += x[:, i : i + out_h, j : j + out_w, :] @ w[i, j]
    return y


def conv2d_backward(x: np.ndarray, w: np.ndarray, gy: np.ndarray):
    """Gradients of conv2d w.r.t. input, weights, bias."""
    kh, kw = w.shape[:2]
    out_h, out_w = gy.shape[1:3]
    gx = np.zeros_like(x)
    gw = np.empty_like(w)
    for i in range(kh):
        for j in range(kw):
            gx[:, i : i + out_h, j : j + out_w, :] += gy @ w[i, j].T
            gw[i, j] = np.einsum(
                "bhwc,bhwf->cf", x[:, i : i + out_h, j : j + out_w, :], gy
            )
    gb = gy.sum(axis=(0, 1, 2))
    return gx, gw, gb


def maxpool2d_forward(x: np.ndarray, pool: int):
    """x: (B, H, W, C) -> (y, idx) with window = stride = ``pool``.

    y: (B, H//pool, W//pool, C); idx holds the flat row-major position of
    the (first) max inside each window, used by the backward pass.
    """
    batch, h, wdt, c = x.shape
    out_h, out_w = h // pool, wdt // pool
    cropped = x[:, : out_h * pool, : out_w * pool, :]
    windows = cropped.reshape(batch, out_h, pool, out_w, pool, c)
    windows = windows.transpose(0, 1, 3, 5, 2, 4).reshape(
        batch, out_h, out_w, c, pool * pool
    )
    idx = np.argmax(windows, axis=-1)
    y = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(y), idx.astype(np.int64)


def maxpool2d_backward(
    x_shape: tuple, idx: np.ndarray, gy: np.ndarray, pool: int
) -> np.ndarray:
    """Scatter gy back to the max positions of each window."""
    batch, h, wdt, c = x_shape
    out_h, out_w = gy.shape[1:3]
    scattered = np.zeros(
        (batch, out_h, out_w, c, pool * pool), dtype=gy.dtype
    )
    np.put_along_axis(scattered, idx[..., None], gy[..., None], axis=-1)
    scattered = scattered.reshape(batch, out_h, out_w, c, pool, pool)
    scattered = scattered.transpose(0, 1, 4, 2, 5, 3).reshape(
        batch, out_h * pool, out_w * pool, c
    )
    gx = np.zeros(x_shape, dtype=gy.dtype)
    gx[:, : out_h * pool, : out_w * pool, :] = scattered
    return gx
