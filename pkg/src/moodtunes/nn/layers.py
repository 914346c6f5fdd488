"""Layer specs and implementations for the fixed-sequence network engine.

Supported kinds: embedding, conv1d, conv2d, maxpool2d, global_maxpool,
dense, relu, softmax. Convolutions use valid padding and stride 1; pooling
stride equals the window. Shapes below are per-sample; every forward /
backward call operates on a leading batch axis.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import kernels


class ShapeMismatch(ValueError):
    """Input or spec shape incompatible, reported with the layer index."""

    def __init__(self, layer_index: int, message: str):
        self.layer_index = layer_index
        super().__init__(f"layer {layer_index}: {message}")


@dataclass(frozen=True)
class EmbeddingSpec:
    vocab_size: int
    dim: int
    kind: str = "embedding"


@dataclass(frozen=True)
class Conv1dSpec:
    filters: int
    width: int
    kind: str = "conv1d"


@dataclass(frozen=True)
class Conv2dSpec:
    filters: int
    kernel_size: int
    kind: str = "conv2d"


@dataclass(frozen=True)
class MaxPool2dSpec:
    pool: int
    kind: str = "maxpool2d"


@dataclass(frozen=True)
class GlobalMaxPoolSpec:
    kind: str = "global_maxpool"


@dataclass(frozen=True)
class DenseSpec:
    units: int
    kind: str = "dense"


@dataclass(frozen=True)
class ReluSpec:
    kind: str = "relu"


@dataclass(frozen=True)
class SoftmaxSpec:
    kind: str = "softmax"


SPEC_KINDS = {
    "embedding": EmbeddingSpec,
    "conv1d": Conv1dSpec,
    "conv2d": Conv2dSpec,
    "maxpool2d": MaxPool2dSpec,
    "global_maxpool": GlobalMaxPoolSpec,
    "dense": DenseSpec,
    "relu": ReluSpec,
    "softmax": SoftmaxSpec,
}


def spec_to_dict(spec) -> dict:
    return asdict(spec)


def spec_from_dict(d: dict):
    cls = SPEC_KINDS[d["kind"]]
    return cls(**{k: v for k, v in d.items() if k != "kind"})


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class _Layer:
    """Per-layer behaviour: shape inference, init, forward, backward.

    forward returns (y, cache); backward takes the cache and the upstream
    gradient and returns (gx, param_grads). Layers without parameters
    return an empty grads dict; layers with non-differentiable inputs
    (embedding) return gx=None.
    """

    def __init__(self, spec, index: int):
        self.spec = spec
        self.index = index

    def out_shape(self, in_shape: tuple) -> tuple:
        raise NotImplementedError

    def init_params(self, in_shape: tuple, rng: np.random.Generator, dtype) -> dict:
        return {}

    def forward(self, params: dict, x):
        raise NotImplementedError

    def backward(self, params: dict, cache, gy):
        raise NotImplementedError


class _Embedding(_Layer):
    def out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ShapeMismatch(self.index, f"embedding expects (L,) ids, got {in_shape}")
        return (in_shape[0], self.spec.dim)

    def init_params(self, in_shape, rng, dtype):
        table = _glorot(
            rng, (self.spec.vocab_size, self.spec.dim),
            self.spec.vocab_size, self.spec.dim, dtype,
        )
        return {"table": table}

    def forward(self, params, x):
        ids = np.asarray(x, dtype=np.int64)
        if ids.min(initial=0) < 0 or ids.max(initial=0) >= self.spec.vocab_size:
            raise ShapeMismatch(self.index, "token id outside embedding table")
        return params["table"][ids], ids

    def backward(self, params, cache, gy):
        gtable = np.zeros_like(params["table"])
        np.add.at(gtable, cache.ravel(), gy.reshape(-1, self.spec.dim))
        return None, {"table": gtable}


class _Conv1d(_Layer):
    def out_shape(self, in_shape):
        if len(in_shape) != 2:
            raise ShapeMismatch(self.index, f"conv1d expects (T, C), got {in_shape}")
        t, _ = in_shape
        if t < self.spec.width:
            raise ShapeMismatch(self.index, f"sequence {t} shorter than kernel {self.spec.width}")
        return (t - self.spec.width + 1, self.spec.filters)

    def init_params(self, in_shape, rng, dtype):
        _, c = in_shape
        k, f = self.spec.width, self.spec.filters
        w = _glorot(rng, (k, c, f), k * c, k * f, dtype)
        return {"w": w, "b": np.zeros(f, dtype=dtype)}

    def forward(self, params, x):
        y = kernels.conv1d_forward(x, params["w"], params["b"])
        return y, x

    def backward(self, params, cache, gy):
        gx, gw, gb = kernels.conv1d_backward(cache, params["w"], np.ascontiguousarray(gy))
        return gx, {"w": gw, "b": gb}


class _Conv2d(_Layer):
    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeMismatch(self.index, f"conv2d expects (H, W, C), got {in_shape}")
        h, w, _ = in_shape
        k = self.spec.kernel_size
        if h < k or w < k:
            raise ShapeMismatch(self.index, f"input {h}x{w} smaller than kernel {k}x{k}")
        return (h - k + 1, w - k + 1, self.spec.filters)

    def init_params(self, in_shape, rng, dtype):
        _, _, c = in_shape
        k, f = self.spec.kernel_size, self.spec.filters
        w = _glorot(rng, (k, k, c, f), k * k * c, k * k * f, dtype)
        return {"w": w, "b": np.zeros(f, dtype=dtype)}

    def forward(self, params, x):
        y = kernels.conv2d_forward(x, params["w"], params["b"])
        return y, x

    def backward(self, params, cache, gy):
        gx, gw, gb = kernels.conv2d_backward(cache, params["w"], np.ascontiguousarray(gy))
        return gx, {"w": gw, "b": gb}


class _MaxPool2d(_Layer):
    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeMismatch(self.index, f"maxpool2d expects (H, W, C), got {in_shape}")
        h, w, c = in_shape
        p = self.spec.pool
        if h < p or w < p:
            raise ShapeMismatch(self.index, f"input {h}x{w} smaller than window {p}x{p}")
        return (h // p, w // p, c)

    def forward(self, params, x):
        y, idx = kernels.maxpool2d_forward(x, self.spec.pool)
        return y, (x.shape, idx)

    def backward(self, params, cache, gy):
        x_shape, idx = cache
        gx = kernels.maxpool2d_backward(x_shape, idx, np.ascontiguousarray(gy), self.spec.pool)
        return gx, {}


class _GlobalMaxPool(_Layer):
    def out_shape(self, in_shape):
        if len(in_shape) != 2:
            raise ShapeMismatch(self.index, f"global_maxpool expects (T, C), got {in_shape}")
        return (in_shape[1],)

    def forward(self, params, x):
        idx = np.argmax(x, axis=1)
        y = np.take_along_axis(x, idx[:, None, :], axis=1)[:, 0, :]
        return y, (x.shape, idx)

    def backward(self, params, cache, gy):
        x_shape, idx = cache
        gx = np.zeros(x_shape, dtype=gy.dtype)
        np.put_along_axis(gx, idx[:, None, :], gy[:, None, :], axis=1)
        return gx, {}


class _Dense(_Layer):
    """Fully connected layer; multi-axis inputs are flattened row-major."""

    def out_shape(self, in_shape):
        return (self.spec.units,)

    def init_params(self, in_shape, rng, dtype):
        fan_in = int(np.prod(in_shape))
        w = _glorot(rng, (fan_in, self.spec.units), fan_in, self.spec.units, dtype)
        return {"w": w, "b": np.zeros(self.spec.units, dtype=dtype)}

    def forward(self, params, x):
        flat = x.reshape(x.shape[0], -1)
        return flat @ params["w"] + params["b"], (x.shape, flat)

    def backward(self, params, cache, gy):
        x_shape, flat = cache
        gx = (gy @ params["w"].T).reshape(x_shape)
        return gx, {"w": flat.T @ gy, "b": gy.sum(axis=0)}


class _Relu(_Layer):
    def out_shape(self, in_shape):
        return in_shape

    def forward(self, params, x):
        mask = x > 0
        return np.where(mask, x, x.dtype.type(0)), mask

    def backward(self, params, cache, gy):
        return np.where(cache, gy, gy.dtype.type(0)), {}


class _Softmax(_Layer):
    """Numerically stable softmax over the last axis."""

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, params, x):
        shifted = x - x.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        y = e / e.sum(axis=-1, keepdims=True)
        return y, y

    def backward(self, params, cache, gy):
        y = cache
        inner = (gy * y).sum(axis=-1, keepdims=True)
        return y * (gy - inner), {}


LAYER_IMPLS = {
    "embedding": _Embedding,
    "conv1d": _Conv1d,
    "conv2d": _Conv2d,
    "maxpool2d": _MaxPool2d,
    "global_maxpool": _GlobalMaxPool,
    "dense": _Dense,
    "relu": _Relu,
    "softmax": _Softmax,
}
