"""Model assembly, forward/backward passes, and checkpoint files.

A model is an ordered layer stack with seed-deterministic initialization:
two models built from the same specs and seed have bit-identical
parameters. Checkpoints are a one-line JSON manifest (layer specs, seed,
parameter byte offsets) followed by the raw parameters as little-endian
float32 in layer order; loading reproduces forward outputs exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .layers import LAYER_IMPLS, ShapeMismatch, spec_from_dict, spec_to_dict

CHECKPOINT_MAGIC = "moodtunes-checkpoint-v1"

EPS_LOG = 1e-12


class IndexOutOfRange(ValueError):
    """Class index outside the final probability vector."""


def cross_entropy(probs: np.ndarray, true_class) -> np.ndarray:
    """Per-sample -ln(p[true]) with probabilities clamped to >= 1e-12.

    probs: (B, C); true_class: int or (B,) ints. Returns (B,) losses.
    """
    probs = np.atleast_2d(probs)
    t = np.atleast_1d(np.asarray(true_class, dtype=np.int64))
    n_classes = probs.shape[-1]
    if np.any(t < 0) or np.any(t >= n_classes):
        raise IndexOutOfRange(f"class index outside [0, {n_classes})")
    picked = probs[np.arange(probs.shape[0]), t]
    return -np.log(np.maximum(picked, EPS_LOG))


def loss_cross_entropy(probs, true_class: int) -> float:
    """Scalar cross-entropy of a single probability vector."""
    return float(cross_entropy(np.asarray(probs, dtype=np.float64), true_class)[0])


class Model:
    """Ordered layer stack with per-layer parameter dicts."""

    def __init__(self, specs, input_shape, seed, dtype=np.float32, params=None):
        self.specs = tuple(specs)
        self.input_shape = tuple(int(d) for d in input_shape)
        self.seed = int(seed)
        self.dtype = np.dtype(dtype)

        self.layers = []
        self.shapes = [self.input_shape]
        shape = self.input_shape
        for i, spec in enumerate(self.specs):
            layer = LAYER_IMPLS[spec.kind](spec, i)
            shape = layer.out_shape(shape)
            self.layers.append(layer)
            self.shapes.append(shape)
        self.output_shape = shape

        if params is not None:
            self.params = params
        else:
            rng = np.random.default_rng(self.seed)
            self.params = [
                layer.init_params(self.shapes[i], rng, self.dtype)
                for i, layer in enumerate(self.layers)
            ]

    @property
    def num_params(self) -> int:
        return sum(int(p.size) for d in self.params for p in d.values())

    def copy(self) -> "Model":
        params = [{k: v.copy() for k, v in d.items()} for d in self.params]
        return Model(self.specs, self.input_shape, self.seed, self.dtype, params)

    def astype(self, dtype) -> "Model":
        params = [
            {k: v.astype(dtype) for k, v in d.items()} for d in self.params
        ]
        return Model(self.specs, self.input_shape, self.seed, dtype, params)

    def freeze(self) -> "Model":
        for d in self.params:
            for v in d.values():
                v.flags.writeable = False
        return self

    def _check_input(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        """Return (batched input, was_single). Accepts one sample shaped
        like input_shape or a batch with a leading axis."""
        if x.shape == self.input_shape:
            return x[None, ...], True
        if x.shape[1:] == self.input_shape:
            return x, False
        raise ShapeMismatch(
            0, f"input shape {x.shape} incompatible with {self.input_shape}"
        )

    def _prepare(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x)
        if self.specs and self.specs[0].kind == "embedding":
            x = x.astype(np.int64, copy=False)
        else:
            x = np.ascontiguousarray(x, dtype=self.dtype)
        return self._check_input(x)

    def forward(self, x) -> np.ndarray:
        """Run the stack; output of the final layer (no batch axis if the
        input had none)."""
        xb, single = self._prepare(x)
        for layer, params in zip(self.layers, self.params):
            xb, _ = layer.forward(params, xb)
        return xb[0] if single else xb

    def _forward_caches(self, xb: np.ndarray):
        caches = []
        for layer, params in zip(self.layers, self.params):
            xb, cache = layer.forward(params, xb)
            caches.append(cache)
        return xb, caches

    def backward(self, x, true_class):
        """Summed cross-entropy loss over the batch and its parameter
        gradients (same shapes as the parameters)."""
        xb, single = self._prepare(x)
        t = np.atleast_1d(np.asarray(true_class, dtype=np.int64))
        if t.shape[0] != xb.shape[0]:
            raise ShapeMismatch(
                len(self.layers) - 1,
                f"{t.shape[0]} labels for batch of {xb.shape[0]}",
            )
        probs, caches = self._forward_caches(xb)
        losses = cross_entropy(probs, t)

        g = np.zeros_like(probs)
        picked = np.maximum(probs[np.arange(probs.shape[0]), t], EPS_LOG)
        g[np.arange(probs.shape[0]), t] = -1.0 / picked

        grads = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            g, layer_grads = self.layers[i].backward(
                self.params[i], caches[i], g
            )
            grads[i] = layer_grads
            if g is None:
                break  # non-differentiable input (embedding ids)
        for i, d in enumerate(grads):
            if d is None:
                grads[i] = {}
        return float(losses.sum()), grads


def build_model(specs, input_shape, seed: int, dtype=np.float32) -> Model:
    return Model(specs, input_shape, seed, dtype)


def forward(model: Model, x) -> np.ndarray:
    return model.forward(x)


def backward(model: Model, x, true_class):
    return model.backward(x, true_class)[1]


def save_checkpoint(model: Model, path: str | Path, meta: dict | None = None) -> None:
    """Write the manifest line + little-endian float32 parameter blob."""
    entries = []
    offset = 0
    blobs = []
    for i, d in enumerate(model.params):
        for name in sorted(d):
            arr = np.ascontiguousarray(d[name], dtype="<f4")
            entries.append(
                {
                    "layer": i,
                    "name": name,
                    "shape": list(arr.shape),
                    "offset": offset,
                    "nbytes": arr.nbytes,
                }
            )
            blobs.append(arr.tobytes())
            offset += arr.nbytes
    manifest = {
        "format": CHECKPOINT_MAGIC,
        "seed": model.seed,
        "input_shape": list(model.input_shape),
        "layers": [spec_to_dict(s) for s in model.specs],
        "params": entries,
        "meta": meta or {},
    }
    header = json.dumps(manifest, sort_keys=True) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: str | Path) -> tuple[Model, dict]:
    """Rebuild a model (and its meta dict) from a checkpoint file."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("utf-8")
        manifest = json.loads(header)
        if manifest.get("format") != CHECKPOINT_MAGIC:
            raise ValueError(f"{path} is not a model checkpoint")
        blob = fh.read()
    specs = [spec_from_dict(d) for d in manifest["layers"]]
    model = Model(specs, manifest["input_shape"], manifest["seed"])
    for entry in manifest["params"]:
        arr = np.frombuffer(
            blob, dtype="<f4", count=entry["nbytes"] // 4, offset=entry["offset"]
        ).reshape(entry["shape"])
        model.params[entry["layer"]][entry["name"]] = arr.astype(np.float32)
    return model, manifest["meta"]
