"""Small numpy classifiers trained with soft-label cross-entropy.

Two architectures:

* ``bag-fnn``: input -> dense(hidden) -> ReLU -> dense(C) -> softmax
* ``seq-mean``: SeqMatrix @ Embedding -> mean over positions -> dense(hidden)
  -> ReLU -> dense(C) -> softmax
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

BAG = "bag-fnn"
SEQ = "seq-mean"
KINDS = (BAG, SEQ)

DEFAULT_HIDDEN = 64
DEFAULT_EMBED = 32
OPTIMIZERS = ("adam", "sgd")
DEFAULT_LR = {("adam", BAG): 0.01, ("adam", SEQ): 0.01, ("sgd", BAG): 0.1, ("sgd", SEQ): 0.05}
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
FORMAT_VERSION = 1


class InvalidDims(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class DivergedError(RuntimeError):
    pass


@dataclass
class Classifier:
    kind: str
    dims: dict  # bag: input, hidden; seq: seq_len, vocab, embed, hidden
    num_classes: int
    seed: int
    params: dict = field(repr=False)

    @property
    def input_shape(self) -> tuple:
        if self.kind == BAG:
            return (self.dims["input"],)
        return (self.dims["seq_len"], self.dims["vocab"])

    def parameter_count(self) -> int:
        return sum(p.size for p in self.params.values())

    def copy(self) -> "Classifier":
        return Classifier(self.kind, dict(self.dims), self.num_classes, self.seed,
                          {k: v.copy() for k, v in self.params.items()})


def _uniform(rng, fan_in: int, fan_out: int) -> np.ndarray:
    s = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=(fan_in, fan_out))


def init(kind: str, dims: dict, num_classes: int, seed: int) -> Classifier:
    """Glorot-uniform weights, zero biases; deterministic in ``seed``."""
    if kind not in KINDS:
        raise InvalidDims(f"unknown model kind {kind!r}")
    if num_classes < 1:
        raise InvalidDims("num_classes must be >= 1")
    dims = dict(dims)
    dims.setdefault("hidden", DEFAULT_HIDDEN)
    if kind == SEQ:
        dims.setdefault("embed", DEFAULT_EMBED)
        required = ("seq_len", "vocab", "embed", "hidden")
    else:
        required = ("input", "hidden")
    for key in required:
        if int(dims.get(key, 0)) < 1:
            raise InvalidDims(f"dimension {key!r} must be >= 1")
    dims = {k: int(dims[k]) for k in required}
    rng = np.random.default_rng(seed)
    h = dims["hidden"]
    params = {}
    if kind == SEQ:
        params["E"] = _uniform(rng, dims["vocab"], dims["embed"])
        first_in = dims["embed"]
    else:
        first_in = dims["input"]
    params["W1"] = _uniform(rng, first_in, h)
    params["b1"] = np.zeros(h)
    params["W2"] = _uniform(rng, h, num_classes)
    params["b2"] = np.zeros(num_classes)
    return Classifier(kind, dims, num_classes, seed, params)


# --- forward / backward -----------------------------------------------------------

def _check_batch(model: Classifier, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1:] != model.input_shape:
        raise ShapeMismatch(f"expected inputs of shape {model.input_shape}, got {X.shape[1:]}")
    return X


def _first_layer_input(model: Classifier, X: np.ndarray) -> tuple:
    if model.kind == SEQ:
        m = X.mean(axis=1)
        return m, m @ model.params["E"]
    return None, X


def logits(model: Classifier, X: np.ndarray) -> np.ndarray:
    X = _check_batch(model, X)
    _, a0 = _first_layer_input(model, X)
    p = model.params
    h = np.maximum(a0 @ p["W1"] + p["b1"], 0.0)
    return h @ p["W2"] + p["b2"]


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def forward_batch(model: Classifier, X: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits(model, X)))


def forward(model: Classifier, x: np.ndarray) -> np.ndarray:
    """Class probabilities for a single encoded program."""
    x = np.asarray(x, dtype=float)
    if x.shape != model.input_shape:
        raise ShapeMismatch(f"expected input of shape {model.input_shape}, got {x.shape}")
    return forward_batch(model, x[None])[0]


def predict_batch(model: Classifier, X: np.ndarray) -> np.ndarray:
    # argmax returns the first maximum, so ties go to the lower index
    return np.argmax(logits(model, X), axis=1)


def predict(model: Classifier, x: np.ndarray) -> int:
    return int(np.argmax(forward(model, x)))


def loss(probs: np.ndarray, target: np.ndarray) -> float:
    """Soft-target cross-entropy ``-sum(t * log p)``."""
    probs = np.asarray(probs, dtype=float)
    target = np.asarray(target, dtype=float)
    if probs.shape != target.shape:
        raise ShapeMismatch(f"{probs.shape} vs {target.shape}")
    if np.any(probs <= 0):
        raise ValueError("probabilities must be strictly positive")
    return float(-(target * np.log(probs)).sum())


def loss_and_grads(model: Classifier, X: np.ndarray, T: np.ndarray) -> tuple[float, dict]:
    """Mean soft cross-entropy over the batch and its exact parameter gradients."""
    X = _check_batch(model, X)
    p = model.params
    B = X.shape[0]
    m, a0 = _first_layer_input(model, X)
    pre = a0 @ p["W1"] + p["b1"]
    h = np.maximum(pre, 0.0)
    z = h @ p["W2"] + p["b2"]
    logp = log_softmax(z)
    value = float(-(T * logp).sum() / B)

    dz = (np.exp(logp) - T) / B
    g = {"W2": h.T @ dz, "b2": dz.sum(axis=0)}
    dpre = (dz @ p["W2"].T) * (pre > 0)
    g["W1"] = a0.T @ dpre
    g["b1"] = dpre.sum(axis=0)
    if model.kind == SEQ:
        g["E"] = m.T @ (dpre @ p["W1"].T)
    return value, g


# --- training -------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    learning_rate: Optional[float] = None  # None -> per-(optimizer, kind) default
    batch_size: int = 32
    optimizer: str = "adam"

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def lr_for(self, kind: str) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return DEFAULT_LR[(self.optimizer, kind)]


@dataclass
class TrainTrace:
    loss: list = field(default_factory=list)
    heldout_acc: list = field(default_factory=list)


class _Adam:
    def __init__(self, params: dict, lr: float):
        self.lr = lr
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        b1, b2 = ADAM_BETAS
        self.t += 1
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for k, g in grads.items():
            self.m[k] = b1 * self.m[k] + (1.0 - b1) * g
            self.v[k] = b2 * self.v[k] + (1.0 - b2) * (g * g)
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + ADAM_EPS)


class _SGD:
    def __init__(self, params: dict, lr: float):
        self.lr = lr

    def step(self, params: dict, grads: dict) -> None:
        for k, g in grads.items():
            params[k] -= self.lr * g


# A provider maps an epoch index to that epoch's (features, soft targets),
# already in the order mini-batches should be taken.
Provider = Callable[[int], tuple]


def fit(model: Classifier, provider: Provider, config: TrainConfig,
        heldout: Optional[tuple] = None) -> tuple[Classifier, TrainTrace]:
    """Mini-batch training (Adam or plain SGD) over ``config.epochs`` provider epochs.

    Returns a trained copy; the input model is left untouched. ``heldout``
    is an optional ``(features, class indices)`` pair scored after each epoch.
    """
    model = model.copy()
    opt = (_Adam if config.optimizer == "adam" else _SGD)(model.params, config.lr_for(model.kind))
    trace = TrainTrace()
    for epoch in range(config.epochs):
        X, T = provider(epoch)
        X = np.asarray(X, dtype=float)
        T = np.asarray(T, dtype=float)
        if len(X) == 0:
            raise ValueError("provider returned an empty epoch")
        total = 0.0
        for start in range(0, len(X), config.batch_size):
            xb = X[start:start + config.batch_size]
            tb = T[start:start + config.batch_size]
            value, grads = loss_and_grads(model, xb, tb)
            if not math.isfinite(value):
                raise DivergedError(f"non-finite loss at epoch {epoch}")
            total += value * len(xb)
            opt.step(model.params, grads)
        if not all(np.isfinite(v).all() for v in model.params.values()):
            raise DivergedError(f"non-finite weights after epoch {epoch}")
        trace.loss.append(total / len(X))
        if heldout is not None:
            hx, hy = heldout
            trace.heldout_acc.append(float(np.mean(predict_batch(model, hx) == np.asarray(hy))))
        else:
            trace.heldout_acc.append(float("nan"))
    return model, trace


# --- checkpoints ----------------------------------------------------------------

def to_document(model: Classifier, extra: Optional[dict] = None) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "dims": model.dims,
        "num_classes": model.num_classes,
        "seed": model.seed,
        "weights": {k: model.params[k].tolist() for k in sorted(model.params)},
    }
    if extra:
        doc.update(extra)
    return doc


def from_document(doc: dict) -> Classifier:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format {doc.get('format_version')!r}")
    params = {k: np.array(v, dtype=float) for k, v in doc["weights"].items()}
    model = Classifier(doc["kind"], {k: int(v) for k, v in doc["dims"].items()},
                       int(doc["num_classes"]), int(doc["seed"]), params)
    reference = init(model.kind, model.dims, model.num_classes, 0)
    for k, v in reference.params.items():
        if k not in params or params[k].shape != v.shape:
            raise ValueError(f"checkpoint weight {k!r} missing or misshapen")
    return model


def save(model: Classifier, path, extra: Optional[dict] = None) -> None:
    """Write a JSON checkpoint; floats use Python's shortest round-trip repr."""
    text = json.dumps(to_document(model, extra), indent=1, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load(path) -> tuple[Classifier, dict]:
    """Read a checkpoint; returns the model and the full document."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return from_document(doc), doc
