"""One-hidden-layer perceptron trained by mini-batch backpropagation.

Inputs are min-max scaled from the training data; nominal attributes are
indicator-coded.  Both layers are sigmoid and the loss is half the mean
squared error against the one-hot class targets.  Updates sweep the
training set in fixed order in small batches with a momentum term, so
the batch size scales with the data so every epoch applies the same
number of updates regardless of dataset size, keeping the fixed epoch
budget meaningful from toy fixtures to full surveys.  Training runs in
float32, while :func:`loss_and_grad` recomputes in the caller's dtype so
analytic gradients can be checked against finite differences in float64.
"""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Dataset
from ..errors import TrainingError
from .base import Model, class_one_hot, register_model, require_training_data

_UPDATES_PER_EPOCH = 8


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _encode_columns(attributes):
    """Input-column plan: list of (attr_index, value_code or None)."""
    plan = []
    for j, spec in enumerate(attributes):
        if spec.kind == "numeric" or len(spec.values) <= 2:
            plan.append((j, None))
        else:
            plan.extend((j, v) for v in range(len(spec.values)))
    return plan


def _raw_design(X, plan):
    cols = []
    for j, v in plan:
        col = X[:, j]
        cols.append(col if v is None else (col == v).astype(np.float64))
    return np.stack(cols, axis=1)


def pack(W1, b1, W2, b2):
    return np.concatenate([W1.ravel(), b1.ravel(), W2.ravel(), b2.ravel()])


def unpack(params, d, h, c):
    i = 0
    W1 = params[i:i + d * h].reshape(d, h); i += d * h
    b1 = params[i:i + h]; i += h
    W2 = params[i:i + h * c].reshape(h, c); i += h * c
    b2 = params[i:i + c]
    return W1, b1, W2, b2


def loss_and_grad(params, X, Y, hidden: int):
    """Half-MSE loss and its analytic gradient, in the dtype of ``params``."""
    d, c = X.shape[1], Y.shape[1]
    W1, b1, W2, b2 = unpack(params, d, hidden, c)
    n = X.shape[0]
    a1 = _sigmoid(X @ W1 + b1)
    out = _sigmoid(a1 @ W2 + b2)
    diff = out - Y
    loss = float(0.5 * (diff * diff).sum() / n)
    d2 = diff * out * (1.0 - out) / n
    gW2 = a1.T @ d2
    gb2 = d2.sum(axis=0)
    d1 = (d2 @ W2.T) * a1 * (1.0 - a1)
    gW1 = X.T @ d1
    gb1 = d1.sum(axis=0)
    return loss, pack(gW1, gb1, gW2, gb2)


@register_model
class PerceptronModel(Model):
    kind = "mlp"

    def __init__(self, attributes, class_values, plan, lo, hi, hidden, params):
        super().__init__(attributes, class_values)
        self.plan = [tuple(p) for p in plan]
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        self.hidden = int(hidden)
        self.params = np.asarray(params, dtype=np.float64)

    def _design(self, X):
        raw = _raw_design(X, self.plan)
        span = self.hi - self.lo
        span = np.where(span > 0, span, 1.0)
        return (raw - self.lo) / span

    def distributions(self, X):
        Z = self._design(X)
        d, c = Z.shape[1], len(self.class_values)
        W1, b1, W2, b2 = unpack(self.params, d, self.hidden, c)
        out = _sigmoid(_sigmoid(Z @ W1 + b1) @ W2 + b2)
        totals = out.sum(axis=1, keepdims=True)
        uniform = np.full_like(out, 1.0 / c)
        return np.where(totals > 0, out / np.where(totals > 0, totals, 1.0), uniform)

    def _state(self):
        return {
            "plan": [list(p) for p in self.plan],
            "lo": self.lo.tolist(),
            "hi": self.hi.tolist(),
            "hidden": self.hidden,
            "params": self.params.tolist(),
        }

    @classmethod
    def _from_state(cls, state, attributes, class_values):
        return cls(attributes, class_values, state["plan"], state["lo"],
                   state["hi"], state["hidden"], state["params"])


def train_mlp(ds: Dataset, epochs: int = 500, learning_rate: float = 0.3,
              momentum: float = 0.2, hidden: int | None = None,
              seed: int = 0) -> PerceptronModel:
    require_training_data(ds)
    plan = _encode_columns(ds.attributes)
    raw = _raw_design(ds.X, plan)
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    Z = ((raw - lo) / span).astype(np.float32)
    c = len(ds.class_values)
    Y = class_one_hot(ds.y, c).astype(np.float32)
    d = Z.shape[1]
    if hidden is None:
        hidden = max(1, (d + c) // 2)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x31A9)))
    params = rng.uniform(-0.5, 0.5, size=d * hidden + hidden + hidden * c + c).astype(np.float32)
    velocity = np.zeros_like(params)
    n = Z.shape[0]
    batch = max(1, math.ceil(n / _UPDATES_PER_EPOCH))
    bounds = list(range(0, n, batch)) + [n]
    mom = np.float32(momentum)
    rate = np.float32(learning_rate)
    for epoch in range(epochs):
        for s, e in zip(bounds[:-1], bounds[1:]):
            loss, grad = loss_and_grad(params, Z[s:e], Y[s:e], hidden)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            velocity = mom * velocity - rate * grad
            params = params + velocity
    return PerceptronModel(tuple(ds.attributes), tuple(ds.class_values),
                           plan, lo, hi, hidden, params.astype(np.float64))
