"""Adaptive boosting of decision stumps (multiclass, vote-weighted).

Each round fits a one-split stump to the current instance weights
(majority class per branch, minimizing weighted error), then reweights
so that stump's branches become exactly uninformative: misclassified
mass is scaled by ``exp(a)`` and the rest by ``exp(-a)`` with
``a = 0.5*ln((1-err)/err)``, leaving its weighted error at one half.
"""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Dataset
from .base import Model, class_one_hot, register_model, require_training_data

_ERR_CLAMP = 1e-10


def _fit_stump(X, kinds, widths, onehot):
    """Minimal-weighted-error single split; returns a stump dict."""
    total = onehot.sum(axis=0)
    w_all = float(total.sum())
    base = {"t": "const", "cls": int(np.argmax(total))}
    best_err = w_all - float(total.max())
    best = base
    for j in range(X.shape[1]):
        col = X[:, j]
        if kinds[j] == "numeric":
            order = np.argsort(col, kind="stable")
            v = col[order]
            change = np.nonzero(v[1:] > v[:-1])[0]
            if change.size == 0:
                continue
            cum = np.cumsum(onehot[order], axis=0)
            left = cum[change]
            right = total[None, :] - left
            errs = w_all - left.max(axis=1) - right.max(axis=1)
            b = int(np.argmin(errs))
            if errs[b] < best_err - 1e-12:
                best_err = float(errs[b])
                pos = change[b]
                best = {
                    "t": "num",
                    "attr": j,
                    "thr": float((v[pos] + v[pos + 1]) / 2.0),
                    "lo_cls": int(np.argmax(left[b])),
                    "hi_cls": int(np.argmax(right[b])),
                }
        else:
            counts = np.zeros((widths[j], onehot.shape[1]), dtype=np.float64)
            np.add.at(counts, col.astype(np.int64), onehot)
            err = w_all - float(counts.max(axis=1).sum())
            if err < best_err - 1e-12:
                best_err = err
                fallback = int(np.argmax(total))
                classes = [
                    int(np.argmax(counts[v])) if counts[v].sum() > 0 else fallback
                    for v in range(widths[j])
                ]
                best = {"t": "nom", "attr": j, "classes": classes}
    return best, best_err / w_all if w_all > 0 else 0.0


def _stump_predict(stump, X):
    n = X.shape[0]
    if stump["t"] == "const":
        return np.full(n, stump["cls"], dtype=np.int64)
    if stump["t"] == "num":
        return np.where(X[:, stump["attr"]] <= stump["thr"], stump["lo_cls"], stump["hi_cls"])
    classes = np.asarray(stump["classes"], dtype=np.int64)
    codes = np.clip(X[:, stump["attr"]].astype(np.int64), 0, classes.size - 1)
    return classes[codes]


@register_model
class BoostedStumpsModel(Model):
    kind = "boosted_stumps"

    def __init__(self, attributes, class_values, stumps, alphas):
        super().__init__(attributes, class_values)
        self.stumps = list(stumps)
        self.alphas = list(alphas)

    def distributions(self, X):
        n, c = X.shape[0], len(self.class_values)
        score = np.zeros((n, c), dtype=np.float64)
        for stump, alpha in zip(self.stumps, self.alphas):
            score[np.arange(n), _stump_predict(stump, X)] += alpha
        totals = score.sum(axis=1, keepdims=True)
        uniform = np.full_like(score, 1.0 / c)
        with np.errstate(invalid="ignore"):
            return np.where(totals > 0, score / np.where(totals > 0, totals, 1.0), uniform)

    def _state(self):
        return {"stumps": self.stumps, "alphas": self.alphas}

    @classmethod
    def _from_state(cls, state, attributes, class_values):
        return cls(attributes, class_values, state["stumps"], state["alphas"])


def train_adaboost(ds: Dataset, rounds: int = 10) -> BoostedStumpsModel:
    require_training_data(ds)
    n = len(ds)
    kinds = [a.kind for a in ds.attributes]
    widths = [len(a.values) if a.kind == "nominal" else 0 for a in ds.attributes]
    weights = np.full(n, 1.0 / n)
    stumps, alphas = [], []
    for _ in range(rounds):
        onehot = class_one_hot(ds.y, len(ds.class_values), weights)
        stump, err = _fit_stump(ds.X, kinds, widths, onehot)
        if err >= 0.5:
            if not stumps:  # keep something predictive even on hopeless data
                stumps.append(stump)
                alphas.append(1.0)
            break
        clamped = min(max(err, _ERR_CLAMP), 1.0 - _ERR_CLAMP)
        alpha = 0.5 * math.log((1.0 - clamped) / clamped)
        stumps.append(stump)
        alphas.append(alpha)
        if err <= 0.0:
            break
        wrong = _stump_predict(stump, ds.X) != ds.y
        weights = weights * np.where(wrong, math.exp(alpha), math.exp(-alpha))
        weights /= weights.sum()
    return BoostedStumpsModel(tuple(ds.attributes), tuple(ds.class_values), stumps, alphas)
