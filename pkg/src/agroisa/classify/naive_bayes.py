"""Naive Bayes: Gaussian numeric likelihoods, Laplace-smoothed nominal ones."""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset
from .base import Model, register_model, require_training_data

_VAR_FLOOR = 1e-6


@register_model
class NaiveBayesModel(Model):
    kind = "naive_bayes"

    def __init__(self, attributes, class_values, priors, means, variances, nominal_logp):
        super().__init__(attributes, class_values)
        self.priors = np.asarray(priors, dtype=np.float64)
        self.means = np.asarray(means, dtype=np.float64)
        self.variances = np.asarray(variances, dtype=np.float64)
        # per nominal attribute: (C, V) log-probability table (None for numeric)
        self.nominal_logp = nominal_logp

    def distributions(self, X):
        n = X.shape[0]
        logp = np.tile(np.log(self.priors), (n, 1))
        for j, spec in enumerate(self.attributes):
            if spec.kind == "numeric":
                mu = self.means[:, j]
                var = self.variances[:, j]
                d = X[:, j][:, None] - mu[None, :]
                logp += -0.5 * (np.log(2.0 * np.pi * var)[None, :] + d * d / var[None, :])
            else:
                table = self.nominal_logp[j]
                codes = X[:, j].astype(np.int64)
                logp += table[:, codes].T
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        return p / p.sum(axis=1, keepdims=True)

    def _state(self):
        return {
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "nominal_logp": [t.tolist() if t is not None else None for t in self.nominal_logp],
        }

    @classmethod
    def _from_state(cls, state, attributes, class_values):
        tables = [np.asarray(t) if t is not None else None for t in state["nominal_logp"]]
        return cls(attributes, class_values, state["priors"], state["means"],
                   state["variances"], tables)


def train_naive_bayes(ds: Dataset) -> NaiveBayesModel:
    require_training_data(ds)
    n, m = ds.X.shape
    c = len(ds.class_values)
    counts = ds.class_counts().astype(np.float64)
    priors = (counts + 1.0) / (n + c)
    means = np.zeros((c, m))
    variances = np.full((c, m), _VAR_FLOOR)
    nominal_logp: list = [None] * m
    for j, spec in enumerate(ds.attributes):
        col = ds.X[:, j]
        if spec.kind == "numeric":
            for k in range(c):
                vals = col[ds.y == k]
                if vals.size:
                    means[k, j] = vals.mean()
                    variances[k, j] = max(float(vals.var()), _VAR_FLOOR)
        else:
            v = len(spec.values)
            table = np.ones((c, v), dtype=np.float64)  # Laplace
            np.add.at(table, (ds.y, col.astype(np.int64)), 1.0)
            nominal_logp[j] = np.log(table / table.sum(axis=1, keepdims=True))
    return NaiveBayesModel(tuple(ds.attributes), tuple(ds.class_values),
                           priors, means, variances, nominal_logp)
