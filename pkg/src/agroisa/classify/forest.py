"""Random forest: bagged unpruned trees with per-node attribute sampling."""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset
from .base import Model, register_model, require_training_data
from .tree import grow_tree, route_distributions


@register_model
class ForestModel(Model):
    """Ensemble of trees voting with equal weight."""

    kind = "forest"

    def __init__(self, attributes, class_values, trees):
        super().__init__(attributes, class_values)
        self.trees = list(trees)

    def distributions(self, X):
        n, c = X.shape[0], len(self.class_values)
        votes = np.zeros((n, c), dtype=np.float64)
        buf = np.zeros((n, c), dtype=np.float64)
        for root in self.trees:
            buf[:] = 0.0
            route_distributions(root, X, buf)
            votes[np.arange(n), np.argmax(buf, axis=1)] += 1.0
        return votes / max(len(self.trees), 1)

    def _state(self):
        return {"trees": self.trees}

    @classmethod
    def _from_state(cls, state, attributes, class_values):
        return cls(attributes, class_values, state["trees"])


def train_forest(ds: Dataset, n_trees: int = 100, mtry: int | None = None,
                 seed: int = 0) -> ForestModel:
    """Bootstrap-sample ``n_trees`` unpruned trees.

    ``mtry`` defaults to ``floor(log2(m)) + 1`` candidate attributes per
    node.  Each tree gets its own child generator, so the forest is
    reproducible regardless of construction order.
    """
    require_training_data(ds)
    m = ds.n_attributes
    if mtry is None:
        mtry = int(np.log2(m)) + 1 if m > 1 else 1
    mtry = max(1, min(mtry, m))
    n = len(ds)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence((seed, t)))
        sample = rng.integers(0, n, size=n)
        trees.append(
            grow_tree(ds, sample, min_leaf=1, use_ratio=False, mtry=mtry, rng=rng)
        )
    return ForestModel(tuple(ds.attributes), tuple(ds.class_values), trees)
