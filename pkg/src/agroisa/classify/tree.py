"""Decision trees: a shared vectorized grower and a C4.5-flavored learner.

The grower works on the dense dataset matrix.  Numeric attributes get
binary splits at value-change midpoints found by a cumulative-count
scan; nominal attributes split multiway on their full domain.  The
standalone learner selects splits by gain ratio (among attributes with
at least average gain, as C4.5 does) and applies pessimistic
subtree-replacement pruning with the usual confidence-interval error
estimate.  Random forests reuse the same grower with per-node attribute
subsampling and plain information gain.
"""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Dataset
from .base import Model, class_one_hot, register_model, require_training_data

# upper quartile of the standard normal: pessimistic-error z for CF=0.25
_Z25 = 0.6744897501960817


def _row_entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy (bits) of each row of a count matrix."""
    sizes = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        p = np.where(sizes > 0, counts / np.where(sizes > 0, sizes, 1.0), 0.0)
    logp = np.zeros_like(p)
    np.log2(p, out=logp, where=p > 0)
    return -(p * logp).sum(axis=1)


def _entropy1(counts: np.ndarray) -> float:
    return float(_row_entropy(counts[None, :])[0])


def best_numeric_split(values, onehot, min_leaf):
    """Best binary split of one numeric column.

    Returns ``(gain, split_info, threshold)`` or None.  ``onehot`` may be
    weighted; sizes are weight sums throughout.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    oh = onehot[order]
    change = np.nonzero(v[1:] > v[:-1])[0]
    if change.size == 0:
        return None
    cum = np.cumsum(oh, axis=0)
    total = cum[-1]
    n = float(total.sum())
    left = cum[change]
    right = total[None, :] - left
    nl = left.sum(axis=1)
    nr = right.sum(axis=1)
    keep = (nl >= min_leaf) & (nr >= min_leaf)
    if not keep.any():
        return None
    left, right, nl, nr = left[keep], right[keep], nl[keep], nr[keep]
    change = change[keep]
    h_parent = _entropy1(total)
    cond = (nl * _row_entropy(left) + nr * _row_entropy(right)) / n
    gains = h_parent - cond
    best = int(np.argmin(-gains))  # first maximum: lowest threshold on ties
    gain = float(gains[best])
    pl, pr = nl[best] / n, nr[best] / n
    split_info = float(-(pl * np.log2(pl) + pr * np.log2(pr)))
    thr = float((v[change[best]] + v[change[best] + 1]) / 2.0)
    return gain, split_info, thr


def best_nominal_split(codes, n_values, onehot, min_leaf):
    """Multiway split on a nominal column: ``(gain, split_info)`` or None."""
    counts = np.zeros((n_values, onehot.shape[1]), dtype=np.float64)
    np.add.at(counts, codes, onehot)
    sizes = counts.sum(axis=1)
    if int((sizes >= min_leaf).sum()) < 2:
        return None
    n = float(sizes.sum())
    gain = _entropy1(counts.sum(axis=0)) - float((sizes * _row_entropy(counts)).sum()) / n
    p = sizes[sizes > 0] / n
    split_info = float(-(p * np.log2(p)).sum())
    if split_info <= 0.0:
        return None
    return gain, split_info


def _entropy_3d(counts: np.ndarray) -> np.ndarray:
    """Entropy (bits) over the last axis of a stacked count array."""
    sizes = counts.sum(axis=-1, keepdims=True)
    p = counts / np.maximum(sizes, 1e-300)
    # Zero cells contribute exactly 0: 0 * log2(1e-300) == -0.0.
    return -(p * np.log2(np.maximum(p, 1e-300))).sum(axis=-1)


def _scan_numeric_batch(cols, oh, n, min_leaf, h_parent):
    """Best split per column of a (rows x q) numeric block, in one pass.

    Returns ``(gains, split_infos, thresholds, ok)`` arrays of length q.
    """
    q = cols.shape[1]
    order = np.argsort(cols, axis=0, kind="stable")
    v = np.take_along_axis(cols, order, axis=0)
    cum = np.cumsum(oh[order], axis=0)  # (rows, q, C)
    left = cum[:-1]
    nl = left.sum(axis=2)
    nr = n - nl
    valid = (v[1:] > v[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
    ok = valid.any(axis=0)
    gains = np.zeros(q)
    split_infos = np.zeros(q)
    thresholds = np.zeros(q)
    if not ok.any():
        return gains, split_infos, thresholds, ok
    both = np.stack([left, cum[-1][None, :, :] - left])  # (2, rows-1, q, C)
    ent = _entropy_3d(both)
    cond = (nl * ent[0] + nr * ent[1]) / n
    cond[~valid] = np.inf
    rows = np.argmin(cond, axis=0)  # first minimum: lowest threshold on ties
    cols_i = np.arange(q)
    gains[ok] = h_parent - cond[rows, cols_i][ok]
    pl = np.maximum(nl[rows, cols_i] / n, 1e-300)
    pr = np.maximum(nr[rows, cols_i] / n, 1e-300)
    split_infos[ok] = -(pl * np.log2(pl) + pr * np.log2(pr))[ok]
    thresholds[ok] = ((v[rows, cols_i] + v[rows + 1, cols_i]) / 2.0)[ok]
    return gains, split_infos, thresholds, ok


def grow_tree(ds: Dataset, idx, weights=None, *, min_leaf=2, use_ratio=True,
              mtry=None, rng=None) -> dict:
    """Grow a tree over the instances in ``idx`` (iteratively, stack-based).

    Nodes are plain dicts (JSON-ready).  ``mtry`` with an ``rng`` samples
    that many candidate attributes per node (forest mode); otherwise all
    attributes compete.  ``use_ratio`` switches between gain ratio
    (with the average-gain eligibility rule) and raw information gain.
    """
    X, y = ds.X, ds.y
    n_classes = len(ds.class_values)
    onehot_all = class_one_hot(y, n_classes, weights)
    kinds = [a.kind for a in ds.attributes]
    widths = [len(a.values) if a.kind == "nominal" else 0 for a in ds.attributes]
    m = ds.n_attributes

    def build(idx):
        oh = onehot_all[idx]
        dist = oh.sum(axis=0)
        n = float(dist.sum())
        leaf = {"t": "leaf", "dist": dist.tolist(), "n": n}
        if n < 2 * min_leaf or (dist > 0).sum() <= 1:
            return leaf, None
        if mtry is not None and mtry < m:
            cand = sorted(int(j) for j in rng.choice(m, size=mtry, replace=False))
        else:
            cand = list(range(m))
        h_parent = _entropy_3d(dist[None, :])[0]
        found = []  # (gain, split_info, j, thr or None)
        numeric = [j for j in cand if kinds[j] == "numeric"]
        if numeric:
            block = X[np.ix_(idx, np.asarray(numeric, dtype=np.int64))]
            gains, infos, thrs, ok = _scan_numeric_batch(block, oh, n, min_leaf, h_parent)
            for k, j in enumerate(numeric):
                if ok[k] and gains[k] > 1e-12:
                    found.append((float(gains[k]), float(infos[k]), j, float(thrs[k])))
        for j in cand:
            if kinds[j] != "nominal":
                continue
            res = best_nominal_split(X[idx, j].astype(np.int64), widths[j], oh, min_leaf)
            if res is not None and res[0] > 1e-12:
                found.append((res[0], res[1], j, None))
        if not found:
            return leaf, None
        if use_ratio:
            avg_gain = sum(f[0] for f in found) / len(found)
            eligible = [f for f in found if f[0] >= avg_gain - 1e-12]
            best = max(eligible, key=lambda f: (f[0] / f[1] if f[1] > 0 else 0.0, f[0], -f[2]))
            if best[1] <= 0:
                return leaf, None
        else:
            best = max(found, key=lambda f: (f[0], -f[2]))
        _gain, _si, j, thr = best
        if kinds[j] == "numeric":
            mask = X[idx, j] <= thr
            lo, hi = idx[mask], idx[~mask]
            if lo.size < min_leaf or hi.size < min_leaf:
                return leaf, None
            node = {"t": "num", "attr": int(j), "thr": thr,
                    "dist": dist.tolist(), "n": n, "lo": None, "hi": None}
            return node, [("lo", lo), ("hi", hi)]
        codes = X[idx, j].astype(np.int64)
        node = {"t": "nom", "attr": int(j), "dist": dist.tolist(), "n": n,
                "kids": [None] * widths[j]}
        tasks = []
        for v in range(widths[j]):
            sub = idx[codes == v]
            if sub.size:
                tasks.append((v, sub))
            else:
                node["kids"][v] = {"t": "leaf", "dist": dist.tolist(), "n": 0.0}
        return node, tasks

    holder = [None]
    stack = [(np.asarray(idx, dtype=np.int64), holder, 0)]
    while stack:
        rows, parent, key = stack.pop()
        node, tasks = build(rows)
        if isinstance(key, str):
            parent[key] = node          # "lo"/"hi" slot of a numeric node
        elif isinstance(parent, list):
            parent[key] = node          # root holder
        else:
            parent["kids"][key] = node  # branch of a nominal node
        if tasks:
            for key2, sub in tasks:
                stack.append((sub, node, key2))
    return holder[0]


def added_errors(n: float, e: float, z: float = _Z25) -> float:
    """Pessimistic extra errors for a node with ``e`` of ``n`` misclassified."""
    if n <= 0.0:
        return 0.0
    if e < 1e-9:
        return n * (1.0 - 0.25 ** (1.0 / n))
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    f = (e + 0.5) / n
    r = (f + z * z / (2.0 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) / (
        1.0 + z * z / n
    )
    return r * n - e


def _pessimistic(node) -> float:
    if node["t"] == "leaf":
        dist = node["dist"]
        n = node["n"]
        e = n - max(dist) if dist else 0.0
        return e + added_errors(n, e)
    kids = node["kids"] if node["t"] == "nom" else (node["lo"], node["hi"])
    return sum(_pessimistic(k) for k in kids)


def prune_tree(node) -> dict:
    """Bottom-up subtree replacement under the pessimistic error estimate."""
    if node["t"] == "leaf":
        return node
    if node["t"] == "nom":
        node["kids"] = [prune_tree(k) for k in node["kids"]]
    else:
        node["lo"] = prune_tree(node["lo"])
        node["hi"] = prune_tree(node["hi"])
    dist, n = node["dist"], node["n"]
    e = n - max(dist)
    as_leaf = e + added_errors(n, e)
    if as_leaf <= _pessimistic(node) + 0.1:
        return {"t": "leaf", "dist": dist, "n": n}
    return node


def route_distributions(node, X, out, rows=None, laplace=False):
    """Fill ``out`` with each instance's leaf distribution (normalized)."""
    if rows is None:
        rows = np.arange(X.shape[0])
    if rows.size == 0:
        return
    if node["t"] == "leaf" or node["n"] <= 0:
        dist = np.asarray(node["dist"], dtype=np.float64)
        if laplace:
            dist = dist + 1.0
        total = dist.sum()
        out[rows] = dist / total if total > 0 else 1.0 / dist.size
        return
    if node["t"] == "num":
        mask = X[rows, node["attr"]] <= node["thr"]
        route_distributions(node["lo"], X, out, rows[mask], laplace)
        route_distributions(node["hi"], X, out, rows[~mask], laplace)
        return
    codes = X[rows, node["attr"]].astype(np.int64)
    for v, kid in enumerate(node["kids"]):
        sub = rows[codes == v]
        if sub.size:
            route_distributions(kid, X, out, sub, laplace)


def count_leaves(node) -> int:
    if node["t"] == "leaf":
        return 1
    kids = node["kids"] if node["t"] == "nom" else (node["lo"], node["hi"])
    return sum(count_leaves(k) for k in kids)


@register_model
class TreeModel(Model):
    """A single decision tree over a fixed attribute layout."""

    kind = "tree"

    def __init__(self, attributes, class_values, root):
        super().__init__(attributes, class_values)
        self.root = root

    def distributions(self, X):
        out = np.zeros((X.shape[0], len(self.class_values)), dtype=np.float64)
        route_distributions(self.root, X, out)
        return out

    def n_leaves(self) -> int:
        return count_leaves(self.root)

    def _state(self):
        return {"root": self.root}

    @classmethod
    def _from_state(cls, state, attributes, class_values):
        return cls(attributes, class_values, state["root"])


def train_tree(ds: Dataset, min_leaf: int = 2, prune: bool = True) -> TreeModel:
    """Grow and (optionally) prune a gain-ratio decision tree."""
    require_training_data(ds)
    root = grow_tree(ds, np.arange(len(ds)), min_leaf=min_leaf, use_ratio=True)
    if prune:
        root = prune_tree(root)
    return TreeModel(tuple(ds.attributes), tuple(ds.class_values), root)
