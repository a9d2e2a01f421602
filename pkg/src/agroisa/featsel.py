"""Attribute ranking and subset selection for nominal/discretized data.

Two selectors are provided, both operating on :class:`~agroisa.dataset.Dataset`:

* :func:`info_gain_rank` — ranks attributes by information gain with the
  class, averaged over stratified folds (numeric attributes are
  entropy/MDL-discretized per fold); an attribute is selected when its
  mean gain is positive.
* :func:`best_first_cfs` — correlation-based subset selection: greedy
  best-first search over subsets scored by
  ``k*r_cf / sqrt(k + k*(k-1)*r_ff)`` with symmetric uncertainty as the
  correlation measure.

Information gain is only defined here for nominal attributes; numeric
columns must be discretized first (both selectors do so internally).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, apply_cuts, discretize_mdl, stratified_fold_indices
from .errors import SelectionError


def entropy(counts) -> float:
    """Shannon entropy (bits) of a non-negative count vector."""
    c = np.asarray(counts, dtype=np.float64).ravel()
    if c.size and c.min() < 0:
        raise SelectionError("entropy requires non-negative counts")
    n = c.sum()
    if n <= 0:
        return 0.0
    p = c[c > 0] / n
    return float(-(p * np.log2(p)).sum())


def _joint_counts(a_codes, n_a, b_codes, n_b):
    joint = np.zeros((n_a, n_b), dtype=np.float64)
    np.add.at(joint, (a_codes, b_codes), 1.0)
    return joint


def _gain_from_joint(joint) -> float:
    n = joint.sum()
    if n <= 0:
        return 0.0
    h_b = entropy(joint.sum(axis=0))
    sizes = joint.sum(axis=1)
    h_cond = 0.0
    for row, size in zip(joint, sizes):
        if size > 0:
            h_cond += (size / n) * entropy(row)
    return h_b - h_cond


def _nominal_codes(ds: Dataset, j: int):
    spec = ds.attributes[j]
    if spec.kind != "nominal":
        raise SelectionError(
            f"attribute {spec.name!r} is numeric; discretize it before computing information gain"
        )
    return ds.X[:, j].astype(np.int64), len(spec.values)


def info_gain(ds: Dataset, attribute: str) -> float:
    """Information gain of a nominal attribute with the class, in bits."""
    j = ds.attribute_names.index(attribute)
    codes, n_codes = _nominal_codes(ds, j)
    joint = _joint_counts(codes, n_codes, ds.y, len(ds.class_values))
    return _gain_from_joint(joint)


def symmetric_uncertainty(ds: Dataset, a: str, b: str | None = None) -> float:
    """``2*IG(a;b) / (H(a)+H(b))``; ``b=None`` means the class attribute.

    Zero when either marginal entropy is zero (a constant carries no
    correlation either way).
    """
    names = ds.attribute_names
    a_codes, n_a = _nominal_codes(ds, names.index(a))
    if b is None:
        b_codes, n_b = ds.y, len(ds.class_values)
    else:
        b_codes, n_b = _nominal_codes(ds, names.index(b))
    return _su_from_codes(a_codes, n_a, b_codes, n_b)


def _su_from_codes(a_codes, n_a, b_codes, n_b) -> float:
    joint = _joint_counts(a_codes, n_a, b_codes, n_b)
    h_a = entropy(joint.sum(axis=1))
    h_b = entropy(joint.sum(axis=0))
    if h_a <= 0.0 or h_b <= 0.0:
        return 0.0
    return 2.0 * _gain_from_joint(joint) / (h_a + h_b)


def cfs_merit(k: int, mean_cf: float, mean_ff: float) -> float:
    """Subset merit from average feature-class and feature-feature correlation."""
    if k <= 0:
        return 0.0
    denom = k + k * (k - 1) * mean_ff
    if denom <= 0.0:
        return 0.0
    return k * mean_cf / float(np.sqrt(denom))


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of an attribute-selection run.

    ``ranking`` pairs every attribute with its score (information gain or
    class correlation), best first; ``selected`` keeps dataset order.
    """

    method: str
    selected: tuple[str, ...]
    ranking: tuple[tuple[str, float], ...]
    merit: float | None = None

    def __post_init__(self):
        if self.method not in ("info_gain", "cfs"):
            raise SelectionError(f"unknown selection method {self.method!r}")


def _discretized_codes(ds: Dataset):
    """Integer code matrix for all attributes; numeric columns get MDL cuts."""
    n_classes = len(ds.class_values)
    codes = np.empty_like(ds.X, dtype=np.int64)
    widths = []
    for j, spec in enumerate(ds.attributes):
        if spec.kind == "nominal":
            codes[:, j] = ds.X[:, j].astype(np.int64)
            widths.append(len(spec.values))
        else:
            cuts = discretize_mdl(ds.X[:, j], ds.y, n_classes)
            codes[:, j] = apply_cuts(ds.X[:, j], cuts)
            widths.append(len(cuts) + 1)
    return codes, widths


def info_gain_rank(ds: Dataset, n_folds: int = 5, seed: int = 0) -> SelectionResult:
    """Rank attributes by information gain averaged over stratified folds.

    Numeric attributes are discretized on each fold's training portion,
    so the reported gain reflects what a learner trained on that portion
    would see.  Selected attributes are those with positive mean gain.
    """
    names = ds.attribute_names
    n = len(ds)
    if n == 0:
        raise SelectionError("cannot rank attributes of an empty dataset")
    folds = stratified_fold_indices(ds.y, min(n_folds, n), seed)
    gains = np.zeros(ds.n_attributes, dtype=np.float64)
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        train = ds.take(np.nonzero(mask)[0])
        codes, widths = _discretized_codes(train)
        for j in range(train.n_attributes):
            joint = _joint_counts(codes[:, j], widths[j], train.y, len(train.class_values))
            gains[j] += _gain_from_joint(joint)
    gains /= len(folds)
    order = sorted(range(len(names)), key=lambda j: (-gains[j], j))
    ranking = tuple((names[j], float(gains[j])) for j in order)
    selected = tuple(names[j] for j in range(len(names)) if gains[j] > 0.0)
    return SelectionResult(method="info_gain", selected=selected, ranking=ranking)


def _su_matrices(ds: Dataset):
    codes, widths = _discretized_codes(ds)
    m = ds.n_attributes
    n_classes = len(ds.class_values)
    su_cf = np.array(
        [_su_from_codes(codes[:, j], widths[j], ds.y, n_classes) for j in range(m)]
    )
    su_ff = np.zeros((m, m), dtype=np.float64)
    for a in range(m):
        for b in range(a + 1, m):
            su_ff[a, b] = su_ff[b, a] = _su_from_codes(codes[:, a], widths[a], codes[:, b], widths[b])
    return su_cf, su_ff


def _subset_merit(subset, su_cf, su_ff) -> float:
    k = len(subset)
    if k == 0:
        return 0.0
    idx = np.fromiter(subset, dtype=np.int64, count=k)
    num = float(su_cf[idx].sum())
    ff = float(su_ff[np.ix_(idx, idx)].sum())  # off-diagonal, both orders
    denom = k + ff
    if denom <= 0.0:
        return 0.0
    return num / float(np.sqrt(denom))


def best_first_cfs(ds: Dataset, patience: int = 5) -> SelectionResult:
    """Correlation-based subset selection via forward best-first search.

    Starts from the empty set, repeatedly expands the unexpanded subset
    with the highest merit, and stops after ``patience`` consecutive
    expansions fail to improve on the best merit seen.
    """
    if len(ds) == 0:
        raise SelectionError("cannot select attributes of an empty dataset")
    names = ds.attribute_names
    m = ds.n_attributes
    su_cf, su_ff = _su_matrices(ds)

    best_subset: frozenset = frozenset()
    best_merit = 0.0
    counter = 0  # deterministic heap tie-break: insertion order
    heap = [(-0.0, counter, frozenset())]
    seen = {frozenset()}
    stall = 0
    while heap and stall < patience:
        neg_merit, _, subset = heapq.heappop(heap)
        improved = False
        for j in range(m):
            if j in subset:
                continue
            child = subset | {j}
            if child in seen:
                continue
            seen.add(child)
            merit = _subset_merit(child, su_cf, su_ff)
            if merit > best_merit + 1e-10:
                best_merit = merit
                best_subset = child
                improved = True
            counter += 1
            heapq.heappush(heap, (-merit, counter, child))
        stall = 0 if improved else stall + 1

    order = sorted(range(m), key=lambda j: (-su_cf[j], j))
    ranking = tuple((names[j], float(su_cf[j])) for j in order)
    selected = tuple(names[j] for j in sorted(best_subset))
    return SelectionResult(method="cfs", selected=selected, ranking=ranking, merit=float(best_merit))


def select_attributes(ds: Dataset, method: str, seed: int = 0):
    """Dispatch helper: ``method`` in ``{"none", "cfs", "info_gain"}``.

    Returns ``(dataset, result)`` where the dataset is restricted to the
    selected attributes (unchanged for ``"none"``, whose result is None).
    """
    if method == "none":
        return ds, None
    if method == "cfs":
        result = best_first_cfs(ds)
    elif method == "info_gain":
        result = info_gain_rank(ds, seed=seed)
    else:
        raise SelectionError(f"unknown selection method {method!r}")
    if not result.selected:
        return ds, result
    return ds.select_attributes(list(result.selected)), result
