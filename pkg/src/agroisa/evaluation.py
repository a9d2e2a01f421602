"""Model evaluation: stratified cross-validation and the experiment grid.

The grid crosses every classifier with both dataset shapes (the wide
questionnaire-level attributes and the 21 indicator scores) and three
attribute-selection treatments (none, correlation-based subset,
information-gain ranking).  Selection runs once per dataset/selector
pair on the full data; models are then cross-validated on the reduced
datasets with folds that are fixed per dataset, so cells differ only in
what they claim to differ in.  Per-cell seeds are derived by hashing the
master seed with the cell key, which makes every cell reproducible in
isolation and the whole grid independent of execution order and worker
count.
"""

from __future__ import annotations

import hashlib
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classify import (
    train_adaboost,
    train_forest,
    train_mlp,
    train_naive_bayes,
    train_ripper,
    train_tree,
)
from .dataset import Dataset, stratified_fold_indices
from .errors import EvaluationError
from .featsel import SelectionResult, select_attributes

ALGORITHMS = ("naive_bayes", "tree", "forest", "adaboost", "ripper", "mlp")
SELECTORS = ("none", "cfs", "info_gain")
DATASETS = ("features", "indicators")

_TRAINERS = {
    "naive_bayes": lambda ds, seed: train_naive_bayes(ds),
    "tree": lambda ds, seed: train_tree(ds),
    "forest": lambda ds, seed: train_forest(ds, seed=seed),
    "adaboost": lambda ds, seed: train_adaboost(ds),
    "ripper": lambda ds, seed: train_ripper(ds, seed=seed),
    "mlp": lambda ds, seed: train_mlp(ds, seed=seed),
}


@dataclass(frozen=True)
class Metrics:
    """Pooled confusion matrix and the scores derived from it.

    Rows of the confusion matrix are actual classes, columns predicted.
    A class that is never predicted has precision zero; weighted
    averages weight each class by its actual support.
    """

    class_values: tuple[str, ...]
    confusion: tuple[tuple[int, ...], ...]
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[int, ...]
    accuracy: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float


def precision_recall(confusion, class_values=None) -> Metrics:
    """Per-class and support-weighted precision/recall/F1 from a confusion matrix."""
    cm = np.asarray(confusion, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise EvaluationError("confusion matrix must be square")
    c = cm.shape[0]
    if class_values is None:
        class_values = tuple(f"class{k}" for k in range(c))
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    diag = np.diag(cm)
    precision = np.where(predicted > 0, diag / np.maximum(predicted, 1), 0.0)
    recall = np.where(support > 0, diag / np.maximum(support, 1), 0.0)
    denom = precision + recall
    f1 = np.where(denom > 0, 2.0 * precision * recall / np.where(denom > 0, denom, 1.0), 0.0)
    total = int(support.sum())
    if total == 0:
        raise EvaluationError("confusion matrix is empty")
    weights = support / total
    return Metrics(
        class_values=tuple(class_values),
        confusion=tuple(tuple(int(v) for v in row) for row in cm),
        precision=tuple(float(v) for v in precision),
        recall=tuple(float(v) for v in recall),
        f1=tuple(float(v) for v in f1),
        support=tuple(int(v) for v in support),
        accuracy=float(diag.sum() / total),
        weighted_precision=float((weights * precision).sum()),
        weighted_recall=float((weights * recall).sum()),
        weighted_f1=float((weights * f1).sum()),
    )


def cross_validate(trainer, ds: Dataset, n_folds: int = 5, seed: int = 0) -> Metrics:
    """k-fold cross-validation with a pooled confusion matrix.

    ``trainer`` is any callable mapping a training dataset to a model.
    """
    if len(ds) < n_folds:
        raise EvaluationError(f"{len(ds)} instances cannot fill {n_folds} folds")
    c = len(ds.class_values)
    cm = np.zeros((c, c), dtype=np.int64)
    folds = stratified_fold_indices(ds.y, n_folds, seed)
    all_idx = np.arange(len(ds))
    for fold in folds:
        mask = np.ones(len(ds), dtype=bool)
        mask[fold] = False
        model = trainer(ds.take(all_idx[mask]))
        pred = model.predict_codes(ds.X[fold])
        np.add.at(cm, (ds.y[fold], pred), 1)
    return precision_recall(cm, ds.class_values)


def evaluate_model(model, ds: Dataset) -> Metrics:
    """Metrics of a trained model on a labeled dataset."""
    model.check_compatible(ds)
    c = len(ds.class_values)
    cm = np.zeros((c, c), dtype=np.int64)
    np.add.at(cm, (ds.y, model.predict_codes(ds.X)), 1)
    return precision_recall(cm, ds.class_values)


def cell_seed(master: int, algorithm: str, dataset: str, selector: str) -> int:
    """Stable per-cell seed: hash of the master seed and the cell key."""
    key = f"{master}|{algorithm}|{dataset}|{selector}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


@dataclass(frozen=True)
class GridCell:
    algorithm: str
    dataset: str
    selector: str
    n_attributes: int
    metrics: Metrics


@dataclass(frozen=True)
class GridResult:
    cells: tuple[GridCell, ...]
    selections: dict
    n_folds: int
    seed: int

    def cell(self, algorithm: str, dataset: str, selector: str) -> GridCell:
        for c in self.cells:
            if (c.algorithm, c.dataset, c.selector) == (algorithm, dataset, selector):
                return c
        raise EvaluationError(f"no cell {(algorithm, dataset, selector)!r}")

    @staticmethod
    def _rank(c: GridCell):
        # Ties on weighted precision go to the leaner model: achieving the
        # same figure with fewer input attributes is the stronger result,
        # which is the point of running the selector treatments at all.
        return (-c.metrics.weighted_precision, c.n_attributes,
                -c.metrics.weighted_recall)

    def best(self) -> GridCell:
        return min(self.cells, key=self._rank)

    def best_per_algorithm(self) -> dict:
        out: dict[str, GridCell] = {}
        for c in self.cells:
            cur = out.get(c.algorithm)
            if cur is None or self._rank(c) < self._rank(cur):
                out[c.algorithm] = c
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("algorithm,dataset,selector,n_attributes,accuracy,"
                  "weighted_precision,weighted_recall,weighted_f1\n")
        for c in self.cells:
            m = c.metrics
            buf.write(
                f"{c.algorithm},{c.dataset},{c.selector},{c.n_attributes},"
                f"{m.accuracy:.6f},{m.weighted_precision:.6f},"
                f"{m.weighted_recall:.6f},{m.weighted_f1:.6f}\n"
            )
        return buf.getvalue()

    def format_table(self) -> str:
        """Weighted-precision table, one row per dataset/selector pair.

        The best cell of each algorithm column is marked ``*`` and the
        single best cell overall ``**``.
        """
        algorithms = []
        for c in self.cells:
            if c.algorithm not in algorithms:
                algorithms.append(c.algorithm)
        pairs = []
        for c in self.cells:
            if (c.dataset, c.selector) not in pairs:
                pairs.append((c.dataset, c.selector))
        best = self.best()
        per_algo = self.best_per_algorithm()
        width = max(len(a) for a in algorithms) + 3
        head = f"{'dataset':<12}{'selector':<11}" + "".join(f"{a:>{width}}" for a in algorithms)
        lines = [f"weighted precision ({self.n_folds}-fold cross-validation, seed {self.seed})",
                 head, "-" * len(head)]
        for dataset, selector in pairs:
            row = f"{dataset:<12}{selector:<11}"
            for a in algorithms:
                c = self.cell(a, dataset, selector)
                mark = ""
                if c is best:
                    mark = "**"
                elif per_algo[a] is c:
                    mark = "*"
                row += f"{c.metrics.weighted_precision:.4f}{mark:<2}".rjust(width)
            lines.append(row)
        b = best.metrics
        lines.append("")
        lines.append(
            f"best: {best.algorithm} on {best.dataset}/{best.selector} "
            f"(weighted precision {b.weighted_precision:.4f}, accuracy {b.accuracy:.4f})"
        )
        return "\n".join(lines) + "\n"


def run_experiment_grid(datasets: dict, seed: int = 0, n_folds: int = 5,
                        jobs: int = 1, algorithms=ALGORITHMS,
                        selectors=SELECTORS) -> GridResult:
    """Cross every algorithm with every dataset and selection treatment.

    ``datasets`` maps names to :class:`Dataset` objects (typically the
    ``features`` and ``indicators`` shapes of one population).
    """
    for name in datasets:
        if not isinstance(datasets[name], Dataset):
            raise EvaluationError(f"dataset {name!r} is not a Dataset")
    selections: dict = {}
    reduced: dict = {}
    for ds_name, ds in datasets.items():
        for selector in selectors:
            sel_seed = cell_seed(seed, "selection", ds_name, selector)
            sub, result = select_attributes(ds, selector, seed=sel_seed)
            reduced[(ds_name, selector)] = sub
            if result is not None:
                selections[(ds_name, selector)] = result

    specs = [
        (algorithm, ds_name, selector)
        for algorithm in algorithms
        for ds_name in datasets
        for selector in selectors
    ]

    def run(spec):
        algorithm, ds_name, selector = spec
        sub = reduced[(ds_name, selector)]
        s = cell_seed(seed, algorithm, ds_name, selector)
        fold_seed = cell_seed(seed, "folds", ds_name, "")
        trainer = _TRAINERS[algorithm]
        metrics = cross_validate(lambda d: trainer(d, s), sub, n_folds, fold_seed)
        return GridCell(algorithm, ds_name, selector, sub.n_attributes, metrics)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(run, specs))
    else:
        cells = [run(s) for s in specs]
    return GridResult(tuple(cells), selections, n_folds, seed)
