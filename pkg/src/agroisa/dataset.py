"""Learning datasets built from scored questionnaires.

Two dataset shapes are produced:

* the wide questionnaire-level dataset (87 numeric attributes frozen in
  ``data/feature_manifest.json``), and
* the indicator-level dataset (the 21 indicator scores).

Both carry a nominal class attribute (the SI category of the record) as
the last column.  Datasets are backed by a dense numpy matrix; nominal
attributes are stored as value-indices into their declared domain.

Also here: CSV import/export (header row, class last) and supervised
entropy-based discretization with the MDL stopping rule, which the
feature-selection routines use to treat numeric attributes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import DatasetError, RegistryError
from .indicators import CATEGORIES, TRI_SCORES, ScoredRecord
from .qschema import load_field_registry


@dataclass(frozen=True)
class AttributeSpec:
    """One dataset attribute: numeric, or nominal with a fixed value order."""

    name: str
    kind: str  # "numeric" | "nominal"
    values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("numeric", "nominal"):
            raise DatasetError(f"unknown attribute kind {self.kind!r}")
        if self.kind == "nominal" and not self.values:
            raise DatasetError(f"nominal attribute {self.name!r} needs a value domain")


@dataclass(frozen=True)
class Instance:
    """A single row: attribute values plus the class label."""

    values: tuple
    class_label: str


class Dataset:
    """Immutable-by-convention table of instances.

    ``X`` holds floats; nominal cells store the index of the token in the
    attribute's declared domain.  ``y`` holds indices into
    ``class_values``.
    """

    def __init__(self, attributes, X, y, class_values):
        self.attributes = tuple(attributes)
        self.X = np.asarray(X, dtype=np.float64).reshape(len(y), len(self.attributes))
        self.y = np.asarray(y, dtype=np.int64)
        self.class_values = tuple(class_values)
        if self.y.size and (self.y.min() < 0 or self.y.max() >= len(self.class_values)):
            raise DatasetError("class index out of range")

    def __len__(self) -> int:
        return int(self.y.shape[0])

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def column(self, j: int) -> np.ndarray:
        return self.X[:, j]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=len(self.class_values))

    @property
    def instances(self) -> list[Instance]:
        out = []
        for i in range(len(self)):
            row = []
            for j, attr in enumerate(self.attributes):
                v = self.X[i, j]
                row.append(attr.values[int(v)] if attr.kind == "nominal" else float(v))
            out.append(Instance(values=tuple(row), class_label=self.class_values[self.y[i]]))
        return out

    @classmethod
    def from_instances(cls, attributes, instances, class_values=None) -> "Dataset":
        attributes = tuple(attributes)
        if class_values is None:
            seen: dict[str, None] = {}
            for inst in instances:
                seen.setdefault(inst.class_label, None)
            class_values = tuple(seen)
        class_index = {c: i for i, c in enumerate(class_values)}
        X = np.empty((len(instances), len(attributes)), dtype=np.float64)
        y = np.empty(len(instances), dtype=np.int64)
        for i, inst in enumerate(instances):
            if len(inst.values) != len(attributes):
                raise DatasetError(f"instance {i} has {len(inst.values)} values, expected {len(attributes)}")
            if inst.class_label not in class_index:
                raise DatasetError(f"instance {i} has unknown class {inst.class_label!r}")
            y[i] = class_index[inst.class_label]
            for j, attr in enumerate(attributes):
                v = inst.values[j]
                if attr.kind == "nominal":
                    try:
                        X[i, j] = attr.values.index(v)
                    except ValueError:
                        raise DatasetError(
                            f"instance {i}: {v!r} not in domain of {attr.name}"
                        ) from None
                else:
                    X[i, j] = float(v)
        return cls(attributes, X, y, class_values)

    def take(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.attributes, self.X[indices], self.y[indices], self.class_values)

    def select_attributes(self, names) -> "Dataset":
        index = {a.name: j for j, a in enumerate(self.attributes)}
        missing = [n for n in names if n not in index]
        if missing:
            raise DatasetError(f"unknown attribute(s): {', '.join(missing)}")
        cols = [index[n] for n in names]
        return Dataset([self.attributes[j] for j in cols], self.X[:, cols], self.y, self.class_values)

    def labels(self) -> list[str]:
        return [self.class_values[i] for i in self.y]


def encode_tri_level(token: str) -> float:
    """Numeric encoding of a tri-level token: 0, 0.5 or 1."""
    try:
        return TRI_SCORES[token]
    except KeyError:
        raise DatasetError(f"unknown tri-level token {token!r}") from None


@lru_cache(maxsize=1)
def load_feature_manifest():
    """The frozen 87-attribute manifest, cross-checked against the catalogue."""
    with resources.files("agroisa.data").joinpath("feature_manifest.json").open(
        "r", encoding="utf-8"
    ) as fh:
        raw = json.load(fh)
    from .indicators import load_scoring_table

    registry = load_field_registry()
    comp_ids = set(load_scoring_table().component_ids())
    features = []
    seen = set()
    for entry in raw["features"]:
        name, source = entry["name"], entry["source"]
        if name in seen:
            raise RegistryError(f"duplicate manifest feature {name}")
        seen.add(name)
        if source == "component":
            if name not in comp_ids:
                raise RegistryError(f"manifest component {name} not in scoring table")
        elif source == "field":
            if name not in registry or registry[name].kind != "numeric":
                raise RegistryError(f"manifest field {name} is not a registered numeric field")
        else:
            raise RegistryError(f"manifest feature {name}: unknown source {source!r}")
        features.append((name, source))
    if len(features) != 87:
        raise RegistryError(f"feature manifest must list 87 features, found {len(features)}")
    return raw["version"], tuple(features)


def features_attributes() -> tuple[AttributeSpec, ...]:
    _, features = load_feature_manifest()
    return tuple(AttributeSpec(name=n, kind="numeric") for n, _ in features)


def indicators_attributes() -> tuple[AttributeSpec, ...]:
    return tuple(AttributeSpec(name=f"I{i}", kind="numeric") for i in range(1, 22))


def _present_categories(records) -> tuple[str, ...]:
    present = {r.score.category for r in records}
    return tuple(c for c in CATEGORIES if c in present)


def build_features_ds(records: list[ScoredRecord]) -> Dataset:
    """Build the 87-attribute questionnaire-level dataset.

    Raises DatasetError naming the field code and property when a record
    lacks one of the manifest's raw field features.
    """
    _, features = load_feature_manifest()
    attributes = features_attributes()
    class_values = _present_categories(records) or CATEGORIES
    class_index = {c: i for i, c in enumerate(class_values)}
    X = np.empty((len(records), 87), dtype=np.float64)
    y = np.empty(len(records), dtype=np.int64)
    for i, rec in enumerate(records):
        q = rec.questionnaire
        for j, (name, source) in enumerate(features):
            if source == "component":
                X[i, j] = rec.components[name]
            else:
                if name not in q.values:
                    raise DatasetError(
                        f"property {q.header.property_code!r}: missing feature field {name}"
                    )
                X[i, j] = q.values[name]
        y[i] = class_index[rec.score.category]
    return Dataset(attributes, X, y, class_values)


def build_indicators_ds(records: list[ScoredRecord]) -> Dataset:
    """Build the 21-attribute indicator-level dataset."""
    attributes = indicators_attributes()
    class_values = _present_categories(records) or CATEGORIES
    class_index = {c: i for i, c in enumerate(class_values)}
    X = np.empty((len(records), 21), dtype=np.float64)
    y = np.empty(len(records), dtype=np.int64)
    for i, rec in enumerate(records):
        X[i, :] = rec.indicators.values
        y[i] = class_index[rec.score.category]
    return Dataset(attributes, X, y, class_values)


# ---------------------------------------------------------------------------
# CSV import/export
# ---------------------------------------------------------------------------

def _format_cell(attr: AttributeSpec, v: float) -> str:
    if attr.kind == "nominal":
        return attr.values[int(v)]
    f = float(v)
    return str(int(f)) if f.is_integer() and abs(f) < 1e15 else repr(f)


def export_csv(ds: Dataset, path=None) -> str:
    """Write a dataset as CSV: one header row, class as the last column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(ds.attribute_names) + ["class"])
    for i in range(len(ds)):
        row = [_format_cell(a, ds.X[i, j]) for j, a in enumerate(ds.attributes)]
        row.append(ds.class_values[ds.y[i]])
        writer.writerow(row)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def import_csv(source) -> Dataset:
    """Read a dataset written by :func:`export_csv`.

    ``source`` is a path or a CSV string.  A column is numeric when every
    cell parses as a float; otherwise it is nominal with values in order
    of first appearance.  The last column is always the nominal class.
    """
    if isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DatasetError("empty CSV document")
    header = rows[0]
    if len(header) < 2 or header[-1] != "class":
        raise DatasetError("CSV header must end with a 'class' column")
    names = header[:-1]
    data = rows[1:]
    for r, row in enumerate(data):
        if len(row) != len(header):
            raise DatasetError(f"row {r + 1} has {len(row)} cells, expected {len(header)}")

    attributes = []
    columns = []
    for j, name in enumerate(names):
        cells = [row[j] for row in data]
        try:
            numeric = [float(c) for c in cells]
        except ValueError:
            domain: dict[str, int] = {}
            for c in cells:
                domain.setdefault(c, len(domain))
            attributes.append(AttributeSpec(name=name, kind="nominal", values=tuple(domain)))
            columns.append([float(domain[c]) for c in cells])
        else:
            attributes.append(AttributeSpec(name=name, kind="numeric"))
            columns.append(numeric)

    labels = [row[-1] for row in data]
    class_domain: dict[str, int] = {}
    for c in labels:
        class_domain.setdefault(c, len(class_domain))
    X = np.array(columns, dtype=np.float64).T if columns else np.empty((0, 0))
    X = X.reshape(len(data), len(names))
    y = np.array([class_domain[c] for c in labels], dtype=np.int64)
    return Dataset(attributes, X, y, tuple(class_domain))


# ---------------------------------------------------------------------------
# Supervised discretization (entropy cuts with the MDL stopping rule)
# ---------------------------------------------------------------------------

def _entropy_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def _mdl_split(values: np.ndarray, onehot: np.ndarray, lo: int, hi: int, cuts: list):
    """Recursively find accepted entropy cuts in the sorted range [lo, hi)."""
    n = hi - lo
    if n < 2:
        return
    seg_vals = values[lo:hi]
    # candidate boundaries: positions where the sorted value changes
    change = np.nonzero(seg_vals[1:] > seg_vals[:-1])[0] + 1  # local indices in (0, n)
    if change.size == 0:
        return
    cum = np.cumsum(onehot[lo:hi], axis=0)
    total = cum[-1]
    h_total = _entropy_counts(total)
    k_total = int(np.count_nonzero(total))

    left = cum[change - 1]
    right = total - left
    n_left = change.astype(np.float64)
    n_right = float(n) - n_left

    def _h(counts, sizes):
        p = counts / sizes[:, None]
        logp = np.zeros_like(p)
        np.log2(p, out=logp, where=p > 0)
        return -(p * logp).sum(axis=1)

    h_left = _h(left, n_left)
    h_right = _h(right, n_right)
    weighted = (n_left * h_left + n_right * h_right) / n
    best_pos = int(np.argmin(weighted))  # first minimum wins
    gain = h_total - weighted[best_pos]

    k_left = int(np.count_nonzero(left[best_pos]))
    k_right = int(np.count_nonzero(right[best_pos]))
    delta = math.log2(3.0**k_total - 2.0) - (
        k_total * h_total - k_left * h_left[best_pos] - k_right * h_right[best_pos]
    )
    threshold = (math.log2(n - 1.0) + delta) / n
    if gain <= threshold:
        return
    split = lo + int(change[best_pos])
    cuts.append((values[split - 1] + values[split]) / 2.0)
    _mdl_split(values, onehot, lo, split, cuts)
    _mdl_split(values, onehot, split, hi, cuts)


def discretize_mdl(values, labels, n_classes: int | None = None) -> list[float]:
    """Entropy-based cut points for one numeric attribute.

    Recursive binary splitting on the class-entropy-minimizing boundary,
    accepted only while the information gain passes the MDL criterion.
    Returns the cut midpoints in ascending order (possibly empty).
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if values.shape[0] != labels.shape[0]:
        raise DatasetError("values and labels length mismatch")
    if values.size == 0:
        return []
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 1
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sl = labels[order]
    onehot = np.zeros((sv.shape[0], n_classes), dtype=np.float64)
    onehot[np.arange(sv.shape[0]), sl] = 1.0
    cuts: list[float] = []
    _mdl_split(sv, onehot, 0, sv.shape[0], cuts)
    cuts.sort()
    return cuts


def apply_cuts(values, cuts) -> np.ndarray:
    """Bin numeric values by the given ascending cut points (0..len(cuts))."""
    return np.searchsorted(np.asarray(cuts, dtype=np.float64), np.asarray(values, dtype=np.float64), side="left").astype(np.int64)


def stratified_fold_indices(labels, n_folds: int, seed: int = 0) -> list[np.ndarray]:
    """Index arrays for stratified k-fold splitting.

    Instances of each class are shuffled with a seeded generator and the
    class blocks dealt round-robin with a shared counter, so fold sizes
    differ by at most one overall and per class.
    """
    y = np.asarray(labels, dtype=np.int64)
    n = y.size
    if n_folds < 1:
        raise DatasetError("need at least 1 fold")
    if n_folds > n:
        raise DatasetError(f"cannot split {n} instances into {n_folds} folds")
    if n_folds == 1:
        return [np.arange(n, dtype=np.int64)]
    counts = np.bincount(y)
    thin = np.nonzero((counts > 0) & (counts < n_folds))[0]
    if thin.size:
        raise DatasetError(
            f"class {thin[0]} has {counts[thin[0]]} instance(s), fewer than {n_folds} folds"
        )
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF01D5)))
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    pos = 0
    for cls in np.unique(y):
        members = np.nonzero(y == cls)[0]
        rng.shuffle(members)
        for idx in members:
            folds[pos % n_folds].append(int(idx))
            pos += 1
    return [np.array(sorted(f), dtype=np.int64) for f in folds]
